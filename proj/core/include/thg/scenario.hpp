#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "thg/models.hpp"
#include "thg/sde.hpp"

namespace thg {

enum class ScenarioType {
    travelling_direct,
    travelling_cascade,
    selfpulse_direct,
    spectra_direct,
    spectra_cascade
};

std::string to_string(ScenarioType t);

/// Fully resolved run description. Produced only by the config loader, which
/// fills every default, so a serialized config is always sufficient to re-run.
struct ScenarioConfig {
    ScenarioType type = ScenarioType::travelling_direct;
    std::string out = ".";
    int workers = 0;  // 0 = all hardware threads

    DirectParams direct;      // valid for *-direct scenarios
    CascadeParams cascade;    // valid for *-cascade scenarios
    double alpha0 = 100.0;    // travelling-wave initial fundamental amplitude
    Complex selfpulse_alpha{1.0, 1.0};

    IntegrationConfig integration;  // travelling and selfpulse scenarios

    double pump_min = 10.0;  // spectra scenarios
    double pump_max = 130.0;
    int pump_count = 25;
    double omega_max = 20.0;
    int omega_count = 2001;

    bool uses_ensemble() const {
        return type == ScenarioType::travelling_direct ||
               type == ScenarioType::travelling_cascade ||
               type == ScenarioType::selfpulse_direct;
    }
};

/// Parses, validates and normalizes a config file. Throws ConfigError with
/// line/field diagnostics on parse errors, unknown or duplicate keys, missing
/// required keys and physically invalid values.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config_text(const std::string& text);

/// Canonical INI echo of a resolved config (fixed section and key order,
/// full precision); also embedded in run manifests.
std::string to_ini(const ScenarioConfig& cfg);

enum class RunStatus { ok = 0, unreliable = 3 };

struct RunResult {
    RunStatus status = RunStatus::ok;
    std::filesystem::path data_file;
    std::filesystem::path manifest_file;
    std::uint64_t trajectories_rejected = 0;
};

/// Executes the scenario and writes the data table plus a run manifest into
/// cfg.out. Data files are byte-identical for a fixed config and seed,
/// independent of the worker count; the manifest carries the only
/// run-dependent fields (timestamp, worker count).
RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace thg
