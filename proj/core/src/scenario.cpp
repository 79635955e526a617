#include "thg/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "thg/criteria.hpp"
#include "thg/errors.hpp"
#include "thg/linearized.hpp"
#include "thg/version.hpp"

namespace thg {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line = -1;
    bool used = false;
};

/// Flat key-value config with [section] headers, '#' comments, no nesting.
/// The [run] section is reserved for manifests and ignored on input, so a
/// manifest can be fed back in as a config.
class ConfigReader {
public:
    explicit ConfigReader(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("unterminated section header", lineno);
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ConfigError("empty section name", lineno);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected 'key = value'", lineno);
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("empty key", lineno);
            if (value.empty()) throw ConfigError("empty value", lineno, key);
            if (section.empty())
                throw ConfigError("key outside of any [section]", lineno, key);
            if (section == "run") continue;  // manifest metadata
            auto [it, inserted] = sections_[section].emplace(key, Entry{value, lineno});
            if (!inserted)
                throw ConfigError("duplicate key", lineno, section + "." + key);
        }
    }

    std::optional<std::string> raw(const std::string& sec, const std::string& key) {
        auto s = sections_.find(sec);
        if (s == sections_.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        k->second.used = true;
        last_line_ = k->second.line;
        return k->second.value;
    }

    std::string require_str(const std::string& sec, const std::string& key) {
        auto v = raw(sec, key);
        if (!v) throw ConfigError("missing required key", -1, sec + "." + key);
        return *v;
    }

    double require_double(const std::string& sec, const std::string& key) {
        return parse_double(require_str(sec, key), sec + "." + key);
    }

    double get_double(const std::string& sec, const std::string& key, double def) {
        auto v = raw(sec, key);
        return v ? parse_double(*v, sec + "." + key) : def;
    }

    std::int64_t get_int(const std::string& sec, const std::string& key, std::int64_t def) {
        auto v = raw(sec, key);
        if (!v) return def;
        errno = 0;
        char* end = nullptr;
        const long long x = std::strtoll(v->c_str(), &end, 10);
        if (errno != 0 || end == v->c_str() || *end != '\0')
            throw ConfigError("not an integer: '" + *v + "'", last_line_, sec + "." + key);
        return x;
    }

    std::string get_str(const std::string& sec, const std::string& key, std::string def) {
        auto v = raw(sec, key);
        return v ? *v : def;
    }

    /// Every key must have been consumed by the scenario schema.
    void finish(const std::string& scenario) const {
        for (const auto& [sec, keys] : sections_)
            for (const auto& [key, e] : keys)
                if (!e.used)
                    throw ConfigError("unknown key for scenario '" + scenario + "'",
                                      e.line, sec + "." + key);
    }

    int last_line() const { return last_line_; }

private:
    double parse_double(const std::string& v, const std::string& field) {
        errno = 0;
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (errno != 0 || end == v.c_str() || *end != '\0')
            throw ConfigError("not a number: '" + v + "'", last_line_, field);
        return x;
    }

    std::map<std::string, std::map<std::string, Entry>> sections_;
    int last_line_ = -1;
};

double positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError("must be > 0", -1, field);
    return v;
}

Scheme parse_scheme(const std::string& s) {
    if (s == "euler-maruyama") return Scheme::euler_maruyama;
    if (s == "semi-implicit") return Scheme::semi_implicit_midpoint;
    throw ConfigError("scheme must be euler-maruyama or semi-implicit", -1,
                      "integration.scheme");
}

std::string scheme_name(Scheme s) {
    return s == Scheme::euler_maruyama ? "euler-maruyama" : "semi-implicit";
}

/// Largest stride <= target that divides n_steps, aiming for ~200 output rows.
int auto_stride(std::uint64_t n_steps) {
    const auto target = std::max<std::uint64_t>(1, n_steps / 200);
    for (std::uint64_t s = target; s > 1; --s)
        if (n_steps % s == 0) return static_cast<int>(s);
    return 1;
}

void read_integration(ConfigReader& r, ScenarioConfig& cfg, double default_dt,
                      double default_t_max) {
    auto& ic = cfg.integration;
    ic.dt = positive(r.get_double("integration", "dt", default_dt), "integration.dt");
    ic.t_max =
        positive(r.get_double("integration", "t_max", default_t_max), "integration.t_max");
    const auto stride = r.get_int("integration", "sample_stride", 0);
    if (stride < 0) throw ConfigError("must be >= 1", -1, "integration.sample_stride");
    const auto n_traj = r.get_int("integration", "n_traj", 100000);
    if (n_traj < 1) throw ConfigError("must be >= 1", -1, "integration.n_traj");
    ic.n_traj = static_cast<std::uint64_t>(n_traj);
    ic.seed = static_cast<std::uint64_t>(r.get_int("integration", "seed", 1));
    ic.divergence_radius = r.get_double("integration", "divergence_radius", 0.0);
    ic.chunk_size =
        static_cast<std::uint64_t>(r.get_int("integration", "chunk_size", 0));
    const auto bins = r.get_int("integration", "bins", QuadratureMoments::kDefaultBins);
    if (bins < 1) throw ConfigError("must be >= 1", -1, "integration.bins");
    ic.n_bins = static_cast<int>(bins);
    ic.scheme = parse_scheme(r.get_str("integration", "scheme", "euler-maruyama"));
    ic.sample_stride = stride == 0 ? auto_stride(ic.n_steps()) : static_cast<int>(stride);
    ic.validate();
}

ScenarioType parse_type(const std::string& s) {
    if (s == "travelling-direct") return ScenarioType::travelling_direct;
    if (s == "travelling-cascade") return ScenarioType::travelling_cascade;
    if (s == "selfpulse-direct") return ScenarioType::selfpulse_direct;
    if (s == "spectra-direct") return ScenarioType::spectra_direct;
    if (s == "spectra-cascade") return ScenarioType::spectra_cascade;
    throw ConfigError(
        "unknown scenario type '" + s +
            "' (expected travelling-direct, travelling-cascade, selfpulse-direct, "
            "spectra-direct or spectra-cascade)",
        -1, "scenario.type");
}

void read_sweep(ConfigReader& r, ScenarioConfig& cfg, double default_pump_max) {
    cfg.pump_min = r.get_double("sweep", "pump_min", 10.0);
    cfg.pump_max = r.get_double("sweep", "pump_max", default_pump_max);
    if (cfg.pump_min < 0.0) throw ConfigError("must be >= 0", -1, "sweep.pump_min");
    if (cfg.pump_max < cfg.pump_min)
        throw ConfigError("must be >= pump_min", -1, "sweep.pump_max");
    const auto n = r.get_int("sweep", "pump_count", 25);
    if (n < 1) throw ConfigError("must be >= 1", -1, "sweep.pump_count");
    cfg.pump_count = static_cast<int>(n);
    cfg.omega_max = positive(r.get_double("spectrum", "omega_max", 20.0), "spectrum.omega_max");
    const auto m = r.get_int("spectrum", "omega_count", 2001);
    if (m < 3) throw ConfigError("must be >= 3", -1, "spectrum.omega_count");
    cfg.omega_count = static_cast<int>(m);
}

}  // namespace

std::string to_string(ScenarioType t) {
    switch (t) {
        case ScenarioType::travelling_direct: return "travelling-direct";
        case ScenarioType::travelling_cascade: return "travelling-cascade";
        case ScenarioType::selfpulse_direct: return "selfpulse-direct";
        case ScenarioType::spectra_direct: return "spectra-direct";
        case ScenarioType::spectra_cascade: return "spectra-cascade";
    }
    return "?";
}

ScenarioConfig parse_config_text(const std::string& text) {
    ConfigReader r(text);
    ScenarioConfig cfg;
    cfg.type = parse_type(r.require_str("scenario", "type"));
    cfg.out = r.get_str("scenario", "out", ".");
    const auto workers = r.get_int("scenario", "workers", 0);
    if (workers < 0) throw ConfigError("must be >= 0 (0 = all cores)", -1, "scenario.workers");
    cfg.workers = static_cast<int>(workers);

    switch (cfg.type) {
        case ScenarioType::travelling_direct: {
            const double kappa = positive(r.require_double("model", "kappa"), "model.kappa");
            cfg.alpha0 = positive(r.get_double("model", "alpha0", 100.0), "model.alpha0");
            cfg.direct = DirectParams::travelling(kappa);
            const double xi_rate = kappa * cfg.alpha0;
            read_integration(r, cfg, 1e-3 / xi_rate, 0.2 / xi_rate);
            if (cfg.integration.divergence_radius == 0.0)
                cfg.integration.divergence_radius = 1e3 * std::max(1.0, cfg.alpha0);
            break;
        }
        case ScenarioType::travelling_cascade: {
            const double k1 = positive(r.require_double("model", "kappa1"), "model.kappa1");
            const double k2 = positive(r.require_double("model", "kappa2"), "model.kappa2");
            cfg.alpha0 = positive(r.get_double("model", "alpha0", 100.0), "model.alpha0");
            cfg.cascade = CascadeParams::travelling(k1, k2);
            const double xi_rate = k1 * cfg.alpha0;
            read_integration(r, cfg, 1e-3 / xi_rate, 6.0 / xi_rate);
            if (cfg.integration.divergence_radius == 0.0)
                cfg.integration.divergence_radius = 1e3 * std::max(1.0, cfg.alpha0);
            break;
        }
        case ScenarioType::selfpulse_direct: {
            const double kappa = positive(r.require_double("model", "kappa"), "model.kappa");
            const double ga = positive(r.require_double("model", "gamma_a"), "model.gamma_a");
            const double gb = positive(r.require_double("model", "gamma_b"), "model.gamma_b");
            const double eps = r.require_double("model", "epsilon");
            if (eps < 0.0) throw ConfigError("must be >= 0", -1, "model.epsilon");
            cfg.direct = DirectParams::intracavity(kappa, ga, gb, Complex{eps, 0.0});
            cfg.selfpulse_alpha = Complex{r.get_double("model", "alpha_re", 1.0),
                                          r.get_double("model", "alpha_im", 1.0)};
            read_integration(r, cfg, 1e-3, 50.0);
            if (cfg.integration.divergence_radius == 0.0)
                cfg.integration.divergence_radius =
                    1e3 * std::max({1.0, std::abs(cfg.selfpulse_alpha), eps / ga});
            break;
        }
        case ScenarioType::spectra_direct: {
            const double kappa = positive(r.require_double("model", "kappa"), "model.kappa");
            const double ga = positive(r.require_double("model", "gamma_a"), "model.gamma_a");
            const double gb = positive(r.require_double("model", "gamma_b"), "model.gamma_b");
            cfg.direct = DirectParams::intracavity(kappa, ga, gb, Complex{0.0, 0.0});
            read_sweep(r, cfg, 130.0);
            break;
        }
        case ScenarioType::spectra_cascade: {
            const double k1 = positive(r.require_double("model", "kappa1"), "model.kappa1");
            const double k2 = positive(r.require_double("model", "kappa2"), "model.kappa2");
            const double g0 = positive(r.require_double("model", "gamma0"), "model.gamma0");
            const double g1 = positive(r.require_double("model", "gamma1"), "model.gamma1");
            const double g2 = positive(r.require_double("model", "gamma2"), "model.gamma2");
            cfg.cascade =
                CascadeParams::intracavity(k1, k2, g0, g1, g2, Complex{0.0, 0.0});
            read_sweep(r, cfg, 200.0);
            break;
        }
    }

    r.finish(to_string(cfg.type));
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string to_ini(const ScenarioConfig& cfg) {
    std::ostringstream o;
    o << "[scenario]\n";
    o << "type = " << to_string(cfg.type) << "\n";
    o << "out = " << cfg.out << "\n";
    o << "workers = " << cfg.workers << "\n";
    o << "\n[model]\n";
    switch (cfg.type) {
        case ScenarioType::travelling_direct:
            o << "kappa = " << fmt(cfg.direct.kappa) << "\n";
            o << "alpha0 = " << fmt(cfg.alpha0) << "\n";
            break;
        case ScenarioType::travelling_cascade:
            o << "kappa1 = " << fmt(cfg.cascade.kappa1) << "\n";
            o << "kappa2 = " << fmt(cfg.cascade.kappa2) << "\n";
            o << "alpha0 = " << fmt(cfg.alpha0) << "\n";
            break;
        case ScenarioType::selfpulse_direct:
            o << "kappa = " << fmt(cfg.direct.kappa) << "\n";
            o << "gamma_a = " << fmt(cfg.direct.gamma_a) << "\n";
            o << "gamma_b = " << fmt(cfg.direct.gamma_b) << "\n";
            o << "epsilon = " << fmt(cfg.direct.epsilon.real()) << "\n";
            o << "alpha_re = " << fmt(cfg.selfpulse_alpha.real()) << "\n";
            o << "alpha_im = " << fmt(cfg.selfpulse_alpha.imag()) << "\n";
            break;
        case ScenarioType::spectra_direct:
            o << "kappa = " << fmt(cfg.direct.kappa) << "\n";
            o << "gamma_a = " << fmt(cfg.direct.gamma_a) << "\n";
            o << "gamma_b = " << fmt(cfg.direct.gamma_b) << "\n";
            break;
        case ScenarioType::spectra_cascade:
            o << "kappa1 = " << fmt(cfg.cascade.kappa1) << "\n";
            o << "kappa2 = " << fmt(cfg.cascade.kappa2) << "\n";
            o << "gamma0 = " << fmt(cfg.cascade.gamma0) << "\n";
            o << "gamma1 = " << fmt(cfg.cascade.gamma1) << "\n";
            o << "gamma2 = " << fmt(cfg.cascade.gamma2) << "\n";
            break;
    }
    if (cfg.uses_ensemble()) {
        const auto& ic = cfg.integration;
        o << "\n[integration]\n";
        o << "dt = " << fmt(ic.dt) << "\n";
        o << "t_max = " << fmt(ic.t_max) << "\n";
        o << "sample_stride = " << ic.sample_stride << "\n";
        o << "n_traj = " << ic.n_traj << "\n";
        o << "seed = " << ic.seed << "\n";
        o << "divergence_radius = " << fmt(ic.divergence_radius) << "\n";
        o << "chunk_size = " << ic.chunk_size << "\n";
        o << "bins = " << ic.n_bins << "\n";
        o << "scheme = " << scheme_name(ic.scheme) << "\n";
    } else {
        o << "\n[sweep]\n";
        o << "pump_min = " << fmt(cfg.pump_min) << "\n";
        o << "pump_max = " << fmt(cfg.pump_max) << "\n";
        o << "pump_count = " << cfg.pump_count << "\n";
        o << "\n[spectrum]\n";
        o << "omega_max = " << fmt(cfg.omega_max) << "\n";
        o << "omega_count = " << cfg.omega_count << "\n";
    }
    return o.str();
}

namespace {

struct Table {
    std::vector<std::string> comments;  // without leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header.size())
            throw Error("internal: row width does not match header");
        rows.push_back(std::move(cells));
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        for (const auto& c : comments) out << "# " << c << "\n";
        for (std::size_t i = 0; i < header.size(); ++i)
            out << header[i] << (i + 1 < header.size() ? "," : "");
        out << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                out << r[i] << (i + 1 < r.size() ? "," : "");
            out << "\n";
        }
    }
};

std::string iso_timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::filesystem::path& path, const ScenarioConfig& cfg,
                    int workers_used, RunStatus status, const MomentTimeSeries* series,
                    const std::string& data_file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "[run]\n";
    out << "version = " << kVersion << "\n";
    out << "timestamp = " << iso_timestamp_utc() << "\n";
    out << "workers_used = " << workers_used << "\n";
    out << "status = " << (status == RunStatus::ok ? "ok" : "unreliable") << "\n";
    out << "data_file = " << data_file << "\n";
    if (series) {
        out << "trajectories_requested = " << series->n_requested << "\n";
        out << "trajectories_rejected = " << series->n_rejected << "\n";
        out << "first_divergence_time = " << fmt(series->first_divergence_time) << "\n";
    }
    out << "\n" << to_ini(cfg);
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Per-time statistics helper: per-mode intensities/variances, charge, pair
/// criteria and (3-mode) vLF values, all with binned errors.
struct TimeStats {
    const QuadratureMoments& m;

    std::pair<double, double> stat(const std::function<double(const MomentView&)>& f) const {
        return binned_estimate(m, f);
    }
    std::pair<double, double> intensity(int i) const {
        return stat([i](const MomentView& v) { return v.mean_intensity(i); });
    }
    std::pair<double, double> charge(ModelKind kind) const {
        return stat([kind](const MomentView& v) {
            double c = v.mean_intensity(0);
            if (kind == ModelKind::direct) return c + 3.0 * v.mean_intensity(1);
            return c + 2.0 * v.mean_intensity(1) + 3.0 * v.mean_intensity(2);
        });
    }
    std::pair<double, double> variance(int i, double theta) const {
        return stat([=](const MomentView& v) { return v.operator_variance(i, theta); });
    }
};

void append_pair_columns(std::vector<std::string>& header, int i, int j) {
    const std::string p = std::to_string(i) + std::to_string(j);
    const std::string q = std::to_string(j) + std::to_string(i);
    header.insert(header.end(),
                  {"ds_plus_" + p, "ds_plus_" + p + "_err", "ds_minus_" + p,
                   "ds_minus_" + p + "_err", "epr_" + p, "epr_" + p + "_err",
                   "epr_" + q, "epr_" + q + "_err", "steering_" + p});
}

void append_pair_cells(std::vector<std::string>& cells, const BipartiteReport& r) {
    cells.insert(cells.end(),
                 {fmt(r.ds_plus), fmt(r.ds_plus_err), fmt(r.ds_minus), fmt(r.ds_minus_err),
                  fmt(r.epr_ij), fmt(r.epr_ij_err), fmt(r.epr_ji), fmt(r.epr_ji_err),
                  to_string(r.steering, r.i, r.j)});
}

RunResult run_travelling(const ScenarioConfig& cfg) {
    const bool is_direct = cfg.type == ScenarioType::travelling_direct;
    const int workers = resolve_workers(cfg.workers);
    MomentTimeSeries series;
    double xi_rate = 0.0;
    if (is_direct) {
        DirectModel model(cfg.direct);
        const auto init = coherent_initial_direct(Complex{cfg.alpha0, 0.0});
        series = run_ensemble(model, std::span<const Complex>(init), cfg.integration, workers);
        xi_rate = cfg.direct.kappa * cfg.alpha0;
    } else {
        CascadeModel model(cfg.cascade);
        const auto init = coherent_initial_cascade(Complex{cfg.alpha0, 0.0});
        series = run_ensemble(model, std::span<const Complex>(init), cfg.integration, workers);
        xi_rate = cfg.cascade.kappa1 * cfg.alpha0;
    }

    const int n_modes = is_direct ? 2 : 3;
    const ModelKind kind = is_direct ? ModelKind::direct : ModelKind::cascade;
    const std::vector<std::array<int, 2>> pairs =
        is_direct ? std::vector<std::array<int, 2>>{{0, 1}}
                  : std::vector<std::array<int, 2>>{{0, 1}, {1, 2}, {0, 2}};

    Table t;
    t.comments = {to_string(cfg.type) + " output; xi = kappa * |alpha(0)| * t",
                  "DS columns are raw; divide by 4 to compare against the EPR scale"};
    t.header = {"xi"};
    const auto mode_name = [&](int i) {
        if (is_direct) return std::string(i == 0 ? "a" : "b");
        return std::to_string(i);
    };
    for (int i = 0; i < n_modes; ++i) {
        t.header.push_back("n_" + mode_name(i));
        t.header.push_back("n_" + mode_name(i) + "_err");
    }
    t.header.insert(t.header.end(), {"charge", "charge_err"});
    for (int i = 0; i < n_modes; ++i) {
        t.header.push_back("vx_" + mode_name(i));
        t.header.push_back("vx_" + mode_name(i) + "_err");
        t.header.push_back("vy_" + mode_name(i));
        t.header.push_back("vy_" + mode_name(i) + "_err");
    }
    if (is_direct) {
        t.header.insert(t.header.end(),
                        {"ds_plus", "ds_plus_err", "ds_minus", "ds_minus_err", "epr_ab",
                         "epr_ab_err", "epr_ba", "epr_ba_err", "steering_ab"});
    } else {
        for (const auto& [i, j] : pairs) append_pair_columns(t.header, i, j);
        t.header.insert(t.header.end(), {"vlf_01_2", "vlf_01_2_err", "vlf_12_0",
                                         "vlf_12_0_err", "vlf_02_1", "vlf_02_1_err"});
    }

    constexpr double kHalfPi = 1.5707963267948966;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const TimeStats ts{series.moments[k]};
        std::vector<std::string> cells{fmt(series.times[k] * xi_rate)};
        for (int i = 0; i < n_modes; ++i) {
            const auto [n, ne] = ts.intensity(i);
            cells.insert(cells.end(), {fmt(n), fmt(ne)});
        }
        const auto [c, ce] = ts.charge(kind);
        cells.insert(cells.end(), {fmt(c), fmt(ce)});
        for (int i = 0; i < n_modes; ++i) {
            const auto [vx, vxe] = ts.variance(i, 0.0);
            const auto [vy, vye] = ts.variance(i, kHalfPi);
            cells.insert(cells.end(), {fmt(vx), fmt(vxe), fmt(vy), fmt(vye)});
        }
        for (const auto& [i, j] : pairs)
            append_pair_cells(cells, bipartite_report(series.moments[k], i, j));
        if (!is_direct) {
            const auto v = vlf_tripartite(series.moments[k]);
            for (int cidx = 0; cidx < 3; ++cidx)
                cells.insert(cells.end(),
                             {fmt(v.value[cidx]), fmt(v.err[cidx])});
        }
        t.add_row(std::move(cells));
    }

    RunResult res;
    res.status = series.reliable() ? RunStatus::ok : RunStatus::unreliable;
    res.trajectories_rejected = series.n_rejected;
    const auto dir = std::filesystem::path(cfg.out);
    std::filesystem::create_directories(dir);
    res.data_file = dir / (to_string(cfg.type) + ".csv");
    res.manifest_file = dir / "manifest.ini";
    t.write(res.data_file);
    write_manifest(res.manifest_file, cfg, workers, res.status, &series,
                   res.data_file.filename().string());
    return res;
}

RunResult run_selfpulse(const ScenarioConfig& cfg) {
    const int workers = resolve_workers(cfg.workers);
    const auto& ic = cfg.integration;

    ClassicalDirect classical(cfg.direct);
    const std::array<Complex, 2> c0{cfg.selfpulse_alpha, Complex{0.0, 0.0}};
    const auto classic = classical_trajectory(classical, std::span<const Complex>(c0),
                                              ic.dt, ic.n_steps(), ic.sample_stride);

    DirectModel model(cfg.direct);
    const auto init = coherent_initial_direct(cfg.selfpulse_alpha);
    const auto series =
        run_ensemble(model, std::span<const Complex>(init), ic, workers);

    Table t;
    t.comments = {"selfpulse-direct output; classical (noise-free) vs "
                  "truncated positive-P ensemble mean"};
    t.header = {"t", "n_a_classical", "n_b_classical", "n_a", "n_a_err", "n_b", "n_b_err"};
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const TimeStats ts{series.moments[k]};
        const auto [na, nae] = ts.intensity(0);
        const auto [nb, nbe] = ts.intensity(1);
        t.add_row({fmt(series.times[k]), fmt(std::norm(classic.amplitudes[k][0])),
                   fmt(std::norm(classic.amplitudes[k][1])), fmt(na), fmt(nae), fmt(nb),
                   fmt(nbe)});
    }

    RunResult res;
    res.status = series.reliable() ? RunStatus::ok : RunStatus::unreliable;
    res.trajectories_rejected = series.n_rejected;
    const auto dir = std::filesystem::path(cfg.out);
    std::filesystem::create_directories(dir);
    res.data_file = dir / (to_string(cfg.type) + ".csv");
    res.manifest_file = dir / "manifest.ini";
    t.write(res.data_file);
    write_manifest(res.manifest_file, cfg, workers, res.status, &series,
                   res.data_file.filename().string());
    return res;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

RunResult run_spectra(const ScenarioConfig& cfg) {
    const bool is_direct = cfg.type == ScenarioType::spectra_direct;
    const auto pumps = linspace(cfg.pump_min, cfg.pump_max, cfg.pump_count);
    const auto omega = linspace(-cfg.omega_max, cfg.omega_max, cfg.omega_count);

    std::vector<SweepPoint> sweep;
    if (is_direct)
        sweep = pump_sweep(cfg.direct, pumps, omega);
    else
        sweep = pump_sweep(cfg.cascade, pumps, omega);

    Table t;
    t.comments = {to_string(cfg.type) +
                      " output: minima of output spectral criteria over frequency",
                  "DS columns are raw; divide by 4 to compare against the EPR scale",
                  "unstable pumps carry stable = 0 and nan minima"};
    t.header = {"epsilon", "stable"};
    const std::vector<std::array<int, 2>> pairs =
        is_direct ? std::vector<std::array<int, 2>>{{0, 1}}
                  : std::vector<std::array<int, 2>>{{0, 1}, {1, 2}, {0, 2}};
    for (const auto& [i, j] : pairs) {
        const std::string p = std::to_string(i) + std::to_string(j);
        const std::string q = std::to_string(j) + std::to_string(i);
        t.header.insert(t.header.end(),
                        {"ds_plus_" + p + "_min", "ds_plus_" + p + "_omega",
                         "ds_minus_" + p + "_min", "ds_minus_" + p + "_omega",
                         "epr_" + p + "_min", "epr_" + p + "_omega", "epr_" + q + "_min",
                         "epr_" + q + "_omega", "steering_" + p});
    }
    if (!is_direct)
        t.header.insert(t.header.end(), {"vlf_01_2_min", "vlf_01_2_omega", "vlf_12_0_min",
                                         "vlf_12_0_omega", "vlf_02_1_min", "vlf_02_1_omega"});

    const std::string nan = fmt(std::numeric_limits<double>::quiet_NaN());
    for (const auto& pt : sweep) {
        std::vector<std::string> cells{fmt(pt.epsilon), pt.stable ? "1" : "0"};
        if (pt.stable) {
            for (const auto& pm : pt.pairs)
                cells.insert(cells.end(),
                             {fmt(pm.ds_plus), fmt(pm.ds_plus_omega), fmt(pm.ds_minus),
                              fmt(pm.ds_minus_omega), fmt(pm.epr_ij), fmt(pm.epr_ij_omega),
                              fmt(pm.epr_ji), fmt(pm.epr_ji_omega),
                              to_string(pm.steering, pm.i, pm.j)});
            if (!is_direct)
                for (int c = 0; c < 3; ++c)
                    cells.insert(cells.end(), {fmt(pt.vlf_min[c]), fmt(pt.vlf_omega[c])});
        } else {
            while (cells.size() < t.header.size()) cells.push_back(nan);
        }
        t.add_row(std::move(cells));
    }

    RunResult res;
    res.status = RunStatus::ok;
    const auto dir = std::filesystem::path(cfg.out);
    std::filesystem::create_directories(dir);
    res.data_file = dir / (to_string(cfg.type) + ".csv");
    res.manifest_file = dir / "manifest.ini";
    t.write(res.data_file);
    write_manifest(res.manifest_file, cfg, 1, res.status, nullptr,
                   res.data_file.filename().string());
    return res;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    switch (cfg.type) {
        case ScenarioType::travelling_direct:
        case ScenarioType::travelling_cascade: return run_travelling(cfg);
        case ScenarioType::selfpulse_direct: return run_selfpulse(cfg);
        case ScenarioType::spectra_direct:
        case ScenarioType::spectra_cascade: return run_spectra(cfg);
    }
    throw Error("unreachable scenario type");
}

}  // namespace thg
