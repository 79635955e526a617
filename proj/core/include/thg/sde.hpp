#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "thg/errors.hpp"
#include "thg/moments.hpp"
#include "thg/phase_space.hpp"
#include "thg/rng.hpp"

namespace thg {

enum class Scheme {
    euler_maruyama,         // Ito-consistent explicit step
    semi_implicit_midpoint  // iterated midpoint drift, noise at the pre-step state
};

struct IntegrationConfig {
    double dt = 1e-3;
    double t_max = 1.0;
    int sample_stride = 1;
    std::uint64_t n_traj = 1;
    std::uint64_t seed = 0;
    double divergence_radius = 0.0;  // 0: 1e3 * max(1, max |initial amplitude|)
    Scheme scheme = Scheme::euler_maruyama;
    int n_bins = QuadratureMoments::kDefaultBins;
    std::uint64_t chunk_size = 0;  // 0: automatic, a function of n_traj only

    std::uint64_t n_steps() const {
        return static_cast<std::uint64_t>(std::llround(t_max / dt));
    }

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("must be > 0", -1, "dt");
        if (!(t_max > 0.0) || !std::isfinite(t_max))
            throw ConfigError("must be > 0", -1, "t_max");
        const auto steps = n_steps();
        if (steps < 1 || std::abs(static_cast<double>(steps) * dt - t_max) >
                             1e-9 * std::max(1.0, t_max))
            throw ConfigError("t_max must be a whole number of dt steps", -1, "t_max");
        if (sample_stride < 1) throw ConfigError("must be >= 1", -1, "sample_stride");
        if (steps % static_cast<std::uint64_t>(sample_stride) != 0)
            throw ConfigError("dt * sample_stride must divide the output grid uniformly",
                              -1, "sample_stride");
        if (n_traj < 1) throw ConfigError("must be >= 1", -1, "n_traj");
        if (divergence_radius < 0.0 || !std::isfinite(divergence_radius))
            throw ConfigError("must be finite and >= 0", -1, "divergence_radius");
        if (n_bins < 1) throw ConfigError("must be >= 1", -1, "bins");
    }
};

/// Ensemble moments on the output time grid, plus the divergence record.
/// Rejected trajectories contribute to no grid point; their count is always
/// reported so surviving-trajectory statistics are never silently biased.
struct MomentTimeSeries {
    std::vector<double> times;
    std::vector<QuadratureMoments> moments;
    std::uint64_t n_requested = 0;
    std::uint64_t n_rejected = 0;
    double first_divergence_time = std::numeric_limits<double>::infinity();

    bool reliable() const { return n_rejected * 100 <= n_requested; }
};

namespace detail {

template <class Model>
inline bool state_ok(const std::array<Complex, Model::n_vars>& s, double radius2) {
    for (const auto& z : s) {
        const double m2 = z.real() * z.real() + z.imag() * z.imag();
        if (!(m2 <= radius2)) return false;  // catches NaN as well
    }
    return true;
}

/// One Ito step in place; B is evaluated at the pre-step state for both
/// schemes so the Ito interpretation is preserved.
template <class Model>
inline void step_in_place(const Model& m, std::array<Complex, Model::n_vars>& s,
                          double dt, const double* dw, Scheme scheme) {
    std::array<Complex, Model::n_vars> f;
    std::array<Complex, Model::n_vars> pre = s;
    if (scheme == Scheme::euler_maruyama) {
        m.drift(s.data(), f.data());
        for (int i = 0; i < Model::n_vars; ++i) s[i] += f[i] * dt;
    } else {
        std::array<Complex, Model::n_vars> mid = s;
        for (int it = 0; it < 3; ++it) {
            m.drift(mid.data(), f.data());
            for (int i = 0; i < Model::n_vars; ++i) mid[i] = s[i] + 0.5 * dt * f[i];
        }
        m.drift(mid.data(), f.data());
        for (int i = 0; i < Model::n_vars; ++i) s[i] += f[i] * dt;
    }
    m.add_noise(pre.data(), dw, s.data());
}

inline std::uint64_t auto_chunk_size(std::uint64_t n_traj) {
    const auto target = (n_traj + 255) / 256;  // aim for ~256 chunks
    return std::clamp<std::uint64_t>(target, 1, 1024);
}

inline MomentSums combine_chunk_sums(std::span<const MomentSums* const> items) {
    if (items.size() == 1) return *items[0];
    const std::size_t mid = (items.size() + 1) / 2;
    MomentSums left = combine_chunk_sums(items.first(mid));
    MomentSums right = combine_chunk_sums(items.subspan(mid));
    left.accumulate(right);
    return left;
}

}  // namespace detail

/// Single public integration step (Ito): state' = state + drift dt + B dW,
/// advancing time by dt. `increments` are the Wiener increments over dt
/// (variance dt per channel).
template <class Model>
SystemState step(const Model& m, const SystemState& in, double dt,
                 std::span<const double> increments,
                 Scheme scheme = Scheme::euler_maruyama) {
    if (static_cast<int>(increments.size()) != Model::n_channels)
        throw Error("step: expected " + std::to_string(Model::n_channels) +
                    " noise increments");
    if (static_cast<int>(in.modes.size()) != Model::n_modes)
        throw Error("step: state has wrong mode count");
    std::array<Complex, Model::n_vars> s;
    for (int i = 0; i < Model::n_modes; ++i) {
        s[2 * i] = in.modes[i].alpha;
        s[2 * i + 1] = in.modes[i].alpha_plus;
    }
    detail::step_in_place(m, s, dt, increments.data(), scheme);
    SystemState out;
    out.time = in.time + dt;
    out.modes.resize(Model::n_modes);
    for (int i = 0; i < Model::n_modes; ++i) out.modes[i] = {s[2 * i], s[2 * i + 1]};
    return out;
}

/// Integrates n_traj independent trajectories from the common deterministic
/// initial state and accumulates quadrature/intensity moments at each recorded
/// grid time.
///
/// Determinism contract: trajectory t draws its noise from the counter-based
/// stream (seed, t); trajectories are grouped into fixed chunks by index, each
/// chunk is accumulated serially in index order, and chunk partials are merged
/// by a fixed pairwise tree per bin. The result is a pure function of
/// (model, initial, config) and bit-identical for any worker count.
template <class Model>
MomentTimeSeries run_ensemble(const Model& model, std::span<const Complex> initial,
                              const IntegrationConfig& cfg, int workers = 1) {
    cfg.validate();
    if (static_cast<int>(initial.size()) != Model::n_vars)
        throw Error("run_ensemble: initial state has wrong variable count");

    const std::uint64_t n_steps = cfg.n_steps();
    const std::uint64_t stride = static_cast<std::uint64_t>(cfg.sample_stride);
    const std::uint64_t n_rec = n_steps / stride + 1;  // includes t = 0
    const double sqrt_dt = std::sqrt(cfg.dt);

    double radius = cfg.divergence_radius;
    if (radius == 0.0) {
        double amax = 1.0;
        for (const auto& z : initial) amax = std::max(amax, std::abs(z));
        radius = 1e3 * amax;
    }
    const double radius2 = radius * radius;

    const std::uint64_t chunk =
        cfg.chunk_size > 0 ? cfg.chunk_size : detail::auto_chunk_size(cfg.n_traj);
    const std::uint64_t n_chunks = (cfg.n_traj + chunk - 1) / chunk;

    // Chunk partials: per chunk, one MomentSums per recorded time.
    std::vector<std::vector<MomentSums>> partials(n_chunks);

    std::atomic<std::uint64_t> next_chunk{0};
    std::atomic<std::uint64_t> rejected{0};
    std::mutex div_mutex;
    double first_div = std::numeric_limits<double>::infinity();

    auto work = [&]() {
        std::array<Complex, Model::n_vars> s;
        std::vector<Complex> staging(n_rec * Model::n_vars);
        std::array<double, Model::n_channels> dw;
        for (;;) {
            const std::uint64_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks) break;
            auto& part = partials[c];
            part.assign(n_rec, MomentSums(Model::n_modes));
            const std::uint64_t t0 = c * chunk;
            const std::uint64_t t1 = std::min(cfg.n_traj, t0 + chunk);
            for (std::uint64_t t = t0; t < t1; ++t) {
                GaussianStream stream(cfg.seed, t);
                std::copy(initial.begin(), initial.end(), s.begin());
                std::copy(s.begin(), s.end(), staging.begin());
                bool survived = true;
                std::uint64_t rec = 1;
                for (std::uint64_t k = 1; k <= n_steps; ++k) {
                    stream.fill(std::span<double>(dw.data(), Model::n_channels), sqrt_dt);
                    detail::step_in_place(model, s, cfg.dt, dw.data(), cfg.scheme);
                    if (!detail::state_ok<Model>(s, radius2)) {
                        survived = false;
                        rejected.fetch_add(1);
                        const double tdiv = static_cast<double>(k) * cfg.dt;
                        std::lock_guard<std::mutex> lock(div_mutex);
                        first_div = std::min(first_div, tdiv);
                        break;
                    }
                    if (k % stride == 0)
                        std::copy(s.begin(), s.end(),
                                  staging.begin() + (rec++) * Model::n_vars);
                }
                if (survived)
                    for (std::uint64_t r = 0; r < n_rec; ++r)
                        part[r].add_state(staging.data() + r * Model::n_vars);
            }
        }
    };

    workers = std::max(1, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    MomentTimeSeries out;
    out.n_requested = cfg.n_traj;
    out.n_rejected = rejected.load();
    out.first_divergence_time = first_div;
    out.times.resize(n_rec);
    for (std::uint64_t r = 0; r < n_rec; ++r)
        out.times[r] = static_cast<double>(r * stride) * cfg.dt;

    // Fixed-tree reduction: chunks are assigned to contiguous bins and merged
    // per bin by recursive halving over the chunk index range.
    out.moments.assign(n_rec, QuadratureMoments(Model::n_modes, cfg.n_bins));
    const auto bin_of_chunk = [&](std::uint64_t c) {
        return static_cast<int>(c * static_cast<std::uint64_t>(cfg.n_bins) / n_chunks);
    };
    std::vector<const MomentSums*> ptrs;
    for (std::uint64_t r = 0; r < n_rec; ++r) {
        std::uint64_t c = 0;
        while (c < n_chunks) {
            const int b = bin_of_chunk(c);
            ptrs.clear();
            for (; c < n_chunks && bin_of_chunk(c) == b; ++c)
                ptrs.push_back(&partials[c][r]);
            out.moments[r].assign_bin(
                b, detail::combine_chunk_sums(
                       std::span<const MomentSums* const>(ptrs.data(), ptrs.size())));
        }
    }
    return out;
}

}  // namespace thg
