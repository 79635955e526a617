#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>

namespace thg {

// Philox4x32-10 keyed counter permutation. Counter-based so that any
// trajectory's noise sequence can be regenerated in isolation from
// (seed, stream, block) without touching any other stream.
namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

// Marsaglia-Tsang ziggurat tables for the standard normal, 128 layers.
struct ZigguratTables {
    std::array<std::uint32_t, 128> kn;
    std::array<double, 128> wn;
    std::array<double, 128> fn;
    static constexpr double kTail = 3.442619855899;
};

inline const ZigguratTables& ziggurat_tables() {
    static const ZigguratTables t = [] {
        ZigguratTables z{};
        const double m1 = 2147483648.0;  // 2^31
        double dn = ZigguratTables::kTail;
        double tn = dn;
        const double vn = 9.91256303526217e-3;
        const double q = vn / std::exp(-0.5 * dn * dn);
        z.kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
        z.kn[1] = 0;
        z.wn[0] = q / m1;
        z.wn[127] = dn / m1;
        z.fn[0] = 1.0;
        z.fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            z.kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
            tn = dn;
            z.fn[i] = std::exp(-0.5 * dn * dn);
            z.wn[i] = dn / m1;
        }
        return z;
    }();
    return t;
}

}  // namespace detail

/// Stream of standard normal variates derived statelessly from
/// (seed, stream_id). Distinct stream ids give statistically independent
/// sequences; identical ids reproduce the identical sequence. Sampling is the
/// ziggurat rejection method, exact for the normal law.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream_id)),
          stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    double next() {
        const auto& z = detail::ziggurat_tables();
        for (;;) {
            const auto hz = static_cast<std::int32_t>(next_u32());
            const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
            const std::uint32_t az =
                hz < 0 ? ~static_cast<std::uint32_t>(hz) + 1u : static_cast<std::uint32_t>(hz);
            if (az < z.kn[iz]) return hz * z.wn[iz];
            if (iz == 0) {
                // Tail beyond the base strip: exact exponential rejection.
                const double inv_r = 1.0 / detail::ZigguratTables::kTail;
                double x, y;
                do {
                    x = -std::log(next_unit()) * inv_r;
                    y = -std::log(next_unit());
                } while (y + y < x * x);
                const double v = detail::ZigguratTables::kTail + x;
                return hz > 0 ? v : -v;
            }
            const double x = hz * z.wn[iz];
            if (z.fn[iz] + next_unit() * (z.fn[iz - 1] - z.fn[iz]) <
                std::exp(-0.5 * x * x))
                return x;
        }
    }

    /// Fills `out` with independent N(0, scale^2) values; pass scale = sqrt(dt)
    /// to draw Wiener increments over a step of length dt.
    void fill(std::span<double> out, double scale) {
        for (auto& v : out) v = scale * next();
    }

private:
    std::uint32_t next_u32() {
        if (buf_pos_ == 4) {
            buf_ = detail::philox4x32(
                {static_cast<std::uint32_t>(block_index_),
                 static_cast<std::uint32_t>(block_index_ >> 32), stream_lo_, stream_hi_},
                key_);
            ++block_index_;
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    double next_unit() {  // uniform in (0,1)
        return (static_cast<double>(next_u32()) + 0.5) * 0x1.0p-32;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t block_index_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
};

}  // namespace thg
