#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "thg/errors.hpp"
#include "thg/phase_space.hpp"

namespace thg {

/// Packed upper-triangle index for the quadrature second-moment table,
/// a <= b, nq quadratures.
inline int tri_index(int a, int b, int nq) {
    if (a > b) std::swap(a, b);
    return a * nq - a * (a - 1) / 2 + (b - a);
}

/// Raw moment sums over one sub-ensemble (bin). Quadrature products are
/// accumulated as Re(q_a q_b) of the complex c-number quadratures; the real
/// part of the ensemble average is the positive-P estimator of the normally
/// ordered operator moment.
struct MomentSums {
    MomentSums() = default;
    explicit MomentSums(int n_modes)
        : sum_q(2 * n_modes, 0.0),
          sum_qq(static_cast<std::size_t>(n_modes) * (2 * n_modes + 1), 0.0),
          sum_n(n_modes, 0.0) {
        if (n_modes < 1 || n_modes > 3)
            throw Error("MomentSums supports 1 to 3 modes");
    }

    std::uint64_t count = 0;
    std::vector<double> sum_q;   // Re q_a, flat quadrature order X0,Y0,X1,...
    std::vector<double> sum_qq;  // Re(q_a q_b), packed upper triangle
    std::vector<double> sum_n;   // Re(alpha_i alpha_plus_i)

    int n_modes() const { return static_cast<int>(sum_n.size()); }

    /// Ingest one trajectory sample given the flat variable layout
    /// (alpha_0, alpha_plus_0, alpha_1, ...).
    void add_state(const Complex* vars) {
        const int n = n_modes();
        const int nq = 2 * n;
        double qr[6], qi[6];  // up to 3 modes
        for (int i = 0; i < n; ++i) {
            const Complex a = vars[2 * i];
            const Complex ap = vars[2 * i + 1];
            const Complex x = a + ap;
            const Complex y = Complex{0.0, -1.0} * (a - ap);
            qr[2 * i] = x.real();
            qi[2 * i] = x.imag();
            qr[2 * i + 1] = y.real();
            qi[2 * i + 1] = y.imag();
            sum_n[i] += (a * ap).real();
        }
        int k = 0;
        for (int a = 0; a < nq; ++a) {
            sum_q[a] += qr[a];
            for (int b = a; b < nq; ++b, ++k)
                sum_qq[k] += qr[a] * qr[b] - qi[a] * qi[b];
        }
        ++count;
    }

    /// Plain field-wise addition. A zero-count operand is an exact identity.
    void accumulate(const MomentSums& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        if (other.sum_n.size() != sum_n.size())
            throw GridMismatchError("accumulators have different mode counts");
        for (std::size_t i = 0; i < sum_q.size(); ++i) sum_q[i] += other.sum_q[i];
        for (std::size_t i = 0; i < sum_qq.size(); ++i) sum_qq[i] += other.sum_qq[i];
        for (std::size_t i = 0; i < sum_n.size(); ++i) sum_n[i] += other.sum_n[i];
        count += other.count;
    }
};

/// Read-only statistics over a set of moment sums. Owns a small copy so views
/// remain valid independently of the accumulator they came from.
class MomentView {
public:
    MomentView(int n_modes, MomentSums sums) : n_(n_modes), s_(std::move(sums)) {}

    int n_modes() const { return n_; }
    std::uint64_t count() const { return s_.count; }

    double mean_quadrature(int mode, Quad q) const {
        require_samples(1);
        return s_.sum_q[quad_index(mode, q)] / static_cast<double>(s_.count);
    }

    double mean_intensity(int mode) const {
        require_samples(1);
        return s_.sum_n[mode] / static_cast<double>(s_.count);
    }

    double raw_second(int qa, int qb) const {
        require_samples(1);
        return s_.sum_qq[tri_index(qa, qb, 2 * n_)] / static_cast<double>(s_.count);
    }

    /// Phase-space (c-number) variance of the quadrature at angle theta,
    /// assembled from the stored X/Y moments via
    /// q(theta) = X cos(theta) + Y sin(theta).
    double psp_variance(int mode, double theta) const {
        require_samples(2);
        const double c = std::cos(theta), s = std::sin(theta);
        const double vx = central_second(quad_index(mode, Quad::X), quad_index(mode, Quad::X));
        const double vy = central_second(quad_index(mode, Quad::Y), quad_index(mode, Quad::Y));
        const double cxy = central_second(quad_index(mode, Quad::X), quad_index(mode, Quad::Y));
        return c * c * vx + s * s * vy + 2.0 * c * s * cxy;
    }

    /// Operator-ordered quadrature variance: the +1 vacuum (commutator)
    /// contribution on top of the normally ordered phase-space variance, so a
    /// coherent ensemble reads exactly 1.
    double operator_variance(int mode, double theta) const {
        return 1.0 + psp_variance(mode, theta);
    }

    /// Operator covariance between two distinct quadratures (no vacuum term:
    /// distinct modes commute, and same-mode X-Y is already the symmetrized
    /// operator covariance).
    double operator_covariance(int qa, int qb) const {
        if (qa == qb)
            throw Error("operator_covariance: identical quadrature requested; use operator_variance");
        require_samples(2);
        return central_second(qa, qb);
    }

private:
    void require_samples(std::uint64_t n) const {
        if (s_.count < n)
            throw InsufficientSamplesError("statistic needs " + std::to_string(n) +
                                           " samples, accumulator holds " +
                                           std::to_string(s_.count));
    }
    double central_second(int qa, int qb) const {
        const auto n = static_cast<double>(s_.count);
        const double m2 = s_.sum_qq[tri_index(qa, qb, 2 * n_)] / n;
        return m2 - (s_.sum_q[qa] / n) * (s_.sum_q[qb] / n);
    }

    int n_;
    MomentSums s_;
};

/// Mergeable moment accumulator for one time-grid point. Samples are kept in
/// sub-ensemble bins (default 100) so that Monte Carlo standard errors of any
/// derived statistic can be estimated from the bin spread. Merging is exact
/// field-wise addition per bin; the deterministic reduction order is fixed by
/// the caller (see reduce_pairwise).
class QuadratureMoments {
public:
    static constexpr int kDefaultBins = 100;

    explicit QuadratureMoments(int n_modes, int n_bins = kDefaultBins)
        : n_modes_(n_modes), bins_(n_bins, MomentSums(n_modes)) {}

    int n_modes() const { return n_modes_; }
    int n_bins() const { return static_cast<int>(bins_.size()); }

    std::uint64_t sample_count() const {
        std::uint64_t c = 0;
        for (const auto& b : bins_) c += b.count;
        return c;
    }

    void add_sample(const Complex* vars, int bin) { bins_.at(bin).add_state(vars); }

    const MomentSums& bin(int b) const { return bins_.at(b); }
    void assign_bin(int b, MomentSums s) { bins_.at(b) = std::move(s); }
    void accumulate_bin(int b, const MomentSums& s) { bins_.at(b).accumulate(s); }

    /// Bin sums folded in fixed bin order.
    MomentSums total_sums() const {
        MomentSums t(n_modes_);
        for (const auto& b : bins_) t.accumulate(b);
        return t;
    }

    MomentView total() const { return MomentView(n_modes_, total_sums()); }
    MomentView bin_view(int b) const { return MomentView(n_modes_, bins_.at(b)); }

    void merge_in(const QuadratureMoments& other) {
        if (other.n_modes_ != n_modes_ || other.bins_.size() != bins_.size())
            throw GridMismatchError("merge of accumulators with different layouts");
        for (std::size_t b = 0; b < bins_.size(); ++b) bins_[b].accumulate(other.bins_[b]);
    }

    static QuadratureMoments merged(const QuadratureMoments& a, const QuadratureMoments& b) {
        QuadratureMoments out = a;
        out.merge_in(b);
        return out;
    }

private:
    int n_modes_;
    std::vector<MomentSums> bins_;
};

/// Deterministic pairwise reduction by recursive halving over the index range.
/// This is the reduction tree the ensemble engine uses over chunk partials, so
/// results are bit-identical for any worker count.
template <class T, class MergeFn>
T reduce_pairwise(const std::vector<T>& items, std::size_t first, std::size_t last,
                  MergeFn&& merge2) {
    if (last - first == 1) return items[first];
    const std::size_t mid = first + (last - first + 1) / 2;
    T left = reduce_pairwise(items, first, mid, merge2);
    T right = reduce_pairwise(items, mid, last, merge2);
    return merge2(std::move(left), std::move(right));
}

inline QuadratureMoments reduce_pairwise(const std::vector<QuadratureMoments>& chunks) {
    if (chunks.empty()) throw Error("reduce_pairwise: empty input");
    return reduce_pairwise(chunks, 0, chunks.size(),
                           [](QuadratureMoments a, const QuadratureMoments& b) {
                               a.merge_in(b);
                               return a;
                           });
}

/// Evaluates `stat` on the full accumulator and estimates its Monte Carlo
/// standard error from the spread of the per-bin values. Positive-P moment
/// estimates can be transiently unphysical at finite sample counts, so a
/// statistic that is undefined on the full ensemble reports {NaN, NaN} and
/// undefined bins are skipped; stderr is NaN when fewer than two usable bins
/// exist.
template <class F>
std::pair<double, double> binned_estimate(const QuadratureMoments& m, F&& stat) {
    double value;
    try {
        value = stat(m.total());
    } catch (const Error&) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan};
    }
    std::vector<double> vals;
    std::vector<double> weights;
    double wsum = 0.0;
    for (int b = 0; b < m.n_bins(); ++b) {
        const auto& s = m.bin(b);
        if (s.count < 2) continue;
        double v;
        try {
            v = stat(m.bin_view(b));
        } catch (const Error&) {
            continue;
        }
        vals.push_back(v);
        weights.push_back(static_cast<double>(s.count));
        wsum += weights.back();
    }
    if (vals.size() < 2) return {value, std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) mean += weights[i] * vals[i];
    mean /= wsum;
    double var_of_mean = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double w = weights[i] / wsum;
        var_of_mean += w * w * (vals[i] - mean) * (vals[i] - mean);
    }
    const double nb = static_cast<double>(vals.size());
    return {value, std::sqrt(var_of_mean * nb / (nb - 1.0))};
}

}  // namespace thg
