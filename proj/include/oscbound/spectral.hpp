#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oscbound/chain.hpp"
#include "oscbound/linalg.hpp"
#include "oscbound/polynomial.hpp"

namespace oscbound {

/// Singular-value snapshot of one chain level at one point.
struct SpectralSummary {
    std::vector<double> singular_values;  // nonincreasing
    double g_product = 0.0;               // product of the r smallest
    double frobenius = 0.0;
};

inline SpectralSummary spectral_summary(const Mat& m, int r) {
    SpectralSummary s;
    s.singular_values = singular_values(m);
    const int k = std::min(m.rows, m.cols);
    double p = 1.0;
    for (int i = k - r; i < k; ++i) p *= s.singular_values[i];
    s.g_product = p;
    s.frobenius = frobenius_norm(m);
    return s;
}

/// Grid-plus-refinement search plan for the domain extrema.
struct SamplingPlan {
    int grid_per_axis = 0;   // 0 -> pick from dimension (64 for n<=2, 16 for n=3)
    int refine_rounds = 3;   // each round shrinks the search cell by 4x
    int refine_per_axis = 9;

    [[nodiscard]] int resolved_grid(int n) const {
        if (grid_per_axis > 0) return grid_per_axis;
        return n <= 2 ? 64 : 16;
    }
};

/// Per-level choice of how many smallest singular values enter G_j.
using LevelRPolicy = std::function<int(int level)>;

/// Oscillatory pipeline: G_0 is the lone singular value of the gradient row
/// and the deeper levels take the full product of n singular values.
inline LevelRPolicy theorem4_policy(int n) {
    return [n](int level) { return level == 0 ? 1 : n; };
}

/// Surface-measure pipeline: the seed row count r applies at every level.
inline LevelRPolicy constant_policy(int r) {
    return [r](int) { return r; };
}

/// Sampled domain extrema of the chain: per-level minima of the singular
/// value products, the overall Frobenius maximum L, and witnesses. These are
/// grid estimates refined locally, not certified optima; heuristic stays true.
struct ChainExtrema {
    std::vector<double> g_min;                    // G_0 .. G_k
    std::vector<std::vector<double>> argmin;      // per level
    std::vector<double> l_max_per_level;
    double l_max = 0.0;                           // L = max over levels and points
    std::vector<double> l_argmax;
    double h_tilde = 0.0;                         // max ||grad|| (level-0 Frobenius max)
    double h_one = 0.0;                           // min ||grad|| (level-0 product min)
    int sample_resolution = 0;
    bool heuristic = true;
};

namespace detail {

class CompiledMatrix {
public:
    explicit CompiledMatrix(const PolyMatrix& m) : rows_(m.rows()), cols_(m.cols()) {
        entries_.reserve(m.entries().size());
        for (const auto& p : m.entries()) entries_.emplace_back(p);
    }

    void evaluate(const std::vector<double>& x, Mat& out) const {
        out.rows = rows_;
        out.cols = cols_;
        out.a.resize(entries_.size());
        for (std::size_t i = 0; i < entries_.size(); ++i) out.a[i] = entries_[i](x.data());
    }

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }

private:
    int rows_, cols_;
    std::vector<CompiledPoly> entries_;
};

/// Visits grid points of the box (endpoints included) in lexicographic
/// order, skipping points cut away by the constraints.
template <typename Visit>
void scan_grid(const BoxDomain& box, int per_axis, Visit visit) {
    const int n = box.dim();
    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    for (;;) {
        for (int d = 0; d < n; ++d) {
            const double t = per_axis == 1 ? 0.5 : static_cast<double>(idx[d]) / (per_axis - 1);
            x[d] = box.lower[d] + t * (box.upper[d] - box.lower[d]);
        }
        if (!box.has_constraints() || box.satisfies_constraints(x)) visit(x);
        int d = n - 1;
        while (d >= 0 && ++idx[d] == per_axis) idx[d--] = 0;
        if (d < 0) break;
    }
}

/// Local refinement: repeatedly re-grid a shrinking cell around the
/// incumbent, keeping strictly better points only.
template <typename Score>
void refine_extremum(const BoxDomain& box, const SamplingPlan& plan, bool minimize,
                     std::vector<double>& best_x, double& best_v, Score score) {
    const int n = box.dim();
    std::vector<double> half(n);
    const int res = plan.resolved_grid(n);
    for (int d = 0; d < n; ++d) half[d] = (box.upper[d] - box.lower[d]) / (res - 1 > 0 ? res - 1 : 1);
    std::vector<int> idx(n);
    std::vector<double> x(n);
    std::vector<double> center(n);
    for (int round = 0; round < plan.refine_rounds; ++round) {
        center = best_x;
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            for (int d = 0; d < n; ++d) {
                const double t = static_cast<double>(idx[d]) / (plan.refine_per_axis - 1);
                const double lo = std::max(box.lower[d], center[d] - half[d]);
                const double hi = std::min(box.upper[d], center[d] + half[d]);
                x[d] = lo + t * (hi - lo);
            }
            if (!box.has_constraints() || box.satisfies_constraints(x)) {
                const double v = score(x);
                if (minimize ? v < best_v : v > best_v) {
                    best_v = v;
                    best_x = x;
                }
            }
            int d = n - 1;
            while (d >= 0 && ++idx[d] == plan.refine_per_axis) idx[d--] = 0;
            if (d < 0) break;
        }
        for (int d = 0; d < n; ++d) half[d] /= 4.0;
    }
}

} // namespace detail

/// Sampled minima G_j and maximum L over the domain. Argmin ties on the
/// initial grid break toward the lexicographically smallest point (the scan
/// order guarantees it); refinement accepts strict improvements only.
inline ChainExtrema chain_extrema(const DerivativeChain& chain, const BoxDomain& box,
                                  const SamplingPlan& plan, const LevelRPolicy& r_policy) {
    if (box.dim() != chain.n())
        throw std::invalid_argument("domain dimension does not match chain variables");
    const int levels = chain.depth() + 1;
    std::vector<detail::CompiledMatrix> mats;
    mats.reserve(levels);
    for (int j = 0; j < levels; ++j) mats.emplace_back(chain.level(j));

    std::vector<int> r_eff(levels);
    for (int j = 0; j < levels; ++j) {
        const int cap = std::min(mats[j].rows(), mats[j].cols());
        r_eff[j] = std::min(r_policy(j), cap);
        if (r_eff[j] < 1) throw std::invalid_argument("r policy must be positive");
    }

    ChainExtrema ex;
    ex.g_min.assign(levels, std::numeric_limits<double>::infinity());
    ex.argmin.assign(levels, {});
    ex.l_max_per_level.assign(levels, -std::numeric_limits<double>::infinity());
    ex.sample_resolution = plan.resolved_grid(box.dim());

    std::vector<std::vector<double>> l_argmax_per_level(levels);
    Mat scratch;
    bool any = false;
    detail::scan_grid(box, ex.sample_resolution, [&](const std::vector<double>& x) {
        any = true;
        for (int j = 0; j < levels; ++j) {
            mats[j].evaluate(x, scratch);
            const double g = smallest_r_product(scratch, r_eff[j]);
            const double f = frobenius_norm(scratch);
            if (g < ex.g_min[j]) {
                ex.g_min[j] = g;
                ex.argmin[j] = x;
            }
            if (f > ex.l_max_per_level[j]) {
                ex.l_max_per_level[j] = f;
                l_argmax_per_level[j] = x;
            }
        }
    });
    if (!any) throw std::runtime_error("domain is empty after applying constraints");

    for (int j = 0; j < levels; ++j) {
        detail::refine_extremum(box, plan, /*minimize=*/true, ex.argmin[j], ex.g_min[j],
                                [&](const std::vector<double>& x) {
                                    mats[j].evaluate(x, scratch);
                                    return smallest_r_product(scratch, r_eff[j]);
                                });
        detail::refine_extremum(box, plan, /*minimize=*/false, l_argmax_per_level[j],
                                ex.l_max_per_level[j], [&](const std::vector<double>& x) {
                                    mats[j].evaluate(x, scratch);
                                    return frobenius_norm(scratch);
                                });
    }

    ex.l_max = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < levels; ++j) {
        if (ex.l_max_per_level[j] > ex.l_max) {
            ex.l_max = ex.l_max_per_level[j];
            ex.l_argmax = l_argmax_per_level[j];
        }
    }
    ex.h_tilde = ex.l_max_per_level[0];
    ex.h_one = ex.g_min[0];
    return ex;
}

/// Sampled minimum over the domain of sum_{i=1..r} sigma_min(A_{i-1}(x))
/// (used for k <= r) or of sigma_min(A_{k-1}(x))^{r/k} (k > r).
struct LambdaEstimate {
    double lambda = 0.0;
    std::vector<double> argmin;
    bool sum_form = true;  // true: sum of r levels; false: single-level power
};

inline LambdaEstimate minimal_singular_combination(const DerivativeChain& chain,
                                                   const BoxDomain& box, int k, int r,
                                                   const SamplingPlan& plan) {
    if (k < 1 || r < 1) throw std::invalid_argument("lambda needs k, r >= 1");
    const bool sum_form = k <= r;
    const int need_depth = sum_form ? r - 1 : k - 1;
    if (chain.depth() < need_depth)
        throw std::invalid_argument("chain too shallow for lambda evaluation");

    std::vector<detail::CompiledMatrix> mats;
    for (int j = 0; j <= need_depth; ++j) mats.emplace_back(chain.level(j));

    Mat scratch;
    auto score = [&](const std::vector<double>& x) {
        if (sum_form) {
            double s = 0.0;
            for (int i = 0; i < r; ++i) {
                mats[i].evaluate(x, scratch);
                s += singular_values(scratch).back();
            }
            return s;
        }
        mats[k - 1].evaluate(x, scratch);
        return std::pow(singular_values(scratch).back(),
                        static_cast<double>(r) / static_cast<double>(k));
    };

    LambdaEstimate est;
    est.sum_form = sum_form;
    est.lambda = std::numeric_limits<double>::infinity();
    bool any = false;
    detail::scan_grid(box, plan.resolved_grid(box.dim()), [&](const std::vector<double>& x) {
        any = true;
        const double v = score(x);
        if (v < est.lambda) {
            est.lambda = v;
            est.argmin = x;
        }
    });
    if (!any) throw std::runtime_error("domain is empty after applying constraints");
    detail::refine_extremum(box, plan, /*minimize=*/true, est.argmin, est.lambda, score);
    return est;
}

} // namespace oscbound
