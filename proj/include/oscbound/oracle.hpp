#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "oscbound/polynomial.hpp"
#include "oscbound/rng.hpp"

namespace oscbound {

struct OracleResult {
    std::complex<double> value{0.0, 0.0};
    double abs_error_estimate = 0.0;
    enum class Method { adaptive, qmc, tensor };
    Method method = Method::adaptive;
    std::int64_t evaluations = 0;
    bool converged = true;
    // cross-check (n >= 2): deterministic Sobol estimate of the same integral
    std::complex<double> qmc_value{0.0, 0.0};
    double qmc_error_estimate = 0.0;
    bool has_qmc = false;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights (symmetric half).
inline constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
inline constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
inline constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

struct RuleResult {
    std::complex<double> integral;
    double error;
};

/// One G7/K15 application of a complex integrand on [a, b].
template <typename F>
RuleResult gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::complex<double> k15{0.0, 0.0}, g7{0.0, 0.0};
    for (int i = 0; i < 8; ++i) {
        const double dx = h * kXgk[i];
        const std::complex<double> fl = f(c - dx);
        const std::complex<double> fr = i == 7 ? fl : f(c + dx);
        const std::complex<double> pair = i == 7 ? fl : fl + fr;
        k15 += kWgk[i] * pair;
        if (i % 2 == 1) g7 += kWg[i / 2] * pair;
    }
    k15 *= h;
    g7 *= h;
    return {k15, std::abs(k15 - g7)};
}

struct QuadSegment {
    double a, b;
    std::complex<double> integral;
    double error;
    bool operator<(const QuadSegment& o) const { return error < o.error; }
};

/// Globally adaptive bisection to an absolute error target.
template <typename F>
RuleResult adaptive_complex(F&& f, double a, double b, double target, std::int64_t max_evals,
                            std::int64_t& evals, bool& converged) {
    std::priority_queue<QuadSegment> heap;
    RuleResult first = gk15(f, a, b);
    evals += 15;
    heap.push({a, b, first.integral, first.error});
    double total_error = first.error;

    while (total_error > target && evals + 30 <= max_evals) {
        QuadSegment worst = heap.top();
        if (worst.error <= 0.0) break;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) break;  // interval at rounding floor
        heap.pop();
        RuleResult left = gk15(f, worst.a, mid);
        RuleResult right = gk15(f, mid, worst.b);
        evals += 30;
        total_error += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.integral, left.error});
        heap.push({mid, worst.b, right.integral, right.error});
    }
    if (total_error > target) converged = false;

    // deterministic reduction: sort segments by interval start, then sum
    std::vector<QuadSegment> segs;
    segs.reserve(heap.size());
    while (!heap.empty()) {
        segs.push_back(heap.top());
        heap.pop();
    }
    std::sort(segs.begin(), segs.end(),
              [](const QuadSegment& l, const QuadSegment& r) { return l.a < r.a; });
    std::complex<double> sum{0.0, 0.0};
    double err = 0.0;
    for (const auto& s : segs) {
        sum += s.integral;
        err += s.error;
    }
    return {sum, err};
}

} // namespace detail

/// High-accuracy value of the oscillatory integral of exp(2 pi i t F) over
/// the box. One dimension uses globally adaptive G7/K15; two and three
/// dimensions iterate the adaptive rule and cross-check against a Sobol
/// estimate, reporting the larger of the two discrepancies as the error.
/// Domains with constraints are not supported here (the verification
/// corpus integrates over plain boxes).
inline OracleResult oscillatory_integral_scaled(const Polynomial& F, const BoxDomain& box,
                                                double t, double target_error,
                                                std::int64_t max_evals = 10'000'000) {
    if (F.num_vars() != box.dim())
        throw std::invalid_argument("phase variable count does not match domain");
    if (box.dim() > 3) throw std::invalid_argument("oracle supports n <= 3");
    if (box.has_constraints())
        throw std::invalid_argument("oracle requires a plain box domain");
    if (!(target_error > 0.0)) throw std::invalid_argument("target error must be positive");

    const int n = box.dim();
    const CompiledPoly cf(F);
    OracleResult result;
    bool converged = true;

    auto phase_point = [&](const double* x) {
        const double u = 2.0 * M_PI * t * cf(x);
        return std::complex<double>(std::cos(u), std::sin(u));
    };

    if (n == 1) {
        auto f = [&](double x) { return phase_point(&x); };
        detail::RuleResult r = detail::adaptive_complex(f, box.lower[0], box.upper[0],
                                                        target_error, max_evals,
                                                        result.evaluations, converged);
        result.value = r.integral;
        result.abs_error_estimate = r.error;
        result.converged = converged;
        return result;
    }

    // iterated adaptive quadrature: per-level absolute targets chosen so the
    // propagated inner errors stay inside the overall budget
    std::vector<double> width(n), level_target(n);
    for (int d = 0; d < n; ++d) width[d] = box.upper[d] - box.lower[d];
    level_target[0] = 0.5 * target_error;
    level_target[1] = 0.25 * target_error / width[0];
    if (n == 3) level_target[2] = 0.125 * target_error / (width[0] * width[1]);

    double outer_rule_error = 0.0;
    std::function<std::complex<double>(std::vector<double>&, int)> nest =
        [&](std::vector<double>& x, int dim) -> std::complex<double> {
        auto f = [&](double v) -> std::complex<double> {
            x[dim] = v;
            if (dim + 1 == n) return phase_point(x.data());
            return nest(x, dim + 1);
        };
        bool conv = true;
        detail::RuleResult r =
            detail::adaptive_complex(f, box.lower[dim], box.upper[dim], level_target[dim],
                                     max_evals, result.evaluations, conv);
        if (!conv) converged = false;
        if (dim == 0) outer_rule_error = r.error;
        return r.integral;
    };

    std::vector<double> x(n);
    result.value = nest(x, 0);
    double rule_error = outer_rule_error + width[0] * level_target[1];
    if (n == 3) rule_error += width[0] * width[1] * level_target[2];

    // Sobol cross-check with a successive-halves error estimate
    const std::int64_t qmc_n = 1 << 17;
    Sobol sobol(n);
    std::complex<double> sum{0.0, 0.0}, half{0.0, 0.0};
    std::vector<double> q(n);
    for (std::int64_t i = 1; i <= qmc_n; ++i) {
        const auto p = sobol.point(static_cast<std::uint64_t>(i));
        for (int d = 0; d < n; ++d) q[d] = box.lower[d] + p[d] * (box.upper[d] - box.lower[d]);
        sum += phase_point(q.data());
        if (i == qmc_n / 2) half = sum;
    }
    result.evaluations += qmc_n;
    const double vol = box.box_volume();
    result.qmc_value = vol * sum / static_cast<double>(qmc_n);
    const std::complex<double> half_est = vol * half / static_cast<double>(qmc_n / 2);
    result.qmc_error_estimate = std::abs(result.qmc_value - half_est);
    result.has_qmc = true;

    result.abs_error_estimate = std::max(rule_error, std::abs(result.value - result.qmc_value));
    result.converged = converged;
    return result;
}

inline OracleResult oscillatory_integral(const Polynomial& F, const BoxDomain& box,
                                         double target_error,
                                         std::int64_t max_evals = 10'000'000) {
    return oscillatory_integral_scaled(F, box, 1.0, target_error, max_evals);
}

/// Least-squares decay exponent of |I(t)| for the scaled phase t*F over a
/// geometric grid of scales.
struct DecayFit {
    double slope = 0.0;
    double residual = 0.0;
    int points_used = 0;
    bool valid = false;
    std::vector<double> t;
    std::vector<double> abs_I;
    std::vector<double> error;
};

/// Least-squares log-log fit over the tail where the modulus clears the
/// noise floor (|I| > 10x the error estimate).
inline void fit_decay_tail(DecayFit& fit) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < fit.t.size(); ++i) {
        if (!(fit.abs_I[i] > 10.0 * fit.error[i])) continue;
        const double lx = std::log(fit.t[i]);
        const double ly = std::log(fit.abs_I[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    fit.points_used = m;
    if (m < 2) return;  // fit undefined, signaled through valid=false
    const double denom = m * sxx - sx * sx;
    if (denom <= 0.0) return;
    fit.slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.slope * sx) / m;
    double ss = 0.0;
    for (std::size_t i = 0; i < fit.t.size(); ++i) {
        if (!(fit.abs_I[i] > 10.0 * fit.error[i])) continue;
        const double r = std::log(fit.abs_I[i]) - (intercept + fit.slope * std::log(fit.t[i]));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / m);
    fit.valid = true;
}

inline DecayFit decay_fit(const Polynomial& F, const BoxDomain& box,
                          const std::vector<double>& t_grid, double target_error = 1e-9,
                          std::int64_t max_evals = 10'000'000) {
    std::vector<double> ts;
    for (double t : t_grid)
        if (t > 0.0) ts.push_back(t);
    if (ts.size() < 5) throw std::invalid_argument("decay fit needs at least 5 positive scales");
    const auto [lo, hi] = std::minmax_element(ts.begin(), ts.end());
    if (*hi / *lo < 100.0)
        throw std::invalid_argument("decay fit needs scales spanning at least two decades");

    DecayFit fit;
    for (double t : ts) {
        OracleResult r = oscillatory_integral_scaled(F, box, t, target_error, max_evals);
        fit.t.push_back(t);
        fit.abs_I.push_back(std::abs(r.value));
        fit.error.push_back(r.abs_error_estimate);
    }
    fit_decay_tail(fit);
    return fit;
}

} // namespace oscbound
