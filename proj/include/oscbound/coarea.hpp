#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oscbound/measure.hpp"
#include "oscbound/parallel.hpp"
#include "oscbound/polynomial.hpp"
#include "oscbound/rng.hpp"

namespace oscbound {

/// Sampled distribution function V(u) = vol{F <= u} on a uniform grid over
/// the (slightly widened) range of F, and its central-difference derivative
/// phi(u) — the level-surface integral of 1/||grad F||.
struct LevelProfile {
    std::vector<double> u_grid;
    std::vector<double> V;
    std::vector<double> phi;  // interior grid points only: indices 1..G-2
    double m = 0.0;
    double M = 0.0;
    double noise_scale = 0.0;  // MC std error of V divided by the grid step
    double vol_domain = 0.0;
    double min_grad_seen = 0.0;
    bool weak_gradient_warning = false;

    [[nodiscard]] int grid_points() const { return static_cast<int>(u_grid.size()); }
    [[nodiscard]] double step() const { return u_grid[1] - u_grid[0]; }
};

struct DegenerateProfile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Estimate the level profile of F over the box by Monte Carlo counting.
/// The range [m, M] is the sampled extrema widened by one grid step, so the
/// distribution is exactly 0 at m and exactly vol(Omega) at M.
inline LevelProfile level_profile(const Polynomial& F, const BoxDomain& box, int grid_points,
                                  std::int64_t samples, std::uint64_t seed, int threads = 1) {
    if (grid_points < 16) throw std::invalid_argument("need at least 16 grid points");
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    if (F.num_vars() != box.dim())
        throw std::invalid_argument("phase variable count does not match domain");

    const CompiledPoly cf(F);
    std::vector<CompiledPoly> grad;
    for (const auto& g : F.gradient()) grad.emplace_back(g);
    const CounterRng rng(seed);
    const detail::Strata strata(static_cast<std::uint64_t>(samples), box.dim());
    const detail::CompiledConstraints cons(box);

    // pass 1: range of F and the weakest sampled gradient
    struct Range {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::int64_t feasible = 0;
    };
    Range range;
    blocked_reduce<Range>(
        static_cast<std::uint64_t>(samples), threads,
        [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
            Range r;
            std::vector<double> x(box.dim());
            for (std::uint64_t i = begin; i < end; ++i) {
                strata.point(rng, i, box, x);
                if (!cons.ok(x.data())) continue;
                ++r.feasible;
                const double v = cf(x.data());
                r.lo = std::min(r.lo, v);
                r.hi = std::max(r.hi, v);
                double g2 = 0.0;
                for (const auto& gp : grad) {
                    const double gv = gp(x.data());
                    g2 += gv * gv;
                }
                r.gmin = std::min(r.gmin, std::sqrt(g2));
            }
            return r;
        },
        [&](const Range& r) {
            range.lo = std::min(range.lo, r.lo);
            range.hi = std::max(range.hi, r.hi);
            range.gmin = std::min(range.gmin, r.gmin);
            range.feasible += r.feasible;
        });
    if (range.feasible == 0) throw std::runtime_error("domain is empty after applying constraints");
    if (!(range.hi > range.lo))
        throw DegenerateProfile("phase is constant on the domain; profile degenerate");

    LevelProfile profile;
    const double step0 = (range.hi - range.lo) / (grid_points - 1);
    profile.m = range.lo - step0;
    profile.M = range.hi + step0;
    profile.min_grad_seen = range.gmin;
    profile.weak_gradient_warning = range.gmin < 1e-9;

    profile.u_grid.resize(grid_points);
    const double step = (profile.M - profile.m) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) profile.u_grid[i] = profile.m + step * i;

    // pass 2: histogram of grid-bin indices, then prefix sums -> V
    using Counts = std::vector<std::int64_t>;
    Counts hist(grid_points, 0);
    blocked_reduce<Counts>(
        static_cast<std::uint64_t>(samples), threads,
        [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
            Counts c(grid_points, 0);
            std::vector<double> x(box.dim());
            for (std::uint64_t i = begin; i < end; ++i) {
                strata.point(rng, i, box, x);
                if (!cons.ok(x.data())) continue;
                const double v = cf(x.data());
                // first grid index with u >= v; sample counts toward V at all u >= v
                int bin = static_cast<int>(std::ceil((v - profile.m) / step));
                if (bin < 0) bin = 0;
                if (bin > grid_points - 1) bin = grid_points - 1;
                ++c[bin];
            }
            return c;
        },
        [&](const Counts& c) {
            for (int i = 0; i < grid_points; ++i) hist[i] += c[i];
        });

    const double vol_box = box.box_volume();
    profile.vol_domain = vol_box * static_cast<double>(range.feasible) /
                         static_cast<double>(samples);
    profile.V.resize(grid_points);
    std::int64_t cum = 0;
    for (int i = 0; i < grid_points; ++i) {
        cum += hist[i];
        profile.V[i] = vol_box * static_cast<double>(cum) / static_cast<double>(samples);
    }

    profile.phi.assign(grid_points, 0.0);
    for (int i = 1; i + 1 < grid_points; ++i)
        profile.phi[i] = (profile.V[i + 1] - profile.V[i - 1]) / (2.0 * step);

    profile.noise_scale = vol_box * 0.5 / std::sqrt(static_cast<double>(samples)) / step;
    return profile;
}

/// Monotone decomposition of the sampled profile.
struct MonotonePieces {
    std::vector<int> breakpoints;  // start index (into u_grid) of each piece
    enum class Direction { nondecreasing, nonincreasing };
    std::vector<Direction> directions;
    int count = 0;  // K_0
};

/// Greedy change-point scan over phi: a new piece opens when the value
/// reverses by more than the tolerance from the running extremum. Constant
/// runs never split a piece; an undetermined direction reports nondecreasing.
inline MonotonePieces monotone_split(const LevelProfile& profile, double tolerance = -1.0) {
    if (tolerance < 0.0) tolerance = 2.0 * profile.noise_scale;
    const int g = profile.grid_points();
    const int first = 1, last = g - 2;
    MonotonePieces pieces;
    if (last < first) throw std::invalid_argument("profile too short to split");

    int dir = 0;  // 0 unknown, +1 up, -1 down
    double hi = profile.phi[first], lo = profile.phi[first];
    pieces.breakpoints.push_back(first);
    auto close_piece = [&](int at, int new_dir, double v) {
        pieces.directions.push_back(dir >= 0 ? MonotonePieces::Direction::nondecreasing
                                             : MonotonePieces::Direction::nonincreasing);
        pieces.breakpoints.push_back(at);
        dir = new_dir;
        hi = lo = v;
    };
    for (int i = first + 1; i <= last; ++i) {
        const double v = profile.phi[i];
        if (dir == 0) {
            if (v > lo + tolerance) dir = +1;
            else if (v < hi - tolerance) dir = -1;
        } else if (dir > 0 && v < hi - tolerance) {
            close_piece(i, -1, v);
        } else if (dir < 0 && v > lo + tolerance) {
            close_piece(i, +1, v);
        }
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    pieces.directions.push_back(dir >= 0 ? MonotonePieces::Direction::nondecreasing
                                         : MonotonePieces::Direction::nonincreasing);
    pieces.count = static_cast<int>(pieces.directions.size());
    return pieces;
}

/// Piece index of each grid point, for export.
inline std::vector<int> piece_index_per_point(const LevelProfile& profile,
                                              const MonotonePieces& pieces) {
    std::vector<int> idx(profile.grid_points(), 0);
    int piece = 0;
    for (int i = 0; i < profile.grid_points(); ++i) {
        while (piece + 1 < pieces.count && i >= pieces.breakpoints[piece + 1]) ++piece;
        idx[i] = piece;
    }
    return idx;
}

/// Trapezoid quadrature of phi(u) e^{2 pi i u} over the interior grid:
/// the one-dimensional reduction of the oscillatory integral.
inline std::complex<double> oscillatory_from_profile(const LevelProfile& profile) {
    const int g = profile.grid_points();
    if (g < 3) throw std::invalid_argument("profile too short");
    const double step = profile.step();
    std::complex<double> acc{0.0, 0.0};
    for (int i = 1; i + 2 < g; ++i) {
        const double u0 = profile.u_grid[i], u1 = profile.u_grid[i + 1];
        const std::complex<double> f0 =
            profile.phi[i] * std::complex<double>(std::cos(2 * M_PI * u0), std::sin(2 * M_PI * u0));
        const std::complex<double> f1 =
            profile.phi[i + 1] *
            std::complex<double>(std::cos(2 * M_PI * u1), std::sin(2 * M_PI * u1));
        acc += 0.5 * step * (f0 + f1);
    }
    return acc;
}

/// Trapezoid integral of phi over the interior grid (co-area normalization:
/// should reproduce vol(Omega)).
inline double profile_mass(const LevelProfile& profile) {
    const int g = profile.grid_points();
    const double step = profile.step();
    double acc = 0.0;
    for (int i = 1; i + 2 < g; ++i) acc += 0.5 * step * (profile.phi[i] + profile.phi[i + 1]);
    return acc;
}

} // namespace oscbound
