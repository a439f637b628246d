#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscbound/parallel.hpp"
#include "oscbound/polynomial.hpp"
#include "oscbound/rng.hpp"

namespace oscbound {

using ScalarField = std::function<double(const std::vector<double>&)>;

struct MeasureEstimate {
    enum class Method { monte_carlo, grid, marching };
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    Method method = Method::monte_carlo;
};

/// Hypersurface {f_1 = 0, ..., f_{n-r} = 0} inside a box; the verification
/// path handles exactly one equation (curves in 2-D, surfaces in 3-D).
struct SurfaceSystem {
    std::vector<Polynomial> equations;
    BoxDomain ambient;
};

namespace detail {

struct CompiledConstraints {
    std::vector<CompiledPoly> polys;
    std::vector<bool> le_zero;

    explicit CompiledConstraints(const BoxDomain& box) {
        for (const auto& c : box.constraints) {
            polys.emplace_back(c.poly);
            le_zero.push_back(c.relation == BoxDomain::Relation::le_zero);
        }
    }

    [[nodiscard]] bool ok(const double* x) const {
        for (std::size_t i = 0; i < polys.size(); ++i) {
            const double v = polys[i](x);
            if (le_zero[i] ? v > 0.0 : v < 0.0) return false;
        }
        return true;
    }
};

/// Jittered stratification: samples are assigned round-robin to a fixed
/// s^n grid of strata with s ~ N^{1/n}, so the layout depends only on
/// (N, n) and every draw only on (seed, index, dim).
struct Strata {
    int n;
    std::uint64_t per_axis;
    std::uint64_t total;

    Strata(std::uint64_t samples, int dim) : n(dim) {
        per_axis = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(samples),
                                                                  1.0 / dim)));
        if (per_axis < 1) per_axis = 1;
        total = 1;
        for (int d = 0; d < dim; ++d) total *= per_axis;
    }

    void point(const CounterRng& rng, std::uint64_t index, const BoxDomain& box,
               std::vector<double>& x) const {
        std::uint64_t cell = index % total;
        for (int d = 0; d < n; ++d) {
            const std::uint64_t c = cell % per_axis;
            cell /= per_axis;
            const double u = (static_cast<double>(c) + rng.uniform(index, d)) /
                             static_cast<double>(per_axis);
            x[d] = box.lower[d] + u * (box.upper[d] - box.lower[d]);
        }
    }
};

} // namespace detail

/// Monte Carlo volume of {x in Omega : g0(x) <= H}. Deterministic for fixed
/// (seed, samples) under any worker count; std_error is the binomial CLT
/// estimate (conservative under stratification).
inline MeasureEstimate sublevel_measure(const ScalarField& g0, const BoxDomain& box, double H,
                                        std::int64_t samples, std::uint64_t seed,
                                        int threads = 1) {
    if (H < 0.0) throw std::invalid_argument("sublevel threshold must be nonnegative");
    if (samples < 1) throw std::invalid_argument("need at least one sample");

    const CounterRng rng(seed);
    const detail::Strata strata(static_cast<std::uint64_t>(samples), box.dim());
    const detail::CompiledConstraints cons(box);

    struct Partial {
        std::int64_t in_domain = 0;
        std::int64_t hits = 0;
    };
    std::int64_t in_domain = 0, hits = 0;
    blocked_reduce<Partial>(
        static_cast<std::uint64_t>(samples), threads,
        [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
            Partial p;
            std::vector<double> x(box.dim());
            for (std::uint64_t i = begin; i < end; ++i) {
                strata.point(rng, i, box, x);
                if (!cons.ok(x.data())) continue;
                ++p.in_domain;
                if (g0(x) <= H) ++p.hits;
            }
            return p;
        },
        [&](const Partial& p) {
            in_domain += p.in_domain;
            hits += p.hits;
        });

    if (in_domain == 0) throw std::runtime_error("domain is empty after applying constraints");

    MeasureEstimate est;
    est.samples = samples;
    est.method = MeasureEstimate::Method::monte_carlo;
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(hits) / n;
    est.value = box.box_volume() * p;
    est.std_error = box.box_volume() * std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
    return est;
}

/// Volumes of the dyadic shells {2^{-j} H <= g0 <= 2^{1-j} H}, j = 1..J.
/// Diagnostic companion to sublevel_measure on the same sample stream.
inline std::vector<MeasureEstimate> dyadic_shell_measures(const ScalarField& g0,
                                                          const BoxDomain& box, double H, int J,
                                                          std::int64_t samples,
                                                          std::uint64_t seed, int threads = 1) {
    if (J < 1) throw std::invalid_argument("need at least one shell");
    if (H < 0.0) throw std::invalid_argument("shell threshold must be nonnegative");
    if (samples < 1) throw std::invalid_argument("need at least one sample");

    const CounterRng rng(seed);
    const detail::Strata strata(static_cast<std::uint64_t>(samples), box.dim());
    const detail::CompiledConstraints cons(box);

    using Counts = std::vector<std::int64_t>;
    Counts total(J, 0);
    bool any = false;
    blocked_reduce<Counts>(
        static_cast<std::uint64_t>(samples), threads,
        [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
            Counts c(J + 1, 0);  // slot J counts feasible samples
            std::vector<double> x(box.dim());
            for (std::uint64_t i = begin; i < end; ++i) {
                strata.point(rng, i, box, x);
                if (!cons.ok(x.data())) continue;
                ++c[J];
                if (H <= 0.0) continue;
                const double v = g0(x);
                // lower-closed shells so a value on a dyadic boundary lands
                // in exactly one shell
                for (int j = 1; j <= J; ++j) {
                    const double lo = std::ldexp(H, -j);
                    const double hi = std::ldexp(H, 1 - j);
                    if (v >= lo && (v < hi || (j == 1 && v <= hi))) ++c[j - 1];
                }
            }
            return c;
        },
        [&](const Counts& c) {
            for (int j = 0; j < J; ++j) total[j] += c[j];
            if (c[J] > 0) any = true;
        });
    if (!any) throw std::runtime_error("domain is empty after applying constraints");

    std::vector<MeasureEstimate> shells(J);
    const double n = static_cast<double>(samples);
    for (int j = 0; j < J; ++j) {
        const double p = static_cast<double>(total[j]) / n;
        shells[j].value = box.box_volume() * p;
        shells[j].std_error = box.box_volume() * std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
        shells[j].samples = samples;
        shells[j].method = MeasureEstimate::Method::monte_carlo;
    }
    return shells;
}

namespace detail {

struct Segment {
    std::array<double, 2> a, b;
};

/// Marching squares on an (res+1)^2 sample grid of f over the box.
/// values may be shared across level sweeps: f(x) - iso is contoured.
inline void marching_squares(const std::vector<double>& values, int res, const BoxDomain& box,
                             double iso, std::vector<Segment>& out) {
    const double hx = (box.upper[0] - box.lower[0]) / res;
    const double hy = (box.upper[1] - box.lower[1]) / res;
    auto val = [&](int i, int j) {
        return values[static_cast<std::size_t>(j) * (res + 1) + i] - iso;
    };
    auto lerp = [](double a, double b) { return a / (a - b); };
    for (int j = 0; j < res; ++j) {
        for (int i = 0; i < res; ++i) {
            const double v00 = val(i, j), v10 = val(i + 1, j);
            const double v01 = val(i, j + 1), v11 = val(i + 1, j + 1);
            int code = 0;
            if (v00 > 0) code |= 1;
            if (v10 > 0) code |= 2;
            if (v11 > 0) code |= 4;
            if (v01 > 0) code |= 8;
            if (code == 0 || code == 15) continue;
            const double x0 = box.lower[0] + i * hx, y0 = box.lower[1] + j * hy;
            // edge interpolation points: bottom, right, top, left
            std::array<double, 2> eb{x0 + lerp(v00, v10) * hx, y0};
            std::array<double, 2> er{x0 + hx, y0 + lerp(v10, v11) * hy};
            std::array<double, 2> et{x0 + lerp(v01, v11) * hx, y0 + hy};
            std::array<double, 2> el{x0, y0 + lerp(v00, v01) * hy};
            auto emit = [&](const std::array<double, 2>& p, const std::array<double, 2>& q) {
                out.push_back({p, q});
            };
            switch (code) {
                case 1: case 14: emit(el, eb); break;
                case 2: case 13: emit(eb, er); break;
                case 3: case 12: emit(el, er); break;
                case 4: case 11: emit(er, et); break;
                case 6: case 9:  emit(eb, et); break;
                case 7: case 8:  emit(et, el); break;
                case 5: case 10: {
                    // saddle: decide by the cell-center sign
                    const double vc = 0.25 * (v00 + v10 + v01 + v11);
                    const bool center_pos = vc > 0;
                    if ((code == 5) == center_pos) {
                        emit(el, et);
                        emit(eb, er);
                    } else {
                        emit(el, eb);
                        emit(er, et);
                    }
                    break;
                }
                default: break;
            }
        }
    }
}

struct Triangle {
    std::array<double, 3> a, b, c;
};

inline std::array<double, 3> edge_point(const std::array<double, 3>& p,
                                        const std::array<double, 3>& q, double vp, double vq) {
    const double t = vp / (vp - vq);
    return {p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])};
}

/// Marching tetrahedra over one z-slab of cells (two adjacent value slices).
/// Cubes split into the standard 6-tetrahedron fan around the main diagonal.
inline void marching_tets_slab(const std::vector<double>& slice0, const std::vector<double>& slice1,
                               int res, int jz, const BoxDomain& box, double iso,
                               std::vector<Triangle>& out) {
    const double hx = (box.upper[0] - box.lower[0]) / res;
    const double hy = (box.upper[1] - box.lower[1]) / res;
    const double hz = (box.upper[2] - box.lower[2]) / res;
    static constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
                                        {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
    for (int jy = 0; jy < res; ++jy) {
        for (int jx = 0; jx < res; ++jx) {
            std::array<double, 3> corner[8];
            double v[8];
            for (int c = 0; c < 8; ++c) {
                const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
                corner[c] = {box.lower[0] + (jx + dx) * hx, box.lower[1] + (jy + dy) * hy,
                             box.lower[2] + (jz + dz) * hz};
                const std::vector<double>& s = dz ? slice1 : slice0;
                v[c] = s[static_cast<std::size_t>(jy + dy) * (res + 1) + (jx + dx)] - iso;
            }
            for (const auto& tet : kTets) {
                int code = 0;
                for (int c = 0; c < 4; ++c)
                    if (v[tet[c]] > 0) code |= 1 << c;
                if (code == 0 || code == 15) continue;
                // canonical: indices of positive corners
                int pos[4], neg[4], np = 0, nn = 0;
                for (int c = 0; c < 4; ++c)
                    (v[tet[c]] > 0 ? pos[np++] : neg[nn++]) = tet[c];
                if (np == 1 || nn == 1) {
                    const int apex = np == 1 ? pos[0] : neg[0];
                    const int* base = np == 1 ? neg : pos;
                    const auto p0 = edge_point(corner[apex], corner[base[0]], v[apex], v[base[0]]);
                    const auto p1 = edge_point(corner[apex], corner[base[1]], v[apex], v[base[1]]);
                    const auto p2 = edge_point(corner[apex], corner[base[2]], v[apex], v[base[2]]);
                    out.push_back({p0, p1, p2});
                } else {
                    const auto p00 = edge_point(corner[pos[0]], corner[neg[0]], v[pos[0]], v[neg[0]]);
                    const auto p01 = edge_point(corner[pos[0]], corner[neg[1]], v[pos[0]], v[neg[1]]);
                    const auto p10 = edge_point(corner[pos[1]], corner[neg[0]], v[pos[1]], v[neg[0]]);
                    const auto p11 = edge_point(corner[pos[1]], corner[neg[1]], v[pos[1]], v[neg[1]]);
                    out.push_back({p00, p01, p11});
                    out.push_back({p00, p11, p10});
                }
            }
        }
    }
}

inline double triangle_area(const Triangle& t) {
    const double ux = t.b[0] - t.a[0], uy = t.b[1] - t.a[1], uz = t.b[2] - t.a[2];
    const double vx = t.c[0] - t.a[0], vy = t.c[1] - t.a[1], vz = t.c[2] - t.a[2];
    const double cx = uy * vz - uz * vy;
    const double cy = uz * vx - ux * vz;
    const double cz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

} // namespace detail

struct SurfaceMeasureOptions {
    ScalarField restrict_g0;  // optional: keep pieces with g0(midpoint) <= H
    double H = 0.0;
    bool restricted = false;
    double degenerate_grad_tol = 1e-12;
};

struct SurfaceMeasureResult {
    MeasureEstimate estimate;
    std::int64_t skipped_degenerate = 0;
};

namespace detail {

/// Length/area of the isocontour {f = iso} (n = 2 or 3) with midpoint
/// restriction; value at one resolution only. The caller pairs two
/// resolutions into a Richardson discrepancy.
inline SurfaceMeasureResult surface_measure_at(const Polynomial& f, const BoxDomain& box,
                                               double iso, int res,
                                               const SurfaceMeasureOptions& opt) {
    const int n = box.dim();
    const CompiledPoly cf(f);
    std::vector<CompiledPoly> grad;
    for (const auto& g : f.gradient()) grad.emplace_back(g);
    const CompiledConstraints cons(box);

    SurfaceMeasureResult result;
    KahanSum total;
    std::int64_t pieces = 0;

    std::vector<double> mid(n);
    auto accept = [&](const double* m) {
        for (int d = 0; d < n; ++d) mid[d] = m[d];
        if (!cons.ok(mid.data())) return false;
        double g2 = 0.0;
        for (const auto& gp : grad) {
            const double gv = gp(mid.data());
            g2 += gv * gv;
        }
        if (std::sqrt(g2) < opt.degenerate_grad_tol) {
            ++result.skipped_degenerate;
            return false;
        }
        if (opt.restricted && opt.restrict_g0(mid) > opt.H) return false;
        return true;
    };

    if (n == 2) {
        std::vector<double> values(static_cast<std::size_t>(res + 1) * (res + 1));
        std::vector<double> x(2);
        for (int j = 0; j <= res; ++j) {
            x[1] = box.lower[1] + (box.upper[1] - box.lower[1]) * j / res;
            for (int i = 0; i <= res; ++i) {
                x[0] = box.lower[0] + (box.upper[0] - box.lower[0]) * i / res;
                values[static_cast<std::size_t>(j) * (res + 1) + i] = cf(x.data());
            }
        }
        std::vector<Segment> segs;
        marching_squares(values, res, box, iso, segs);
        for (const auto& s : segs) {
            const double m[2] = {0.5 * (s.a[0] + s.b[0]), 0.5 * (s.a[1] + s.b[1])};
            if (!accept(m)) continue;
            ++pieces;
            total.add(std::hypot(s.b[0] - s.a[0], s.b[1] - s.a[1]));
        }
    } else {
        std::vector<double> slice0(static_cast<std::size_t>(res + 1) * (res + 1));
        std::vector<double> slice1(slice0.size());
        std::vector<double> x(3);
        auto fill = [&](int jz, std::vector<double>& slice) {
            x[2] = box.lower[2] + (box.upper[2] - box.lower[2]) * jz / res;
            for (int j = 0; j <= res; ++j) {
                x[1] = box.lower[1] + (box.upper[1] - box.lower[1]) * j / res;
                for (int i = 0; i <= res; ++i) {
                    x[0] = box.lower[0] + (box.upper[0] - box.lower[0]) * i / res;
                    slice[static_cast<std::size_t>(j) * (res + 1) + i] = cf(x.data());
                }
            }
        };
        fill(0, slice0);
        std::vector<Triangle> tris;
        for (int jz = 0; jz < res; ++jz) {
            fill(jz + 1, slice1);
            tris.clear();
            marching_tets_slab(slice0, slice1, res, jz, box, iso, tris);
            for (const auto& t : tris) {
                const double m[3] = {(t.a[0] + t.b[0] + t.c[0]) / 3.0,
                                     (t.a[1] + t.b[1] + t.c[1]) / 3.0,
                                     (t.a[2] + t.b[2] + t.c[2]) / 3.0};
                if (!accept(m)) continue;
                ++pieces;
                total.add(triangle_area(t));
            }
            slice0.swap(slice1);
        }
    }

    result.estimate.value = total.sum;
    result.estimate.samples = pieces;
    result.estimate.method = MeasureEstimate::Method::marching;
    return result;
}

} // namespace detail

/// Measure of the hypersurface {f_1 = 0} inside the box (curve length for
/// n = 2, area for n = 3), optionally restricted to {g0 <= H} by midpoint
/// membership. std_error carries the resolution-halving discrepancy.
inline SurfaceMeasureResult surface_measure(const SurfaceSystem& system,
                                            const SurfaceMeasureOptions& opt, int resolution) {
    const int n = system.ambient.dim();
    if (n != 2 && n != 3)
        throw std::invalid_argument("surface_measure supports 2-D and 3-D domains only");
    if (system.equations.size() != 1)
        throw std::invalid_argument("surface_measure supports exactly one equation (codimension 1)");
    if (system.equations[0].num_vars() != n)
        throw std::invalid_argument("surface equation variable count mismatch");
    if (resolution < 4) throw std::invalid_argument("resolution too small");

    SurfaceMeasureResult fine =
        detail::surface_measure_at(system.equations[0], system.ambient, 0.0, resolution, opt);
    SurfaceMeasureResult coarse =
        detail::surface_measure_at(system.equations[0], system.ambient, 0.0, resolution / 2, opt);
    fine.estimate.std_error = std::abs(fine.estimate.value - coarse.estimate.value);
    return fine;
}

} // namespace oscbound
