#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oscbound/bounds.hpp"
#include "oscbound/chain.hpp"
#include "oscbound/coarea.hpp"
#include "oscbound/document.hpp"
#include "oscbound/jsonout.hpp"
#include "oscbound/measure.hpp"
#include "oscbound/oracle.hpp"
#include "oscbound/spectral.hpp"

namespace oscbound {

/// Error from a named pipeline stage (maps to exit code 3 in the CLI).
struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& msg)
        : std::runtime_error("stage '" + stage + "': " + msg), stage_name(stage) {}
    std::string stage_name;
};

enum Stage : unsigned {
    kStageSpectral = 1,
    kStageMeasure = 2,
    kStageCoarea = 4,
    kStageOracle = 8,
    kStageBounds = 16,
    kStageDecay = 32,
    kStageAll = 63,
};

struct Verdict {
    std::string name;
    bool holds = false;
    double margin = 0.0;
    double bound = 0.0;     // the right-hand side compared against
    double measured = 0.0;  // the measured/computed left-hand side
};

struct MeasureRow {
    double H = 0.0;
    std::vector<double> G_paren;
    double mu_est = 0.0;
    double mu_disc = 0.0;
    double vol_EH = 0.0;
    double vol_EH_se = 0.0;
    double thm1 = 0.0;
    double thm2 = 0.0;
    double thm3 = 0.0;
};

struct DecayRow {
    double t = 0.0;
    double abs_I = 0.0;
    double err = 0.0;
    double bound = std::numeric_limits<double>::infinity();
};

struct BoundReport {
    ProblemDocument doc;
    unsigned stages = 0;

    // chain + spectral (always present)
    int r_pipeline = 0;
    int chain_depth = 0;
    std::vector<int> level_cols;
    std::vector<int> level_degrees;
    ChainExtrema extrema;
    double vol_domain = 0.0;
    double vol_domain_se = 0.0;
    bool vol_is_estimate = false;

    // measure section
    bool has_measure = false;
    bool measure_admissible = false;
    std::string measure_note;
    int r_surface = 0;
    int k_surface = 0;
    std::vector<double> g_surface;  // surface-policy minima G_0..G_k
    double surface_total = 0.0;     // unrestricted surface measure
    double surface_total_disc = 0.0;
    std::vector<double> H_grid_used;
    std::vector<MeasureRow> measure_rows;

    // coarea section
    bool has_coarea = false;
    LevelProfile profile;
    MonotonePieces pieces;
    std::vector<int> piece_idx;
    std::complex<double> reconstruction{0.0, 0.0};
    double profile_mass_value = 0.0;

    // oracle section
    bool has_oracle = false;
    double oracle_tol_used = 0.0;
    OracleResult oracle;

    // bounds section
    bool has_bounds = false;
    std::string t4_case;
    bool t4_admissible = false;
    std::string t4_note;
    double t4_G = 0.0;
    double t4_L0 = 0.0;
    double t4_bound_cfgK = std::numeric_limits<double>::infinity();
    double t4_bound_measuredK0 = std::numeric_limits<double>::infinity();
    bool t4_vacuous = false;  // bound infinite (gradient vanishes somewhere)
    bool t4_case2b_available = false;  // k < r with a level sweep for Pi
    double t4_pi_area = 0.0;
    double t4_case2b_cfgK = std::numeric_limits<double>::infinity();
    double t4_case2b_measuredK0 = std::numeric_limits<double>::infinity();
    bool conseq_defined = false;
    std::string conseq_note;
    double lambda = 0.0;
    std::vector<double> lambda_argmin;
    double conseq_log_factor_value = 0.0;
    double conseq_bound_cfgK = 0.0;
    double conseq_bound_measuredK0 = 0.0;

    // decay section
    bool has_decay = false;
    std::vector<DecayRow> decay_rows;
    DecayFit decay;

    std::vector<Verdict> verdicts;
    bool flag_not_converged = false;

    [[nodiscard]] bool all_verdicts_hold() const {
        for (const auto& v : verdicts)
            if (!v.holds) return false;
        return true;
    }
};

namespace detail {

constexpr double kAdmissibleEps = 1e-12;

inline ScalarField gradient_norm_field(const Polynomial& F) {
    auto grads = std::make_shared<std::vector<CompiledPoly>>();
    for (const auto& g : F.gradient()) grads->emplace_back(g);
    return [grads](const std::vector<double>& x) {
        double s = 0.0;
        for (const auto& g : *grads) {
            const double v = g(x.data());
            s += v * v;
        }
        return std::sqrt(s);
    };
}

/// Max over a level sweep of the measure of {F = u} (case 2b's Pi).
inline double max_level_measure(const Polynomial& F, const BoxDomain& box, double m, double M,
                                int resolution, int levels = 33) {
    double best = 0.0;
    SurfaceMeasureOptions opt;
    for (int i = 1; i + 1 < levels; ++i) {
        const double u = m + (M - m) * i / (levels - 1);
        SurfaceMeasureResult r = surface_measure_at(F, box, u, resolution, opt);
        best = std::max(best, r.estimate.value);
    }
    return best;
}

inline Verdict make_leq_verdict(const std::string& name, double measured, double bound) {
    Verdict v;
    v.name = name;
    v.measured = measured;
    v.bound = bound;
    v.holds = measured <= bound;
    v.margin = bound - measured;
    return v;
}

inline Verdict make_tol_verdict(const std::string& name, double abs_diff, double tol) {
    Verdict v;
    v.name = name;
    v.measured = abs_diff;
    v.bound = tol;
    v.holds = abs_diff <= tol;
    v.margin = tol - abs_diff;
    return v;
}

} // namespace detail

/// Run the pipeline stages on a parsed document. Deterministic for a fixed
/// document including under different thread counts.
inline BoundReport run_verify(const ProblemDocument& doc, unsigned stages = kStageAll) {
    BoundReport rep;
    rep.doc = doc;
    rep.stages = stages;
    const int n = doc.n;
    const int r = n;  // the oscillatory pipeline differentiates along every axis

    // ---- chain + spectral -------------------------------------------------
    std::optional<DerivativeChain> chain;
    SamplingPlan plan;
    plan.grid_per_axis = doc.sampling.spectral_grid;
    try {
        bool grad_zero = true;
        for (const auto& g : doc.phase.gradient())
            if (!g.is_zero()) grad_zero = false;
        if (grad_zero) throw std::runtime_error("phase has identically zero gradient");
        const int depth = std::max(doc.k, r - 1);
        chain.emplace(build_chain(gradient_row(doc.phase), depth));
        rep.r_pipeline = r;
        rep.chain_depth = depth;
        for (int j = 0; j <= depth; ++j) {
            rep.level_cols.push_back(chain->level(j).cols());
            rep.level_degrees.push_back(chain->level(j).max_total_degree());
        }
        rep.extrema = chain_extrema(*chain, doc.domain, plan, theorem4_policy(n));
    } catch (const std::exception& e) {
        throw StageError("spectral", e.what());
    }

    try {
        if (doc.domain.has_constraints()) {
            ScalarField zero = [](const std::vector<double>&) { return 0.0; };
            MeasureEstimate vol = sublevel_measure(zero, doc.domain, 0.0, doc.sampling.samples,
                                                   doc.sampling.seed, doc.sampling.threads);
            rep.vol_domain = vol.value;
            rep.vol_domain_se = vol.std_error;
            rep.vol_is_estimate = true;
        } else {
            rep.vol_domain = doc.domain.box_volume();
        }
    } catch (const std::exception& e) {
        throw StageError("volume", e.what());
    }

    const ScalarField grad_norm = detail::gradient_norm_field(doc.phase);

    // ---- measure section --------------------------------------------------
    if ((stages & kStageMeasure) && doc.surface) {
        try {
            rep.has_measure = true;
            const int codim = static_cast<int>(doc.surface->equations.size());
            rep.r_surface = n - codim;
            ChainExtrema surf_ex =
                chain_extrema(*chain, doc.domain, plan, constant_policy(std::max(1, rep.r_surface)));
            rep.g_surface = surf_ex.g_min;

            rep.k_surface = 0;
            for (int j = std::min<int>(doc.k, rep.chain_depth); j >= 1; --j) {
                if (rep.g_surface[j] > detail::kAdmissibleEps) {
                    rep.k_surface = j;
                    break;
                }
            }
            if (rep.r_surface < 1) {
                rep.measure_note = "surface has dimension zero; bounds not applicable";
            } else if (rep.k_surface == 0) {
                rep.measure_note =
                    "all sampled chain minima vanish; theorem hypotheses fail, rows skipped";
            } else {
                rep.measure_admissible = true;
            }

            SurfaceMeasureOptions unrestricted;
            SurfaceMeasureResult total =
                surface_measure(*doc.surface, unrestricted, doc.sampling.resolution);
            rep.surface_total = total.estimate.value;
            rep.surface_total_disc = total.estimate.std_error;

            if (rep.measure_admissible) {
                rep.H_grid_used = doc.H_grid;
                if (rep.H_grid_used.empty()) {
                    const double hi = rep.extrema.l_max;
                    double lo = 1.1 * rep.extrema.h_one;
                    if (!(lo > 0.0)) lo = 1e-3 * hi;
                    if (!(lo < hi)) lo = 0.5 * hi;
                    for (int i = 0; i < 16; ++i)
                        rep.H_grid_used.push_back(lo + (hi - lo) * i / 15.0);
                }
                for (double H : rep.H_grid_used) {
                    MeasureRow row;
                    row.H = H;
                    SurfaceMeasureOptions opt;
                    opt.restricted = true;
                    opt.restrict_g0 = grad_norm;
                    opt.H = H;
                    SurfaceMeasureResult mu =
                        surface_measure(*doc.surface, opt, doc.sampling.resolution);
                    row.mu_est = mu.estimate.value;
                    row.mu_disc = mu.estimate.std_error;
                    MeasureEstimate vol =
                        sublevel_measure(grad_norm, doc.domain, H, doc.sampling.samples,
                                         doc.sampling.seed, doc.sampling.threads);
                    row.vol_EH = vol.value;
                    row.vol_EH_se = vol.std_error;

                    BoundInputs in;
                    in.n = n;
                    in.r = rep.r_surface;
                    in.k = rep.k_surface;
                    in.H = H;
                    in.G_levels.assign(rep.g_surface.begin() + 1,
                                       rep.g_surface.begin() + 1 + rep.k_surface);
                    in.G_paren = g_paren_chain(H, rep.g_surface[rep.k_surface], rep.k_surface);
                    in.L = rep.extrema.l_max;
                    in.H_tilde = rep.extrema.h_tilde;
                    in.H_1 = rep.extrema.h_one;
                    in.vol_domain = rep.vol_domain;
                    row.G_paren = in.G_paren;
                    row.thm1 = theorem1_bound(in, doc.constants);
                    row.thm2 = theorem2_bound(in, doc.constants, rep.k_surface);
                    row.thm3 = theorem3_bound(in, doc.constants, rep.k_surface);
                    rep.measure_rows.push_back(std::move(row));
                }
                for (std::size_t i = 0; i < rep.measure_rows.size(); ++i) {
                    const auto& row = rep.measure_rows[i];
                    rep.verdicts.push_back(detail::make_leq_verdict(
                        "theorem1[" + std::to_string(i) + "]", row.mu_est, row.thm1));
                    rep.verdicts.push_back(detail::make_leq_verdict(
                        "theorem3[" + std::to_string(i) + "]", row.mu_est, row.thm3));
                }
            }
        } catch (const std::exception& e) {
            throw StageError("measure", e.what());
        }
    }

    // ---- coarea section ---------------------------------------------------
    if (stages & kStageCoarea) {
        try {
            rep.has_coarea = true;
            rep.profile = level_profile(doc.phase, doc.domain, doc.sampling.grid_points,
                                        doc.sampling.samples, doc.sampling.seed,
                                        doc.sampling.threads);
            rep.pieces = monotone_split(rep.profile);
            rep.piece_idx = piece_index_per_point(rep.profile, rep.pieces);
            rep.reconstruction = oscillatory_from_profile(rep.profile);
            rep.profile_mass_value = profile_mass(rep.profile);
            rep.verdicts.push_back(detail::make_tol_verdict(
                "coarea_normalization", std::abs(rep.profile_mass_value - rep.vol_domain),
                5.0 * rep.profile.noise_scale));
        } catch (const std::exception& e) {
            throw StageError("coarea", e.what());
        }
    }

    // ---- oracle section ---------------------------------------------------
    if (stages & kStageOracle) {
        try {
            rep.has_oracle = true;
            rep.oracle_tol_used = doc.oracle_tol > 0.0 ? doc.oracle_tol : (n == 1 ? 1e-8 : 1e-5);
            rep.oracle = oscillatory_integral(doc.phase, doc.domain, rep.oracle_tol_used);
            if (!rep.oracle.converged) rep.flag_not_converged = true;
            rep.verdicts.push_back(detail::make_leq_verdict(
                "oracle_modulus_bound", std::abs(rep.oracle.value),
                rep.vol_domain + rep.oracle.abs_error_estimate +
                    (rep.vol_is_estimate ? 3.0 * rep.vol_domain_se : 0.0)));
            if (rep.oracle.has_qmc) {
                rep.verdicts.push_back(detail::make_tol_verdict(
                    "oracle_method_agreement",
                    std::abs(rep.oracle.value - rep.oracle.qmc_value),
                    3.0 * (rep.oracle.abs_error_estimate + rep.oracle.qmc_error_estimate)));
            }
        } catch (const std::exception& e) {
            throw StageError("oracle", e.what());
        }
    }

    if (rep.has_coarea && rep.has_oracle) {
        rep.verdicts.push_back(detail::make_tol_verdict(
            "coarea_reconstruction", std::abs(rep.reconstruction - rep.oracle.value),
            10.0 * rep.profile.noise_scale + 1.0 / doc.sampling.grid_points));
    }

    // ---- theorem 4 + consequence -----------------------------------------
    if (stages & kStageBounds) {
        try {
            rep.has_bounds = true;
            const double measured_K = rep.has_coarea ? static_cast<double>(rep.pieces.count)
                                                     : doc.constants.K;
            BoundInputs in;
            in.n = n;
            in.r = r;
            in.k = doc.k;
            in.H = rep.extrema.h_tilde;
            in.G_levels.assign(rep.extrema.g_min.begin() + 1, rep.extrema.g_min.end());
            in.L = rep.extrema.l_max;
            in.H_tilde = rep.extrema.h_tilde;
            in.H_1 = rep.extrema.h_one;
            in.vol_domain = rep.vol_domain;

            const Theorem4Case routed = route_theorem4_case(doc.k, r);
            rep.t4_case = routed == Theorem4Case::k_ge_r
                              ? "k_ge_r"
                              : (routed == Theorem4Case::k_lt_r_a ? "k_lt_r_a" : "k_lt_r_b");
            ConstantsConfig cfg_meas = doc.constants;
            cfg_meas.K = measured_K;
            try {
                if (doc.k >= 2 && doc.k - 1 <= rep.chain_depth)
                    rep.t4_G = rep.extrema.g_min[doc.k - 1];
                rep.t4_bound_cfgK = theorem4_bound(routed, in, doc.constants, rep.t4_G);
                rep.t4_bound_measuredK0 = theorem4_bound(routed, in, cfg_meas, rep.t4_G);
                const double g_km1 = doc.k >= 2 ? in.G_levels[doc.k - 2] : in.H_1;
                rep.t4_L0 = theorem4_l0(in, g_km1);
                rep.t4_admissible = true;
                rep.t4_vacuous = std::isinf(rep.t4_bound_measuredK0);
            } catch (const std::exception& e) {
                rep.t4_admissible = false;
                rep.t4_note = e.what();
            }
            if (rep.t4_admissible && rep.has_oracle) {
                rep.verdicts.push_back(detail::make_leq_verdict(
                    "theorem4", std::abs(rep.oracle.value), rep.t4_bound_measuredK0));
            }
            // the k < r regime also admits the area-based variant: report it
            // alongside the routed case when a level sweep is possible
            if (routed == Theorem4Case::k_lt_r_a && rep.t4_admissible && rep.has_coarea &&
                n >= 2) {
                try {
                    in.Pi_area = detail::max_level_measure(doc.phase, doc.domain, rep.profile.m,
                                                           rep.profile.M, doc.sampling.resolution);
                    rep.t4_pi_area = in.Pi_area;
                    rep.t4_case2b_cfgK =
                        theorem4_bound(Theorem4Case::k_lt_r_b, in, doc.constants, rep.t4_G);
                    rep.t4_case2b_measuredK0 =
                        theorem4_bound(Theorem4Case::k_lt_r_b, in, cfg_meas, rep.t4_G);
                    rep.t4_case2b_available = true;
                } catch (const std::exception&) {
                }
            }
            if (rep.t4_case2b_available && rep.has_oracle) {
                rep.verdicts.push_back(detail::make_leq_verdict(
                    "theorem4_case2b", std::abs(rep.oracle.value), rep.t4_case2b_measuredK0));
            }

            try {
                LambdaEstimate lam =
                    minimal_singular_combination(*chain, doc.domain, doc.k, r, plan);
                rep.lambda = lam.lambda;
                rep.lambda_argmin = lam.argmin;
                if (!(rep.lambda > detail::kAdmissibleEps))
                    throw std::domain_error("lambda vanishes at the sampled minimum");
                rep.conseq_log_factor_value =
                    consequence_log_factor(rep.lambda, in.G_levels, in.L, r);
                rep.conseq_bound_cfgK = consequence_bound_value(
                    rep.lambda, rep.conseq_log_factor_value, r, doc.constants);
                rep.conseq_bound_measuredK0 = consequence_bound_value(
                    rep.lambda, rep.conseq_log_factor_value, r, cfg_meas);
                rep.conseq_defined = true;
            } catch (const std::exception& e) {
                rep.conseq_defined = false;
                rep.conseq_note = e.what();
            }
            if (rep.conseq_defined && rep.has_oracle) {
                rep.verdicts.push_back(detail::make_leq_verdict(
                    "consequence", std::abs(rep.oracle.value), rep.conseq_bound_measuredK0));
            }
        } catch (const std::exception& e) {
            throw StageError("bounds", e.what());
        }
    }

    // ---- decay section ----------------------------------------------------
    if ((stages & kStageDecay) && !doc.t_grid.empty()) {
        try {
            rep.has_decay = true;
            const double tol = rep.oracle_tol_used > 0.0
                                   ? rep.oracle_tol_used
                                   : (n == 1 ? 1e-9 : 1e-5);
            for (double t : doc.t_grid) {
                DecayRow row;
                row.t = t;
                OracleResult o = oscillatory_integral_scaled(doc.phase, doc.domain, t, tol);
                if (!o.converged) rep.flag_not_converged = true;
                row.abs_I = std::abs(o.value);
                row.err = o.abs_error_estimate;
                row.bound = std::numeric_limits<double>::infinity();
                if (rep.has_bounds && t > 0.0) {
                    // chain matrices scale linearly in t, so every singular
                    // value does too: G_j -> t^{r_eff(j)} G_j, L -> t L
                    BoundInputs sc;
                    sc.n = n;
                    sc.r = r;
                    sc.k = doc.k;
                    sc.G_levels.clear();
                    for (std::size_t j = 1; j < rep.extrema.g_min.size(); ++j)
                        sc.G_levels.push_back(std::pow(t, n) * rep.extrema.g_min[j]);
                    sc.L = t * rep.extrema.l_max;
                    sc.H = sc.H_tilde = t * rep.extrema.h_tilde;
                    sc.H_1 = t * rep.extrema.h_one;
                    const double measured_K = rep.has_coarea
                                                  ? static_cast<double>(rep.pieces.count)
                                                  : doc.constants.K;
                    ConstantsConfig cfg_meas = doc.constants;
                    cfg_meas.K = measured_K;
                    double best = std::numeric_limits<double>::infinity();
                    try {
                        const double g_scaled = doc.k >= 2 ? std::pow(t, n) * rep.t4_G : 0.0;
                        best = std::min(best, theorem4_bound(route_theorem4_case(doc.k, r), sc,
                                                             cfg_meas, g_scaled));
                    } catch (const std::exception&) {
                    }
                    if (rep.conseq_defined) {
                        const double lam_t = doc.k <= r
                                                 ? t * rep.lambda
                                                 : std::pow(t, static_cast<double>(r) / doc.k) *
                                                       rep.lambda;
                        try {
                            const double pk =
                                consequence_log_factor(lam_t, sc.G_levels, sc.L, r);
                            best = std::min(best,
                                            consequence_bound_value(lam_t, pk, r, cfg_meas));
                        } catch (const std::exception&) {
                        }
                    }
                    row.bound = best;
                }
                rep.decay_rows.push_back(row);
            }
            for (const auto& row : rep.decay_rows) {
                if (row.t <= 0.0) continue;
                rep.decay.t.push_back(row.t);
                rep.decay.abs_I.push_back(row.abs_I);
                rep.decay.error.push_back(row.err);
            }
            if (rep.decay.t.size() >= 5) {
                const auto [lo, hi] =
                    std::minmax_element(rep.decay.t.begin(), rep.decay.t.end());
                if (*hi / *lo >= 100.0) fit_decay_tail(rep.decay);
            }
        } catch (const std::exception& e) {
            throw StageError("decay", e.what());
        }
    }

    return rep;
}

} // namespace oscbound
