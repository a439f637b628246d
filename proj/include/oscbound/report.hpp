#pragma once

#include <stdexcept>
#include <string>

#include "oscbound/jsonout.hpp"
#include "oscbound/pipeline.hpp"

namespace oscbound {

namespace detail {

inline void write_poly(JsonWriter& w, const std::string& key, const Polynomial& p) {
    w.field(key, p.print());
}

inline void write_inputs_echo(JsonWriter& w, const ProblemDocument& doc) {
    w.key("inputs");
    w.begin_object();
    w.field("n", doc.n);
    w.field("k", doc.k);
    write_poly(w, "phase", doc.phase);
    w.key("domain");
    w.begin_object();
    w.field("lower", doc.domain.lower);
    w.field("upper", doc.domain.upper);
    w.key("constraints");
    w.begin_array();
    for (const auto& c : doc.domain.constraints) {
        w.begin_object();
        write_poly(w, "poly", c.poly);
        w.field("relation", c.relation == BoxDomain::Relation::le_zero ? "<=0" : ">=0");
        w.end_object();
    }
    w.end_array();
    w.end_object();
    w.key("surface");
    if (doc.surface) {
        w.begin_object();
        w.key("equations");
        w.begin_array();
        for (const auto& e : doc.surface->equations) w.value(e.print());
        w.end_array();
        w.end_object();
    } else {
        w.null_value();
    }
    w.field("H_grid", doc.H_grid);
    w.field("t_grid", doc.t_grid);
    w.key("constants");
    w.begin_object();
    w.field("F_charts", doc.constants.F_charts);
    w.field("T0", doc.constants.T0);
    w.field("K", doc.constants.K);
    w.field("c_dprime", doc.constants.c_dprime);
    w.field("c_n", doc.constants.c_n);
    w.field("c1", doc.constants.c1);
    w.field("c2", doc.constants.c2);
    w.field("c3", doc.constants.c3);
    w.field("c4", doc.constants.c4);
    w.end_object();
    w.key("sampling");
    w.begin_object();
    // the worker count is an execution knob, not a problem parameter: it is
    // deliberately not echoed so reports stay byte-identical across workers
    w.field("seed", static_cast<unsigned long long>(doc.sampling.seed));
    w.field("samples", static_cast<long long>(doc.sampling.samples));
    w.field("grid_points", doc.sampling.grid_points);
    w.field("resolution", doc.sampling.resolution);
    w.field("spectral_grid", doc.sampling.spectral_grid);
    w.end_object();
    w.field("oracle_tol", doc.oracle_tol);
    w.end_object();
}

inline void write_point(JsonWriter& w, const std::string& key, const std::vector<double>& x) {
    w.field(key, x);
}

} // namespace detail

/// Serialize a report to canonical JSON: fixed key order, 17-significant-digit
/// floats, non-finite values as "inf"/"-inf"/"nan" strings. Two equal reports
/// produce identical bytes.
inline std::string report_to_json(const BoundReport& rep) {
    JsonWriter w;
    w.begin_object();
    w.field("schema", "oscbound/1");
    w.field("kind", "report");
    detail::write_inputs_echo(w, rep.doc);

    w.key("computed");
    w.begin_object();
    w.field("vol_domain", rep.vol_domain);
    w.field("vol_domain_std_error", rep.vol_domain_se);
    w.field("vol_is_estimate", rep.vol_is_estimate);
    w.key("chain");
    w.begin_object();
    w.field("r", rep.r_pipeline);
    w.field("depth", rep.chain_depth);
    w.field("level_cols", rep.level_cols);
    w.field("level_degrees", rep.level_degrees);
    w.end_object();
    w.key("spectral");
    w.begin_object();
    w.field("policy", "gradient_row_then_full_product");
    w.field("G", rep.extrema.g_min);
    w.key("argmin");
    w.begin_array();
    for (const auto& p : rep.extrema.argmin) {
        w.begin_array();
        for (double v : p) w.value(v);
        w.end_array();
    }
    w.end_array();
    w.field("L", rep.extrema.l_max);
    w.field("L_per_level", rep.extrema.l_max_per_level);
    detail::write_point(w, "L_argmax", rep.extrema.l_argmax);
    w.field("H_tilde", rep.extrema.h_tilde);
    w.field("H_1", rep.extrema.h_one);
    w.field("sample_resolution", rep.extrema.sample_resolution);
    w.field("heuristic", rep.extrema.heuristic);
    w.end_object();
    w.end_object();

    w.key("measure");
    if (rep.has_measure) {
        w.begin_object();
        w.field("admissible", rep.measure_admissible);
        w.field("note", rep.measure_note);
        w.field("r_surface", rep.r_surface);
        w.field("k_surface", rep.k_surface);
        w.field("G_surface", rep.g_surface);
        w.field("surface_total", rep.surface_total);
        w.field("surface_total_discrepancy", rep.surface_total_disc);
        w.field("H_grid", rep.H_grid_used);
        w.key("rows");
        w.begin_array();
        for (const auto& row : rep.measure_rows) {
            w.begin_object();
            w.field("H", row.H);
            w.field("G_paren", row.G_paren);
            w.field("mu_est", row.mu_est);
            w.field("mu_discrepancy", row.mu_disc);
            w.field("vol_EH", row.vol_EH);
            w.field("vol_EH_std_error", row.vol_EH_se);
            w.field("thm1", row.thm1);
            w.field("thm2", row.thm2);
            w.field("thm3", row.thm3);
            w.end_object();
        }
        w.end_array();
        w.end_object();
    } else {
        w.null_value();
    }

    w.key("coarea");
    if (rep.has_coarea) {
        w.begin_object();
        w.field("m", rep.profile.m);
        w.field("M", rep.profile.M);
        w.field("noise_scale", rep.profile.noise_scale);
        w.field("min_grad_seen", rep.profile.min_grad_seen);
        w.field("weak_gradient_warning", rep.profile.weak_gradient_warning);
        w.field("K0", rep.pieces.count);
        w.field("breakpoints", rep.pieces.breakpoints);
        w.key("directions");
        w.begin_array();
        for (auto d : rep.pieces.directions)
            w.value(d == MonotonePieces::Direction::nondecreasing ? "nondecreasing"
                                                                  : "nonincreasing");
        w.end_array();
        w.field("profile_mass", rep.profile_mass_value);
        w.key("reconstruction");
        w.begin_object();
        w.field("re", rep.reconstruction.real());
        w.field("im", rep.reconstruction.imag());
        w.field("abs", std::abs(rep.reconstruction));
        w.end_object();
        w.field("u", rep.profile.u_grid);
        w.field("V", rep.profile.V);
        w.field("phi", rep.profile.phi);
        w.field("piece", rep.piece_idx);
        w.end_object();
    } else {
        w.null_value();
    }

    w.key("oracle");
    if (rep.has_oracle) {
        w.begin_object();
        w.field("re", rep.oracle.value.real());
        w.field("im", rep.oracle.value.imag());
        w.field("abs", std::abs(rep.oracle.value));
        w.field("abs_error_estimate", rep.oracle.abs_error_estimate);
        w.field("target_error", rep.oracle_tol_used);
        w.field("method", "adaptive");
        w.field("evaluations", static_cast<long long>(rep.oracle.evaluations));
        w.field("converged", rep.oracle.converged);
        w.key("qmc");
        if (rep.oracle.has_qmc) {
            w.begin_object();
            w.field("re", rep.oracle.qmc_value.real());
            w.field("im", rep.oracle.qmc_value.imag());
            w.field("error_estimate", rep.oracle.qmc_error_estimate);
            w.end_object();
        } else {
            w.null_value();
        }
        w.end_object();
    } else {
        w.null_value();
    }

    w.key("theorem4");
    if (rep.has_bounds) {
        w.begin_object();
        w.field("case", rep.t4_case);
        w.field("admissible", rep.t4_admissible);
        w.field("note", rep.t4_note);
        w.field("G", rep.t4_G);
        w.field("L0", rep.t4_L0);
        w.field("bound_cfgK", rep.t4_bound_cfgK);
        w.field("bound_measuredK0", rep.t4_bound_measuredK0);
        w.field("vacuous", rep.t4_vacuous);
        w.key("case2b");
        if (rep.t4_case2b_available) {
            w.begin_object();
            w.field("pi_area", rep.t4_pi_area);
            w.field("bound_cfgK", rep.t4_case2b_cfgK);
            w.field("bound_measuredK0", rep.t4_case2b_measuredK0);
            w.end_object();
        } else {
            w.null_value();
        }
        w.end_object();
    } else {
        w.null_value();
    }

    w.key("consequence");
    if (rep.has_bounds) {
        w.begin_object();
        w.field("defined", rep.conseq_defined);
        w.field("note", rep.conseq_note);
        w.field("lambda", rep.lambda);
        detail::write_point(w, "lambda_argmin", rep.lambda_argmin);
        w.field("log_factor", rep.conseq_log_factor_value);
        w.field("bound_cfgK", rep.conseq_bound_cfgK);
        w.field("bound_measuredK0", rep.conseq_bound_measuredK0);
        w.end_object();
    } else {
        w.null_value();
    }

    w.key("decay");
    if (rep.has_decay) {
        w.begin_object();
        w.key("rows");
        w.begin_array();
        for (const auto& row : rep.decay_rows) {
            w.begin_object();
            w.field("t", row.t);
            w.field("abs_I", row.abs_I);
            w.field("error", row.err);
            w.field("bound", row.bound);
            w.end_object();
        }
        w.end_array();
        w.key("fit");
        w.begin_object();
        w.field("valid", rep.decay.valid);
        w.field("slope", rep.decay.slope);
        w.field("residual", rep.decay.residual);
        w.field("points_used", rep.decay.points_used);
        w.end_object();
        w.end_object();
    } else {
        w.null_value();
    }

    w.key("verdicts");
    w.begin_array();
    for (const auto& v : rep.verdicts) {
        w.begin_object();
        w.field("name", v.name);
        w.field("holds", v.holds);
        w.field("measured", v.measured);
        w.field("bound", v.bound);
        w.field("margin", v.margin);
        w.end_object();
    }
    w.end_array();

    w.key("flags");
    w.begin_object();
    w.field("heuristic_extrema", true);
    w.field("not_converged", rep.flag_not_converged);
    w.field("corrected_recursion", true);
    w.field("log_factor_convention", "iterated_bound_3r2_log_hmax");
    w.field("theorem4_vacuous", rep.t4_vacuous);
    w.end_object();

    w.field("all_verdicts_hold", rep.all_verdicts_hold());
    w.end_object();
    return w.str();
}

enum class PlotKind { decay, profile, measure };

/// Tabular export of one report section; header row plus 17-digit cells.
inline std::string emit_plot_data(const BoundReport& rep, PlotKind kind) {
    std::string out;
    switch (kind) {
        case PlotKind::decay: {
            if (!rep.has_decay) throw std::runtime_error("report has no decay section");
            out = "t,abs_I,bound\n";
            for (const auto& row : rep.decay_rows)
                out += csv_num(row.t) + "," + csv_num(row.abs_I) + "," + csv_num(row.bound) + "\n";
            break;
        }
        case PlotKind::profile: {
            if (!rep.has_coarea) throw std::runtime_error("report has no profile section");
            out = "u,V,phi,piece\n";
            for (int i = 0; i < rep.profile.grid_points(); ++i)
                out += csv_num(rep.profile.u_grid[i]) + "," + csv_num(rep.profile.V[i]) + "," +
                       csv_num(rep.profile.phi[i]) + "," + std::to_string(rep.piece_idx[i]) + "\n";
            break;
        }
        case PlotKind::measure: {
            if (!rep.has_measure || !rep.measure_admissible)
                throw std::runtime_error("report has no measure rows");
            out = "H,mu_est,thm1,thm2,thm3\n";
            for (const auto& row : rep.measure_rows)
                out += csv_num(row.H) + "," + csv_num(row.mu_est) + "," + csv_num(row.thm1) + "," +
                       csv_num(row.thm2) + "," + csv_num(row.thm3) + "\n";
            break;
        }
    }
    return out;
}

} // namespace oscbound
