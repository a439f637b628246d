#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscbound/bounds.hpp"
#include "oscbound/measure.hpp"
#include "oscbound/polynomial.hpp"

namespace oscbound {

struct DocumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SamplingConfig {
    std::uint64_t seed = 20240214;
    std::int64_t samples = 200000;
    int grid_points = 512;
    int resolution = 512;
    int spectral_grid = 0;  // 0 -> dimension default
    int threads = 1;
};

/// Parsed problem document (schema "oscbound/1").
struct ProblemDocument {
    int n = 0;
    int k = 0;
    Polynomial phase{1};
    BoxDomain domain{{0.0}, {1.0}};
    std::optional<SurfaceSystem> surface;
    std::vector<double> H_grid;  // empty -> derived from the spectral extrema
    std::vector<double> t_grid;  // empty -> no decay section
    ConstantsConfig constants;
    SamplingConfig sampling;
    double oracle_tol = 0.0;  // 0 -> 1e-8 in 1-D, 1e-5 otherwise
};

namespace detail {

inline Polynomial parse_poly_field(const nlohmann::json& j, int n, const std::string& where) {
    if (j.is_string()) {
        try {
            return parse_polynomial(j.get<std::string>(), n);
        } catch (const PolyParseError& e) {
            throw DocumentError(where + ": " + e.what());
        }
    }
    if (j.is_object() && j.contains("terms")) {
        Polynomial p(n);
        for (const auto& t : j.at("terms")) {
            const auto& exps_j = t.at("exps");
            std::vector<int> exps;
            for (const auto& e : exps_j) exps.push_back(e.get<int>());
            if (static_cast<int>(exps.size()) != n)
                throw DocumentError(where + ": exps length must equal n");
            Rational coeff;
            const auto& c = t.at("coeff");
            if (c.is_string()) {
                const std::string s = c.get<std::string>();
                const auto slash = s.find('/');
                try {
                    if (slash == std::string::npos)
                        coeff = Rational(std::stoll(s));
                    else
                        coeff = Rational(std::stoll(s.substr(0, slash)),
                                         std::stoll(s.substr(slash + 1)));
                } catch (const std::exception&) {
                    throw DocumentError(where + ": bad coefficient '" + s + "'");
                }
            } else if (c.is_number_integer()) {
                coeff = Rational(c.get<std::int64_t>());
            } else {
                throw DocumentError(where + ": coefficient must be an integer or 'p/q' string");
            }
            p.add_term(exps, coeff);
        }
        return p;
    }
    throw DocumentError(where + ": polynomial must be a grammar string or a terms record");
}

} // namespace detail

inline ProblemDocument parse_document(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema").get<std::string>() != "oscbound/1")
        throw DocumentError("document schema must be \"oscbound/1\"");
    ProblemDocument doc;
    doc.n = j.at("n").get<int>();
    if (doc.n < 1 || doc.n > 3) throw DocumentError("n must be 1, 2 or 3");
    doc.k = j.at("k").get<int>();
    if (doc.k < 1) throw DocumentError("k must be at least 1");
    doc.phase = detail::parse_poly_field(j.at("phase"), doc.n, "phase");

    const auto& dj = j.at("domain");
    std::vector<double> lo = dj.at("lower").get<std::vector<double>>();
    std::vector<double> hi = dj.at("upper").get<std::vector<double>>();
    if (static_cast<int>(lo.size()) != doc.n || static_cast<int>(hi.size()) != doc.n)
        throw DocumentError("domain bounds must have length n");
    try {
        doc.domain = BoxDomain(lo, hi);
    } catch (const std::exception& e) {
        throw DocumentError(std::string("domain: ") + e.what());
    }
    if (dj.contains("constraints")) {
        for (const auto& cj : dj.at("constraints")) {
            const std::string rel = cj.at("relation").get<std::string>();
            if (rel != "<=0" && rel != ">=0")
                throw DocumentError("constraint relation must be \"<=0\" or \">=0\"");
            doc.domain.constraints.push_back(
                {detail::parse_poly_field(cj.at("poly"), doc.n, "constraint"),
                 rel == "<=0" ? BoxDomain::Relation::le_zero : BoxDomain::Relation::ge_zero});
        }
    }

    if (j.contains("surface") && !j.at("surface").is_null()) {
        SurfaceSystem sys{{}, doc.domain};
        for (const auto& ej : j.at("surface").at("equations"))
            sys.equations.push_back(detail::parse_poly_field(ej, doc.n, "surface equation"));
        if (sys.equations.empty()) throw DocumentError("surface needs at least one equation");
        doc.surface = std::move(sys);
    }

    if (j.contains("H_grid")) doc.H_grid = j.at("H_grid").get<std::vector<double>>();
    if (j.contains("t_grid")) doc.t_grid = j.at("t_grid").get<std::vector<double>>();

    if (j.contains("constants")) {
        const auto& cj = j.at("constants");
        auto get = [&](const char* name, double dflt) {
            return cj.contains(name) ? cj.at(name).get<double>() : dflt;
        };
        doc.constants.F_charts = get("F_charts", 1.0);
        doc.constants.T0 = get("T0", 1.0);
        doc.constants.K = get("K", 1.0);
        doc.constants.c_dprime = get("c_dprime", 1.0);
        doc.constants.c_n = get("c_n", 1.0);
        doc.constants.c1 = get("c1", 1.0);
        doc.constants.c2 = get("c2", 1.0);
        doc.constants.c3 = get("c3", 1.0);
        doc.constants.c4 = get("c4", 1.0);
        try {
            doc.constants.validate();
        } catch (const std::exception& e) {
            throw DocumentError(std::string("constants: ") + e.what());
        }
    }

    if (j.contains("sampling")) {
        const auto& sj = j.at("sampling");
        if (sj.contains("seed")) doc.sampling.seed = sj.at("seed").get<std::uint64_t>();
        if (sj.contains("samples")) doc.sampling.samples = sj.at("samples").get<std::int64_t>();
        if (sj.contains("grid_points")) doc.sampling.grid_points = sj.at("grid_points").get<int>();
        if (sj.contains("resolution")) doc.sampling.resolution = sj.at("resolution").get<int>();
        if (sj.contains("spectral_grid"))
            doc.sampling.spectral_grid = sj.at("spectral_grid").get<int>();
        if (sj.contains("threads")) doc.sampling.threads = sj.at("threads").get<int>();
        if (doc.sampling.samples < 1) throw DocumentError("sampling.samples must be positive");
        if (doc.sampling.grid_points < 16) throw DocumentError("sampling.grid_points must be >= 16");
        if (doc.sampling.resolution < 8) throw DocumentError("sampling.resolution must be >= 8");
        if (doc.sampling.threads < 1) throw DocumentError("sampling.threads must be >= 1");
    }
    if (j.contains("oracle_tol")) {
        doc.oracle_tol = j.at("oracle_tol").get<double>();
        if (!(doc.oracle_tol > 0.0)) throw DocumentError("oracle_tol must be positive");
    }
    return doc;
}

inline ProblemDocument parse_document_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DocumentError(std::string("invalid JSON: ") + e.what());
    }
    try {
        return parse_document(j);
    } catch (const nlohmann::json::exception& e) {
        throw DocumentError(std::string("bad document: ") + e.what());
    }
}

} // namespace oscbound
