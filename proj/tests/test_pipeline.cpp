#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oscbound/document.hpp"
#include "oscbound/pipeline.hpp"
#include "oscbound/report.hpp"

using namespace oscbound;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ProblemDocument sample_doc() { return parse_document_text(slurp(OSCBOUND_SAMPLE_DOC)); }

std::string tmp_path(const std::string& name) {
    return std::string("pipeline_test_") + name;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(OSCBOUND_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

double num(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

} // namespace

TEST_CASE("document parsing round trip and validation") {
    ProblemDocument doc = sample_doc();
    CHECK(doc.n == 2);
    CHECK(doc.k == 2);
    CHECK(doc.phase == parse_polynomial("x0*x1", 2));
    REQUIRE(doc.surface.has_value());
    CHECK(doc.surface->equations[0] == parse_polynomial("x0*x1 - 1", 2));

    CHECK_THROWS_AS(parse_document_text("{}"), DocumentError);
    CHECK_THROWS_AS(parse_document_text("{\"schema\":\"nope\"}"), DocumentError);
    CHECK_THROWS_AS(parse_document_text("not json"), DocumentError);
    // record-form polynomial
    ProblemDocument rec = parse_document_text(R"({
        "schema": "oscbound/1", "n": 2, "k": 2,
        "phase": {"terms": [{"coeff": "1/2", "exps": [1, 1]}, {"coeff": -1, "exps": [0, 2]}]},
        "domain": {"lower": [0, 0], "upper": [1, 1]}
    })");
    CHECK(rec.phase == parse_polynomial("1/2*x0*x1 - x1^2", 2));
}

TEST_CASE("run_verify on the bundled document: verdicts all hold") {
    ProblemDocument doc = sample_doc();
    doc.sampling.samples = 100000;  // trimmed for unit-test speed
    doc.t_grid.clear();
    BoundReport rep = run_verify(doc);

    CHECK(rep.has_measure);
    CHECK(rep.measure_admissible);
    CHECK(rep.has_coarea);
    CHECK(rep.has_oracle);
    CHECK(rep.has_bounds);
    CHECK(rep.t4_admissible);
    CHECK_FALSE(rep.t4_vacuous);  // gradient bounded away from zero on this box
    CHECK(rep.t4_case == "k_ge_r");
    CHECK(rep.conseq_defined);
    CHECK(rep.all_verdicts_hold());

    // spectral values for x0*x1 on [1/2,3/2]^2 are known in closed form
    CHECK(rep.extrema.g_min[1] == Catch::Approx(1.0).margin(1e-10));
    CHECK(rep.extrema.h_one == Catch::Approx(std::sqrt(0.5)).margin(1e-6));
    CHECK(rep.extrema.h_tilde == Catch::Approx(1.5 * std::sqrt(2.0)).margin(1e-6));
    CHECK(rep.lambda == Catch::Approx(std::sqrt(0.5) + 1.0).margin(1e-6));
}

TEST_CASE("report serialization is byte-stable and self-consistent") {
    ProblemDocument doc = sample_doc();
    doc.sampling.samples = 60000;
    doc.sampling.grid_points = 128;
    doc.sampling.resolution = 128;
    doc.t_grid.clear();
    BoundReport rep1 = run_verify(doc);
    BoundReport rep2 = run_verify(doc);
    const std::string j1 = report_to_json(rep1);
    const std::string j2 = report_to_json(rep2);
    CHECK(j1 == j2);

    // different worker counts: identical bytes
    doc.sampling.threads = 4;
    BoundReport rep3 = run_verify(doc);
    CHECK(report_to_json(rep3) == j1);

    // recompute each theorem bound from the echoed report values, bit for bit
    json r = json::parse(j1);
    const int n = r["inputs"]["n"].get<int>();
    const int r_surface = r["measure"]["r_surface"].get<int>();
    const int k_surface = r["measure"]["k_surface"].get<int>();
    std::vector<double> g_surface;
    for (const auto& v : r["measure"]["G_surface"]) g_surface.push_back(num(v));
    const double L = num(r["computed"]["spectral"]["L"]);
    const double h_tilde = num(r["computed"]["spectral"]["H_tilde"]);
    const double h_one = num(r["computed"]["spectral"]["H_1"]);
    ConstantsConfig cfg;  // the sample document leaves every constant at 1
    for (const auto& row : r["measure"]["rows"]) {
        BoundInputs in;
        in.n = n;
        in.r = r_surface;
        in.k = k_surface;
        in.H = num(row["H"]);
        in.G_levels.assign(g_surface.begin() + 1, g_surface.begin() + 1 + k_surface);
        for (const auto& v : row["G_paren"]) in.G_paren.push_back(num(v));
        in.L = L;
        in.H_tilde = h_tilde;
        in.H_1 = h_one;
        CHECK(theorem1_bound(in, cfg) == num(row["thm1"]));
        CHECK(theorem2_bound(in, cfg, k_surface) == num(row["thm2"]));
        CHECK(theorem3_bound(in, cfg, k_surface) == num(row["thm3"]));
    }

    // theorem 4 and the consequence from echoed inputs
    {
        BoundInputs in;
        in.n = n;
        in.r = n;
        in.k = r["inputs"]["k"].get<int>();
        std::vector<double> g;
        for (const auto& v : r["computed"]["spectral"]["G"]) g.push_back(num(v));
        in.G_levels.assign(g.begin() + 1, g.end());
        in.L = L;
        in.H_tilde = h_tilde;
        in.H_1 = h_one;
        ConstantsConfig cfg_meas;
        cfg_meas.K = r["coarea"]["K0"].get<int>();
        CHECK(theorem4_bound(Theorem4Case::k_ge_r, in, cfg_meas, num(r["theorem4"]["G"])) ==
              num(r["theorem4"]["bound_measuredK0"]));
        const double lambda = num(r["consequence"]["lambda"]);
        const double pk = consequence_log_factor(lambda, in.G_levels, in.L, n);
        CHECK(pk == num(r["consequence"]["log_factor"]));
        CHECK(consequence_bound_value(lambda, pk, n, cfg_meas) ==
              num(r["consequence"]["bound_measuredK0"]));
    }
}

TEST_CASE("plot data export shapes") {
    ProblemDocument doc = sample_doc();
    doc.sampling.samples = 60000;
    doc.sampling.grid_points = 128;
    doc.sampling.resolution = 128;
    doc.t_grid = {1.0, 2.0, 4.0};
    BoundReport rep = run_verify(doc);

    const std::string decay = emit_plot_data(rep, PlotKind::decay);
    CHECK(decay.rfind("t,abs_I,bound\n", 0) == 0);
    CHECK(std::count(decay.begin(), decay.end(), '\n') == 1 + 3);

    const std::string profile = emit_plot_data(rep, PlotKind::profile);
    CHECK(profile.rfind("u,V,phi,piece\n", 0) == 0);
    CHECK(std::count(profile.begin(), profile.end(), '\n') == 1 + 128);
    // piece indices nondecreasing
    std::istringstream lines(profile);
    std::string line;
    std::getline(lines, line);
    int prev = 0;
    while (std::getline(lines, line)) {
        const int piece = std::stoi(line.substr(line.rfind(',') + 1));
        CHECK(piece >= prev);
        prev = piece;
    }

    const std::string measure = emit_plot_data(rep, PlotKind::measure);
    CHECK(measure.rfind("H,mu_est,thm1,thm2,thm3\n", 0) == 0);
    CHECK(std::count(measure.begin(), measure.end(), '\n') == 1 + 16);

    BoundReport no_decay = rep;
    no_decay.has_decay = false;
    CHECK_THROWS(emit_plot_data(no_decay, PlotKind::decay));
}

TEST_CASE("k = 1 documents surface the undefined theorem-4 division") {
    ProblemDocument doc = sample_doc();
    doc.k = 1;
    doc.t_grid.clear();
    doc.sampling.samples = 40000;
    BoundReport rep = run_verify(doc);
    CHECK_FALSE(rep.t4_admissible);
    CHECK(rep.t4_note.find("k-1") != std::string::npos);
    CHECK(rep.conseq_defined);  // the consequence needs no k-1 division
    CHECK(rep.all_verdicts_hold());
}

TEST_CASE("three-dimensional pipeline smoke run") {
    ProblemDocument doc;
    doc.n = 3;
    doc.k = 2;
    doc.phase = parse_polynomial("x0*x1 + x2^2", 3);
    doc.domain = BoxDomain({0.5, 0.5, 0.5}, {1.5, 1.5, 1.5});
    doc.surface = SurfaceSystem{{parse_polynomial("x0*x1 + x2^2 - 2", 3)}, doc.domain};
    doc.sampling.samples = 60000;
    doc.sampling.grid_points = 64;
    doc.sampling.resolution = 48;
    doc.oracle_tol = 5e-4;
    BoundReport rep = run_verify(doc);
    CHECK(rep.has_measure);
    CHECK(rep.r_surface == 2);
    CHECK(rep.has_oracle);
    // k = 2 < r = 3: both the gradient-based and the area-based variants run
    CHECK(rep.t4_case == "k_lt_r_a");
    CHECK(rep.t4_admissible);
    CHECK(rep.t4_case2b_available);
    CHECK(rep.t4_pi_area > 0.0);
    CHECK(rep.all_verdicts_hold());
    // serialization stays well-formed in three dimensions
    CHECK(nlohmann::json::parse(report_to_json(rep))["inputs"]["n"] == 3);
}

TEST_CASE("stage errors name the failing stage") {
    ProblemDocument doc = sample_doc();
    doc.phase = Polynomial::constant(2, Rational(3));  // constant phase
    doc.t_grid.clear();
    try {
        run_verify(doc);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage_name == "spectral");
    }
}

TEST_CASE("partial runs mark missing sections") {
    ProblemDocument doc = sample_doc();
    doc.sampling.samples = 50000;
    doc.t_grid.clear();
    BoundReport rep = run_verify(doc, kStageOracle);
    CHECK(rep.has_oracle);
    CHECK_FALSE(rep.has_coarea);
    CHECK_FALSE(rep.has_measure);
    const std::string j = report_to_json(rep);
    json r = json::parse(j);
    CHECK(r["coarea"].is_null());
    CHECK(r["measure"].is_null());
    CHECK(r["theorem4"].is_null());
}

TEST_CASE("cli: exit codes and byte-identical reports") {
    const std::string out1 = tmp_path("r1.json");
    const std::string out2 = tmp_path("r2.json");
    const std::string base = std::string("verify --in ") + OSCBOUND_SAMPLE_DOC +
                             " --samples 50000 --grid 128 --resolution 128";
    // note: --threads varies; bytes must not
    REQUIRE(run_cli(base + " --out " + out1 + " --threads 1") == 0);
    REQUIRE(run_cli(base + " --out " + out2 + " --threads 3") == 0);
    CHECK(slurp(out1) == slurp(out2));
    std::remove(out1.c_str());
    std::remove(out2.c_str());

    CHECK(run_cli("verify --in /nonexistent.json") == 2);

    const std::string bad = tmp_path("bad.json");
    {
        std::ofstream f(bad);
        f << "{\"schema\": \"oscbound/1\", \"n\": 2}";
    }
    CHECK(run_cli("verify --in " + bad) == 2);
    std::remove(bad.c_str());

    // constant phase -> numeric stage failure
    const std::string degenerate = tmp_path("deg.json");
    {
        std::ofstream f(degenerate);
        f << R"({"schema": "oscbound/1", "n": 1, "k": 2, "phase": "7",
                 "domain": {"lower": [0], "upper": [1]}})";
    }
    CHECK(run_cli("verify --in " + degenerate) == 3);
    std::remove(degenerate.c_str());
}

TEST_CASE("cli: failing verdict yields exit code 1") {
    // a vanishingly small case constant pushes the bound below |I|
    const std::string doc = tmp_path("fail.json");
    {
        std::ofstream f(doc);
        f << R"({"schema": "oscbound/1", "n": 2, "k": 2, "phase": "x0*x1",
                 "domain": {"lower": [0.5, 0.5], "upper": [1.5, 1.5]},
                 "constants": {"c4": 1e-12},
                 "sampling": {"samples": 40000, "grid_points": 128}})";
    }
    CHECK(run_cli("verify --in " + doc) == 1);
    std::remove(doc.c_str());
}

TEST_CASE("cli: verify csv prefix writes one file per section") {
    const std::string prefix = tmp_path("csv_");
    const std::string cmd = std::string("verify --in ") + OSCBOUND_SAMPLE_DOC +
                            " --samples 40000 --grid 128 --resolution 128 --csv " + prefix;
    REQUIRE(run_cli(cmd) == 0);
    for (const char* name : {"decay.csv", "profile.csv", "measure.csv"}) {
        std::ifstream f(prefix + name);
        CHECK(f.good());
        std::remove((prefix + name).c_str());
    }
}

TEST_CASE("cli: standalone subcommands") {
    const std::string out = tmp_path("sub.json");
    const std::string csv = tmp_path("sub.csv");
    const std::string doc = OSCBOUND_SAMPLE_DOC;
    CHECK(run_cli("oracle --in " + doc + " --tol 1e-6 --out " + out) == 0);
    CHECK(run_cli("profile --in " + doc + " --samples 50000 --csv " + csv) == 0);
    {
        std::ifstream f(csv);
        std::string header;
        std::getline(f, header);
        CHECK(header == "u,V,phi,piece");
    }
    CHECK(run_cli("measure --in " + doc + " --samples 50000 --resolution 128 --csv " + csv) ==
          0);
    {
        std::ifstream f(csv);
        std::string header;
        std::getline(f, header);
        CHECK(header == "H,mu_est,thm1,thm2,thm3");
    }
    CHECK(run_cli("bound --in " + doc) == 0);
    std::remove(out.c_str());
    std::remove(csv.c_str());
}
