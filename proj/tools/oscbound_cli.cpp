// Command-line driver: read a problem document, run the requested pipeline
// stages, write the verification report and optional plot CSVs.
//
// Exit codes: 0 all verdicts hold, 1 some verdict fails, 2 input error,
// 3 numeric stage failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oscbound/document.hpp"
#include "oscbound/pipeline.hpp"
#include "oscbound/report.hpp"

namespace {

struct CommonArgs {
    std::string in_path;
    std::string out_path;
    std::string csv_path;
    std::int64_t seed = -1;
    std::int64_t samples = -1;
    int grid = -1;
    int resolution = -1;
    double tol = -1.0;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_csv) {
    cmd->add_option("--in", args.in_path, "problem document (JSON, schema oscbound/1)")
        ->required();
    cmd->add_option("--out", args.out_path, "write the report JSON here");
    if (with_csv) cmd->add_option("--csv", args.csv_path, "write plot data CSV here");
    cmd->add_option("--seed", args.seed, "override sampling.seed");
    cmd->add_option("--samples", args.samples, "override sampling.samples");
    cmd->add_option("--grid", args.grid, "override sampling.grid_points");
    cmd->add_option("--resolution", args.resolution, "override sampling.resolution");
    cmd->add_option("--tol", args.tol, "override the oracle error target");
    cmd->add_option("--threads", args.threads, "worker threads for sampling stages");
}

oscbound::ProblemDocument load_document(const CommonArgs& args) {
    std::ifstream in(args.in_path);
    if (!in) throw oscbound::DocumentError("cannot open input file: " + args.in_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    oscbound::ProblemDocument doc = oscbound::parse_document_text(buf.str());
    if (args.seed >= 0) doc.sampling.seed = static_cast<std::uint64_t>(args.seed);
    if (args.samples > 0) doc.sampling.samples = args.samples;
    if (args.grid > 0) doc.sampling.grid_points = args.grid;
    if (args.resolution > 0) doc.sampling.resolution = args.resolution;
    if (args.tol > 0.0) doc.oracle_tol = args.tol;
    if (args.threads > 0) doc.sampling.threads = args.threads;
    return doc;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

void print_verdicts(const oscbound::BoundReport& rep) {
    for (const auto& v : rep.verdicts) {
        std::cout << (v.holds ? "[ok]   " : "[FAIL] ") << v.name << "  measured="
                   << oscbound::csv_num(v.measured) << "  bound=" << oscbound::csv_num(v.bound)
                   << "  margin=" << oscbound::csv_num(v.margin) << "\n";
    }
    std::cout << (rep.all_verdicts_hold() ? "all verdicts hold" : "SOME VERDICTS FAIL") << "\n";
}

int finish(const oscbound::BoundReport& rep, const CommonArgs& args,
           oscbound::PlotKind* csv_kind) {
    if (!args.out_path.empty()) write_file(args.out_path, oscbound::report_to_json(rep));
    if (!args.csv_path.empty() && csv_kind)
        write_file(args.csv_path, oscbound::emit_plot_data(rep, *csv_kind));
    print_verdicts(rep);
    return rep.all_verdicts_hold() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"oscillatory-integral bound verification toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* verify = app.add_subcommand("verify", "run the full pipeline and all checks");
    add_common(verify, args, true);
    auto* oracle = app.add_subcommand("oracle", "high-accuracy integral only");
    add_common(oracle, args, false);
    auto* profile = app.add_subcommand("profile", "level profile / monotone split only");
    add_common(profile, args, true);
    auto* measure = app.add_subcommand("measure", "surface measures and their bounds only");
    add_common(measure, args, true);
    auto* bound = app.add_subcommand("bound", "spectral extrema and bound formulas only");
    add_common(bound, args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        const oscbound::ProblemDocument doc = load_document(args);
        using oscbound::PlotKind;
        if (verify->parsed()) {
            oscbound::BoundReport rep = oscbound::run_verify(doc);
            if (!args.csv_path.empty()) {
                // prefix mode: one CSV per available section
                if (rep.has_decay)
                    write_file(args.csv_path + "decay.csv",
                               emit_plot_data(rep, PlotKind::decay));
                if (rep.has_coarea)
                    write_file(args.csv_path + "profile.csv",
                               emit_plot_data(rep, PlotKind::profile));
                if (rep.has_measure && rep.measure_admissible)
                    write_file(args.csv_path + "measure.csv",
                               emit_plot_data(rep, PlotKind::measure));
            }
            if (!args.out_path.empty()) write_file(args.out_path, report_to_json(rep));
            print_verdicts(rep);
            return rep.all_verdicts_hold() ? 0 : 1;
        }
        if (oracle->parsed()) {
            oscbound::BoundReport rep = oscbound::run_verify(doc, oscbound::kStageOracle);
            std::cout << "I = " << oscbound::csv_num(rep.oracle.value.real()) << " + "
                       << oscbound::csv_num(rep.oracle.value.imag()) << "i  |I| = "
                       << oscbound::csv_num(std::abs(rep.oracle.value)) << "  err <= "
                       << oscbound::csv_num(rep.oracle.abs_error_estimate) << "\n";
            CommonArgs a = args;
            return finish(rep, a, nullptr);
        }
        if (profile->parsed()) {
            oscbound::BoundReport rep = oscbound::run_verify(doc, oscbound::kStageCoarea);
            PlotKind kind = PlotKind::profile;
            return finish(rep, args, &kind);
        }
        if (measure->parsed()) {
            oscbound::BoundReport rep = oscbound::run_verify(doc, oscbound::kStageMeasure);
            PlotKind kind = PlotKind::measure;
            if (!rep.has_measure)
                std::cout << "document has no surface section; nothing to measure\n";
            if (!args.csv_path.empty() && !(rep.has_measure && rep.measure_admissible)) {
                std::cout << "measure rows unavailable; CSV not written\n";
                args.csv_path.clear();
            }
            return finish(rep, args, &kind);
        }
        // bound
        oscbound::BoundReport rep = oscbound::run_verify(doc, oscbound::kStageBounds);
        return finish(rep, args, nullptr);
    } catch (const oscbound::DocumentError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const oscbound::StageError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
