#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hydropencil/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Exact toolkit for compatible hydrodynamic-type Hamiltonian operators"};
    app.require_subcommand(1);

    hydropencil::RunOptions opt;
    std::string out_path, csv_path;

    const char* commands[] = {"check-operator", "check-compat", "lie",       "residuals",
                              "flat-pencil",    "quasihom",     "hierarchy", "recover-h",
                              "simulate",       "commute"};
    for (const char* name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--manifest", opt.manifest_path, "problem manifest (JSON)")->required();
        sub->add_option("--steps", opt.steps, "number of hierarchy steps");
        sub->add_option("--out", out_path, "write the JSON report here");
        sub->add_option("--csv", csv_path, "write the conservation log here (simulate)");
        sub->add_flag("--no-timestamp", opt.no_timestamp,
                      "omit timestamp and timings for byte-identical reports");
        sub->callback([name, &opt] { opt.command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    hydropencil::RunResult result = hydropencil::run(opt);
    std::string text = result.report.dump(2);
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << text << "\n";
    }
    if (!csv_path.empty() && !result.csv.empty()) {
        std::ofstream out(csv_path);
        out << result.csv;
    }
    return result.exit_code;
}
