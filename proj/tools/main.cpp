#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "singprop/error.hpp"
#include "singprop/io.hpp"
#include "suites.hpp"

extern "C" void openblas_set_num_threads(int);

using namespace singprop;
using namespace singprop::cli;

namespace {

const std::map<std::string, Json (*)(const SuiteContext&)> kSuites{
    {"flow", run_flow_suite},           {"period", run_period_suite},       {"spectrum", run_spectrum_suite},
    {"propagate", run_propagation_suite}, {"wavefront", run_wavefront_suite}, {"annular", run_annular_suite}};

int exit_code_for(const std::exception& e) { return dynamic_cast<const ConfigError*>(&e) ? 2 : 3; }

const char* kind_of(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const ResolutionError*>(&e)) return "resolution";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
    return "numeric";
}

void write_error(const std::string& dir, const std::string& suite, const std::exception& e) {
    Json rec{{"error", e.what()}, {"kind", kind_of(e)}, {"suite", suite}, {"exit_code", exit_code_for(e)}};
    std::cerr << rec.dump() << "\n";
    try {
        if (dir.empty()) return;
        std::filesystem::create_directories(dir);
        write_text_atomic(dir + "/error.json", rec.dump(2) + "\n");
    } catch (...) {
    }
}

}  // namespace

int main(int argc, char** argv) {
    openblas_set_num_threads(1);
    CLI::App app{"Anharmonic oscillator propagation experiments"};
    app.require_subcommand(1, 1);
    std::string config, out = "out";
    std::optional<uint64_t> seed;
    int threads = 1;
    for (const char* name : {"flow", "period", "spectrum", "propagate", "wavefront", "annular", "all"}) {
        auto* sc = app.add_subcommand(name, std::string("run the ") + name + " suite");
        sc->add_option("--config", config, "experiment config (JSON)")->required();
        sc->add_option("--out", out, "output directory");
        sc->add_option("--seed", seed, "RNG seed, overrides the config");
        sc->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string suite = app.get_subcommands().front()->get_name();
    try {
        SuiteContext ctx;
        ctx.cfg = load_config(config);
        if (seed) ctx.cfg.seed = *seed;
        ctx.out_dir = out;
        ctx.threads = threads;
        std::filesystem::create_directories(out);
        std::vector<std::string> names;
        if (suite == "all")
            for (const auto& [k, v] : kSuites) names.push_back(k);
        else
            names.push_back(suite);
        std::vector<Json> results(names.size());
        // suites are the jobs; each writes its own file
        SuiteContext inner = ctx;
        inner.threads = suite == "all" ? 1 : threads;
        parallel_for(static_cast<int>(names.size()), suite == "all" ? threads : 1, [&](int i) {
            results[i] = kSuites.at(names[i])(inner);
            write_text_atomic(out + "/" + names[i] + ".json", results[i].dump(2) + "\n");
        });
        for (size_t i = 0; i < names.size(); ++i) std::cout << names[i] << ": " << out << "/" << names[i] << ".json\n";
        return 0;
    } catch (const std::exception& e) {
        write_error(out, suite, e);
        return exit_code_for(e);
    }
}
