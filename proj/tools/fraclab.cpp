// Batch experiment runner: executes named experiments against the solvers
// and emits CSV tables, gnuplot data files and a structured summary.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraclab/config.hpp"
#include "fraclab/experiments.hpp"

using namespace fraclab;

namespace {

int run_list() {
    for (const auto& name : experiment_names()) std::printf("%s\n", name.c_str());
    return 0;
}

int execute(const std::vector<std::string>& names, const ExperimentParams& base,
            const std::string& outdir) {
    std::vector<ExperimentResult> results;
    bool all_pass = true;
    for (const auto& name : names) {
        ExperimentResult res = run_experiment(name, base);
        write_outputs(res, outdir);
        for (const auto& line : res.checks)
            std::printf("[%s] %s\n", res.name.c_str(), line.c_str());
        std::printf("%s: %s\n", res.name.c_str(), res.pass ? "pass" : "FAIL");
        if (!res.pass) {
            all_pass = false;
            for (const auto& t : res.tables)
                std::printf("  failing table: %s\n",
                            (std::filesystem::path(outdir) / t.filename).string().c_str());
        }
        results.push_back(std::move(res));
    }
    write_summary(results, outdir, base.seed);
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclab: numerical experiments for the fractional Dirichlet "
                 "and Schroedinger problems on symmetric domains"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "print the experiment registry");

    std::string verify_name;
    ExperimentParams vp;
    std::string verify_outdir = "out";
    auto* verify_cmd = app.add_subcommand("verify", "run one named experiment");
    verify_cmd->add_option("name", verify_name, "experiment name")->required();
    verify_cmd->add_option("--s", vp.s_values, "fractional orders");
    verify_cmd->add_option("--N", vp.N, "grid resolution");
    verify_cmd->add_option("--q", vp.q, "grading exponent");
    verify_cmd->add_option("--R", vp.R, "domain radius");
    verify_cmd->add_option("--seed", vp.seed, "random seed");
    verify_cmd->add_option("--potential", vp.potential_spec, "potential spec string");
    verify_cmd->add_option("--outdir", verify_outdir, "output directory");

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run the experiments of a config file");
    run_cmd->add_option("config", config_path, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        // usage problems are configuration errors
        return code == 0 ? 0 : 2;
    }

    try {
        if (list_cmd->parsed()) return run_list();
        if (verify_cmd->parsed()) {
            if (!is_experiment(verify_name)) {
                std::fprintf(stderr, "unknown experiment '%s'; run 'fraclab list'\n",
                             verify_name.c_str());
                return 2;
            }
            return execute({verify_name}, vp, verify_outdir);
        }
        if (run_cmd->parsed()) {
            Config cfg = Config::parse_file(config_path);
            ExperimentParams base;
            base.s_values = cfg.get_list("run", "s", {});
            base.R = cfg.get_num("domain", "R", 1.0);
            base.n = cfg.get_int("domain", "n", 1);
            base.N = cfg.get_int("grid", "N", 0);
            base.q = cfg.get_num("grid", "q", 0.0);
            base.seed = cfg.get_u64("run", "seed", 12345);
            base.potential_spec = cfg.get("potential", "V", "");
            base.data_spec = cfg.get("data", "f", "");
            std::string outdir = cfg.get("run", "outdir", "out");
            std::vector<std::string> names = cfg.get_words("run", "experiments");
            if (names.size() == 1 && names[0] == "all") names = experiment_names();
            if (names.empty()) {
                std::fprintf(stderr,
                             "config declares no experiments; set run.experiments "
                             "(or 'all')\n");
                return 2;
            }
            for (const auto& n : names) {
                if (!is_experiment(n)) {
                    std::fprintf(stderr, "unknown experiment '%s' in config\n", n.c_str());
                    return 2;
                }
            }
            return execute(names, base, outdir);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
