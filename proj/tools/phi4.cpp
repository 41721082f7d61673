#include "phi4/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

void print_report(const phi4::Report &rep) {
    for (const auto &r : rep.rows) {
        std::printf("%-40s %16.9g", r.name.c_str(), r.value);
        if (r.err != 0) std::printf(" +- %-12.4g", r.err);
        std::printf("  [%s]%s%s\n", r.pass ? "ok" : "FAIL",
                    r.note.empty() ? "" : " ", r.note.c_str());
    }
}

int finish(const phi4::Report &rep) {
    print_report(rep);
    return rep.passed() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"phi4: perturbation-theory laboratory for the 2-d lattice phi^4 model"};
    app.require_subcommand(1);

    std::string config_path, out_dir, dot_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool have_seed = false, have_threads = false;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "rng seed")->each([&](const std::string &) {
            have_seed = true;
        });
        sub->add_option("--threads", threads, "worker threads")
            ->each([&](const std::string &) { have_threads = true; });
        sub->add_option("--dot-dir", dot_dir, "directory for graph DOT files");
    };

    auto *toy = app.add_subcommand("toy", "0-d toy integral and its divergent series");
    double toy_lambda = 0.01;
    int toy_terms = 80;
    toy->add_option("--lambda", toy_lambda, "coupling");
    toy->add_option("--terms", toy_terms, "number of series terms");
    add_common(toy);

    auto *expand = app.add_subcommand("expand", "symbolic Dyson-Schwinger expansion");
    int exp_k = 2, exp_n = 2;
    expand->add_option("--k", exp_k, "number of boundary points");
    expand->add_option("--n", exp_n, "expansion order");
    add_common(expand);

    auto *oracle = app.add_subcommand("oracle", "2x2 quadrature identity battery");
    add_common(oracle);
    auto *asym = app.add_subcommand("asymptoticity", "remainder slope study");
    add_common(asym);
    auto *twopt = app.add_subcommand("two-point", "short-distance 2-point study");
    add_common(twopt);
    auto *fourpt = app.add_subcommand("four-point", "connected 4-point study");
    add_common(fourpt);
    auto *simulate = app.add_subcommand("simulate", "Langevin sampling run");
    add_common(simulate);

    CLI11_PARSE(app, argc, argv);

    try {
        phi4::ExperimentSpec spec;
        if (!config_path.empty()) spec = phi4::load_spec(config_path);
        if (!out_dir.empty()) spec.output_dir = out_dir;
        if (!dot_dir.empty()) spec.dot_dir = dot_dir;
        if (have_seed) spec.seed = seed;
        if (have_threads) spec.threads = threads;

        if (toy->parsed()) {
            if (toy->count("--lambda")) spec.toy_lambda = toy_lambda;
            if (toy->count("--terms")) spec.toy_terms = toy_terms;
            return finish(phi4::run_toy_experiment(spec));
        }
        if (expand->parsed()) {
            if (expand->count("--k")) spec.expand_k = exp_k;
            if (expand->count("--n")) spec.expand_n = exp_n;
            // `--out foo.txt` names the expansion file itself
            if (out_dir.size() > 4 && out_dir.ends_with(".txt")) {
                spec.output_dir.clear();
                phi4::Report rep = phi4::run_expand_experiment(spec);
                std::ofstream os(out_dir);
                os << phi4::serialize_expansion(
                    phi4::expand(spec.expand_k, spec.expand_n));
                return finish(rep);
            }
            return finish(phi4::run_expand_experiment(spec));
        }
        if (oracle->parsed())
            return finish(phi4::run_oracle_suite(spec.lambda_grid, spec.output_dir));
        if (asym->parsed()) return finish(phi4::run_asymptoticity(spec));
        if (twopt->parsed()) return finish(phi4::run_two_point(spec));
        if (fourpt->parsed()) return finish(phi4::run_four_point(spec));
        if (simulate->parsed()) return finish(phi4::run_simulate(spec));
    } catch (const std::exception &ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}
