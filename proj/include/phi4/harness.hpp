#ifndef PHI4_HARNESS_HPP
#define PHI4_HARNESS_HPP

#include "phi4/langevin.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace phi4 {

struct ExperimentSpec {
    std::string kind = "toy"; // toy|expand|oracle|asymptoticity|two_point|four_point
    double M = 8, eps = 1, m = 1;
    std::vector<double> lambda_grid = {0.05, 0.1, 0.2};
    int N = 2;
    double gamma = 0.5; // Hoelder exponent 2 - gamma
    double toy_lambda = 0.01;
    int toy_terms = 80;
    int expand_k = 2, expand_n = 2;
    // simulation block
    double dt = 0.05;
    long long burn_in = 20000, n_samples = 200000;
    int thinning = 5;
    std::uint64_t seed = 1;
    int n_batches = 16;
    int threads = 1;
    std::string output_dir = ".";
    std::string dot_dir; // empty: no DOT output

    SimConfig sim(const TorusLattice &lat, double lambda) const;
};

/** Flat key=value config (# comments; lambda_grid comma-separated). */
ExperimentSpec parse_spec(std::istream &in);
ExperimentSpec load_spec(const std::string &path);

struct ReportRow {
    std::string name;
    double value = 0, err = 0;
    bool pass = true;
    std::string note;
};

struct Report {
    std::string kind;
    std::vector<ReportRow> rows;
    bool passed() const {
        for (const auto &r : rows)
            if (!r.pass) return false;
        return true;
    }
};

void write_report_csv(const std::string &path, const Report &rep);
/** Companion gnuplot script plotting column y(x) of a CSV. */
void write_plot_script(const std::string &path, const std::string &csv,
                       const std::string &title, int xcol, int ycol, bool loglog);

Report run_toy_experiment(const ExperimentSpec &spec);
Report run_expand_experiment(const ExperimentSpec &spec);
Report run_oracle_suite(const std::vector<double> &lambda_grid,
                        const std::string &output_dir = "");
Report run_asymptoticity(const ExperimentSpec &spec);
Report run_two_point(const ExperimentSpec &spec);
Report run_four_point(const ExperimentSpec &spec);
Report run_simulate(const ExperimentSpec &spec);

/** Fan an index loop over up to `threads` workers, deterministic results. */
void parallel_for(int count, int threads, const std::function<void(int)> &body);

} // namespace phi4

#endif
