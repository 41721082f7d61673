#ifndef PHI4_DIAGRAM_HPP
#define PHI4_DIAGRAM_HPP

#include "phi4/graph.hpp"
#include "phi4/lattice.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace phi4 {

/** Lattice point as an index pair. */
struct Point {
    int ix = 0;
    int iy = 0;
};

/** Values over boundary-point configurations plus matching standard errors
 *  (identically zero for deterministic evaluations). */
struct DiagramValue {
    std::vector<double> values;
    std::vector<double> stderrs;
};

struct EvalOptions {
    // brute-force site-enumeration budget for the residual loop core
    double cost_budget = 5e8;
    int min_batches = 8;
};

/**
 * Deterministic evaluation of I_G for a pure diagram (n_phi = 0) at pinned
 * boundary points: eps^2-weighted sum over interior positions of the
 * product of Green factors.  Degree <= 2 interior vertices are eliminated
 * by FFT convolution first; the residual core is summed directly.
 */
double eval_pure_at(const IbpGraph &g, const TorusLattice &lat,
                    std::span<const Point> points, const EvalOptions &opt = {});

/** Two-point pure diagram as a field over the separation r = x0 - y0. */
Field eval_pure_field2(const IbpGraph &g, const TorusLattice &lat,
                       const EvalOptions &opt = {});

/** sum over f_terms[n<=N] of lambda^n r'_G I_G as a separation field (k=2). */
Field partial_sum_field2(const Expansion &e, const TorusLattice &lat, double lambda,
                         int N, const EvalOptions &opt = {});

/**
 * Monte-Carlo evaluation of I_G for a graph with Phi insertions.  Per
 * sample the Green-edge contraction is taken against pointwise Wick
 * powers :Phi^{4-deg}: (interior) and plain factors Phi^{1-deg}
 * (boundary); the expectation is replaced by the sample average with
 * batch-mean error bars.  Throws if fewer than opt.min_batches batches.
 */
DiagramValue eval_mixed(const IbpGraph &g, const TorusLattice &lat,
                        std::span<const Point> points, std::span<const Field> samples,
                        double wick_a, int n_batches = 16, const EvalOptions &opt = {});

// ---------------------------------------------------------------- oracle

/**
 * Exact small-lattice ground truth: normalized moments of the Gibbs
 * density exp{-eps^2 sum [lambda/4 Phi^4 + (-(3/2) lambda a + m) Phi^2 +
 * |grad Phi|^2]} by tensor Gauss-Hermite quadrature, one node set per
 * site.  Feasible for n_sites <= 4 at the default 40 nodes; a Richardson
 * cross-check at +10 nodes guards the 1e-8 relative tolerance.
 */
class QuadratureOracle {
  public:
    QuadratureOracle(const TorusLattice &lat, double lambda, int nodes = 40,
                     double rel_tol = 1e-8);

    const TorusLattice &lattice() const { return *lat_; }
    double lambda() const { return lambda_; }
    double wick_a() const { return a_; }

    /** E[prod_i Phi(site_i)^{e_i}]; exponents indexed by site. */
    double moment(const std::vector<int> &exponents) const;

    /** E of a product of Wick powers :Phi(site)^j: (sites may repeat). */
    double wick_moment(const std::vector<std::pair<std::size_t, int>> &factors) const;

    /** Two-point function S^2(x,y). */
    double two_point(std::size_t sx, std::size_t sy) const;

    /** I_eps(:Phi^3:)(site) contracted against extra Wick factors:
     *  E[ prod factors * I(:Phi^3:)(site) ]. */
    double green_cubic_term(std::size_t site,
                            const std::vector<std::pair<std::size_t, int>> &factors) const;

    /** Deterministic evaluation of coeff*lambda^p*I_G on this measure. */
    double eval_term(const Term &t, std::span<const Point> points) const;
    /** I_G itself (no coefficient, no lambda power). */
    double eval_graph(const IbpGraph &g, std::span<const Point> points) const;

  private:
    const TorusLattice *lat_;
    double lambda_, a_, rel_tol_;
    int nodes_;
    std::size_t n_sites_;
    // per-node abscissas/weights and the density tables for nodes_ and nodes_+10
    struct Grid {
        int nodes;
        std::vector<double> x;        // abscissas (shared across sites)
        std::vector<double> logw;     // log Gauss-Hermite weights
        std::vector<double> density;  // exp(-S + sum c x^2 + sum logw), size nodes^n_sites
        double z;                     // partition sum over the grid
    };
    Grid main_, check_;
    Grid make_grid(int nodes) const;
    double grid_moment(const Grid &g, const std::vector<int> &exponents) const;
    mutable std::vector<std::pair<std::vector<int>, double>> cache_;
};

} // namespace phi4

#endif
