#ifndef PHI4_BESOV_HPP
#define PHI4_BESOV_HPP

#include "phi4/lattice.hpp"

#include <limits>
#include <vector>

namespace phi4 {

/**
 * Dyadic partition of unity on the lattice Fourier grid.  Frequencies are
 * xi = k~ / M per axis with k~ in [-n/2, n/2), so |xi| <= sqrt(2)/(2 eps).
 * phi_{-1} = chi(|xi|), phi_j = chi(2^{-(j+1)}|xi|) - chi(2^{-j}|xi|) for
 * j < j_eps, and the last block j_eps absorbs the remainder so the masks
 * sum to 1 exactly.  chi is a quintic smoothstep, 1 on [0,2/3] and 0 on
 * [4/3,inf).
 */
struct DyadicPartition {
    explicit DyadicPartition(const TorusLattice &lat);

    const TorusLattice *lat;
    int j_eps; // last block index; blocks run j = -1 .. j_eps
    std::vector<std::vector<double>> masks; // masks[j+1] over Fourier modes

    int n_blocks() const { return j_eps + 2; }
};

/** Smooth cutoff chi: 1 on [0, 2/3], 0 on [4/3, inf), quintic in between. */
double dyadic_cutoff(double r);

/** Littlewood-Paley blocks Delta_j f = F^{-1}(phi_j F f); sums back to f. */
std::vector<Field> lp_blocks(const Field &f, const DyadicPartition &part);

/** Polynomial weight rho(x) = (1 + |h x|^2)^{-delta/2}, raised to ell. */
struct WeightSpec {
    double h = 0.0;
    double delta = 0.0;
    double ell = 1.0;
};

Field weight_field(const TorusLattice &lat, const WeightSpec &w);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/** ||g rho||_{L^{p,eps}} for p in {1, 2, inf}. */
double lp_norm(const Field &g, double p, const Field &rho);

/** Weighted Besov norm (sum_j 2^{alpha j q} ||Delta_j f||_{L^{p,eps}(rho)}^q)^{1/q}. */
double besov_norm(const Field &f, double alpha, double p, double q,
                  const WeightSpec &w = {});
double besov_norm(const Field &f, double alpha, double p, double q,
                  const WeightSpec &w, const DyadicPartition &part);

/**
 * Besov-Hoelder norm w.r.t. each component for a 2-point function given
 * through its translation-invariant reduction g(r) = f(x, x+r):
 * sup_{j1,j2} 2^{alpha(j1+j2)} ||F^{-1}(phi_{j1} phi_{j2} F g)||_inf.
 */
double holder_multi2(const Field &g, double alpha, const WeightSpec &w = {});

/**
 * Componentwise surrogate for k=4: f sampled on a coarse m^4 configuration
 * grid (spacing eps_sub, m a power of two, m >= 4); axiswise dyadic blocks
 * with the sup over all block index tuples.  A lower-bound surrogate of the
 * full norm, not the norm itself.
 */
double holder_multi4(const std::vector<double> &f, int m, double eps_sub,
                     double alpha, const WeightSpec &w = {});

} // namespace phi4

#endif
