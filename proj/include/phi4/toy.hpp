#ifndef PHI4_TOY_HPP
#define PHI4_TOY_HPP

#include <vector>

namespace phi4 {

/**
 * Zero-dimensional toy model Z(lambda) = int exp(-x^2 - lambda x^4) dx and
 * its divergent asymptotic series sum_n (-lambda)^n / n! * (4n-1)!! *
 * sqrt(pi) / 4^n.
 */
struct ToyReport {
    double lambda = 0;
    double z_quad = 0;                 // adaptive quadrature value
    std::vector<double> terms;         // signed series terms, n = 0..n_terms-1
    std::vector<double> partial_sums;  // running partial sums
    int crossover = -1;                // first n with |term_{n+1}| > |term_n|
};

/** Adaptive quadrature of int_R exp(-x^2 - lambda x^4) dx, rel tol 1e-10. */
double toy_quadrature(double lambda);

/** Signed series term n, computed in log-space with exact double factorials. */
double toy_term(double lambda, int n);

ToyReport run_toy(double lambda, int n_terms);

} // namespace phi4

#endif
