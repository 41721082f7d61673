#include "phi4/toy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phi4 {

namespace {

double integrand(double x, double lambda) {
    return std::exp(-x * x - lambda * x * x * x * x);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                        double whole, double tol, double lambda, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = integrand(lm, lambda), frm = integrand(rm, lambda);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0) throw std::runtime_error("toy_quadrature: recursion exhausted");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, lambda, depth - 1) +
           adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, lambda, depth - 1);
}

} // namespace

double toy_quadrature(double lambda) {
    if (lambda < 0) throw std::invalid_argument("toy_quadrature: lambda must be >= 0");
    // even integrand; exp(-100) makes the tail beyond x=10 negligible
    const double a = 0.0, b = 10.0;
    double fa = integrand(a, lambda), fb = integrand(b, lambda);
    double m = 0.5 * (a + b), fm = integrand(m, lambda);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double v = adaptive_simpson(a, b, fa, fm, fb, whole,
                                1e-11 * std::sqrt(std::numbers::pi), lambda, 60);
    return 2.0 * v;
}

double toy_term(double lambda, int n) {
    if (n == 0) return std::sqrt(std::numbers::pi);
    // (4n-1)!! = (4n)! / (2^{2n} (2n)!)
    double log_df = std::lgamma(4.0 * n + 1.0) - 2.0 * n * std::numbers::ln2 -
                    std::lgamma(2.0 * n + 1.0);
    double lg = n * std::log(lambda) - std::lgamma(n + 1.0) + log_df +
                0.5 * std::log(std::numbers::pi) - 2.0 * n * std::numbers::ln2;
    double mag = std::exp(lg);
    return n % 2 == 0 ? mag : -mag;
}

ToyReport run_toy(double lambda, int n_terms) {
    if (n_terms > 200) throw std::invalid_argument("run_toy: n_terms must be <= 200");
    ToyReport r;
    r.lambda = lambda;
    r.z_quad = toy_quadrature(lambda);
    double sum = 0;
    for (int n = 0; n < n_terms; ++n) {
        double t = toy_term(lambda, n);
        sum += t;
        r.terms.push_back(t);
        r.partial_sums.push_back(sum);
        if (r.crossover < 0 && n > 0 &&
            std::abs(t) > std::abs(r.terms[std::size_t(n) - 1]))
            r.crossover = n - 1;
    }
    return r;
}

} // namespace phi4
