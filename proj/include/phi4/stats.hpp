#ifndef PHI4_STATS_HPP
#define PHI4_STATS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace phi4 {

struct MeanErr {
    double mean = 0;
    double stderr_ = 0;
};

/** Mean and standard error of a set of (nearly independent) batch means. */
inline MeanErr batch_stats(const std::vector<double> &batches) {
    const std::size_t b = batches.size();
    if (b < 2) throw std::invalid_argument("batch_stats: need at least 2 batches");
    double mean = 0;
    for (double x : batches) mean += x;
    mean /= double(b);
    double var = 0;
    for (double x : batches) var += (x - mean) * (x - mean);
    var /= double(b - 1);
    return {mean, std::sqrt(var / double(b))};
}

/**
 * Jackknife for a nonlinear function of batch means: f is evaluated on
 * leave-one-out averages; returns the plain estimate with the jackknife
 * standard error.
 */
inline MeanErr jackknife(const std::vector<std::vector<double>> &batches,
                         const std::function<double(const std::vector<double> &)> &f) {
    if (batches.empty()) throw std::invalid_argument("jackknife: no observables");
    const std::size_t b = batches[0].size();
    if (b < 2) throw std::invalid_argument("jackknife: need at least 2 batches");
    const std::size_t m = batches.size();
    std::vector<double> full(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (double x : batches[i]) full[i] += x;
        full[i] /= double(b);
    }
    double est = f(full);
    std::vector<double> loo(m);
    double var = 0, loo_mean = 0;
    std::vector<double> fvals(b);
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t i = 0; i < m; ++i)
            loo[i] = (full[i] * double(b) - batches[i][j]) / double(b - 1);
        fvals[j] = f(loo);
        loo_mean += fvals[j];
    }
    loo_mean /= double(b);
    for (double v : fvals) var += (v - loo_mean) * (v - loo_mean);
    var *= double(b - 1) / double(b);
    return {est, std::sqrt(var)};
}

/** Least-squares slope/intercept of y vs x with naive parameter errors. */
struct LineFit {
    double slope = 0, intercept = 0;
    double slope_err = 0, intercept_err = 0;
};

inline LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: bad input");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double d = double(n) * sxx - sx * sx;
    LineFit f;
    f.slope = (double(n) * sxy - sx * sy) / d;
    f.intercept = (sy - f.slope * sx) / double(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - f.slope * x[i] - f.intercept;
        ss += r * r;
    }
    double s2 = n > 2 ? ss / double(n - 2) : 0.0;
    f.slope_err = std::sqrt(s2 * double(n) / d);
    f.intercept_err = std::sqrt(s2 * sxx / d);
    return f;
}

} // namespace phi4

#endif
