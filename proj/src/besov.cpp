#include "phi4/besov.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace phi4 {

double dyadic_cutoff(double r) {
    const double lo = 2.0 / 3.0, hi = 4.0 / 3.0;
    if (r <= lo) return 1.0;
    if (r >= hi) return 0.0;
    double t = (r - lo) / (hi - lo);
    double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); // quintic smoothstep
    return 1.0 - s;
}

namespace {

int cutoff_index(double eps) {
    // first j whose annulus reaches the Fourier-grid boundary |xi| = 1/(2 eps)
    double boundary = 1.0 / (2.0 * eps);
    int j = 0;
    while ((4.0 / 3.0) * std::pow(2.0, j + 1) < boundary) ++j;
    return j;
}

/** |xi| at mode (kx, ky) with signed indices, xi = k~ / M per axis. */
double mode_freq(const TorusLattice &lat, int kx, int ky) {
    int n = lat.n();
    int sx = kx < n / 2 || n == 1 ? kx : kx - n;
    int sy = ky < n / 2 || n == 1 ? ky : ky - n;
    double fx = sx / lat.side_length();
    double fy = sy / lat.side_length();
    return std::sqrt(fx * fx + fy * fy);
}

} // namespace

DyadicPartition::DyadicPartition(const TorusLattice &l) : lat(&l) {
    j_eps = cutoff_index(l.spacing());
    const int n = l.n();
    masks.assign(std::size_t(j_eps) + 2, std::vector<double>(l.n_sites(), 0.0));
    for (int ky = 0; ky < n; ++ky) {
        for (int kx = 0; kx < n; ++kx) {
            std::size_t i = std::size_t(ky) * n + kx;
            double r = mode_freq(l, kx, ky);
            double acc = 0;
            masks[0][i] = dyadic_cutoff(r);
            acc += masks[0][i];
            for (int j = 0; j < j_eps; ++j) {
                double v = dyadic_cutoff(std::ldexp(r, -(j + 1))) -
                           dyadic_cutoff(std::ldexp(r, -j));
                masks[std::size_t(j) + 1][i] = v;
                acc += v;
            }
            masks[std::size_t(j_eps) + 1][i] = 1.0 - acc; // exact partition of unity
        }
    }
}

std::vector<Field> lp_blocks(const Field &f, const DyadicPartition &part) {
    std::vector<Field> out;
    out.reserve(part.masks.size());
    for (const auto &m : part.masks)
        out.push_back(f.lattice().apply_mode_multiplier(f, m));
    return out;
}

Field weight_field(const TorusLattice &lat, const WeightSpec &w) {
    Field rho(lat, 1.0);
    if (w.h == 0.0 || w.delta == 0.0) return rho;
    const int n = lat.n();
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            double x = lat.coord(ix), y = lat.coord(iy);
            double r2 = w.h * w.h * (x * x + y * y);
            rho.at(ix, iy) = std::pow(1.0 + r2, -0.5 * w.delta * w.ell);
        }
    return rho;
}

double lp_norm(const Field &g, double p, const Field &rho) {
    if (p == kInfinity) {
        double m = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            m = std::max(m, std::abs(g[i] * rho[i]));
        return m;
    }
    if (p != 1.0 && p != 2.0)
        throw std::invalid_argument("lp_norm: p must be 1, 2 or inf");
    double s = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double v = std::abs(g[i] * rho[i]);
        s += p == 1.0 ? v : v * v;
    }
    double eps = g.lattice().spacing();
    s *= eps * eps;
    return p == 1.0 ? s : std::sqrt(s);
}

double besov_norm(const Field &f, double alpha, double p, double q,
                  const WeightSpec &w, const DyadicPartition &part) {
    Field rho = weight_field(f.lattice(), w);
    std::vector<Field> blocks = lp_blocks(f, part);
    double acc = 0;
    for (int j = -1; j <= part.j_eps; ++j) {
        double nb = lp_norm(blocks[std::size_t(j) + 1], p, rho);
        double weighted = std::pow(2.0, alpha * j) * nb;
        if (q == kInfinity)
            acc = std::max(acc, weighted);
        else if (q == 1.0)
            acc += weighted;
        else if (q == 2.0)
            acc += weighted * weighted;
        else
            throw std::invalid_argument("besov_norm: q must be 1, 2 or inf");
    }
    return q == 2.0 ? std::sqrt(acc) : acc;
}

double besov_norm(const Field &f, double alpha, double p, double q,
                  const WeightSpec &w) {
    DyadicPartition part(f.lattice());
    return besov_norm(f, alpha, p, q, w, part);
}

double holder_multi2(const Field &g, double alpha, const WeightSpec &w) {
    const TorusLattice &lat = g.lattice();
    DyadicPartition part(lat);
    Field rho = weight_field(lat, w);
    std::vector<double> prod(lat.n_sites());
    double best = 0;
    // blocks in x and y of f(x,y)=g(x-y) act on the same frequency of g
    for (int j1 = -1; j1 <= part.j_eps; ++j1) {
        for (int j2 = -1; j2 <= part.j_eps; ++j2) {
            const auto &m1 = part.masks[std::size_t(j1) + 1];
            const auto &m2 = part.masks[std::size_t(j2) + 1];
            for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = m1[i] * m2[i];
            Field blk = lat.apply_mode_multiplier(g, prod);
            best = std::max(best, std::pow(2.0, alpha * (j1 + j2)) *
                                      lp_norm(blk, kInfinity, rho));
        }
    }
    return best;
}

namespace {

int cutoff_index_1d(double eps) {
    double boundary = 1.0 / (2.0 * eps);
    int j = 0;
    while ((4.0 / 3.0) * std::pow(2.0, j + 1) < boundary) ++j;
    return j;
}

using cd = std::complex<double>;

void dft_axis(std::vector<cd> &t, int m, int axis, bool inverse) {
    const double sgn = inverse ? 1.0 : -1.0;
    std::vector<cd> line(std::size_t(m), cd{}), res(std::size_t(m), cd{});
    std::size_t stride = 1;
    for (int a = 3; a > axis; --a) stride *= std::size_t(m);
    std::size_t total = std::size_t(m) * m * m * m;
    for (std::size_t base = 0; base < total; ++base) {
        // visit each 1-d line once: base must have index 0 along `axis`
        if ((base / stride) % std::size_t(m) != 0) continue;
        for (int i = 0; i < m; ++i) line[std::size_t(i)] = t[base + std::size_t(i) * stride];
        for (int k = 0; k < m; ++k) {
            cd s = 0;
            for (int i = 0; i < m; ++i)
                s += line[std::size_t(i)] *
                     std::polar(1.0, sgn * 2.0 * std::numbers::pi * k * i / m);
            res[std::size_t(k)] = inverse ? s / double(m) : s;
        }
        for (int k = 0; k < m; ++k) t[base + std::size_t(k) * stride] = res[std::size_t(k)];
    }
}

} // namespace

double holder_multi4(const std::vector<double> &f, int m, double eps_sub,
                     double alpha, const WeightSpec &w) {
    if (m < 4)
        throw std::invalid_argument("holder_multi4: grid too coarse (< 4 points per axis)");
    std::size_t total = std::size_t(m) * m * m * m;
    if (f.size() != total)
        throw std::invalid_argument("holder_multi4: tensor size must be m^4");

    const double L = m * eps_sub;
    const int jmax = cutoff_index_1d(eps_sub);
    std::vector<std::vector<double>> masks(std::size_t(jmax) + 2,
                                           std::vector<double>(std::size_t(m), 0.0));
    for (int k = 0; k < m; ++k) {
        int sk = k < m / 2 ? k : k - m;
        double r = std::abs(sk) / L;
        double acc = 0;
        masks[0][std::size_t(k)] = dyadic_cutoff(r);
        acc += masks[0][std::size_t(k)];
        for (int j = 0; j < jmax; ++j) {
            double v = dyadic_cutoff(std::ldexp(r, -(j + 1))) - dyadic_cutoff(std::ldexp(r, -j));
            masks[std::size_t(j) + 1][std::size_t(k)] = v;
            acc += v;
        }
        masks[std::size_t(jmax) + 1][std::size_t(k)] = 1.0 - acc;
    }

    std::vector<double> rho1(std::size_t(m), 1.0);
    if (w.h != 0.0 && w.delta != 0.0)
        for (int i = 0; i < m; ++i) {
            double x = eps_sub * (i < m / 2 ? i : i - m);
            rho1[std::size_t(i)] =
                std::pow(1.0 + w.h * w.h * x * x, -0.5 * w.delta * w.ell);
        }

    std::vector<cd> hat(total);
    for (std::size_t i = 0; i < total; ++i) hat[i] = f[i];
    for (int a = 0; a < 4; ++a) dft_axis(hat, m, a, false);

    const int nb = jmax + 2;
    double best = 0;
    std::array<int, 4> j{0, 0, 0, 0};
    std::vector<cd> buf(total);
    for (j[0] = 0; j[0] < nb; ++j[0])
        for (j[1] = 0; j[1] < nb; ++j[1])
            for (j[2] = 0; j[2] < nb; ++j[2])
                for (j[3] = 0; j[3] < nb; ++j[3]) {
                    for (std::size_t i = 0; i < total; ++i) {
                        std::size_t r = i;
                        double msk = 1.0;
                        for (int a = 3; a >= 0; --a) {
                            msk *= masks[std::size_t(j[std::size_t(a)])][r % std::size_t(m)];
                            r /= std::size_t(m);
                        }
                        buf[i] = hat[i] * msk;
                    }
                    for (int a = 0; a < 4; ++a) dft_axis(buf, m, a, true);
                    double sup = 0;
                    for (std::size_t i = 0; i < total; ++i) {
                        std::size_t r = i;
                        double rw = 1.0;
                        for (int a = 3; a >= 0; --a) {
                            rw *= rho1[r % std::size_t(m)];
                            r /= std::size_t(m);
                        }
                        sup = std::max(sup, std::abs(buf[i].real()) * rw);
                    }
                    int jsum = (j[0] - 1) + (j[1] - 1) + (j[2] - 1) + (j[3] - 1);
                    best = std::max(best, std::pow(2.0, alpha * jsum) * sup);
                }
    return best;
}

} // namespace phi4
