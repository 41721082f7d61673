#include "phi4/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phi4 {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

// ---------------------------------------------------------------- Field

Field::Field(const TorusLattice &lat, double fill)
    : lat_(&lat), v_(lat.n_sites(), fill) {}

double &Field::at(int ix, int iy) { return v_[lat_->site(ix, iy)]; }
double Field::at(int ix, int iy) const { return v_[lat_->site(ix, iy)]; }

Field &Field::operator+=(const Field &o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}
Field &Field::operator-=(const Field &o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}
Field &Field::operator*=(double c) {
    for (double &x : v_) x *= c;
    return *this;
}
Field &Field::operator*=(const Field &o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] *= o.v_[i];
    return *this;
}
double Field::max_abs() const {
    double m = 0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

Field operator+(Field a, const Field &b) { return a += b; }
Field operator-(Field a, const Field &b) { return a -= b; }
Field operator*(double c, Field a) { return a *= c; }

// ---------------------------------------------------------- TorusLattice

struct TorusLattice::FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~FftPlans() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

TorusLattice::TorusLattice(double side_length, double spacing, double mass)
    : M_(side_length), eps_(spacing), m_(mass) {
    if (M_ <= 0 || eps_ <= 0 || m_ <= 0)
        throw std::invalid_argument("TorusLattice: M, eps, m must be positive");
    double ratio = M_ / eps_;
    n_ = int(std::lround(ratio));
    if (std::abs(ratio - n_) > 1e-9 || !is_power_of_two(n_))
        throw std::invalid_argument("TorusLattice: M/eps must be a power of two");

    mu_.resize(n_sites());
    for (int ky = 0; ky < n_; ++ky)
        for (int kx = 0; kx < n_; ++kx)
            mu_[std::size_t(ky) * n_ + kx] = m_ + laplace_symbol(kx, ky);

    plans_ = std::make_unique<FftPlans>();
    std::vector<std::complex<double>> dummy(n_sites());
    auto *d = reinterpret_cast<fftw_complex *>(dummy.data());
    plans_->fwd = fftw_plan_dft_2d(n_, n_, d, d, FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_->bwd = fftw_plan_dft_2d(n_, n_, d, d, FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);

    // C = eps^{-2} * (1/n^2) sum_k e^{i k x} / (2 mu_k)
    std::vector<double> inv(n_sites());
    for (std::size_t i = 0; i < mu_.size(); ++i) inv[i] = 1.0 / (2.0 * mu_[i]);
    Field delta(*this);
    delta[0] = 1.0 / (eps_ * eps_);
    green_ = apply_mode_multiplier(delta, inv);
}

TorusLattice::~TorusLattice() = default;

double TorusLattice::coord(int i) const {
    double x = eps_ * wrap(i);
    if (x >= M_ / 2) x -= M_;
    return x;
}

double TorusLattice::laplace_symbol(int kx, int ky) const {
    double sx = std::sin(M_PI * kx / n_);
    double sy = std::sin(M_PI * ky / n_);
    return 4.0 * (sx * sx + sy * sy) / (eps_ * eps_);
}

double TorusLattice::max_laplace_symbol() const {
    return laplace_symbol(n_ / 2, n_ / 2);
}

void TorusLattice::dft(const std::vector<std::complex<double>> &in,
                       std::vector<std::complex<double>> &out) const {
    out = in;
    auto *p = reinterpret_cast<fftw_complex *>(out.data());
    fftw_execute_dft(plans_->fwd, p, p);
}

void TorusLattice::idft(const std::vector<std::complex<double>> &in,
                        std::vector<std::complex<double>> &out) const {
    out = in;
    auto *p = reinterpret_cast<fftw_complex *>(out.data());
    fftw_execute_dft(plans_->bwd, p, p);
}

Field TorusLattice::apply_mode_multiplier(const Field &f,
                                          const std::vector<double> &g) const {
    std::vector<std::complex<double>> buf(n_sites()), hat(n_sites());
    for (std::size_t i = 0; i < f.size(); ++i) buf[i] = f[i];
    dft(buf, hat);
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= g[i];
    idft(hat, buf);
    Field out(*this);
    const double norm = 1.0 / double(n_sites());
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real() * norm;
    return out;
}

// ----------------------------------------------------------- operations

double inner(const Field &f, const Field &g) {
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    double eps = f.lattice().spacing();
    return eps * eps * s;
}

Field discrete_laplacian(const Field &f) {
    const TorusLattice &lat = f.lattice();
    const int n = lat.n();
    const double ie2 = 1.0 / (lat.spacing() * lat.spacing());
    Field out(lat);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            double c = f.at(ix, iy);
            out.at(ix, iy) = ie2 * (f.at(ix + 1, iy) + f.at(ix - 1, iy) +
                                    f.at(ix, iy + 1) + f.at(ix, iy - 1) - 4 * c);
        }
    }
    return out;
}

Field green_function(const TorusLattice &lat) { return lat.green(); }

double wick_constant(const TorusLattice &lat) { return lat.wick_constant(); }

Field apply_green(const Field &f) {
    const TorusLattice &lat = f.lattice();
    std::vector<double> inv(lat.n_sites());
    const auto &mu = lat.multipliers();
    for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / (2.0 * mu[i]);
    return lat.apply_mode_multiplier(f, inv);
}

Field convolve(const Field &f, const Field &g) {
    const TorusLattice &lat = f.lattice();
    std::vector<std::complex<double>> a(lat.n_sites()), b(lat.n_sites());
    for (std::size_t i = 0; i < f.size(); ++i) {
        a[i] = f[i];
        b[i] = g[i];
    }
    std::vector<std::complex<double>> fa, fb;
    lat.dft(a, fa);
    lat.dft(b, fb);
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    lat.idft(fa, a);
    Field out(lat);
    const double eps = lat.spacing();
    const double norm = eps * eps / double(lat.n_sites());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real() * norm;
    return out;
}

Field shift(const Field &f, int dx, int dy) {
    const TorusLattice &lat = f.lattice();
    const int n = lat.n();
    Field out(lat);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            out.at(ix, iy) = f.at(ix - dx, iy - dy);
    return out;
}

Field wick_power(const Field &phi, int j, double a) {
    Field out(phi.lattice());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        double p = phi[i];
        switch (j) {
        case 0: out[i] = 1.0; break;
        case 1: out[i] = p; break;
        case 2: out[i] = p * p - a; break;
        case 3: out[i] = p * (p * p - 3.0 * a); break;
        case 4: out[i] = p * p * (p * p - 6.0 * a) + 3.0 * a * a; break;
        default: throw std::invalid_argument("wick_power: order must be 0..4");
        }
    }
    return out;
}

// --------------------------------------------------------- kernel cache

void save_kernel(const std::string &path, const TorusLattice &lat, const Field &kernel) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_kernel: cannot open " + path);
    double hdr[3] = {lat.side_length(), lat.spacing(), lat.mass()};
    std::uint64_t n = std::uint64_t(lat.n());
    os.write(reinterpret_cast<const char *>(hdr), sizeof(hdr));
    os.write(reinterpret_cast<const char *>(&n), sizeof(n));
    os.write(reinterpret_cast<const char *>(kernel.data().data()),
             std::streamsize(kernel.size() * sizeof(double)));
}

Field load_kernel(const std::string &path, const TorusLattice &lat) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_kernel: cannot open " + path);
    double hdr[3];
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char *>(hdr), sizeof(hdr));
    is.read(reinterpret_cast<char *>(&n), sizeof(n));
    if (!is || hdr[0] != lat.side_length() || hdr[1] != lat.spacing() ||
        hdr[2] != lat.mass() || n != std::uint64_t(lat.n()))
        throw std::runtime_error("load_kernel: header mismatch in " + path);
    Field f(lat);
    is.read(reinterpret_cast<char *>(f.data().data()),
            std::streamsize(f.size() * sizeof(double)));
    if (!is) throw std::runtime_error("load_kernel: truncated file " + path);
    return f;
}

Field green_function_cached(const TorusLattice &lat, const std::string &cache_dir) {
    std::filesystem::create_directories(cache_dir);
    std::ostringstream name;
    name << "green_M" << lat.side_length() << "_eps" << lat.spacing() << "_m"
         << lat.mass() << ".bin";
    std::filesystem::path p = std::filesystem::path(cache_dir) / name.str();
    if (std::filesystem::exists(p)) return load_kernel(p.string(), lat);
    Field g = lat.green();
    save_kernel(p.string(), lat, g);
    return g;
}

} // namespace phi4
