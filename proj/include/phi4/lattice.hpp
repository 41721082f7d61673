#ifndef PHI4_LATTICE_HPP
#define PHI4_LATTICE_HPP

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace phi4 {

class TorusLattice;

/** Real-valued function on the sites of a periodic lattice, row-major. */
class Field {
  public:
    Field() : lat_(nullptr) {}
    explicit Field(const TorusLattice &lat, double fill = 0.0);

    const TorusLattice &lattice() const { return *lat_; }
    bool empty() const { return lat_ == nullptr; }

    double &operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    double &at(int ix, int iy);
    double at(int ix, int iy) const;

    std::size_t size() const { return v_.size(); }
    std::vector<double> &data() { return v_; }
    const std::vector<double> &data() const { return v_; }

    Field &operator+=(const Field &o);
    Field &operator-=(const Field &o);
    Field &operator*=(double c);
    /** Pointwise product. */
    Field &operator*=(const Field &o);

    double max_abs() const;

  private:
    const TorusLattice *lat_;
    std::vector<double> v_;
};

Field operator+(Field a, const Field &b);
Field operator-(Field a, const Field &b);
Field operator*(double c, Field a);

/**
 * Periodic two-dimensional lattice of side length M, spacing eps
 * (n = M/eps sites per axis, a power of two) and mass m > 0.
 *
 * Owns the FFT plans, the spectral multiplier mu(xi) = m + l_eps(xi)
 * and the Green function of 2(m - Delta_eps).  Immutable after
 * construction.
 */
class TorusLattice {
  public:
    TorusLattice(double side_length, double spacing, double mass);
    ~TorusLattice();

    TorusLattice(const TorusLattice &) = delete;
    TorusLattice &operator=(const TorusLattice &) = delete;

    double side_length() const { return M_; }
    double spacing() const { return eps_; }
    double mass() const { return m_; }
    int n() const { return n_; }
    std::size_t n_sites() const { return std::size_t(n_) * n_; }

    std::size_t site(int ix, int iy) const {
        return std::size_t(wrap(iy)) * n_ + wrap(ix);
    }
    int wrap(int i) const { return ((i % n_) + n_) % n_; }

    /** Physical coordinate of axis index i, mapped to [-M/2, M/2). */
    double coord(int i) const;

    /** Spectral multiplier mu(xi) = m + l_eps(xi) at mode (kx, ky). */
    double multiplier(int kx, int ky) const { return mu_[std::size_t(ky) * n_ + kx]; }
    const std::vector<double> &multipliers() const { return mu_; }
    /** l_eps(xi) = 4 [sin^2(pi kx / n) + sin^2(pi ky / n)] / eps^2. */
    double laplace_symbol(int kx, int ky) const;
    double max_laplace_symbol() const;

    /** Green function C of 2(m - Delta_eps): 2(m - Delta_eps) C = eps^{-2} 1_0. */
    const Field &green() const { return green_; }
    /** Wick constant a = C(0) = E Z(0)^2. */
    double wick_constant() const { return green_[0]; }

    // FFT plumbing (plain DFT without any normalization; inverse carries 1/n^2).
    void dft(const std::vector<std::complex<double>> &in,
             std::vector<std::complex<double>> &out) const;
    void idft(const std::vector<std::complex<double>> &in,
              std::vector<std::complex<double>> &out) const;

    /** F^{-1}[ g(xi) * F f(xi) ] for a real multiplier g over modes. */
    Field apply_mode_multiplier(const Field &f, const std::vector<double> &g) const;

  private:
    double M_, eps_, m_;
    int n_;
    std::vector<double> mu_;
    Field green_;
    struct FftPlans;
    std::unique_ptr<FftPlans> plans_;
};

/** eps^2-weighted duality pairing <f,g> = eps^2 sum f g. */
double inner(const Field &f, const Field &g);

/** Discrete Laplacian, five-point stencil with periodic wraparound. */
Field discrete_laplacian(const Field &f);

/** Green kernel as a field; C(x) with x indexed like any other field. */
Field green_function(const TorusLattice &lat);

double wick_constant(const TorusLattice &lat);

/** I_eps f = C *_eps f, computed spectrally as multiplication by 1/(2 mu). */
Field apply_green(const Field &f);

/** Circular eps^2-weighted convolution (f *_eps g)(x) = eps^2 sum_y f(x-y) g(y). */
Field convolve(const Field &f, const Field &g);

/** f(. - shift) with periodic index shift. */
Field shift(const Field &f, int dx, int dy);

/** Pointwise Wick power :phi^j: with variance a (j <= 4). */
Field wick_power(const Field &phi, int j, double a);

// Flat binary kernel cache: header M, eps, m (f64 LE), n (u64), then n^2 f64.
void save_kernel(const std::string &path, const TorusLattice &lat, const Field &kernel);
Field load_kernel(const std::string &path, const TorusLattice &lat);
/** Load the Green kernel from cache_dir if present, else compute and store it. */
Field green_function_cached(const TorusLattice &lat, const std::string &cache_dir);

} // namespace phi4

#endif
