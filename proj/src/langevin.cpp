#include "phi4/langevin.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phi4 {

double SimConfig::stiffness() const {
    return dt * (lattice->mass() + lattice->max_laplace_symbol());
}

std::vector<std::array<Point, 4>> SimConfig::default_configs() {
    return {{Point{0, 0}, Point{0, 0}, Point{0, 0}, Point{0, 0}},
            {Point{0, 0}, Point{1, 0}, Point{0, 1}, Point{1, 1}}};
}

StepKernel::StepKernel(const TorusLattice &lat, double dt) {
    const auto &mu = lat.multipliers();
    const double ie2 = 1.0 / (lat.spacing() * lat.spacing());
    decay.resize(mu.size());
    drift_gain.resize(mu.size());
    noise_amp.resize(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double e = std::exp(-mu[i] * dt);
        decay[i] = e;
        drift_gain[i] = (1.0 - e) / mu[i];
        noise_amp[i] = std::sqrt(ie2 * (1.0 - e * e) / (2.0 * mu[i]));
    }
}

Field gaussian_white(const TorusLattice &lat, std::mt19937_64 &rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Field w(lat);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = n01(rng);
    return w;
}

Field sample_free_field(const TorusLattice &lat, std::mt19937_64 &rng) {
    Field w = gaussian_white(lat, rng);
    const auto &mu = lat.multipliers();
    std::vector<double> g(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) g[i] = std::sqrt(1.0 / (2.0 * mu[i]));
    Field z = lat.apply_mode_multiplier(w, g);
    z *= 1.0 / lat.spacing();
    return z;
}

void step_with_noise(ChainState &state, const SimConfig &cfg, const StepKernel &k,
                     const Field &noise) {
    const TorusLattice &lat = *cfg.lattice;
    const std::size_t ns = lat.n_sites();
    const double norm = 1.0 / double(ns);

    std::vector<std::complex<double>> buf(ns), phat(ns), dhat(ns), what(ns);
    for (std::size_t i = 0; i < ns; ++i) buf[i] = state.phi[i];
    lat.dft(buf, phat);
    for (std::size_t i = 0; i < ns; ++i) buf[i] = noise[i];
    lat.dft(buf, what);

    if (cfg.lambda == 0.0) {
        for (std::size_t i = 0; i < ns; ++i)
            phat[i] = k.decay[i] * phat[i] + k.noise_amp[i] * what[i];
        lat.idft(phat, buf);
        for (std::size_t i = 0; i < ns; ++i) state.phi[i] = buf[i].real() * norm;
    } else {
        // exponential Heun: exact OU part plus a predictor-corrector average
        // of the nonlinear drift, weak second order in dt
        const double a = lat.wick_constant();
        auto drift_hat = [&](const std::vector<double> &p,
                             std::vector<std::complex<double>> &out) {
            for (std::size_t i = 0; i < ns; ++i)
                buf[i] = -0.5 * cfg.lambda * p[i] * p[i] * p[i] +
                         1.5 * cfg.lambda * a * p[i];
            lat.dft(buf, out);
        };
        std::vector<std::complex<double>> dhat2(ns), tmp(ns);
        std::vector<double> pred(ns);
        drift_hat(state.phi.data(), dhat);
        for (std::size_t i = 0; i < ns; ++i)
            tmp[i] = k.decay[i] * phat[i] + k.drift_gain[i] * dhat[i] +
                     k.noise_amp[i] * what[i];
        lat.idft(tmp, buf);
        for (std::size_t i = 0; i < ns; ++i) pred[i] = buf[i].real() * norm;
        drift_hat(pred, dhat2);
        for (std::size_t i = 0; i < ns; ++i)
            phat[i] = k.decay[i] * phat[i] +
                      k.drift_gain[i] * 0.5 * (dhat[i] + dhat2[i]) +
                      k.noise_amp[i] * what[i];
        lat.idft(phat, buf);
        for (std::size_t i = 0; i < ns; ++i) state.phi[i] = buf[i].real() * norm;
    }
    ++state.step_count;
    if (!std::isfinite(state.phi[0]))
        throw std::runtime_error("langevin step: field diverged at step " +
                                 std::to_string(state.step_count));
}

void step(ChainState &state, const SimConfig &cfg, const StepKernel &k) {
    Field w = gaussian_white(*cfg.lattice, state.rng);
    step_with_noise(state, cfg, k, w);
}

void step(ChainState &state, const SimConfig &cfg) {
    StepKernel k(*cfg.lattice, cfg.dt);
    step(state, cfg, k);
}

namespace {

/** (1/n^2) sum_x f(x) g(x+r) for all r via FFT. */
Field cross_correlation(const Field &f, const Field &g) {
    const TorusLattice &lat = f.lattice();
    const std::size_t ns = lat.n_sites();
    std::vector<std::complex<double>> a(ns), b(ns), fa, fb;
    for (std::size_t i = 0; i < ns; ++i) {
        a[i] = f[i];
        b[i] = g[i];
    }
    lat.dft(a, fa);
    lat.dft(b, fb);
    for (std::size_t i = 0; i < ns; ++i) fa[i] = std::conj(fa[i]) * fb[i];
    lat.idft(fa, a);
    Field out(lat);
    const double norm = 1.0 / (double(ns) * double(ns));
    for (std::size_t i = 0; i < ns; ++i) out[i] = a[i].real() * norm;
    return out;
}

double product4(const Field &f, const std::array<Point, 4> &c, int tx, int ty) {
    double p = 1.0;
    for (const Point &q : c) p *= f.at(q.ix + tx, q.iy + ty);
    return p;
}

/** Translation-averaged 4-point product. */
double s4_sample(const Field &f, const std::array<Point, 4> &c) {
    const int n = f.lattice().n();
    double s = 0;
    for (int ty = 0; ty < n; ++ty)
        for (int tx = 0; tx < n; ++tx) s += product4(f, c, tx, ty);
    return s / double(f.lattice().n_sites());
}

double gaussian_4pt(const TorusLattice &lat, const std::array<Point, 4> &c) {
    const Field &C = lat.green();
    auto cc = [&](int i, int j) {
        return C[lat.site(c[std::size_t(i)].ix - c[std::size_t(j)].ix,
                          c[std::size_t(i)].iy - c[std::size_t(j)].iy)];
    };
    return cc(0, 1) * cc(2, 3) + cc(0, 2) * cc(1, 3) + cc(0, 3) * cc(1, 2);
}

} // namespace

Field MeasurementSet::s2_mean() const {
    Field m(*lat);
    for (const Field &b : s2_batch) m += b;
    m *= 1.0 / double(s2_batch.size());
    return m;
}

Field MeasurementSet::s2_stderr() const {
    const std::size_t b = s2_batch.size();
    Field m = s2_mean(), v(*lat);
    for (const Field &f : s2_batch)
        for (std::size_t i = 0; i < v.size(); ++i) {
            double d = f[i] - m[i];
            v[i] += d * d;
        }
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::sqrt(v[i] / double(b - 1) / double(b));
    return v;
}

double MeasurementSet::s2_at(const Field &s2, Point a, Point b) const {
    return s2[lat->site(b.ix - a.ix, b.iy - a.iy)];
}

MeasurementSet run_chain(const SimConfig &cfg, ChainState *final_state) {
    const TorusLattice &lat = *cfg.lattice;
    if (cfg.n_batches < 8)
        throw std::invalid_argument("run_chain: need at least 8 batches");
    const long long bs = cfg.n_samples / cfg.n_batches;
    if (bs < 1) throw std::invalid_argument("run_chain: too few samples per batch");

    MeasurementSet ms;
    ms.lat = &lat;
    ms.lambda = cfg.lambda;
    ms.wick_a = lat.wick_constant();
    ms.seed = cfg.seed;
    ms.n_samples = bs * cfg.n_batches;
    ms.configs = cfg.configs.empty() ? SimConfig::default_configs() : cfg.configs;
    const bool cv = cfg.control_variate && cfg.lambda != 0.0;
    ms.control_variate = cv;

    StepKernel kern(lat, cfg.dt);
    SimConfig free_cfg = cfg;
    free_cfg.lambda = 0.0;

    ChainState st;
    st.rng.seed(cfg.seed);
    st.phi = sample_free_field(lat, st.rng);
    ChainState zst; // coupled free chain, shares the noise stream
    zst.phi = st.phi;

    const double a = ms.wick_a;
    const Field &C = lat.green();
    const double eps2 = lat.spacing() * lat.spacing();
    const double inv_ns = 1.0 / double(lat.n_sites());
    const std::size_t nc = ms.configs.size();
    std::vector<double> g4(nc);
    for (std::size_t c = 0; c < nc; ++c) g4[c] = gaussian_4pt(lat, ms.configs[c]);

    ms.s4_batch.assign(nc, {});
    auto advance = [&](long long steps) {
        for (long long s = 0; s < steps; ++s) {
            Field w = gaussian_white(lat, st.rng);
            step_with_noise(st, cfg, kern, w);
            if (cv) step_with_noise(zst, free_cfg, kern, w);
        }
    };
    advance(cfg.burn_in);

    for (int b = 0; b < cfg.n_batches; ++b) {
        Field s2_acc(lat);
        std::vector<double> s4_acc(nc, 0.0);
        double phi_acc = 0, phi3_acc = 0, w2_acc = 0, w3_acc = 0, en_acc = 0;
        for (long long s = 0; s < bs; ++s) {
            advance(cfg.thinning);
            const Field &phi = st.phi;
            for (double x : phi.data())
                if (!std::isfinite(x))
                    throw std::runtime_error("run_chain: non-finite field at step " +
                                             std::to_string(st.step_count));
            Field acf = cross_correlation(phi, phi);
            if (cv) {
                acf -= cross_correlation(zst.phi, zst.phi);
                acf += C;
            }
            s2_acc += acf;
            for (std::size_t c = 0; c < nc; ++c) {
                double v = s4_sample(phi, ms.configs[c]);
                if (cv) v += g4[c] - s4_sample(zst.phi, ms.configs[c]);
                s4_acc[c] += v;
            }
            for (std::size_t i = 0; i < phi.size(); ++i) {
                double p = phi[i];
                phi_acc += p * inv_ns;
                phi3_acc += p * p * p * inv_ns;
                w2_acc += (p * p - a) * inv_ns;
                w3_acc += p * (p * p - 3 * a) * inv_ns;
            }
            Field lap = discrete_laplacian(phi);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                double p = phi[i];
                double drift = -(lat.mass() * p - lap[i]) -
                               0.5 * cfg.lambda * p * p * p + 1.5 * cfg.lambda * a * p;
                en_acc += eps2 * p * drift;
            }
        }
        double ib = 1.0 / double(bs);
        s2_acc *= ib;
        ms.s2_batch.push_back(std::move(s2_acc));
        for (std::size_t c = 0; c < nc; ++c) ms.s4_batch[c].push_back(s4_acc[c] * ib);
        ms.phi_batch.push_back(phi_acc * ib);
        ms.phi3_batch.push_back(phi3_acc * ib);
        ms.wick2_batch.push_back(w2_acc * ib);
        ms.wick3_batch.push_back(w3_acc * ib);
        ms.energy_batch.push_back(en_acc * ib);
    }
    if (final_state) *final_state = std::move(st);
    return ms;
}

DiagramValue connected_4pt(const MeasurementSet &ms) {
    if (ms.n_batches() < 8)
        throw std::invalid_argument("connected_4pt: insufficient batches");
    DiagramValue dv;
    const auto &cs = ms.configs;
    for (std::size_t c = 0; c < cs.size(); ++c) {
        const auto &pts = cs[c];
        // observables: S4, then S2 at the three pairings' separations
        std::array<std::pair<int, int>, 6> pairs{
            {{0, 1}, {2, 3}, {0, 2}, {1, 3}, {0, 3}, {1, 2}}};
        std::vector<std::vector<double>> obs(7);
        obs[0] = ms.s4_batch[c];
        for (std::size_t p = 0; p < 6; ++p) {
            Point x = pts[std::size_t(pairs[p].first)];
            Point y = pts[std::size_t(pairs[p].second)];
            std::size_t r = ms.lat->site(y.ix - x.ix, y.iy - x.iy);
            obs[p + 1].reserve(ms.s2_batch.size());
            for (const Field &f : ms.s2_batch) obs[p + 1].push_back(f[r]);
        }
        MeanErr u = jackknife(obs, [](const std::vector<double> &v) {
            return v[0] - (v[1] * v[2] + v[3] * v[4] + v[5] * v[6]);
        });
        dv.values.push_back(u.mean);
        dv.stderrs.push_back(u.stderr_);
    }
    return dv;
}

void save_checkpoint(const std::string &path, const TorusLattice &lat,
                     const ChainState &state) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    double hdr[3] = {lat.side_length(), lat.spacing(), lat.mass()};
    std::uint64_t n = std::uint64_t(lat.n());
    os.write(reinterpret_cast<const char *>(hdr), sizeof(hdr));
    os.write(reinterpret_cast<const char *>(&n), sizeof(n));
    std::int64_t sc = state.step_count;
    os.write(reinterpret_cast<const char *>(&sc), sizeof(sc));
    os.write(reinterpret_cast<const char *>(state.phi.data().data()),
             std::streamsize(state.phi.size() * sizeof(double)));
    std::ostringstream rs;
    rs << state.rng;
    std::string r = rs.str();
    std::uint64_t len = r.size();
    os.write(reinterpret_cast<const char *>(&len), sizeof(len));
    os.write(r.data(), std::streamsize(r.size()));
}

ChainState load_checkpoint(const std::string &path, const TorusLattice &lat) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    double hdr[3];
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char *>(hdr), sizeof(hdr));
    is.read(reinterpret_cast<char *>(&n), sizeof(n));
    if (!is || hdr[0] != lat.side_length() || hdr[1] != lat.spacing() ||
        hdr[2] != lat.mass() || n != std::uint64_t(lat.n()))
        throw std::runtime_error("load_checkpoint: header mismatch in " + path);
    ChainState st;
    std::int64_t sc = 0;
    is.read(reinterpret_cast<char *>(&sc), sizeof(sc));
    st.step_count = sc;
    st.phi = Field(lat);
    is.read(reinterpret_cast<char *>(st.phi.data().data()),
            std::streamsize(st.phi.size() * sizeof(double)));
    std::uint64_t len = 0;
    is.read(reinterpret_cast<char *>(&len), sizeof(len));
    std::string r(len, '\0');
    is.read(r.data(), std::streamsize(len));
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    std::istringstream rs(r);
    rs >> st.rng;
    return st;
}

void write_measurements_csv(const std::string &path, const MeasurementSet &ms) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_measurements_csv: cannot open " + path);
    os << "observable,config_id,value,stderr,n_batches\n";
    os.precision(12);
    const int nb = ms.n_batches();
    Field m = ms.s2_mean(), e = ms.s2_stderr();
    for (std::size_t r = 0; r < m.size(); ++r)
        os << "S2," << r << "," << m[r] << "," << e[r] << "," << nb << "\n";
    auto scalar_row = [&](const char *name, const std::vector<double> &b) {
        MeanErr s = batch_stats(b);
        os << name << ",0," << s.mean << "," << s.stderr_ << "," << nb << "\n";
    };
    scalar_row("E_phi", ms.phi_batch);
    scalar_row("E_phi3", ms.phi3_batch);
    scalar_row("E_wick2", ms.wick2_batch);
    scalar_row("E_wick3", ms.wick3_batch);
    scalar_row("energy_balance", ms.energy_batch);
    for (std::size_t c = 0; c < ms.configs.size(); ++c) {
        MeanErr s = batch_stats(ms.s4_batch[c]);
        os << "S4," << c << "," << s.mean << "," << s.stderr_ << "," << nb << "\n";
    }
    DiagramValue u4 = connected_4pt(ms);
    for (std::size_t c = 0; c < u4.values.size(); ++c)
        os << "U4," << c << "," << u4.values[c] << "," << u4.stderrs[c] << "," << nb
           << "\n";
}

} // namespace phi4
