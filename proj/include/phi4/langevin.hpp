#ifndef PHI4_LANGEVIN_HPP
#define PHI4_LANGEVIN_HPP

#include "phi4/diagram.hpp"
#include "phi4/lattice.hpp"
#include "phi4/stats.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace phi4 {

/**
 * Configuration for sampling the Gibbs measure via the stochastic
 * quantization equation dPhi = [-(m-Delta)Phi - (lambda/2)Phi^3 +
 * (3/2) lambda a Phi] dt + dxi with per-site noise intensity 1/eps^2.
 */
struct SimConfig {
    const TorusLattice *lattice = nullptr;
    double lambda = 0.0;
    double dt = 0.05;
    long long burn_in = 20000;
    long long n_samples = 200000;
    int thinning = 5;
    std::uint64_t seed = 1;
    int n_batches = 16;
    // coupled free-field control variate on the common noise stream;
    // leaves the estimators unbiased, shrinks variance to O(lambda)
    bool control_variate = true;
    std::vector<std::array<Point, 4>> configs; // 4-point configurations

    /** dt*(m + max l_eps); informational only, the integrator has no CFL bound. */
    double stiffness() const;
    /** Coincident plus nearest-neighbour square configurations. */
    static std::vector<std::array<Point, 4>> default_configs();
};

struct ChainState {
    Field phi;
    long long step_count = 0;
    std::mt19937_64 rng;
};

/** Per-mode exponential-integrator factors for a fixed (lattice, dt). */
struct StepKernel {
    StepKernel(const TorusLattice &lat, double dt);
    std::vector<double> decay;      // e^{-mu dt}
    std::vector<double> drift_gain; // (1 - e^{-mu dt}) / mu
    std::vector<double> noise_amp;  // sqrt(eps^{-2} (1 - e^{-2 mu dt}) / (2 mu))
};

/** iid standard normal field (one variate per site). */
Field gaussian_white(const TorusLattice &lat, std::mt19937_64 &rng);

/** Exact draw Z ~ Gaussian(0, C_{M,eps}) via independent Fourier modes. */
Field sample_free_field(const TorusLattice &lat, std::mt19937_64 &rng);

/** One exponential-Heun step with an externally supplied unit-normal
 *  noise field. The linear OU part is exact per mode, so at lambda=0 the
 *  stationary law is exactly Gaussian(0, C) for every dt; the cubic drift
 *  enters through a predictor-corrector average (weak second order). */
void step_with_noise(ChainState &state, const SimConfig &cfg, const StepKernel &k,
                     const Field &noise);

/** Step drawing the noise from the state's rng. */
void step(ChainState &state, const SimConfig &cfg, const StepKernel &k);
/** Convenience variant building the kernel on the fly (tests, short runs). */
void step(ChainState &state, const SimConfig &cfg);

/** Time-averaged observables with batch-mean error state. */
struct MeasurementSet {
    const TorusLattice *lat = nullptr;
    double lambda = 0, wick_a = 0;
    std::uint64_t seed = 0;
    long long n_samples = 0;
    bool control_variate = false;
    std::vector<std::array<Point, 4>> configs;

    std::vector<Field> s2_batch;               // batch means of S^2(r)
    std::vector<std::vector<double>> s4_batch; // [config][batch]
    std::vector<double> phi_batch, phi3_batch; // site-averaged odd moments
    std::vector<double> wick2_batch, wick3_batch;
    std::vector<double> energy_batch; // <Phi, drift>_eps for the balance check

    int n_batches() const { return int(s2_batch.size()); }
    Field s2_mean() const;
    Field s2_stderr() const;
    MeanErr scalar(const std::vector<double> &batch) const { return batch_stats(batch); }
    /** S^2 at the wrapped separation of two points. */
    double s2_at(const Field &s2, Point a, Point b) const;
};

/** Burn-in, then n_samples thinned measurements; fully seed-determined.
 *  When final_state is given it receives the chain's end state. */
MeasurementSet run_chain(const SimConfig &cfg, ChainState *final_state = nullptr);

/** U^4 = S^4 - three 2-point pairings on each configuration, jackknifed
 *  over batches. */
DiagramValue connected_4pt(const MeasurementSet &ms);

// resumable checkpoint: lattice header + field + rng state + step_count
void save_checkpoint(const std::string &path, const TorusLattice &lat,
                     const ChainState &state);
ChainState load_checkpoint(const std::string &path, const TorusLattice &lat);

/** measurements.csv rows: observable, config_id, value, stderr, n_batches. */
void write_measurements_csv(const std::string &path, const MeasurementSet &ms);

} // namespace phi4

#endif
