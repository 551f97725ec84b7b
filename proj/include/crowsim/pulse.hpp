// pulse.hpp — single-photon Gaussian wavepacket on a CROW chain, with group
// velocity extraction from the population centroid.

#pragma once

#include "crowsim/fitting.hpp"
#include "crowsim/propagator.hpp"

namespace crowsim {

namespace detail {
/// Deterministic uniform in [0,1) from the raw 64-bit stream, independent of
/// the standard library's distribution implementation.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    double next() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};
}  // namespace detail

struct PulseConfig {
    int chain_length = 64;
    double hopping = 1.0;         // J, rad/s
    double omega0 = 0.0;          // site frequency (also the rotating frame)
    double disorder = 0.0;        // W: on-site shifts uniform in [-W, W]
    std::uint64_t seed = 1;
    double center = 48.0;         // sites
    double width = 6.0;           // Gaussian sigma, sites (>= 2)
    double carrier_k = kPi / 2.0; // rad per site
    int steps = 240;              // trajectory samples
    double time_span = 0.0;       // s; 0 picks a span from the predicted velocity
};

struct PulseResult {
    std::vector<double> times;
    std::vector<std::vector<double>> site_populations;  // [step][site]
    std::vector<double> centroids;
    std::vector<double> site_detunings;  // the disorder realization used

    double predicted_velocity = 0.0;  // 2 J |sin k|, sites/s
    double fitted_velocity = 0.0;     // signed centroid slope, sites/s
    bool velocity_valid = false;
    bool boundary_reached = false;
};

/// Dispersion slope of the tight-binding chain, sites per second.
inline double chain_group_velocity(double J, double k) { return 2.0 * J * std::sin(k); }

inline PulseResult crow_pulse_sim(const PulseConfig& cfg) {
    detail::require(cfg.chain_length >= 8, "crow_pulse_sim: chain length must be >= 8");
    detail::require(cfg.width >= 2.0, "crow_pulse_sim: pulse width must be >= 2 sites");
    detail::require(cfg.steps >= 12, "crow_pulse_sim: need at least 12 trajectory samples");
    detail::require(cfg.hopping > 0.0, "crow_pulse_sim: hopping must be positive");
    const int L = cfg.chain_length;
    detail::require(cfg.center > 0.0 && cfg.center < L - 1,
                    "crow_pulse_sim: pulse center must lie inside the chain");

    // disorder realization
    ModeGraph graph = ModeGraph::chain(L, cfg.omega0, cfg.hopping);
    detail::UniformSource rng(cfg.seed);
    std::vector<double> detunings(static_cast<std::size_t>(L), 0.0);
    if (cfg.disorder > 0.0) {
        for (int i = 0; i < L; ++i) {
            detunings[static_cast<std::size_t>(i)] = cfg.disorder * (2.0 * rng.next() - 1.0);
            graph.mode_frequencies[static_cast<std::size_t>(i)] +=
                detunings[static_cast<std::size_t>(i)];
        }
    }

    const BasisPtr basis = enumerate_basis(ModeSet(L, 1));
    const OperatorMatrix h = crow_hopping_h(basis, graph, cfg.omega0);

    // Gaussian wavepacket with carrier e^{ikx}
    StateVector psi = StateVector::zero(basis);
    for (int x = 0; x < L; ++x) {
        std::vector<int> occ(static_cast<std::size_t>(L), 0);
        occ[static_cast<std::size_t>(x)] = 1;
        const int idx = basis->index_of(occ);
        const double dx = x - cfg.center;
        psi.amplitudes(idx) = std::exp(Complex(-dx * dx / (4.0 * cfg.width * cfg.width),
                                               cfg.carrier_k * x));
    }
    psi.normalize();

    const double v_pred = std::abs(chain_group_velocity(cfg.hopping, cfg.carrier_k));
    double span = cfg.time_span;
    if (span <= 0.0) {
        const double margin =
            std::min(cfg.center, (L - 1) - cfg.center) - 3.0 * cfg.width;
        if (v_pred > 0.1 * cfg.hopping && margin > 0.0)
            span = 0.7 * margin / v_pred;
        else
            span = 8.0 / cfg.hopping;
    }

    PulseResult result;
    result.site_detunings = detunings;
    result.predicted_velocity = v_pred;

    // Fixed spectral decomposition, sampled at each output time; keeps the
    // trajectory bit-reproducible regardless of step count.
    Eigen::SelfAdjointEigenSolver<MatrixC> es(h.dense());
    const VectorC coeffs0 = es.eigenvectors().adjoint() * psi.amplitudes;

    std::vector<int> site_index(static_cast<std::size_t>(L));
    for (int x = 0; x < L; ++x) {
        std::vector<int> occ(static_cast<std::size_t>(L), 0);
        occ[static_cast<std::size_t>(x)] = 1;
        site_index[static_cast<std::size_t>(x)] = basis->index_of(occ);
    }

    double edge_pop_in_window = 0.0;
    const int lo = cfg.steps / 3, hi = 2 * cfg.steps / 3;
    for (int s = 0; s < cfg.steps; ++s) {
        const double t = span * s / (cfg.steps - 1);
        VectorC coeffs = coeffs0;
        for (int k = 0; k < coeffs.size(); ++k)
            coeffs(k) *= std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
        const VectorC amps = es.eigenvectors() * coeffs;

        std::vector<double> pops(static_cast<std::size_t>(L));
        double centroid = 0.0, total = 0.0;
        for (int x = 0; x < L; ++x) {
            const double p = std::norm(amps(site_index[static_cast<std::size_t>(x)]));
            pops[static_cast<std::size_t>(x)] = p;
            centroid += x * p;
            total += p;
        }
        centroid /= total;
        if (s >= lo && s <= hi) {
            edge_pop_in_window = std::max(
                edge_pop_in_window, pops[0] + pops[1] + pops[static_cast<std::size_t>(L - 2)] +
                                        pops[static_cast<std::size_t>(L - 1)]);
        }
        result.times.push_back(t);
        result.site_populations.push_back(std::move(pops));
        result.centroids.push_back(centroid);
    }

    result.boundary_reached = edge_pop_in_window > 1e-3;
    if (!result.boundary_reached) {
        const std::span<const double> tw(result.times.data() + lo,
                                         static_cast<std::size_t>(hi - lo + 1));
        const std::span<const double> cw(result.centroids.data() + lo,
                                         static_cast<std::size_t>(hi - lo + 1));
        result.fitted_velocity = linear_fit(tw, cw).slope;
        result.velocity_valid = true;
    }
    return result;
}

}  // namespace crowsim
