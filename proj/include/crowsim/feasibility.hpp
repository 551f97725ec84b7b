// feasibility.hpp — order-of-magnitude device estimates: coherence window from
// the cavity Q, gate times under both collective-coupling conventions, and the
// photon crossing time.

#pragma once

#include "crowsim/fock.hpp"

namespace crowsim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct DeviceParams {
    double quality_factor = 1e6;
    double omega = 0.0;    // rad/s, photon carrier
    double g = 0.0;        // rad/s, single-dopant coupling
    int n_dopants = 1;     // N
    double detuning = 0.0; // rad/s, dispersive detuning Delta
    double v_g_fraction = 1e-4;          // group velocity as a fraction of c
    double device_length = 30.0;         // lattice constants
    double lattice_constant_m = 0.5e-6;  // m

    void validate() const {
        detail::require(quality_factor > 0.0, "DeviceParams: Q must be positive");
        detail::require(omega > 0.0, "DeviceParams: omega must be positive");
        detail::require(g > 0.0, "DeviceParams: g must be positive");
        detail::require(n_dopants >= 1, "DeviceParams: N must be >= 1");
        detail::require(detuning > 0.0, "DeviceParams: detuning must be positive");
        detail::require(v_g_fraction > 0.0, "DeviceParams: v_g must be positive");
        detail::require(device_length > 0.0, "DeviceParams: length must be positive");
        detail::require(lattice_constant_m > 0.0, "DeviceParams: lattice constant must be positive");
    }
};

/// Feasibility numbers. Collective enhancement of the dispersive rate is
/// reported under both conventions (rate N g^2/Delta from sqrt(N)-enhanced
/// coupling, and rate sqrt(N) g^2/Delta), labeled, with no attempt to pick one.
struct FeasibilityReport {
    double t1_s = 0.0;     // Q/omega
    double gamma = 0.0;    // omega/Q, rad/s

    double pi_phase_time_n_convention_s = 0.0;       // pi Delta / (N g^2)
    double pi_phase_time_sqrt_n_convention_s = 0.0;  // pi Delta / (sqrt(N) g^2)

    double two_photon_gate_time_n_convention_s = 0.0;       // pi Delta / (sqrt(2) N g1 g2)
    double two_photon_gate_time_sqrt_n_convention_s = 0.0;

    double crossing_time_s = 0.0;  // length * lattice constant / (v_g c)

    bool pi_phase_within_t1_n = false;
    bool pi_phase_within_t1_sqrt_n = false;
    bool two_photon_within_t1_n = false;
    bool two_photon_within_t1_sqrt_n = false;
    bool crossing_within_t1 = false;
};

inline FeasibilityReport params_estimate(const DeviceParams& d) {
    d.validate();
    FeasibilityReport r;
    r.t1_s = d.quality_factor / d.omega;
    r.gamma = d.omega / d.quality_factor;

    const double n = static_cast<double>(d.n_dopants);
    const double g2 = d.g * d.g;
    r.pi_phase_time_n_convention_s = kPi * d.detuning / (n * g2);
    r.pi_phase_time_sqrt_n_convention_s = kPi * d.detuning / (std::sqrt(n) * g2);

    const double root2 = std::sqrt(2.0);
    r.two_photon_gate_time_n_convention_s = kPi * d.detuning / (root2 * n * g2);
    r.two_photon_gate_time_sqrt_n_convention_s =
        kPi * d.detuning / (root2 * std::sqrt(n) * g2);

    r.crossing_time_s =
        d.device_length * d.lattice_constant_m / (d.v_g_fraction * kSpeedOfLight);

    r.pi_phase_within_t1_n = r.pi_phase_time_n_convention_s < r.t1_s;
    r.pi_phase_within_t1_sqrt_n = r.pi_phase_time_sqrt_n_convention_s < r.t1_s;
    r.two_photon_within_t1_n = r.two_photon_gate_time_n_convention_s < r.t1_s;
    r.two_photon_within_t1_sqrt_n = r.two_photon_gate_time_sqrt_n_convention_s < r.t1_s;
    r.crossing_within_t1 = r.crossing_time_s < r.t1_s;
    return r;
}

}  // namespace crowsim
