// hamiltonians.hpp — physical Hamiltonians of the doped-CROW device: tight-binding
// hopping, the three-level cascade dopant, the effective two-photon model, loss,
// and piecewise-constant switching schedules.
//
// hbar = 1 throughout; couplings and frequencies in rad/s, times in s. The
// rotating frame at the photon carrier is the default: builders take the frame
// frequency explicitly and subtract it.

#pragma once

#include "crowsim/fock.hpp"

#include <functional>
#include <map>
#include <utility>

namespace crowsim {

/// Mode frequencies and undirected hopping couplings between defect modes.
struct ModeGraph {
    std::vector<double> mode_frequencies;  // rad/s per mode

    struct Hop {
        int i;
        int j;
        double strength;  // J_ij, rad/s, real
    };
    std::vector<Hop> hops;

    ModeGraph() = default;
    explicit ModeGraph(std::vector<double> freqs) : mode_frequencies(std::move(freqs)) {}

    /// Uniform chain of n modes at omega0 with nearest-neighbour hopping J.
    static ModeGraph chain(int n, double omega0, double J) {
        ModeGraph g(std::vector<double>(static_cast<std::size_t>(n), omega0));
        for (int i = 0; i + 1 < n; ++i) g.add_hop(i, i + 1, J);
        return g;
    }

    void add_hop(int i, int j, double J) {
        detail::require(i != j, "ModeGraph: self-hops not allowed");
        const int a = std::min(i, j), b = std::max(i, j);
        for (const Hop& h : hops)
            detail::require(!(h.i == a && h.j == b), "ModeGraph: duplicate hop");
        hops.push_back({a, b, J});
    }

    int mode_count() const { return static_cast<int>(mode_frequencies.size()); }
};

/// A (possibly collective) dopant attached to one defect mode.
struct DopantSpec {
    int attached_mode = 0;
    DopantLevelSet levels = DopantLevelSet::cascade();
    double omega_gh = 0.0;  // rad/s
    double omega_he = 0.0;  // rad/s; for two-level dopants omega_gh holds omega_ge
    double g1 = 0.0;        // rad/s, g<->h coupling (or Omega for two-level)
    double g2 = 0.0;        // rad/s, h<->e coupling
    int n_dopants = 1;      // collective count N at this defect

    static DopantSpec cascade(int mode, double omega_gh, double omega_he, double g1, double g2,
                              int N = 1) {
        detail::require(g1 >= 0.0 && g2 >= 0.0, "DopantSpec: couplings must be >= 0");
        detail::require(N >= 1, "DopantSpec: n_dopants must be >= 1");
        DopantSpec s;
        s.attached_mode = mode;
        s.levels = DopantLevelSet::cascade();
        s.omega_gh = omega_gh;
        s.omega_he = omega_he;
        s.g1 = g1;
        s.g2 = g2;
        s.n_dopants = N;
        return s;
    }

    /// Cascade dopant symmetrically detuned from a photon at omega:
    /// omega_gh - omega = sign*delta, omega_he - omega = -sign*delta.
    static DopantSpec symmetric_cascade(int mode, double omega, double delta, double g1, double g2,
                                        int N = 1, int detuning_sign = +1) {
        detail::require(detuning_sign == 1 || detuning_sign == -1,
                        "DopantSpec: detuning_sign must be +1 or -1");
        return cascade(mode, omega + detuning_sign * delta, omega - detuning_sign * delta, g1, g2,
                       N);
    }

    static DopantSpec two_level(int mode, double omega_ge, double coupling, int N = 1) {
        detail::require(coupling >= 0.0, "DopantSpec: coupling must be >= 0");
        detail::require(N >= 1, "DopantSpec: n_dopants must be >= 1");
        DopantSpec s;
        s.attached_mode = mode;
        s.levels = DopantLevelSet::two_level();
        s.omega_gh = omega_ge;
        s.g1 = coupling;
        s.n_dopants = N;
        return s;
    }

    bool is_cascade() const { return levels.is_cascade(); }
    /// Collective enhancement: sqrt(N) on each transition.
    double collective_g1() const { return std::sqrt(static_cast<double>(n_dopants)) * g1; }
    double collective_g2() const { return std::sqrt(static_cast<double>(n_dopants)) * g2; }
};

/// Parameter set of the effective dispersive + two-photon model.
struct EffectiveParams {
    double g1 = 0.0;     // rad/s
    double g2 = 0.0;     // rad/s
    double delta = 1.0;  // rad/s, detuning; must be nonzero

    EffectiveParams() = default;
    EffectiveParams(double g1_, double g2_, double delta_) : g1(g1_), g2(g2_), delta(delta_) {
        detail::require(delta != 0.0, "EffectiveParams: delta must be nonzero");
    }

    /// Two-photon Rabi coupling sqrt(2)*g1*g2/delta. Recomputed, never stored.
    double kappa() const { return std::sqrt(2.0) * g1 * g2 / delta; }
    /// Dispersive phase rate g1^2/delta.
    double phi_rate() const { return g1 * g1 / delta; }
    /// Dispersive-regime check: delta at least 10x the larger coupling.
    bool valid_regime() const { return std::abs(delta) >= 10.0 * std::max(g1, g2); }
};

/// Piecewise-constant timeline of named parameter overrides.
struct Schedule {
    struct Segment {
        double duration;  // s, > 0
        std::map<std::string, double> overrides;
    };
    std::vector<Segment> segments;

    void add(double duration, std::map<std::string, double> overrides = {}) {
        detail::require(duration > 0.0 && std::isfinite(duration),
                        "Schedule: segment duration must be positive and finite");
        segments.push_back({duration, std::move(overrides)});
    }

    double total_duration() const {
        double t = 0.0;
        for (const Segment& s : segments) t += s.duration;
        return t;
    }
};

struct TimedOperator {
    double duration;
    OperatorMatrix op;
};

using ParamMap = std::map<std::string, double>;
using HamiltonianBuilder = std::function<OperatorMatrix(const BasisPtr&, const ParamMap&)>;

/// Tight-binding CROW Hamiltonian in the frame rotating at frame_frequency:
///   H = sum_i (omega_i - frame) a_i^dag a_i + sum_<ij> J_ij (a_i^dag a_j + a_j^dag a_i)
inline OperatorMatrix crow_hopping_h(const BasisPtr& basis, const ModeGraph& graph,
                                     double frame_frequency) {
    detail::require(graph.mode_count() == basis->mode_count(),
                    "crow_hopping_h: mode graph does not match basis mode count");
    OperatorMatrix h = zero_op(basis);
    for (int i = 0; i < graph.mode_count(); ++i) {
        const double det = graph.mode_frequencies[static_cast<std::size_t>(i)] - frame_frequency;
        if (det != 0.0) h = h + det * number_op(basis, i);
    }
    for (const ModeGraph::Hop& hop : graph.hops) {
        OperatorMatrix term =
            creation_op(basis, hop.i) * annihilation_op(basis, hop.j);
        term = term + term.adjoint();
        h = h + hop.strength * term;
    }
    h.hermitian = true;
    return h;
}

/// Full three-level cascade dopant in the frame rotating at the photon
/// frequency omega:
///   H = (w_gh - w) s_hh + (w_gh + w_he - 2w) s_ee
///     + sqrt(N) g1 (s_hg a + s_gh a^dag) + sqrt(N) g2 (s_eh a + s_he a^dag)
/// For symmetric detuning the s_ee coefficient vanishes (two-photon resonance).
inline OperatorMatrix cascade_dopant_h(const BasisPtr& basis, const DopantSpec& spec,
                                       double photon_frequency, int dopant_index = 0) {
    detail::require(spec.is_cascade(), "cascade_dopant_h: requires a three-level cascade spec");
    detail::require(dopant_index >= 0 && dopant_index < basis->dopant_count(),
                    "cascade_dopant_h: invalid dopant index");
    detail::require(basis->dopant(dopant_index).is_cascade(),
                    "cascade_dopant_h: basis dopant slot is not three-level");
    const int m = spec.attached_mode;
    detail::require(m >= 0 && m < basis->mode_count(), "cascade_dopant_h: invalid attached mode");

    const double det_h = spec.omega_gh - photon_frequency;
    const double det_e = spec.omega_gh + spec.omega_he - 2.0 * photon_frequency;
    const double G1 = spec.collective_g1();
    const double G2 = spec.collective_g2();

    const OperatorMatrix a = annihilation_op(basis, m);
    const OperatorMatrix adag = creation_op(basis, m);

    OperatorMatrix h = det_h * dopant_transition_op(basis, dopant_index, Level::h, Level::h);
    if (det_e != 0.0)
        h = h + det_e * dopant_transition_op(basis, dopant_index, Level::e, Level::e);

    OperatorMatrix up1 = dopant_transition_op(basis, dopant_index, Level::h, Level::g) * a;
    h = h + G1 * (up1 + up1.adjoint());
    OperatorMatrix up2 = dopant_transition_op(basis, dopant_index, Level::e, Level::h) * a;
    h = h + G2 * (up2 + up2.adjoint());
    h.hermitian = true;
    return h;
}

/// Effective dispersive + two-photon Hamiltonian on one mode and one dopant:
///   H = (g1^2/d) s_gg a^dag a + (g2^2/d) s_ee a a^dag + (g1 g2/d)(s_ge a^dag^2 + s_eg a^2)
/// The second term keeps the a a^dag ordering, i.e. the diagonal is n+1 on
/// every |e,n> including the vacuum; include_vacuum_shift = false drops the +1.
inline OperatorMatrix effective_h(const BasisPtr& basis, const EffectiveParams& params,
                                  bool include_vacuum_shift = true) {
    detail::require(basis->mode_count() == 1 && basis->dopant_count() == 1,
                    "effective_h: basis must hold exactly one mode and one dopant");
    const DopantLevelSet& set = basis->dopant(0);
    detail::require(set.contains(Level::g) && set.contains(Level::e),
                    "effective_h: dopant must provide levels g and e");

    const double cg = params.g1 * params.g1 / params.delta;
    const double ce = params.g2 * params.g2 / params.delta;
    const double cx = params.g1 * params.g2 / params.delta;

    const OperatorMatrix n = number_op(basis, 0);
    const OperatorMatrix sgg = dopant_transition_op(basis, 0, Level::g, Level::g);
    const OperatorMatrix see = dopant_transition_op(basis, 0, Level::e, Level::e);

    OperatorMatrix h = cg * (sgg * n);
    h = h + ce * (include_vacuum_shift ? see * n + see : see * n);

    const OperatorMatrix a = annihilation_op(basis, 0);
    OperatorMatrix two_photon =
        dopant_transition_op(basis, 0, Level::g, Level::e) * (a.adjoint() * a.adjoint());
    h = h + cx * (two_photon + two_photon.adjoint());
    h.hermitian = true;
    return h;
}

/// Dispersive limit of N two-level dopants on one mode: H = N Omega^2/delta s_gg a^dag a.
inline OperatorMatrix two_level_dispersive_h(const BasisPtr& basis, double omega_coupling,
                                             double delta, int n_dopants = 1,
                                             int dopant_index = 0, int mode_index = 0) {
    detail::require(delta != 0.0, "two_level_dispersive_h: delta must be nonzero");
    detail::require(n_dopants >= 1, "two_level_dispersive_h: n_dopants must be >= 1");
    const double geff = std::sqrt(static_cast<double>(n_dopants)) * omega_coupling;
    const double rate = geff * geff / delta;
    OperatorMatrix h = rate * (dopant_transition_op(basis, dopant_index, Level::g, Level::g) *
                               number_op(basis, mode_index));
    h.hermitian = true;
    return h;
}

/// No-jump loss term -(i/2) sum_i gamma_i a_i^dag a_i; add to a Hamiltonian for
/// sub-normalized evolution. gamma = omega/Q by convention.
inline OperatorMatrix loss_term(const BasisPtr& basis, const std::vector<double>& rates) {
    detail::require(static_cast<int>(rates.size()) == basis->mode_count(),
                    "loss_term: need one rate per mode");
    OperatorMatrix h = zero_op(basis);
    for (int i = 0; i < basis->mode_count(); ++i) {
        const double g = rates[static_cast<std::size_t>(i)];
        detail::require(g >= 0.0, "loss_term: negative rate");
        if (g > 0.0) h = h + Complex(0.0, -0.5 * g) * number_op(basis, i);
    }
    h.hermitian = false;
    return h;
}

inline OperatorMatrix loss_term(const BasisPtr& basis, double rate) {
    return loss_term(basis, std::vector<double>(static_cast<std::size_t>(basis->mode_count()), rate));
}

/// Compile a schedule to a piecewise-constant Hamiltonian timeline. Each
/// segment's parameters are the base map with its overrides applied; override
/// names must already exist in the base map. Adjacent equal matrices merge.
inline std::vector<TimedOperator> schedule_h(const BasisPtr& basis, const Schedule& schedule,
                                             const ParamMap& base_params,
                                             const HamiltonianBuilder& build) {
    std::vector<TimedOperator> timeline;
    for (const Schedule::Segment& seg : schedule.segments) {
        ParamMap params = base_params;
        for (const auto& [name, value] : seg.overrides) {
            auto it = params.find(name);
            if (it == params.end())
                throw std::invalid_argument("schedule_h: unresolvable parameter name '" + name +
                                            "'");
            it->second = value;
        }
        OperatorMatrix h = build(basis, params);
        detail::require(compatible(h.basis, basis), "schedule_h: builder returned foreign basis");
        if (!timeline.empty() && timeline.back().op.hermitian == h.hermitian &&
            max_abs_entry(SparseMatrixC(timeline.back().op.entries - h.entries)) == 0.0) {
            timeline.back().duration += seg.duration;
        } else {
            timeline.push_back({seg.duration, std::move(h)});
        }
    }
    return timeline;
}

}  // namespace crowsim
