// circuits.hpp — dual-rail qubit circuits over CROW modes: beam-splitter
// couplers, phase shifters, the doped nonlinear interaction region, truth
// tables, gate fidelity with local-phase freedom, and CZ calibration.

#pragma once

#include "crowsim/effective_dynamics.hpp"
#include "crowsim/nelder_mead.hpp"
#include "crowsim/propagator.hpp"

#include <map>
#include <optional>
#include <set>
#include <variant>

namespace crowsim {

/// Logical qubit encoded as one photon across two rails. Rail indices below
/// the circuit's mode_count are simulated; higher indices are spectators the
/// device never touches.
struct DualRailQubit {
    int rail0;
    int rail1;
};

enum class InteractionModel { Paper, Effective, Cascade };

inline const char* interaction_model_name(InteractionModel m) {
    switch (m) {
        case InteractionModel::Paper: return "paper";
        case InteractionModel::Effective: return "effective";
        case InteractionModel::Cascade: return "cascade";
    }
    return "?";
}

inline InteractionModel interaction_model_from_name(const std::string& s) {
    if (s == "paper") return InteractionModel::Paper;
    if (s == "effective") return InteractionModel::Effective;
    if (s == "cascade") return InteractionModel::Cascade;
    throw std::invalid_argument("unknown interaction model '" + s + "'");
}

struct CircuitElement {
    enum class Kind { Coupler, Phase, DopantInteraction, Idle };
    Kind kind = Kind::Idle;

    // coupler
    int mode_a = 0;
    int mode_b = 1;
    double coupling = 0.0;  // J, rad/s
    double duration = 0.0;  // s

    // phase shifter
    int mode = 0;
    double phase = 0.0;  // rad, applied as e^{i phase} per photon

    // dopant interaction
    GateCondition condition;
    std::vector<int> doped_modes;
    InteractionModel model = InteractionModel::Paper;
    bool unitary_sin = true;  // circuit-mode default; paper_evolution itself defaults off
    int detuning_sign = +1;
    int n_dopants = 1;

    static CircuitElement coupler(int a, int b, double J, double t) {
        detail::require(a != b, "coupler: needs two distinct modes");
        detail::require(J >= 0.0 && t >= 0.0, "coupler: J and t must be >= 0");
        CircuitElement e;
        e.kind = Kind::Coupler;
        e.mode_a = a;
        e.mode_b = b;
        e.coupling = J;
        e.duration = t;
        return e;
    }

    static CircuitElement phase_shift(int rail, double theta) {
        detail::require(std::isfinite(theta), "phase_shift: phase must be finite");
        CircuitElement e;
        e.kind = Kind::Phase;
        e.mode = rail;
        e.phase = theta;
        return e;
    }

    static CircuitElement dopant_interaction(std::vector<int> modes, const GateCondition& cond,
                                             InteractionModel model) {
        detail::require(!modes.empty(), "dopant_interaction: needs at least one mode");
        CircuitElement e;
        e.kind = Kind::DopantInteraction;
        e.doped_modes = std::move(modes);
        e.condition = cond;
        e.model = model;
        return e;
    }

    static CircuitElement idle(double t) {
        detail::require(t >= 0.0, "idle: t must be >= 0");
        CircuitElement e;
        e.kind = Kind::Idle;
        e.duration = t;
        return e;
    }
};

/// Beam-splitter-equivalent coupler between two rails; 50/50 at Jt = pi/4.
inline CircuitElement hadamard_coupler(double J, double t, int rail_a = 0, int rail_b = 1) {
    return CircuitElement::coupler(rail_a, rail_b, J, t);
}

/// Mach-Zehnder port probabilities for arm phase difference phi.
inline std::pair<double, double> mzi_probabilities(double phi) {
    const double s = std::sin(0.5 * phi);
    const double c = std::cos(0.5 * phi);
    return {s * s, c * c};
}

struct Circuit {
    int mode_count = 0;
    std::vector<CircuitElement> elements;

    Circuit() = default;
    explicit Circuit(int modes) : mode_count(modes) {}

    Circuit& add(CircuitElement e) {
        elements.push_back(std::move(e));
        return *this;
    }
};

/// Single-qubit interferometer: coupler(pi/4), phase phi on rail 0, coupler(pi/4).
inline Circuit mzi_circuit(double phi, double J = 1.0) {
    Circuit c(2);
    const double t = kPi / (4.0 * J);
    c.add(hadamard_coupler(J, t));
    c.add(CircuitElement::phase_shift(0, phi));
    c.add(hadamard_coupler(J, t));
    return c;
}

/// Output amplitudes of a gate device over the computational basis, one column
/// per input label (qubit 0 is the most significant bit).
struct TruthTable {
    MatrixC table;
    Eigen::VectorXd success_probability;  // squared column norm within the computational subspace
    Eigen::VectorXd leakage;              // residual dopant-excited population per input
    int n_qubits = 0;
};

struct GateReport {
    double fidelity = 0.0;
    std::vector<double> local_phases;  // rad per qubit
    Eigen::VectorXd leakage;
    std::map<std::string, double> parameters;
};

struct CircuitRunResult {
    StateVector final_state;
    std::vector<double> segment_norms;
    double survival_probability = 1.0;
    double dopant_excited_population = 0.0;  // leakage: dopants not back in g
    std::vector<double> excitation_checks;   // total-excitation expectation at boundaries
};

namespace detail {

struct ArmBranch {
    int n;
    Level lv;
    Complex amp;
};

// Per-arm action of the interaction region on (photon number, dopant level).
// States the closed forms do not reach are left alone.
inline std::vector<ArmBranch> paper_arm_branches(int n, Level lv, double phi_over_pi,
                                                 double kappa_t_over_pi, bool unitary_sin) {
    const Complex ph1 = phasor_pi(-phi_over_pi);
    const Complex ph2 = phasor_pi(2.0 * phi_over_pi);
    const double c = cos_pi(kappa_t_over_pi);
    const double s = sin_pi(kappa_t_over_pi);
    const Complex off = unitary_sin ? Complex(0.0, -s) : Complex(s, 0.0);
    if (lv == Level::g) {
        if (n == 0) return {{0, Level::g, 1.0}};
        if (n == 1) return {{1, Level::g, ph1}};
        if (n == 2) return {{2, Level::g, ph2 * c}, {0, Level::e, ph2 * off}};
    } else if (lv == Level::e && n == 0) {
        const Complex back = unitary_sin ? Complex(0.0, -s) : Complex(-s, 0.0);
        return {{0, Level::e, ph2 * c}, {2, Level::g, ph2 * back}};
    }
    return {{n, lv, 1.0}};
}

inline std::vector<ArmBranch> effective_arm_branches(int n, Level lv, const GateCondition& cond) {
    const double t = cond.time;
    const EffectiveParams p = cond.params();
    if (lv == Level::g) {
        if (n <= 1) {
            const Complex ph = std::exp(Complex(0.0, -p.phi_rate() * n * t));
            return {{n, Level::g, ph}};
        }
        if (n == 2) {
            const Eigen::Matrix2cd u = exact_two_photon_oracle(p.g1, p.g2, p.delta, t);
            return {{2, Level::g, u(0, 0)}, {0, Level::e, u(1, 0)}};
        }
    } else if (lv == Level::e) {
        if (n == 0) {
            const Eigen::Matrix2cd u = exact_two_photon_oracle(p.g1, p.g2, p.delta, t);
            return {{0, Level::e, u(1, 1)}, {2, Level::g, u(0, 1)}};
        }
        // diagonal shift (g2^2/delta)(n+1) on the remaining e-states
        const double shift = p.g2 * p.g2 / p.delta * (n + 1);
        return {{n, Level::e, std::exp(Complex(0.0, -shift * t))}};
    }
    return {{n, lv, 1.0}};
}

}  // namespace detail

/// A circuit compiled against its hybrid basis: Hamiltonian segments for
/// couplers/phases, sparse unitaries for the analytic interaction models.
class CompiledCircuit {
public:
    CompiledCircuit(const Circuit& circuit, std::vector<DualRailQubit> qubits,
                    ScheduleOptions options = device_defaults())
        : circuit_(circuit), qubits_(std::move(qubits)), options_(options) {
        validate();
        build_basis();
        compile();
    }

    static ScheduleOptions device_defaults() {
        ScheduleOptions o;
        // the working sector of a gate device *is* the top photon layer
        o.leakage_monitor = false;
        return o;
    }

    const BasisPtr& basis() const { return basis_; }
    int n_qubits() const { return static_cast<int>(qubits_.size()); }
    int logical_dimension() const { return 1 << qubits_.size(); }

    /// Photon occupation of the simulated modes for a logical label, plus the
    /// set of occupied spectator rails.
    std::pair<std::vector<int>, std::set<int>> input_occupation(int label) const {
        std::vector<int> occ(static_cast<std::size_t>(circuit_.mode_count), 0);
        std::set<int> spectators;
        for (std::size_t q = 0; q < qubits_.size(); ++q) {
            const int bit = (label >> (qubits_.size() - 1 - q)) & 1;
            const int rail = bit ? qubits_[q].rail1 : qubits_[q].rail0;
            if (rail < circuit_.mode_count)
                occ[static_cast<std::size_t>(rail)] += 1;
            else
                spectators.insert(rail);
        }
        return {occ, spectators};
    }

    CircuitRunResult run(int logical_input) const {
        detail::require(logical_input >= 0 && logical_input < logical_dimension(),
                        "run_circuit: logical input label out of range");
        auto [occ, spect] = input_occupation(logical_input);
        const int idx = basis_->index_of(occ, ground_levels());
        detail::require(idx >= 0, "run_circuit: input occupation missing from basis");
        return run_state(StateVector::basis_state(basis_, idx));
    }

    /// Superposition input over logical labels. All contributing labels must
    /// share the spectator pattern, otherwise the device-only state cannot
    /// represent the input faithfully.
    CircuitRunResult run(const VectorC& logical_amplitudes) const {
        detail::require(logical_amplitudes.size() == logical_dimension(),
                        "run_circuit: amplitude vector length must be 2^n_qubits");
        StateVector psi = StateVector::zero(basis_);
        std::optional<std::set<int>> pattern;
        for (int l = 0; l < logical_amplitudes.size(); ++l) {
            if (logical_amplitudes(l) == Complex(0.0)) continue;
            auto [occ, spect] = input_occupation(l);
            if (!pattern)
                pattern = spect;
            else
                detail::require(*pattern == spect,
                                "run_circuit: superposition inputs must share the spectator "
                                "rail pattern");
            const int idx = basis_->index_of(occ, ground_levels());
            psi.amplitudes(idx) += logical_amplitudes(l);
        }
        return run_state(psi);
    }

    CircuitRunResult run_state(const StateVector& initial) const {
        CircuitRunResult result;
        StateVector cur = initial;
        const OperatorMatrix n_exc = total_excitation_op(basis_);
        result.excitation_checks.push_back(real_expectation(n_exc, cur));
        for (const Step& step : steps_) {
            if (std::holds_alternative<TimedOperator>(step)) {
                const TimedOperator& seg = std::get<TimedOperator>(step);
                cur = evolve(seg.op, cur, seg.duration, options_.propagator);
            } else {
                const SparseMatrixC& u = std::get<SparseMatrixC>(step);
                cur = StateVector(basis_, u * cur.amplitudes);
            }
            result.segment_norms.push_back(cur.squared_norm());
            result.excitation_checks.push_back(real_expectation(n_exc, cur));
        }
        result.survival_probability = cur.squared_norm();
        result.dopant_excited_population = excited_population(cur);
        result.final_state = std::move(cur);
        return result;
    }

    TruthTable truth_table() const {
        const int d = logical_dimension();
        TruthTable tt;
        tt.n_qubits = n_qubits();
        tt.table = MatrixC::Zero(d, d);
        tt.success_probability = Eigen::VectorXd::Zero(d);
        tt.leakage = Eigen::VectorXd::Zero(d);
        for (int in = 0; in < d; ++in) {
            auto [in_occ, in_spect] = input_occupation(in);
            const CircuitRunResult r = run(in);
            for (int out = 0; out < d; ++out) {
                auto [out_occ, out_spect] = input_occupation(out);
                if (out_spect != in_spect) continue;  // unreachable: spectators never move
                const int idx = basis_->index_of(out_occ, ground_levels());
                if (idx < 0) continue;
                tt.table(out, in) = r.final_state.amplitudes(idx);
            }
            tt.success_probability(in) = tt.table.col(in).squaredNorm();
            tt.leakage(in) = r.dopant_excited_population;
        }
        return tt;
    }

private:
    using Step = std::variant<TimedOperator, SparseMatrixC>;

    void validate() const {
        detail::require(circuit_.mode_count >= 1, "run_circuit: circuit needs modes");
        detail::require(!qubits_.empty(), "run_circuit: need at least one qubit");
        for (const DualRailQubit& q : qubits_)
            detail::require(q.rail0 != q.rail1, "run_circuit: qubit rails must be distinct");
        for (const CircuitElement& e : circuit_.elements) {
            switch (e.kind) {
                case CircuitElement::Kind::Coupler:
                    detail::require(e.mode_a < circuit_.mode_count && e.mode_b < circuit_.mode_count,
                                    "run_circuit: coupler targets outside the declared mode set");
                    break;
                case CircuitElement::Kind::Phase:
                    detail::require(e.mode < circuit_.mode_count,
                                    "run_circuit: phase target outside the declared mode set");
                    break;
                case CircuitElement::Kind::DopantInteraction:
                    for (int m : e.doped_modes)
                        detail::require(m >= 0 && m < circuit_.mode_count,
                                        "run_circuit: doped mode outside the declared mode set");
                    break;
                case CircuitElement::Kind::Idle:
                    break;
            }
        }
    }

    void build_basis() {
        int n_max = 0;
        for (const DualRailQubit& q : qubits_)
            if (q.rail0 < circuit_.mode_count || q.rail1 < circuit_.mode_count) ++n_max;

        // one dopant slot per doped mode, ordered by mode index
        std::map<int, InteractionModel> doped;
        for (const CircuitElement& e : circuit_.elements) {
            if (e.kind != CircuitElement::Kind::DopantInteraction) continue;
            for (int m : e.doped_modes) {
                auto it = doped.find(m);
                if (it == doped.end()) {
                    doped.emplace(m, e.model);
                } else {
                    const bool casc_a = it->second == InteractionModel::Cascade;
                    const bool casc_b = e.model == InteractionModel::Cascade;
                    detail::require(casc_a == casc_b,
                                    "run_circuit: conflicting dopant models on one mode");
                }
            }
        }
        std::vector<DopantLevelSet> dopants;
        for (const auto& [mode, model] : doped) {
            dopant_slot_[mode] = static_cast<int>(dopants.size());
            dopants.push_back(model == InteractionModel::Cascade ? DopantLevelSet::cascade()
                                                                 : DopantLevelSet::two_level());
        }

        basis_ = enumerate_basis(ModeSet(circuit_.mode_count, n_max), std::move(dopants));

        if (!doped.empty()) {
            bool analytic = false;
            for (const CircuitElement& e : circuit_.elements)
                if (e.kind == CircuitElement::Kind::DopantInteraction &&
                    e.model != InteractionModel::Cascade)
                    analytic = true;
            detail::require(!analytic || n_max <= 2,
                            "run_circuit: analytic interaction models support at most two photons");
        }
    }

    std::vector<Level> ground_levels() const {
        return std::vector<Level>(static_cast<std::size_t>(basis_->dopant_count()), Level::g);
    }

    void compile() {
        for (const CircuitElement& e : circuit_.elements) {
            switch (e.kind) {
                case CircuitElement::Kind::Coupler: {
                    OperatorMatrix term =
                        creation_op(basis_, e.mode_a) * annihilation_op(basis_, e.mode_b);
                    term = term + term.adjoint();
                    OperatorMatrix h = e.coupling * term;
                    h.hermitian = true;
                    steps_.emplace_back(TimedOperator{e.duration, std::move(h)});
                    break;
                }
                case CircuitElement::Kind::Phase: {
                    // e^{i theta n} realized as a unit-time segment of H = -theta n
                    OperatorMatrix h = (-e.phase) * number_op(basis_, e.mode);
                    h.hermitian = true;
                    steps_.emplace_back(TimedOperator{1.0, std::move(h)});
                    break;
                }
                case CircuitElement::Kind::Idle:
                    steps_.emplace_back(TimedOperator{e.duration, zero_op(basis_)});
                    break;
                case CircuitElement::Kind::DopantInteraction:
                    if (e.model == InteractionModel::Cascade) {
                        OperatorMatrix h = zero_op(basis_);
                        for (int m : e.doped_modes) {
                            const DopantSpec spec = DopantSpec::symmetric_cascade(
                                m, 0.0, e.condition.delta, e.condition.g1, e.condition.g2,
                                e.n_dopants, e.detuning_sign);
                            h = h + cascade_dopant_h(basis_, spec, 0.0, dopant_slot_.at(m));
                        }
                        h.hermitian = true;
                        steps_.emplace_back(TimedOperator{e.condition.time, std::move(h)});
                    } else {
                        steps_.emplace_back(interaction_map(e));
                    }
                    break;
            }
        }
    }

    SparseMatrixC interaction_map(const CircuitElement& e) const {
        auto branches = [&e](int n, Level lv) {
            if (e.model == InteractionModel::Paper) {
                const double phi_over_pi = e.condition.phi_over_pi;
                const double kt_over_pi = e.condition.kappa_t_over_pi;
                return detail::paper_arm_branches(n, lv, phi_over_pi, kt_over_pi, e.unitary_sin);
            }
            return detail::effective_arm_branches(n, lv, e.condition);
        };

        std::vector<Eigen::Triplet<Complex>> trips;
        for (int k = 0; k < basis_->dimension(); ++k) {
            const BasisState& s = basis_->state(k);
            // expand the per-arm branches as a product over the doped modes
            std::vector<std::pair<BasisState, Complex>> frontier{{s, Complex(1.0)}};
            for (int m : e.doped_modes) {
                const int slot = dopant_slot_.at(m);
                std::vector<std::pair<BasisState, Complex>> next;
                for (const auto& [st, amp] : frontier) {
                    const int n = st.occupations[static_cast<std::size_t>(m)];
                    const Level lv = st.levels[static_cast<std::size_t>(slot)];
                    for (const detail::ArmBranch& br : branches(n, lv)) {
                        BasisState t = st;
                        t.occupations[static_cast<std::size_t>(m)] = br.n;
                        t.levels[static_cast<std::size_t>(slot)] = br.lv;
                        next.emplace_back(std::move(t), amp * br.amp);
                    }
                }
                frontier = std::move(next);
            }
            for (const auto& [st, amp] : frontier) {
                const int j = basis_->index_of(st);
                if (j >= 0 && amp != Complex(0.0)) trips.emplace_back(j, k, amp);
            }
        }
        SparseMatrixC m(basis_->dimension(), basis_->dimension());
        m.setFromTriplets(trips.begin(), trips.end());
        return m;
    }

    double excited_population(const StateVector& psi) const {
        double p = 0.0;
        for (int k = 0; k < basis_->dimension(); ++k) {
            const BasisState& s = basis_->state(k);
            bool excited = false;
            for (Level l : s.levels)
                if (l != Level::g) excited = true;
            if (excited) p += std::norm(psi.amplitudes(k));
        }
        return p;
    }

    Circuit circuit_;
    std::vector<DualRailQubit> qubits_;
    ScheduleOptions options_;
    BasisPtr basis_;
    std::map<int, int> dopant_slot_;
    std::vector<Step> steps_;
};

inline CircuitRunResult run_circuit(const Circuit& circuit, std::vector<DualRailQubit> qubits,
                                    int logical_input) {
    return CompiledCircuit(circuit, std::move(qubits)).run(logical_input);
}

inline TruthTable truth_table(const Circuit& circuit, std::vector<DualRailQubit> qubits) {
    return CompiledCircuit(circuit, std::move(qubits)).truth_table();
}

// ---------------------------------------------------------------------------
// Two-qubit conditional-phase device
// ---------------------------------------------------------------------------

struct CzDeviceOptions {
    InteractionModel model = InteractionModel::Effective;
    bool inverse_second_coupler = true;  // the printed sequences need the inverse
    bool unitary_sin = true;
    int detuning_sign = +1;
    double coupler_J = 1.0;
};

/// The four-rail device: rails 0,1 (the two "1" rails) are simulated, rails
/// 2,3 (the "0" rails) are spectators.
inline std::vector<DualRailQubit> cz_device_qubits() {
    return {DualRailQubit{2, 0}, DualRailQubit{3, 1}};
}

inline Circuit cz_device_circuit(const GateCondition& cond, const CzDeviceOptions& opts = {}) {
    Circuit c(2);
    const double t_coupler = kPi / (4.0 * opts.coupler_J);
    c.add(hadamard_coupler(opts.coupler_J, t_coupler));
    CircuitElement mid = CircuitElement::dopant_interaction({0, 1}, cond, opts.model);
    mid.unitary_sin = opts.unitary_sin;
    mid.detuning_sign = opts.detuning_sign;
    c.add(mid);
    if (opts.inverse_second_coupler) {
        // e^{+iHt} = evolution under -H: realized with the negated coupling
        CircuitElement inv = hadamard_coupler(opts.coupler_J, t_coupler);
        inv.coupling = -opts.coupler_J;
        c.add(inv);
    } else {
        c.add(hadamard_coupler(opts.coupler_J, t_coupler));
    }
    return c;
}

inline TruthTable cz_device_truth_table(const GateCondition& cond, const CzDeviceOptions& opts = {}) {
    return CompiledCircuit(cz_device_circuit(cond, opts), cz_device_qubits()).truth_table();
}

/// Truth table of the device evaluated purely from the printed closed forms:
/// diag(1, e^{-i phi}, e^{-i phi}, e^{2 i phi} cos(kappa t)). Exact at the
/// gate condition, where it reduces to diag(1, 1, 1, -1).
inline TruthTable paper_analytic_cz_table(const GateCondition& cond) {
    TruthTable tt;
    tt.n_qubits = 2;
    const Complex one = phasor_pi(-cond.phi_over_pi);
    const Complex two = phasor_pi(2.0 * cond.phi_over_pi) * cos_pi(cond.kappa_t_over_pi);
    tt.table = MatrixC::Zero(4, 4);
    tt.table(0, 0) = 1.0;
    tt.table(1, 1) = one;
    tt.table(2, 2) = one;
    tt.table(3, 3) = two;
    tt.success_probability = Eigen::VectorXd::Ones(4);
    tt.success_probability(3) = std::norm(two);
    tt.leakage = Eigen::VectorXd::Zero(4);
    tt.leakage(3) = 1.0 - std::norm(two);
    return tt;
}

inline MatrixC cz_target() {
    MatrixC t = MatrixC::Identity(4, 4);
    t(3, 3) = -1.0;
    return t;
}

// ---------------------------------------------------------------------------
// Gate fidelity
// ---------------------------------------------------------------------------

namespace detail {

// max over beta of |A + e^{i beta} B| is |A| + |B|, attained at beta = arg A - arg B
inline double phase_aligned_magnitude(Complex a, Complex b, double& beta) {
    beta = (std::abs(b) == 0.0 || std::abs(a) == 0.0) ? 0.0 : std::arg(a) - std::arg(b);
    return std::abs(a) + std::abs(b);
}

}  // namespace detail

/// Average gate fidelity of a (possibly trace-decreasing) map M against a
/// unitary target: F = (|Tr(T^dag M)|^2 + Tr(M^dag M)) / (d^2 + d). With
/// local_phase_freedom the trace is maximized over per-qubit phase rotations
/// diag(1, e^{i a}) appended after M; the two-qubit case reduces to a
/// one-variable maximization solved on a dense grid with local refinement.
inline GateReport gate_fidelity(const TruthTable& achieved, const MatrixC& target,
                                bool local_phase_freedom) {
    const int d = static_cast<int>(achieved.table.rows());
    detail::require(target.rows() == d && target.cols() == d,
                    "gate_fidelity: truth table and target shapes differ");
    detail::require(d == 2 || d == 4, "gate_fidelity: supports 1- and 2-qubit gates");

    const MatrixC mt = achieved.table * target.adjoint();
    std::vector<Complex> c(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) c[static_cast<std::size_t>(k)] = mt(k, k);

    GateReport report;
    report.leakage = achieved.leakage;
    double trace_mag = 0.0;

    if (!local_phase_freedom) {
        Complex z = 0.0;
        for (const Complex& ck : c) z += ck;
        trace_mag = std::abs(z);
        report.local_phases.assign(static_cast<std::size_t>(d == 2 ? 1 : 2), 0.0);
    } else if (d == 2) {
        double alpha = 0.0;
        trace_mag = detail::phase_aligned_magnitude(c[0], c[1], alpha);
        report.local_phases = {alpha};
    } else {
        auto value = [&c](double alpha, double& beta) {
            const Complex ea = std::exp(Complex(0.0, alpha));
            const Complex va = c[0] + ea * c[2];
            const Complex vb = c[1] + ea * c[3];
            return detail::phase_aligned_magnitude(va, vb, beta);
        };
        const int grid = 1024;
        double best_alpha = 0.0, best_val = -1.0, beta_dummy = 0.0;
        for (int i = 0; i < grid; ++i) {
            const double alpha = 2.0 * kPi * i / grid;
            const double v = value(alpha, beta_dummy);
            if (v > best_val) {
                best_val = v;
                best_alpha = alpha;
            }
        }
        // golden-section refinement around the best grid cell
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = best_alpha - 2.0 * kPi / grid;
        double hi = best_alpha + 2.0 * kPi / grid;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = value(x1, beta_dummy), f2 = value(x2, beta_dummy);
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = value(x2, beta_dummy);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = value(x1, beta_dummy);
            }
        }
        double beta = 0.0;
        const double alpha = 0.5 * (lo + hi);
        trace_mag = value(alpha, beta);
        report.local_phases = {principal_phase(alpha), principal_phase(beta)};
    }

    const double overlap = trace_mag * trace_mag;
    const double purity = (achieved.table.adjoint() * achieved.table).trace().real();
    report.fidelity = (overlap + purity) / (static_cast<double>(d) * d + d);
    return report;
}

// ---------------------------------------------------------------------------
// CZ calibration
// ---------------------------------------------------------------------------

struct CzSearchSpace {
    std::pair<double, double> ratio_range{0.3, 3.5};    // g1/g2
    std::pair<double, double> kappa_t_range{0.5, 6.0};  // rad
    int grid_points = 17;                               // coarse grid per axis
    bool local_phase_freedom = true;
};

struct CzOptimum {
    GateReport report;
    GateCondition condition;
    double ratio = 0.0;      // g1/g2
    double kappa_t = 0.0;    // rad
    double omega_r_t = 0.0;  // full two-photon Rabi angle, rad
    int evaluations = 0;
};

namespace detail {

inline GateCondition cz_point(double delta, double ratio, double kappa_t) {
    GateCondition c;
    c.g1 = 1.0;
    c.g2 = ratio > 0.0 ? 1.0 / ratio : 0.0;
    c.ratio = ratio;
    c.delta = delta;
    const double kappa = std::sqrt(2.0) * c.g1 * c.g2 / delta;
    c.time = (kappa_t == 0.0 || kappa == 0.0) ? 0.0 : kappa_t / kappa;
    c.kappa_t_over_pi = kappa_t / kPi;
    c.phi_over_pi = c.g1 * c.g1 / delta * c.time / kPi;
    return c;
}

inline double cz_omega_r_t(const GateCondition& c) {
    const double half_split = 0.5 * (2.0 * c.g1 * c.g1 - c.g2 * c.g2) / c.delta;
    const double coupling = std::sqrt(2.0) * c.g1 * c.g2 / c.delta;
    return std::hypot(half_split, coupling) * c.time;
}

}  // namespace detail

/// Calibrate the conditional-phase device under exact effective-model dynamics:
/// coarse grid over (g1/g2, kappa t) followed by simplex refinement, maximizing
/// average gate fidelity against CZ. Deterministic; grid ties break toward the
/// lowest-index parameter tuple.
inline CzOptimum optimize_cz(double delta, const CzSearchSpace& space = {},
                             const CzDeviceOptions& device = {}) {
    detail::require(space.ratio_range.first <= space.ratio_range.second &&
                        space.kappa_t_range.first <= space.kappa_t_range.second,
                    "optimize_cz: empty search ranges");
    detail::require(space.grid_points >= 1, "optimize_cz: grid_points must be >= 1");

    const MatrixC target = cz_target();
    int evaluations = 0;
    auto fidelity_at = [&](double ratio, double kappa_t) {
        const GateCondition cond = detail::cz_point(delta, ratio, kappa_t);
        const TruthTable tt = cz_device_truth_table(cond, device);
        ++evaluations;
        return gate_fidelity(tt, target, space.local_phase_freedom).fidelity;
    };

    auto axis_value = [](const std::pair<double, double>& range, int i, int n) {
        if (n == 1 || range.first == range.second) return range.first;
        return range.first + (range.second - range.first) * i / (n - 1);
    };

    double best_ratio = space.ratio_range.first;
    double best_kt = space.kappa_t_range.first;
    double best_f = -1.0;
    for (int i = 0; i < space.grid_points; ++i) {
        const double ratio = axis_value(space.ratio_range, i, space.grid_points);
        for (int j = 0; j < space.grid_points; ++j) {
            const double kt = axis_value(space.kappa_t_range, j, space.grid_points);
            const double f = fidelity_at(ratio, kt);
            if (f > best_f) {
                best_f = f;
                best_ratio = ratio;
                best_kt = kt;
            }
        }
    }

    const bool degenerate = space.ratio_range.first == space.ratio_range.second &&
                            space.kappa_t_range.first == space.kappa_t_range.second;
    if (!degenerate) {
        auto clamp = [](double v, const std::pair<double, double>& r) {
            return std::min(std::max(v, r.first), r.second);
        };
        NelderMeadOptions nm;
        nm.max_evaluations = 400;
        nm.initial_step = 0.05;
        const NelderMeadResult res = nelder_mead(
            [&](const std::vector<double>& x) {
                return -fidelity_at(clamp(x[0], space.ratio_range),
                                    clamp(x[1], space.kappa_t_range));
            },
            {best_ratio, best_kt}, nm);
        const double r = clamp(res.x[0], space.ratio_range);
        const double kt = clamp(res.x[1], space.kappa_t_range);
        if (-res.value >= best_f) {
            best_ratio = r;
            best_kt = kt;
            best_f = -res.value;
        }
    }

    CzOptimum best;
    best.condition = detail::cz_point(delta, best_ratio, best_kt);
    const TruthTable tt = cz_device_truth_table(best.condition, device);
    best.report = gate_fidelity(tt, target, space.local_phase_freedom);
    best.ratio = best_ratio;
    best.kappa_t = best_kt;
    best.omega_r_t = detail::cz_omega_r_t(best.condition);
    best.evaluations = evaluations;
    best.report.parameters = {{"g1", best.condition.g1},
                              {"g2", best.condition.g2},
                              {"delta", delta},
                              {"time", best.condition.time},
                              {"ratio_g1_over_g2", best_ratio},
                              {"kappa_t", best_kt},
                              {"omega_r_t", best.omega_r_t}};
    return best;
}

}  // namespace crowsim
