#include "crowsim/circuits.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace crowsim;
using Catch::Approx;

TEST_CASE("coupler splits 50/50 at Jt = pi/4 and swaps at pi/2") {
    Circuit c(2);
    c.add(hadamard_coupler(1.0, kPi / 4.0));
    CompiledCircuit cc(c, {DualRailQubit{0, 1}});
    const CircuitRunResult r = cc.run(0);
    const Complex a0 = r.final_state.amplitudes(cc.basis()->index_of({1, 0}));
    const Complex a1 = r.final_state.amplitudes(cc.basis()->index_of({0, 1}));
    CHECK(std::norm(a0) == Approx(0.5).margin(1e-12));
    CHECK(std::norm(a1) == Approx(0.5).margin(1e-12));
    // amplitudes (cos Jt, -i sin Jt)
    CHECK(std::abs(a0 - Complex(std::sqrt(0.5), 0.0)) < 1e-12);
    CHECK(std::abs(a1 - Complex(0.0, -std::sqrt(0.5))) < 1e-12);

    Circuit swap(2);
    swap.add(hadamard_coupler(1.0, kPi / 2.0));
    CompiledCircuit cs(swap, {DualRailQubit{0, 1}});
    const CircuitRunResult rs = cs.run(0);
    CHECK(std::abs(rs.final_state.amplitudes(cs.basis()->index_of({0, 1})) -
                   Complex(0.0, -1.0)) < 1e-12);
}

TEST_CASE("Hong-Ou-Mandel: |11> bunches into -i(|20>+|02>)/sqrt(2)") {
    // oracle: mode transformation a0^dag -> (a0^dag - i a1^dag)/sqrt(2) applied
    // to a0^dag a1^dag |00> gives -i/sqrt(2) (|20> + |02>) and no |11> term
    const BasisPtr b = enumerate_basis(ModeSet(2, 2));
    const OperatorMatrix h = crow_hopping_h(b, ModeGraph::chain(2, 0.0, 1.0), 0.0);
    const StateVector out =
        evolve(h, StateVector::basis_state(b, b->index_of({1, 1})), kPi / 4.0);
    CHECK(std::abs(out.amplitudes(b->index_of({1, 1}))) < 1e-12);
    const Complex expected(0.0, -1.0 / std::sqrt(2.0));
    CHECK(std::abs(out.amplitudes(b->index_of({2, 0})) - expected) < 1e-12);
    CHECK(std::abs(out.amplitudes(b->index_of({0, 2})) - expected) < 1e-12);
}

TEST_CASE("mzi_probabilities closed form") {
    CHECK(mzi_probabilities(0.0).first == Approx(0.0).margin(1e-15));
    CHECK(mzi_probabilities(0.0).second == Approx(1.0));
    CHECK(mzi_probabilities(kPi).first == Approx(1.0));
    CHECK(mzi_probabilities(kPi).second == Approx(0.0).margin(1e-15));
    CHECK(mzi_probabilities(kPi / 2.0).first == Approx(0.5));
    CHECK(mzi_probabilities(kPi / 2.0).second == Approx(0.5));
}

TEST_CASE("empty circuit gives the identity truth table") {
    Circuit c(2);
    const TruthTable tt = truth_table(c, {DualRailQubit{0, 1}});
    CHECK((tt.table - MatrixC::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(tt.success_probability.minCoeff() == Approx(1.0).margin(1e-14));
}

TEST_CASE("compiled MZI matches the closed-form probabilities over a sweep") {
    double max_err = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double phi = 2.0 * kPi * i / 63.0;
        CompiledCircuit cc(mzi_circuit(phi), {DualRailQubit{0, 1}});
        const CircuitRunResult r = cc.run(0);
        const double p0 = std::norm(r.final_state.amplitudes(cc.basis()->index_of({1, 0})));
        const double p1 = std::norm(r.final_state.amplitudes(cc.basis()->index_of({0, 1})));
        const auto [q0, q1] = mzi_probabilities(phi);
        max_err = std::max({max_err, std::abs(p0 - q0), std::abs(p1 - q1)});
    }
    CHECK(max_err <= 1e-8);
}

TEST_CASE("excitation number is conserved at every circuit boundary") {
    const GateCondition cond = calibrated_gate_condition(50.0);
    CzDeviceOptions opts;
    opts.model = InteractionModel::Cascade;
    CompiledCircuit cc(cz_device_circuit(cond, opts), cz_device_qubits());
    const CircuitRunResult r = cc.run(3);  // both photons enter
    for (double n : r.excitation_checks) CHECK(n == Approx(2.0).margin(1e-10));
}

TEST_CASE("paper-mode device: compiled truth table is diag(1,1,1,-1)") {
    const GateCondition cond = gate_condition(1.0, 50.0);
    CzDeviceOptions opts;
    opts.model = InteractionModel::Paper;
    const TruthTable tt = cz_device_truth_table(cond, opts);
    CHECK((tt.table - cz_target()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(tt.leakage.maxCoeff() <= 1e-10);
}

TEST_CASE("paper-mode analytic truth table is exactly diag(1,1,1,-1)") {
    const TruthTable tt = paper_analytic_cz_table(gate_condition(1.0, 50.0));
    CHECK(tt.table(0, 0) == Complex(1.0, 0.0));
    CHECK(tt.table(1, 1) == Complex(1.0, 0.0));
    CHECK(tt.table(2, 2) == Complex(1.0, 0.0));
    CHECK(tt.table(3, 3) == Complex(-1.0, 0.0));
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (r != c) CHECK(tt.table(r, c) == Complex(0.0, 0.0));
}

TEST_CASE("the second coupler must be the inverse for a diagonal gate") {
    const GateCondition cond = gate_condition(1.0, 50.0);
    CzDeviceOptions opts;
    opts.model = InteractionModel::Paper;
    opts.inverse_second_coupler = false;
    const TruthTable tt = cz_device_truth_table(cond, opts);
    // with the same coupler twice single photons swap rails and leave the
    // computational subspace of their own qubit
    CHECK(std::abs(tt.table(1, 1)) < 1e-10);
    CHECK(tt.success_probability(1) < 0.5);
}

TEST_CASE("exact-model device at the paper's point shows the 3.2% two-photon gap") {
    const GateCondition cond = gate_condition(1.0, 50.0);
    CzDeviceOptions opts;
    opts.model = InteractionModel::Effective;
    const TruthTable tt = cz_device_truth_table(cond, opts);
    CHECK(std::norm(tt.table(3, 3)) == Approx(0.9676).margin(5e-4));
    CHECK(tt.leakage(3) == Approx(1.0 - 0.9676).margin(5e-4));
    CHECK(std::abs(tt.table(3, 3)) < 1.0);
    // single-photon columns stay clean
    CHECK(std::abs(std::abs(tt.table(1, 1)) - 1.0) <= 1e-10);
}

TEST_CASE("cascade-model device approaches the calibrated gate") {
    const GateCondition cond = calibrated_gate_condition(50.0);
    CzDeviceOptions opts;
    opts.model = InteractionModel::Cascade;
    const TruthTable tt = cz_device_truth_table(cond, opts);
    const GateReport rep = gate_fidelity(tt, cz_target(), true);
    CHECK(rep.fidelity > 0.99);
}

TEST_CASE("closed circuits yield unitary truth tables") {
    const TruthTable mzi = truth_table(mzi_circuit(0.7), {DualRailQubit{0, 1}});
    CHECK((mzi.table.adjoint() * mzi.table - MatrixC::Identity(2, 2)).cwiseAbs().maxCoeff() <=
          1e-8);

    const TruthTable cz =
        cz_device_truth_table(gate_condition(1.0, 50.0),
                              CzDeviceOptions{InteractionModel::Paper, true, true, +1, 1.0});
    CHECK((cz.table.adjoint() * cz.table - MatrixC::Identity(4, 4)).cwiseAbs().maxCoeff() <=
          1e-8);
}

TEST_CASE("gate fidelity: exact match and local-phase absorption") {
    TruthTable tt;
    tt.n_qubits = 2;
    tt.table = cz_target();
    tt.success_probability = Eigen::VectorXd::Ones(4);
    tt.leakage = Eigen::VectorXd::Zero(4);
    CHECK(gate_fidelity(tt, cz_target(), false).fidelity == Approx(1.0).margin(1e-12));

    // extra local phases alpha = beta = pi/2 are absorbed when freedom is on
    MatrixC phases = MatrixC::Zero(4, 4);
    phases(0, 0) = 1.0;
    phases(1, 1) = std::exp(Complex(0.0, kPi / 2.0));
    phases(2, 2) = std::exp(Complex(0.0, kPi / 2.0));
    phases(3, 3) = std::exp(Complex(0.0, kPi));
    tt.table = phases * cz_target();
    CHECK(gate_fidelity(tt, cz_target(), true).fidelity == Approx(1.0).margin(1e-10));
    CHECK(gate_fidelity(tt, cz_target(), false).fidelity < 0.99);
}

TEST_CASE("identity against CZ scores 0.6 with local phase freedom") {
    // brute-force oracle over the local-phase grid
    double best = 0.0;
    const int grid = 720;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const double a = 2.0 * kPi * i / grid, bta = 2.0 * kPi * j / grid;
            const Complex z = 1.0 + std::exp(Complex(0.0, bta)) + std::exp(Complex(0.0, a)) -
                              std::exp(Complex(0.0, a + bta));
            best = std::max(best, std::abs(z));
        }
    CHECK(best == Approx(2.0 * std::sqrt(2.0)).margin(1e-3));
    const double f_expected = (best * best + 4.0) / 20.0;
    CHECK(f_expected == Approx(0.6).margin(1e-3));

    TruthTable tt;
    tt.n_qubits = 2;
    tt.table = MatrixC::Identity(4, 4);
    tt.success_probability = Eigen::VectorXd::Ones(4);
    tt.leakage = Eigen::VectorXd::Zero(4);
    CHECK(gate_fidelity(tt, cz_target(), true).fidelity == Approx(0.6).margin(1e-9));
    CHECK(gate_fidelity(tt, cz_target(), false).fidelity == Approx(0.4).margin(1e-12));
}

TEST_CASE("gate fidelity is invariant under a shared global phase") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    TruthTable tt;
    tt.n_qubits = 2;
    tt.table = cz_target() * 0.97;
    tt.success_probability = Eigen::VectorXd::Ones(4);
    tt.leakage = Eigen::VectorXd::Zero(4);
    const double base = gate_fidelity(tt, cz_target(), true).fidelity;
    for (int trial = 0; trial < 10; ++trial) {
        const Complex phase = std::exp(Complex(0.0, u(rng)));
        TruthTable rotated = tt;
        rotated.table = phase * tt.table;
        const double f = gate_fidelity(rotated, phase * cz_target(), true).fidelity;
        CHECK(f == Approx(base).margin(1e-12));
    }
}

TEST_CASE("optimize_cz recovers the calibrated operating point") {
    CzSearchSpace space;
    space.ratio_range = {0.4, 1.4};
    space.kappa_t_range = {2.0, 4.5};
    space.grid_points = 9;
    const CzOptimum best = optimize_cz(50.0, space);
    CHECK(best.report.fidelity >= 0.9999);
    const double g2_over_g1 = 1.0 / best.ratio;
    CHECK(std::abs(g2_over_g1 - std::sqrt(2.0)) / std::sqrt(2.0) <= 0.01);
    CHECK(std::abs(best.omega_r_t - kPi) / kPi <= 0.01);
}

TEST_CASE("optimize_cz restricted to the paper's point reproduces its fidelity") {
    const GateCondition paper = gate_condition(1.0, 50.0);
    CzSearchSpace space;
    space.ratio_range = {paper.ratio, paper.ratio};
    space.kappa_t_range = {kPi, kPi};
    space.local_phase_freedom = false;
    const CzOptimum got = optimize_cz(50.0, space);

    // plug-through oracle: diag(1, e^{i t1}, e^{i t1}, u00 e^{2 i t1}) from the 2x2 block
    const GateCondition scaled = detail::cz_point(50.0, paper.ratio, kPi);
    const Eigen::Matrix2cd u =
        exact_two_photon_oracle(scaled.g1, scaled.g2, scaled.delta, scaled.time);
    const Complex single = std::exp(Complex(0.0, -scaled.g1 * scaled.g1 / 50.0 * scaled.time));
    TruthTable expected;
    expected.n_qubits = 2;
    expected.table = MatrixC::Zero(4, 4);
    expected.table(0, 0) = 1.0;
    expected.table(1, 1) = single;
    expected.table(2, 2) = single;
    expected.table(3, 3) = u(0, 0);  // the two-photon branch inherits the oracle amplitude
    expected.success_probability = Eigen::VectorXd::Ones(4);
    expected.leakage = Eigen::VectorXd::Zero(4);
    CHECK(std::abs(got.report.fidelity -
                   gate_fidelity(expected, cz_target(), false).fidelity) <= 1e-10);
}

TEST_CASE("optimize_cz degenerate identity point scores 0.6") {
    CzSearchSpace space;
    space.ratio_range = {1.0, 1.0};
    space.kappa_t_range = {0.0, 0.0};
    const CzOptimum got = optimize_cz(50.0, space);
    CHECK(got.report.fidelity == Approx(0.6).margin(1e-9));
}

TEST_CASE("run_circuit validates inputs") {
    Circuit c(2);
    c.add(hadamard_coupler(1.0, 1.0, 0, 3));
    CHECK_THROWS_AS(truth_table(c, {DualRailQubit{0, 1}}), std::invalid_argument);
    Circuit ok(2);
    CHECK_THROWS_AS(truth_table(ok, {DualRailQubit{1, 1}}), std::invalid_argument);
    CompiledCircuit cc(ok, {DualRailQubit{0, 1}});
    CHECK_THROWS_AS(cc.run(7), std::invalid_argument);
}

TEST_CASE("superposition inputs require a shared spectator pattern") {
    const GateCondition cond = gate_condition(1.0, 50.0);
    CzDeviceOptions opts;
    opts.model = InteractionModel::Paper;
    CompiledCircuit cc(cz_device_circuit(cond, opts), cz_device_qubits());
    VectorC amps = VectorC::Zero(4);
    amps(0) = std::sqrt(0.5);  // |00>: both photons in spectator rails
    amps(3) = std::sqrt(0.5);  // |11>: both photons in the device
    CHECK_THROWS_AS(cc.run(amps), std::invalid_argument);

    // same pattern works: a superposition within one qubit's device rail
    Circuit mzi = mzi_circuit(0.0);
    CompiledCircuit cm(mzi, {DualRailQubit{0, 1}});
    VectorC in = VectorC::Zero(2);
    in(0) = std::sqrt(0.5);
    in(1) = std::sqrt(0.5);
    const CircuitRunResult r = cm.run(in);
    CHECK(r.survival_probability == Approx(1.0).margin(1e-10));
}
