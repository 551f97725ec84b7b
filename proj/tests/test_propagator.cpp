#include "crowsim/propagator.hpp"
#include "crowsim/effective_dynamics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace crowsim;
using Catch::Approx;

namespace {
OperatorMatrix random_hermitian(const BasisPtr& b, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    const int d = b->dimension();
    MatrixC m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = Complex(n(rng), n(rng));
    m = 0.5 * (m + m.adjoint()).eval();
    return OperatorMatrix(b, m.sparseView(), true);
}
}  // namespace

TEST_CASE("zero Hamiltonian is the identity") {
    const BasisPtr b = enumerate_basis(ModeSet(2, 2));
    StateVector psi = StateVector::basis_state(b, 3);
    const StateVector out = evolve(zero_op(b), psi, 5.0);
    CHECK((out.amplitudes - psi.amplitudes).norm() == 0.0);
}

TEST_CASE("two-state Rabi rotation from a sigma_x-type Hamiltonian") {
    const BasisPtr b = enumerate_basis(ModeSet(1, 1));
    const double g = 0.9;
    OperatorMatrix h = g * (annihilation_op(b, 0) + creation_op(b, 0));
    h.hermitian = true;
    const double t = 0.73;
    const StateVector out = evolve(h, StateVector::basis_state(b, b->index_of({0})), t);
    CHECK(std::abs(out.amplitudes(b->index_of({0})) - Complex(std::cos(g * t), 0.0)) < 1e-12);
    CHECK(std::abs(out.amplitudes(b->index_of({1})) - Complex(0.0, -std::sin(g * t))) < 1e-12);
}

TEST_CASE("hopping for Jt = pi/2 transfers the photon with phase -i") {
    const BasisPtr b = enumerate_basis(ModeSet(2, 1));
    const double J = 1.7;
    const OperatorMatrix h = crow_hopping_h(b, ModeGraph::chain(2, 0.0, J), 0.0);
    const StateVector out =
        evolve(h, StateVector::basis_state(b, b->index_of({1, 0})), kPi / (2.0 * J));
    CHECK(std::abs(out.amplitudes(b->index_of({1, 0}))) < 1e-12);
    CHECK(std::abs(out.amplitudes(b->index_of({0, 1})) - Complex(0.0, -1.0)) < 1e-12);
}

TEST_CASE("unitarity holds across six orders of magnitude in time") {
    std::mt19937_64 rng(31);
    const BasisPtr b = enumerate_basis(ModeSet(2, 2), {DopantLevelSet::two_level()});
    const OperatorMatrix h = random_hermitian(b, rng);
    StateVector psi = StateVector::zero(b);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < b->dimension(); ++k) psi.amplitudes(k) = Complex(n(rng), n(rng));
    psi.normalize();
    for (double t = 1e-3; t <= 1e3 + 1.0; t *= 10.0) {
        const StateVector out = evolve(h, psi, t);
        CHECK(std::abs(out.norm() - 1.0) <= 1e-10);
    }
}

TEST_CASE("energy and photon number are conserved along Hermitian evolution") {
    std::mt19937_64 rng(17);
    const BasisPtr b = enumerate_basis(ModeSet(3, 2));
    const OperatorMatrix h = crow_hopping_h(b, ModeGraph::chain(3, 1.0, 0.6), 1.0);
    const OperatorMatrix n_total = total_number_op(b);

    StateVector psi = StateVector::zero(b);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int k = 0; k < b->dimension(); ++k) psi.amplitudes(k) = Complex(nd(rng), nd(rng));
    psi.normalize();

    const double e0 = real_expectation(h, psi);
    const double n0 = real_expectation(n_total, psi);
    for (double t : {0.3, 1.7, 12.0}) {
        const StateVector out = evolve(h, psi, t);
        CHECK(real_expectation(h, out) == Approx(e0).margin(1e-10));
        CHECK(real_expectation(n_total, out) == Approx(n0).margin(1e-10));
    }
}

TEST_CASE("single photon under loss decays as e^{-gamma t}") {
    const BasisPtr b = enumerate_basis(ModeSet(1, 1));
    const double gamma = 0.37;
    const OperatorMatrix l = loss_term(b, gamma);
    StateVector psi = StateVector::basis_state(b, b->index_of({1}));
    for (double t : {0.1, 1.0, 5.0, 20.0}) {
        const StateVector out = evolve(l, psi, t);
        const double survival = out.squared_norm();
        CHECK(std::abs(survival - std::exp(-gamma * t)) / std::exp(-gamma * t) <= 1e-8);
    }
}

TEST_CASE("Krylov path agrees with the dense path up to dimension 64") {
    std::mt19937_64 rng(42);
    PropagatorOptions krylov;
    krylov.dense_cap = 0;  // force the Krylov path
    std::normal_distribution<double> nd(0.0, 1.0);

    for (int modes : {2, 3}) {
        for (int nmax : {2, 4}) {
            const BasisPtr b = enumerate_basis(ModeSet(modes, nmax));
            if (b->dimension() > 64) continue;
            const OperatorMatrix h = random_hermitian(b, rng, 0.7);
            StateVector psi = StateVector::zero(b);
            for (int k = 0; k < b->dimension(); ++k) psi.amplitudes(k) = Complex(nd(rng), nd(rng));
            psi.normalize();
            for (double t : {0.5, 3.0, 11.0}) {
                const StateVector dense = evolve(h, psi, t);
                const StateVector kry = evolve(h, psi, t, krylov);
                CHECK((dense.amplitudes - kry.amplitudes).norm() <= 1e-10);
            }
        }
    }
}

TEST_CASE("Krylov handles non-Hermitian generators") {
    std::mt19937_64 rng(43);
    const BasisPtr b = enumerate_basis(ModeSet(3, 2));
    OperatorMatrix h = crow_hopping_h(b, ModeGraph::chain(3, 0.0, 0.8), 0.0);
    h = h + loss_term(b, {0.05, 0.02, 0.08});
    h.hermitian = false;
    StateVector psi = StateVector::zero(b);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int k = 0; k < b->dimension(); ++k) psi.amplitudes(k) = Complex(nd(rng), nd(rng));
    psi.normalize();

    PropagatorOptions krylov;
    krylov.dense_cap = 0;
    for (double t : {0.4, 2.5}) {
        const StateVector dense = evolve(h, psi, t);
        const StateVector kry = evolve(h, psi, t, krylov);
        CHECK((dense.amplitudes - kry.amplitudes).norm() <= 1e-10);
    }
}

TEST_CASE("Krylov reports non-convergence within the substep budget") {
    const BasisPtr b = enumerate_basis(ModeSet(2, 3));
    OperatorMatrix h = 1e6 * crow_hopping_h(b, ModeGraph::chain(2, 0.0, 1.0), 0.0);
    h = h + 1e5 * number_op(b, 0);  // break the tiny invariant subspaces
    h.hermitian = true;
    PropagatorOptions opts;
    opts.dense_cap = 0;
    opts.krylov_dim = 2;
    opts.max_substeps = 3;
    StateVector psi = StateVector::zero(b);
    for (int k = 0; k < b->dimension(); ++k) psi.amplitudes(k) = 1.0 + k;
    psi.normalize();
    CHECK_THROWS_AS(evolve(h, psi, 1e3, opts), std::runtime_error);
}

TEST_CASE("evolve validates inputs") {
    const BasisPtr b = enumerate_basis(ModeSet(1, 1));
    const BasisPtr other = enumerate_basis(ModeSet(2, 1));
    CHECK_THROWS_AS(evolve(zero_op(b), StateVector::basis_state(other, 0), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(evolve(zero_op(b), StateVector::basis_state(b, 0), -1.0),
                    std::invalid_argument);
}

TEST_CASE("schedule evolution: semigroup property and survival bookkeeping") {
    const BasisPtr b = enumerate_basis(ModeSet(2, 2));
    const OperatorMatrix h = crow_hopping_h(b, ModeGraph::chain(2, 0.0, 0.9), 0.0);
    StateVector psi = StateVector::basis_state(b, b->index_of({1, 1}));

    const double t = 1.8;
    const EvolutionReport split = evolve_schedule({{t / 2, h}, {t / 2, h}}, psi);
    const EvolutionReport whole = evolve_schedule({{t, h}}, psi);
    CHECK((split.final_state.amplitudes - whole.final_state.amplitudes).norm() <= 1e-10);

    CHECK(split.survival_probability == Approx(1.0).margin(1e-10));
    REQUIRE(split.segment_norms.size() == 2);
    for (double n : split.segment_norms) CHECK(n == Approx(1.0).margin(1e-10));
}

TEST_CASE("leakage monitor reports top-layer population") {
    const BasisPtr b = enumerate_basis(ModeSet(1, 2));
    StateVector psi = StateVector::zero(b);
    psi.amplitudes(b->index_of({0})) = std::sqrt(0.9);
    psi.amplitudes(b->index_of({2})) = std::sqrt(0.1);
    ScheduleOptions opts;
    opts.leakage_monitor = false;
    const EvolutionReport r = evolve_schedule({{1.0, zero_op(b)}}, psi, opts);
    CHECK(r.leakage == Approx(0.1).margin(1e-12));
    CHECK_FALSE(r.leakage_warning);

    ScheduleOptions warn;
    const EvolutionReport r2 = evolve_schedule({{1.0, zero_op(b)}}, psi, warn);
    CHECK(r2.leakage_warning);
}

TEST_CASE("expectation values") {
    const BasisPtr b = enumerate_basis(ModeSet(1, 2), {DopantLevelSet::two_level()});
    StateVector two = StateVector::basis_state(b, b->index_of({2}, {Level::g}));
    CHECK(real_expectation(number_op(b, 0), two) == Approx(2.0));
    CHECK(real_expectation(dopant_transition_op(b, 0, Level::g, Level::g), two) == Approx(1.0));

    const BasisPtr other = enumerate_basis(ModeSet(1, 1));
    CHECK_THROWS_AS(expectation(number_op(b, 0), StateVector::basis_state(other, 0)),
                    std::invalid_argument);
}
