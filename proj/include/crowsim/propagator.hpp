// propagator.hpp — numeric time evolution under piecewise-constant, possibly
// non-Hermitian Hamiltonians. Dense eigendecomposition (Hermitian) or scaled
// Pade exponential (general) below a dimension cap, Arnoldi/Krylov above it.
// Deterministic: fixed iteration orders, no randomness anywhere in the path.

#pragma once

#include "crowsim/hamiltonians.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <iostream>

namespace crowsim {

struct PropagatorOptions {
    int dense_cap = 4096;      // dimensions up to this use the dense path
    int krylov_dim = 30;       // Arnoldi subspace size
    double krylov_tol = 1e-12; // per-substep residual tolerance
    int max_substeps = 100000; // hard iteration bound -> convergence error
};

namespace detail {

inline VectorC evolve_dense(const OperatorMatrix& h, const VectorC& psi, double t) {
    const MatrixC hd = h.dense();
    if (h.hermitian) {
        Eigen::SelfAdjointEigenSolver<MatrixC> es(hd);
        detail::require(es.info() == Eigen::Success, "evolve: eigendecomposition failed");
        const Eigen::VectorXd& ev = es.eigenvalues();
        const MatrixC& u = es.eigenvectors();
        VectorC coeffs = u.adjoint() * psi;
        for (int k = 0; k < ev.size(); ++k)
            coeffs(k) *= std::exp(Complex(0.0, -ev(k) * t));
        return u * coeffs;
    }
    const MatrixC expm = (Complex(0.0, -t) * hd).exp();
    return expm * psi;
}

// One Arnoldi substep: returns the evolved vector over time tau and a local
// error estimate (Saad's residual-based bound).
inline VectorC krylov_step(const SparseMatrixC& a, const VectorC& psi, double tau, int m,
                           double& err_estimate) {
    const double beta = psi.norm();
    const int n = static_cast<int>(psi.size());
    if (beta == 0.0) {
        err_estimate = 0.0;
        return psi;
    }
    m = std::min(m, n);
    MatrixC v(n, m + 1);
    MatrixC hm = MatrixC::Zero(m + 1, m);
    v.col(0) = psi / beta;

    int m_eff = m;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
        VectorC w = a * v.col(j);
        // two-pass modified Gram-Schmidt
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
                const Complex c = v.col(i).dot(w);
                hm(i, j) += c;
                w -= c * v.col(i);
            }
        }
        const double norm_w = w.norm();
        hm(j + 1, j) = norm_w;
        if (norm_w < 1e-14) {
            m_eff = j + 1;
            breakdown = true;  // Krylov space is invariant: the step is exact
            break;
        }
        v.col(j + 1) = w / norm_w;
    }

    const MatrixC hs = hm.topLeftCorner(m_eff, m_eff);
    const MatrixC exph = (Complex(0.0, -tau) * hs).exp();
    const VectorC small = exph.col(0) * beta;

    err_estimate = breakdown ? 0.0
                             : std::abs(hm(m_eff, m_eff - 1)) * std::abs(small(m_eff - 1)) *
                                   std::abs(tau);
    return v.leftCols(m_eff) * small;
}

inline VectorC evolve_krylov(const OperatorMatrix& h, const VectorC& psi, double t,
                             const PropagatorOptions& opts) {
    VectorC cur = psi;
    double remaining = t;
    double tau = t;
    int steps = 0;
    while (remaining > 0.0) {
        if (++steps > opts.max_substeps)
            throw std::runtime_error("evolve: Krylov propagation did not converge within " +
                                     std::to_string(opts.max_substeps) + " substeps");
        tau = std::min(tau, remaining);
        double err = 0.0;
        VectorC next = krylov_step(h.entries, cur, tau, opts.krylov_dim, err);
        if (err > opts.krylov_tol) {
            tau *= 0.5;
            continue;
        }
        cur = std::move(next);
        remaining -= tau;
        if (err < 0.01 * opts.krylov_tol) tau *= 2.0;  // gentle growth
    }
    return cur;
}

}  // namespace detail

/// e^{-iHt} psi. Dense path below the cap, Krylov above; non-Hermitian H uses
/// the same machinery without unitarity assumptions.
inline StateVector evolve(const OperatorMatrix& h, const StateVector& psi, double t,
                          const PropagatorOptions& opts = {}) {
    detail::require(compatible(h.basis, psi.basis), "evolve: basis mismatch");
    detail::require(t >= 0.0, "evolve: t must be >= 0");
    if (t == 0.0) return psi;
    if (h.dimension() <= opts.dense_cap)
        return StateVector(psi.basis, detail::evolve_dense(h, psi.amplitudes, t));
    return StateVector(psi.basis, detail::evolve_krylov(h, psi.amplitudes, t, opts));
}

/// Trajectory bookkeeping for a schedule run.
struct EvolutionReport {
    StateVector final_state;
    double survival_probability = 1.0;
    std::vector<double> segment_norms;  // squared norm after each segment
    double leakage = 0.0;               // max top photon layer population seen
    bool leakage_warning = false;
};

struct ScheduleOptions {
    PropagatorOptions propagator;
    double leakage_warn_threshold = 1e-8;
    bool leakage_monitor = true;  // device bases use the top layer by design
};

/// Population in the top photon-number layer (total photons == n_max_total).
inline double top_layer_population(const StateVector& psi) {
    const HybridBasis& b = *psi.basis;
    double p = 0.0;
    for (int k = 0; k < b.dimension(); ++k)
        if (b.state(k).total_photons() == b.n_max_total()) p += std::norm(psi.amplitudes(k));
    return p;
}

/// Sequential application of evolve over a piecewise-constant timeline.
inline EvolutionReport evolve_schedule(const std::vector<TimedOperator>& timeline,
                                       const StateVector& psi,
                                       const ScheduleOptions& opts = {}) {
    EvolutionReport report;
    StateVector cur = psi;
    report.leakage = top_layer_population(cur);
    for (const TimedOperator& seg : timeline) {
        cur = evolve(seg.op, cur, seg.duration, opts.propagator);
        report.segment_norms.push_back(cur.squared_norm());
        report.leakage = std::max(report.leakage, top_layer_population(cur));
    }
    if (opts.leakage_monitor && report.leakage > opts.leakage_warn_threshold) {
        report.leakage_warning = true;
        std::cerr << "crowsim: warning: top Fock layer population " << report.leakage
                  << " exceeds " << opts.leakage_warn_threshold
                  << "; the photon-number truncation may be inadequate\n";
    }
    report.survival_probability = cur.squared_norm();
    report.final_state = std::move(cur);
    return report;
}

/// <psi|A|psi>. For operators flagged Hermitian the imaginary part is checked
/// against 1e-10 and dropped.
inline Complex expectation(const OperatorMatrix& a, const StateVector& psi) {
    detail::require(compatible(a.basis, psi.basis), "expectation: basis mismatch");
    const Complex value = psi.amplitudes.dot(a.entries * psi.amplitudes);
    if (a.hermitian) {
        detail::require(std::abs(value.imag()) <= 1e-10 * std::max(1.0, std::abs(value.real())),
                        "expectation: Hermitian operator produced a complex expectation value");
        return Complex(value.real(), 0.0);
    }
    return value;
}

inline double real_expectation(const OperatorMatrix& a, const StateVector& psi) {
    return expectation(a, psi).real();
}

}  // namespace crowsim
