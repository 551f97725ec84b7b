// fitting.hpp — small deterministic fits used by the experiments: linear least
// squares, phase unwrapping, and sin^2 frequency extraction.

#pragma once

#include "crowsim/fock.hpp"

#include <span>

namespace crowsim {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size() && x.size() >= 2, "linear_fit: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    detail::require(denom != 0.0, "linear_fit: degenerate abscissae");
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

/// Unwrap a phase series in place so consecutive samples differ by < pi.
inline void unwrap_phases(std::vector<double>& phases) {
    for (std::size_t i = 1; i < phases.size(); ++i) {
        double d = phases[i] - phases[i - 1];
        while (d > kPi) {
            phases[i] -= 2.0 * kPi;
            d = phases[i] - phases[i - 1];
        }
        while (d < -kPi) {
            phases[i] += 2.0 * kPi;
            d = phases[i] - phases[i - 1];
        }
    }
}

namespace detail {
// residual of p ~ A sin^2(omega t) with the amplitude solved analytically
inline double sin_sq_residual(std::span<const double> t, std::span<const double> p, double omega) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double s = std::sin(omega * t[i]);
        const double s2 = s * s;
        num += p[i] * s2;
        den += s2 * s2;
    }
    const double a = den > 0.0 ? num / den : 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double s = std::sin(omega * t[i]);
        const double e = p[i] - a * s * s;
        r += e * e;
    }
    return r;
}
}  // namespace detail

/// Fit p(t) ~ A sin^2(omega t): coarse scan of [omega_lo, omega_hi] followed
/// by golden-section refinement. Deterministic.
inline double fit_sin_squared_frequency(std::span<const double> t, std::span<const double> p,
                                        double omega_lo, double omega_hi, int scan_points = 400) {
    detail::require(t.size() == p.size() && t.size() >= 4, "fit_sin_squared_frequency: need data");
    detail::require(omega_lo > 0.0 && omega_hi > omega_lo,
                    "fit_sin_squared_frequency: bad search interval");
    double best_w = omega_lo, best_r = detail::sin_sq_residual(t, p, omega_lo);
    for (int i = 1; i < scan_points; ++i) {
        const double w = omega_lo + (omega_hi - omega_lo) * i / (scan_points - 1);
        const double r = detail::sin_sq_residual(t, p, w);
        if (r < best_r) {
            best_r = r;
            best_w = w;
        }
    }
    const double step = (omega_hi - omega_lo) / (scan_points - 1);
    double lo = std::max(omega_lo, best_w - step);
    double hi = std::min(omega_hi, best_w + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = detail::sin_sq_residual(t, p, x1), f2 = detail::sin_sq_residual(t, p, x2);
    for (int it = 0; it < 100; ++it) {
        if (f1 > f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = detail::sin_sq_residual(t, p, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = detail::sin_sq_residual(t, p, x1);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace crowsim
