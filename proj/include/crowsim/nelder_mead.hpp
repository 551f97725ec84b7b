// nelder_mead.hpp — small deterministic downhill-simplex minimizer for the
// low-dimensional calibration searches.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace crowsim {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    int max_evaluations = 2000;
    double x_tolerance = 1e-10;
    double f_tolerance = 1e-14;
    double initial_step = 0.1;  // relative to each coordinate's scale
};

/// Minimize f over R^n starting from x0. Standard reflection/expansion/
/// contraction/shrink coefficients; fully deterministic.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0,
                                    const NelderMeadOptions& opts = {}) {
    const std::size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = std::max(std::abs(x0[i]), 1.0);
        pts[i + 1][i] += opts.initial_step * scale;
    }

    NelderMeadResult result;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = f(pts[i]);
        ++result.evaluations;
    }

    std::vector<std::size_t> order(n + 1);
    while (result.evaluations < opts.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });

        const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

        double spread_x = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            spread_x = std::max(spread_x, std::abs(pts[worst][i] - pts[best][i]));
        if (spread_x <= opts.x_tolerance && std::abs(fv[worst] - fv[best]) <= opts.f_tolerance) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + coef * (centroid[i] - pts[worst][i]);
            return p;
        };

        std::vector<double> xr = blend(alpha);
        const double fr = f(xr);
        ++result.evaluations;

        if (fr < fv[best]) {
            std::vector<double> xe = blend(alpha * gamma);
            const double fe = f(xe);
            ++result.evaluations;
            if (fe < fr) {
                pts[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                pts[worst] = std::move(xr);
                fv[worst] = fr;
            }
        } else if (fr < fv[second_worst]) {
            pts[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            std::vector<double> xc = blend(fr < fv[worst] ? rho : -rho);
            const double fc = f(xc);
            ++result.evaluations;
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                for (std::size_t k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    for (std::size_t i = 0; i < n; ++i)
                        pts[k][i] = pts[best][i] + sigma * (pts[k][i] - pts[best][i]);
                    fv[k] = f(pts[k]);
                    ++result.evaluations;
                }
            }
        }
    }

    const std::size_t best =
        static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    result.x = pts[best];
    result.value = fv[best];
    return result;
}

}  // namespace crowsim
