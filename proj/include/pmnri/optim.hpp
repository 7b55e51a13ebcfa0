#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "error.hpp"

namespace pmnri {

struct SimplexOptions {
    std::size_t max_iterations = 10000;
    double relative_tolerance = 1e-12;  ///< on the spread of objective values across the simplex
    double initial_step = 0.05;         ///< relative size of the starting simplex
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Nelder-Mead downhill simplex with the standard coefficients. The best
/// vertex value never increases from one iteration to the next.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                 const SimplexOptions& opt = {}) {
    const std::size_t n = x0.size();
    if (n == 0) throw DataError("nelder_mead: empty parameter vector");
    std::vector<std::vector<double>> v(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = x0[i] != 0.0 ? opt.initial_step * x0[i] : 0.00025;
        v[i + 1][i] += h;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(v[i]);

    std::vector<std::size_t> order(n + 1);
    SimplexResult res;
    auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + t * (w[k] - c[k]);
        return p;
    };
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
        const double spread = std::abs(fv[worst] - fv[best]);
        if (spread <= opt.relative_tolerance * (std::abs(fv[best]) + std::abs(fv[worst])) + 1e-300) {
            res.converged = true;
            break;
        }
        std::vector<double> c(n, 0.0);
        for (std::size_t i : order)
            if (i != worst)
                for (std::size_t k = 0; k < n; ++k) c[k] += v[i][k] / double(n);

        const auto xr = point(c, v[worst], -1.0);
        const double fr = f(xr);
        if (fr < fv[best]) {
            const auto xe = point(c, v[worst], -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                v[worst] = xe;
                fv[worst] = fe;
            } else {
                v[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            v[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        const auto xc = point(c, outside ? xr : v[worst], 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : fv[worst])) {
            v[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i : order) {
            if (i == best) continue;
            v[i] = point(v[best], v[i], 0.5);
            fv[i] = f(v[i]);
        }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    res.x = v[static_cast<std::size_t>(it - fv.begin())];
    res.value = *it;
    return res;
}

}  // namespace pmnri
