#pragma once

#include "core.hpp"

#include <random>

namespace tslice::samples {

// random sum of shifted, modulated Gaussians in phase space
inline SymbolGrid gaussian_mixture(std::mt19937_64& rng, const Grid1d& g, int terms = 3)
{
    std::uniform_real_distribution<double> c(-1.2, 1.2), w(0.7, 1.5), a(-1, 1), f(-0.8, 0.8);
    struct Term { double x0, xi0, wx, wxi, kx; cplx amp; };
    std::vector<Term> t;
    for (int k = 0; k < terms; ++k) t.push_back({c(rng), c(rng), w(rng), w(rng), f(rng), cplx(a(rng), a(rng))});
    return SymbolGrid::phase_space(g, [t](double x, double xi) {
        cplx s = 0;
        for (auto& q : t)
            s += q.amp * std::exp(-pi * (q.wx * (x - q.x0) * (x - q.x0) + q.wxi * (xi - q.xi0) * (xi - q.xi0))) *
                 std::polar(1.0, 2 * pi * q.kx * x);
        return s;
    });
}

inline GridFunction random_packet(std::mt19937_64& rng, const Grid1d& g)
{
    std::uniform_real_distribution<double> c(-1.5, 1.5), w(0.6, 1.6), a(-1, 1);
    double x0 = c(rng), k0 = c(rng), wd = w(rng);
    cplx amp(a(rng), a(rng));
    return GridFunction::sample(g, [=](double x) { return amp * std::exp(-pi * wd * (x - x0) * (x - x0)) * std::polar(1.0, 2 * pi * k0 * x); });
}

} // namespace tslice::samples
