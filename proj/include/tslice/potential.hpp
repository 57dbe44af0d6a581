#pragma once

#include "core.hpp"

#include <algorithm>

namespace tslice {

// sigma(t, x, xi) for the perturbation sigma(t, .)^w
struct PotentialSpec {
    std::string id = "zero";
    double v0 = 1.0;
    double omega = 0.25;       // cosine wavenumber
    double mod_freq = 1.0;     // time modulation g(t) = cos(2 pi mod_freq t)
    std::string base = "gaussian-bump";

    bool separable = true;     // sigma_t = g(t) V with V x-only
    bool x_only = true;        // no xi dependence
    bool self_adjoint = true;  // real valued
    bool time_dependent = false;
    double bound = 0.0;        // sup |sigma|

    std::function<cplx(double, double, double)> sigma = [](double, double, double) { return cplx(0); };
    std::function<cplx(double)> V = [](double) { return cplx(0); };    // x profile when separable
    std::function<double(double)> g = [](double) { return 1.0; };      // time profile when separable

    bool is_zero() const { return id == "zero" || v0 == 0.0; }
};

struct PotentialParams {
    double v0 = 1.0;
    double omega = 0.25;
    double mod_freq = 1.0;
    std::string base = "gaussian-bump";
};

inline const std::vector<std::string>& potential_catalog()
{
    static const std::vector<std::string> ids = {"zero", "gaussian-bump", "cosine", "time-modulated", "complex-bump",
                                                 "phase-gaussian"};
    return ids;
}

inline PotentialSpec make_potential(const std::string& id, const PotentialParams& p = {})
{
    PotentialSpec s;
    s.id = id;
    s.v0 = p.v0;
    s.omega = p.omega;
    s.mod_freq = p.mod_freq;
    s.base = p.base;
    const double v0 = p.v0, om = p.omega;
    auto profile = [&](const std::string& name) -> std::function<cplx(double)> {
        if (name == "gaussian-bump") return [v0](double x) { return cplx(v0 * std::exp(-pi * x * x), 0); };
        if (name == "cosine") return [v0, om](double x) { return cplx(v0 * std::cos(2 * pi * om * x), 0); };
        throw Error("config", "unknown base profile '" + name + "' (gaussian-bump, cosine)");
    };

    if (id == "zero") {
        s.v0 = 0;
    } else if (id == "gaussian-bump" || id == "cosine") {
        s.V = profile(id);
        s.bound = std::abs(v0);
    } else if (id == "time-modulated") {
        s.V = profile(p.base);
        double f = p.mod_freq;
        s.g = [f](double t) { return std::cos(2 * pi * f * t); };
        s.time_dependent = true;
        s.bound = std::abs(v0);
    } else if (id == "complex-bump") {
        s.V = [v0](double x) { return cplx(0, v0 * std::exp(-pi * x * x)); };
        s.self_adjoint = false;
        s.bound = std::abs(v0);
    } else if (id == "phase-gaussian") {
        // genuinely phase-space dependent, so its quantization does not commute with x-only symbols
        s.separable = false;
        s.x_only = false;
        s.bound = std::abs(v0);
        s.sigma = [v0](double, double x, double xi) { return cplx(v0 * std::exp(-pi * (0.5 * x * x + 2.0 * xi * xi)), 0); };
        return s;
    } else {
        std::string all;
        for (auto& c : potential_catalog()) all += (all.empty() ? "" : ", ") + c;
        throw Error("config", "unknown potential '" + id + "' (catalog: " + all + ")");
    }
    auto V = s.V;
    auto g = s.g;
    s.sigma = [V, g](double t, double x, double) { return g(t) * V(x); };
    return s;
}

} // namespace tslice
