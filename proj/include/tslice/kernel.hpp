#pragma once

#include "core.hpp"
#include "fft.hpp"
#include "flow.hpp"
#include "metaplectic.hpp"
#include "numerics.hpp"
#include "weyl.hpp"

namespace tslice {

// functions of (x, y) live in SymbolGrid with gx = gxi = the position grid

// K / (c |det B|^{-1/2} e^{2 pi i Phi}) entrywise
inline SymbolGrid extract_amplitude(const OperatorMatrix& K, const U0Kernel& k0)
{
    if (!(K.grid == k0.K.grid)) throw Error("grid-mismatch", "kernel and chirp on different grids");
    if (std::abs(k0.detB) <= 1e-8) throw Error("exceptional-time", "|det B| below 1e-8: division would overflow");
    SymbolGrid a(K.grid, K.grid);
    a.values = K.K.cwiseQuotient(k0.K.K);
    return a;
}

inline SymbolGrid extract_amplitude(const OperatorMatrix& K, const QuadraticForm& Q, double tau,
                                    const MetaplecticOracle& oracle)
{
    return extract_amplitude(K, u0_kernel(Q, tau, oracle));
}

// c(tau) |B|^{-1/2} e^{2 pi i Phi} composed with a^w: the kernel of U0 a^w built on the kernel route
inline OperatorMatrix kernel_route(const U0Kernel& k0, const OperatorMatrix& A) { return compose(k0.K, A); }

struct MapsOptions {
    double cutoff = -1;      // erf window half width; <0 means 3L/8
    double edge = 0.5;       // erf transition width
    int interp_order = 12;
};

// a' from the symbol a of the interaction propagator: substitute
// g(x, y) = a(y, (x - A y)/B), then apply the chirp e^{-pi i B alpha beta} on the
// 2-D Fourier side. Constants are fixed, so only g - 1 (cut off smoothly away
// from the box edge) goes through the FFT.
inline SymbolGrid amplitude_via_maps(const SymbolGrid& a, const QuadraticForm& Q, double tau, const MapsOptions& mo = {})
{
    SymplecticMatrix S = flow_at(Q, tau);
    const double A = S.a(), B = S.b();
    if (std::abs(B) <= 1e-8) throw Error("exceptional-time", "tau is an exceptional time");
    const Grid1d& g = a.gx;
    const int N = g.N;
    const double cut = mo.cutoff < 0 ? 3.0 * g.L / 8.0 : mo.cutoff;
    auto chi = [&](double t) { return 0.5 * (std::erf((t + cut) / mo.edge) - std::erf((t - cut) / mo.edge)); };

    Mat f(N, N);
    if (a.has_eval()) {
        for (int k = 0; k < N; ++k)
            for (int j = 0; j < N; ++j) {
                double x = g.x(j), y = g.x(k);
                f(j, k) = (a.eval(y, (x - A * y) / B) - 1.0) * chi(x) * chi(y);
            }
    } else {
        Interp2 ip(a.values, mo.interp_order);
        for (int k = 0; k < N; ++k)
            for (int j = 0; j < N; ++j) {
                double x = g.x(j), y = g.x(k);
                double u = (y - a.gx.x(0)) / a.gx.h(), v = ((x - A * y) / B - a.gxi.x(0)) / a.gxi.h();
                f(j, k) = (ip.at(u, v) - 1.0) * chi(x) * chi(y);
            }
    }
    fft::both(f, -1);
    RVec fr = dft_frequencies(g);
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j) f(j, k) *= std::polar(1.0 / (double(N) * N), -pi * B * fr[j] * fr[k]);
    fft::both(f, +1);
    SymbolGrid out(g, g);
    out.values = f.array() + cplx(1.0);
    return out;
}

// compactly supported real window on (x, y)
struct LocalWindow {
    double R = -1;          // support radius; <0 means L/8
    double cx = 0, cy = 0;
    std::string name() const { return "(1-(r/R)^2)^4, R=" + std::to_string(R); }

    double radius(const Grid1d& g) const { return R < 0 ? g.L / 8.0 : R; }

    double operator()(const Grid1d& g, double x, double y) const
    {
        double r = radius(g);
        double q = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r);
        return q >= 1 ? 0.0 : std::pow(1.0 - q, 4);
    }

    // outer eighth of the box on each side is the boundary band
    void check(const Grid1d& g) const
    {
        double r = radius(g), safe = 0.5 * g.L - g.L / 8.0;
        if (!(r > 0) || std::abs(cx) + r > safe || std::abs(cy) + r > safe)
            throw Error("window-support", "window reaches the boundary band");
    }
};

inline void check_pair(const SymbolGrid& k, const SymbolGrid& u)
{
    if (!k.same_grid(u) || !(k.gx == k.gxi)) throw Error("grid-mismatch", "kernels must share one (x, y) grid");
}

// integral of |F[(k - u) Psi]| over frequency
inline double local_fl1_error(const SymbolGrid& k, const SymbolGrid& u, const LocalWindow& w = {})
{
    check_pair(k, u);
    const Grid1d& g = k.gx;
    w.check(g);
    const int N = g.N;
    const double h = g.h();
    Mat f(N, N);
    for (int c = 0; c < N; ++c)
        for (int r = 0; r < N; ++r) f(r, c) = (k(r, c) - u(r, c)) * w(g, g.x(r), g.x(c));
    fft::both(f, -1);
    return f.cwiseAbs().sum() * h * h / (g.L * g.L);
}

// max |k - u| over |x - cx|, |y - cy| <= half
inline double local_sup_error(const SymbolGrid& k, const SymbolGrid& u, double half, double cx = 0, double cy = 0)
{
    check_pair(k, u);
    const Grid1d& g = k.gx;
    double e = 0;
    for (int c = 0; c < g.N; ++c)
        for (int r = 0; r < g.N; ++r)
            if (std::abs(g.x(r) - cx) <= half && std::abs(g.x(c) - cy) <= half) e = std::max(e, std::abs(k(r, c) - u(r, c)));
    return e;
}

// max |(k - u) Psi|: the quantity the FL1 norm dominates
inline double local_sup_error(const SymbolGrid& k, const SymbolGrid& u, const LocalWindow& w)
{
    check_pair(k, u);
    const Grid1d& g = k.gx;
    w.check(g);
    double e = 0;
    for (int c = 0; c < g.N; ++c)
        for (int r = 0; r < g.N; ++r) {
            double p = w(g, g.x(r), g.x(c));
            if (p > 0) e = std::max(e, std::abs(k(r, c) - u(r, c)) * p);
        }
    return e;
}

// as a symbol on (x, y): the kernel values themselves
inline SymbolGrid kernel_values(const OperatorMatrix& K)
{
    SymbolGrid s(K.grid, K.grid);
    s.values = K.K;
    return s;
}

// interior region for amplitude comparisons: chirp division amplifies wrap
// artifacts toward the edge
inline double interior_half(const Grid1d& g) { return 3.0 * g.L / 16.0; }

inline double interior_amplitude_diff(const SymbolGrid& a, const SymbolGrid& b)
{
    return local_sup_error(a, b, interior_half(a.gx));
}

} // namespace tslice
