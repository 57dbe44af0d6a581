#pragma once

#include "core.hpp"
#include "fft.hpp"
#include "numerics.hpp"

#include <algorithm>

namespace tslice {

// f^(xi_k) = h sum_j f(x_j) e^{-2 pi i x_j xi_k}; result lives on grid.dual()
inline GridFunction fourier(const GridFunction& f)
{
    const int N = f.grid.N;
    Vec v = f.values;
    for (int j = 1; j < N; j += 2) v[j] = -v[j];
    fft::inplace(v, -1);
    double sgn = (N / 2) % 2 ? -1.0 : 1.0;
    for (int k = 0; k < N; ++k) v[k] *= f.grid.h() * ((k % 2) ? -sgn : sgn);
    return GridFunction(f.grid.dual(), v);
}

// inverse of fourier; input lives on a frequency grid, result on its dual
inline GridFunction inverse_fourier(const GridFunction& fh)
{
    const int N = fh.grid.N;
    Grid1d spatial = fh.grid.dual();
    Vec v = fh.values;
    double sgn = (N / 2) % 2 ? -1.0 : 1.0;
    for (int k = 0; k < N; ++k) v[k] *= (k % 2) ? -sgn : sgn;
    fft::inplace(v, +1);
    for (int j = 0; j < N; ++j) v[j] *= ((j % 2) ? -1.0 : 1.0) / spatial.L;
    return GridFunction(spatial, v);
}

inline GridFunction normalized_gaussian(const Grid1d& g, double x0 = 0.0, double xi0 = 0.0)
{
    return GridFunction::sample(g, [&](double x) {
        return std::pow(2.0, 0.25) * std::exp(-pi * (x - x0) * (x - x0)) * std::exp(2.0 * pi * I * xi0 * x);
    });
}

// values on a rectangular lattice; axes given by first sample and step
struct GaborField {
    Mat values;
    double x0 = 0, dx = 1, xi0 = 0, dxi = 1;
    double cell() const { return dx * dxi; }
};

inline GaborField stft(const GridFunction& u, const GridFunction& g)
{
    if (!(u.grid == g.grid)) throw Error("grid-mismatch", "stft grids differ");
    if (g.values.norm() == 0.0) throw Error("zero-window", "stft window is zero");
    const Grid1d& G = u.grid;
    const int N = G.N;
    GaborField F;
    F.values.resize(N, N);
    F.x0 = G.x(0);
    F.dx = G.h();
    F.xi0 = G.xi(0);
    F.dxi = 1.0 / G.L;
    for (int j = 0; j < N; ++j) {
        GridFunction w(G);
        for (int n = 0; n < N; ++n) w.values[n] = u.values[n] * std::conj(g.values[wrap(n - j + N / 2, N)]);
        F.values.row(j) = fourier(w).values.transpose();
    }
    return F;
}

inline double mp_norm(const GridFunction& u, const GridFunction& g, double p)
{
    if (!(p >= 1)) throw Error("domain", "mp_norm needs p >= 1");
    GaborField F = stft(u, g);
    if (std::isinf(p)) return F.values.cwiseAbs().maxCoeff();
    double s = 0;
    for (Eigen::Index i = 0; i < F.values.size(); ++i) s += std::pow(std::abs(F.values.data()[i]), p);
    return std::pow(s * F.cell(), 1.0 / p);
}

// band-limited upsampling by two (zero padding of the periodic spectrum)
inline Vec upsample2(const Vec& f)
{
    const int N = static_cast<int>(f.size());
    Vec F = f;
    fft::inplace(F, -1);
    Vec G = Vec::Zero(2 * N);
    for (int k = 0; k < N / 2; ++k) G[k] = F[k];
    for (int k = N / 2 + 1; k < N; ++k) G[k + N] = F[k];
    G[N / 2] = 0.5 * F[N / 2];
    G[N / 2 + N] = 0.5 * F[N / 2];
    fft::inplace(G, +1);
    return G / static_cast<double>(N);
}

inline SymbolGrid wigner(const GridFunction& f, const GridFunction& g)
{
    if (!(f.grid == g.grid)) throw Error("grid-mismatch", "wigner grids differ");
    const Grid1d& G = f.grid;
    const int N = G.N;
    Vec fu = upsample2(f.values), gu = upsample2(g.values);
    SymbolGrid W(G, G.dual());
    Mat rows(N, N);   // row i, column d mod N
    for (int i = 0; i < N; ++i) {
        for (int d = -N / 2; d < N / 2; ++d) {
            cplx v = fu[wrap(2 * i + d, 2 * N)] * std::conj(gu[wrap(2 * i - d, 2 * N)]);
            rows(i, wrap(d, N)) = (d % 2) ? -v : v;
        }
    }
    fft::rows(rows, -1);
    W.values = rows * G.h();
    return W;
}

// ---- phase-space Gabor analysis of symbols ----

// phase-space window, identified by name in run metadata
struct PhaseWindow {
    std::string name = "gaussian sqrt(2) exp(-pi(x^2+xi^2))";
    Evaluator eval = [](double x, double xi) { return cplx(std::sqrt(2.0) * std::exp(-pi * (x * x + xi * xi)), 0.0); };
    double half_extent = 3.0;   // window treated as zero beyond this offset
};

struct SjostrandOptions {
    double region_x = -1;    // half-width of the z lattice per axis; <0 means a quarter of the box
    double region_xi = -1;
    int nodes = 64;          // lattice nodes per axis (upper bound)
    PhaseWindow window{};
};

namespace detail {

inline std::vector<int> lattice_indices(const Grid1d& g, double R, int nodes)
{
    if (R < 0) R = 0.25 * g.L;
    int lo = static_cast<int>(std::ceil((-R - g.x(0)) / g.h() - 1e-9));
    int hi = static_cast<int>(std::floor((R - g.x(0)) / g.h() + 1e-9));
    lo = std::max(lo, 0);
    hi = std::min(hi, g.N - 1);
    int count = hi - lo + 1;
    int stride = std::max(1, (count + nodes - 1) / nodes);
    std::vector<int> idx;
    for (int i = lo; i <= hi && static_cast<int>(idx.size()) < nodes; i += stride) idx.push_back(i);
    return idx;
}

inline int patch_size(double h, double half_extent)
{
    int p = 2 * static_cast<int>(std::ceil(half_extent / h));
    return std::max(p, 8);
}

// |V_Phi sigma(z, .)| over the full patch frequency grid for one lattice node
struct PatchTransform {
    int Px, Pxi;
    Mat win;
    Mat buf;

    PatchTransform(const SymbolGrid& s, const PhaseWindow& w)
    {
        Px = patch_size(s.gx.h(), w.half_extent);
        Pxi = patch_size(s.gxi.h(), w.half_extent);
        win.resize(Px, Pxi);
        for (int b = 0; b < Pxi; ++b)
            for (int a = 0; a < Px; ++a)
                win(a, b) = w.eval((a - Px / 2) * s.gx.h(), (b - Pxi / 2) * s.gxi.h());
        buf.resize(Px, Pxi);
    }

    const Mat& at(const SymbolGrid& s, int i, int m)
    {
        const int Nx = s.gx.N, Nxi = s.gxi.N;
        for (int b = 0; b < Pxi; ++b) {
            int cm = wrap(m - Pxi / 2 + b, Nxi);
            for (int a = 0; a < Px; ++a) buf(a, b) = s.values(wrap(i - Px / 2 + a, Nx), cm) * win(a, b);
        }
        fft::both(buf, -1);
        buf *= s.gx.h() * s.gxi.h();
        return buf;
    }
};

inline double zeta_cell(const SymbolGrid& s, const PatchTransform& p)
{
    return 1.0 / (p.Px * s.gx.h()) / (p.Pxi * s.gxi.h());
}

} // namespace detail

// sup over the z lattice of |V_Phi sigma(z, zeta)|, for every zeta on the patch grid
struct GaborSupField {
    RMat sup;
    double cell = 0;
    double l1() const { return sup.sum() * cell; }
};

inline GaborSupField gabor_sup_field(const SymbolGrid& s, const SjostrandOptions& o = {})
{
    detail::PatchTransform pt(s, o.window);
    auto ix = detail::lattice_indices(s.gx, o.region_x, o.nodes);
    auto im = detail::lattice_indices(s.gxi, o.region_xi, o.nodes);
    GaborSupField f;
    f.sup = RMat::Zero(pt.Px, pt.Pxi);
    f.cell = detail::zeta_cell(s, pt);
    for (int m : im)
        for (int i : ix) f.sup = f.sup.cwiseMax(pt.at(s, i, m).cwiseAbs());
    return f;
}

inline double sjostrand_norm(const SymbolGrid& s, const SjostrandOptions& o = {})
{
    if (max_abs(s.values) == 0.0) return 0.0;
    return gabor_sup_field(s, o).l1();
}

// decimated 4-D field: values[z index] is a (nodes x nodes) block around zeta = 0
struct GaborField4 {
    std::vector<double> zx, zxi;
    std::vector<Mat> blocks;   // indexed zx-major
    double dzeta_x = 0, dzeta_xi = 0;
    Mat& at(std::size_t a, std::size_t b) { return blocks[a * zxi.size() + b]; }
};

inline GaborField4 stft2(const SymbolGrid& s, const SjostrandOptions& o = {})
{
    detail::PatchTransform pt(s, o.window);
    if (max_abs(pt.win) == 0.0) throw Error("zero-window", "phase-space window is zero");
    auto ix = detail::lattice_indices(s.gx, o.region_x, o.nodes);
    auto im = detail::lattice_indices(s.gxi, o.region_xi, o.nodes);
    GaborField4 F;
    for (int i : ix) F.zx.push_back(s.gx.x(i));
    for (int m : im) F.zxi.push_back(s.gxi.x(m));
    F.dzeta_x = 1.0 / (pt.Px * s.gx.h());
    F.dzeta_xi = 1.0 / (pt.Pxi * s.gxi.h());
    int kx = std::min(o.nodes, pt.Px), kxi = std::min(o.nodes, pt.Pxi);
    for (int i : ix)
        for (int m : im) {
            const Mat& V = pt.at(s, i, m);
            Mat blk(kx, kxi);
            for (int b = 0; b < kxi; ++b)
                for (int a = 0; a < kx; ++a) blk(a, b) = V(wrap(a - kx / 2, pt.Px), wrap(b - kxi / 2, pt.Pxi));
            F.blocks.push_back(std::move(blk));
        }
    return F;
}

struct NarrowDominator {
    RMat h;
    double l1 = 0;
};

inline NarrowDominator narrow_dominator(const std::vector<SymbolGrid>& family, const SjostrandOptions& o = {})
{
    NarrowDominator d;
    for (const auto& s : family) {
        auto f = gabor_sup_field(s, o);
        if (d.h.size() == 0) d.h = f.sup;
        else d.h = d.h.cwiseMax(f.sup);
        d.l1 = d.h.sum() * f.cell;
    }
    return d;
}

} // namespace tslice
