#pragma once

#include "core.hpp"
#include "fft.hpp"
#include "numerics.hpp"

namespace tslice {

// Discrete Weyl correspondence on the periodic grid.
//
//   K(x_{k+d}, x_k) = sum_m sigma(x_k + d h/2, xi_m) e^{2 pi i d h xi_m} / L,   d in [-N/2, N/2)
//
// Odd d needs the symbol at half-grid midpoints: taken from the evaluator when
// present, otherwise by local Lagrange interpolation along x (a global Fourier
// interpolant rings on symbols that are not periodic in the box).
//
// Symbols that do not decay in xi produce kernels with a 1/(x-y) tail at the
// Nyquist scale. The quantizer blends sigma towards its value at the edge of
// the frequency box over |xi| in [taper_start*nu, nu]; the identity, every
// x-only symbol and every symbol that has decayed before taper_start*nu are
// left untouched.
struct WeylOptions {
    bool taper = true;
    double taper_start = 0.75;   // fraction of the Nyquist frequency
    int lagrange = 16;           // stencil width of the half-grid shift
};

namespace detail {

inline std::vector<double> half_shift_weights(int p)
{
    return lagrange_weights(-(p / 2 - 1), p, 0.5);
}

inline std::vector<double> taper_weights(const Grid1d& gxi, const WeylOptions& o)
{
    const int N = gxi.N;
    std::vector<double> w(N, 1.0);
    if (!o.taper) return w;
    double nu = 0.5 * gxi.L;   // gxi spans [-nu, nu)
    double a = o.taper_start * nu;
    for (int m = 0; m < N; ++m) w[m] = 1.0 - smoothstep((std::abs(gxi.x(m)) - a) / (nu - a));
    return w;
}

inline void check_symbol_grid(const SymbolGrid& s)
{
    if (!(s.gxi == s.gx.dual())) throw Error("grid-mismatch", "symbol frequency axis is not the dual of its x axis");
}

} // namespace detail

inline OperatorMatrix weyl_quantize(const SymbolGrid& s, const WeylOptions& o = {}, Warnings* warnings = nullptr)
{
    detail::check_symbol_grid(s);
    const Grid1d& G = s.gx;
    const int N = G.N;
    const double h = G.h();
    const int R = 3 * N;           // midpoint rows q = 2k + d, shifted by N/2
    const int q0 = -N / 2;
    auto tw = detail::taper_weights(s.gxi, o);
    auto lw = detail::half_shift_weights(o.lagrange);
    const int lo = -(o.lagrange / 2 - 1);
    const double nu = 0.5 * s.gxi.L;   // gxi spans [-nu, nu)

    if (!s.has_eval()) {
        // resolution check: energy in the top 1/16 of the x spectrum
        Mat t = s.values;
        fft::columns(t, -1);
        double tot = t.squaredNorm(), hi = 0;
        for (int k = N / 2 - N / 32; k < N / 2 + N / 32; ++k) hi += t.row(k).squaredNorm();
        if (tot > 0 && hi / tot > 1e-8) warn(warnings, "symbol has significant mass at the Nyquist rows along x; kernel will alias");
    }

    // T(m, r) holds the tapered midpoint symbol, one column per midpoint
    Mat T(N, R);
    for (int r = 0; r < R; ++r) {
        int q = r + q0;
        double mid = G.x(0) + 0.5 * q * h;
        cplx edge;
        if (s.has_eval()) {
            for (int m = 0; m < N; ++m) T(m, r) = s.eval(mid, s.gxi.x(m));
            edge = 0.5 * (T(0, r) + s.eval(mid, nu));
        } else if (q % 2 == 0) {
            int j = wrap(q / 2, N);
            for (int m = 0; m < N; ++m) T(m, r) = s.values(j, m);
            edge = T(0, r);
        } else {
            int j = (q - 1) / 2;
            if (q < 0) j = -((1 - q) / 2);
            for (int m = 0; m < N; ++m) {
                cplx acc = 0;
                for (int a = 0; a < o.lagrange; ++a) acc += lw[a] * s.values(wrap(j + lo + a, N), m);
                T(m, r) = acc;
            }
            edge = T(0, r);
        }
        if (o.taper)
            for (int m = 0; m < N; ++m) T(m, r) = edge + tw[m] * (T(m, r) - edge);
    }
    fft::columns(T, +1);   // T(d mod N, r) = sum_m ... e^{+2 pi i d m / N}

    OperatorMatrix K(G);
    const double scale = 1.0 / G.L;
    for (int k = 0; k < N; ++k) {
        for (int d = -N / 2; d < N / 2; ++d) {
            int r = 2 * k + d - q0;
            cplx v = T(wrap(d, N), r) * scale;
            K.K(wrap(k + d, N), k) = (d % 2) ? -v : v;
        }
    }
    return K;
}

inline SymbolGrid kernel_to_symbol(const OperatorMatrix& K, const WeylOptions& o = {})
{
    const Grid1d& G = K.grid;
    const int N = G.N;
    auto lw = detail::half_shift_weights(o.lagrange);
    const int lo = -(o.lagrange / 2 - 1);
    // Fd(d mod N, i): kernel along the anti-diagonal through x_i
    Mat Fd(N, N);
    for (int i = 0; i < N; ++i) {
        for (int d = -N / 2; d < N / 2; ++d) {
            cplx v;
            if (d % 2 == 0) {
                v = K.K(wrap(i + d / 2, N), wrap(i - d / 2, N));
            } else {
                // samples sit at k + d/2 for integer k; x_i lies half way between k0 and k0+1
                int k0 = i - (d + 1) / 2;
                v = 0;
                for (int a = 0; a < o.lagrange; ++a) {
                    int k = k0 + lo + a;
                    v += lw[a] * K.K(wrap(k + d, N), wrap(k, N));
                }
            }
            Fd(wrap(d, N), i) = (d % 2) ? -v : v;
        }
    }
    fft::columns(Fd, -1);
    SymbolGrid s(G, G.dual());
    s.values = Fd.transpose() * G.h();
    return s;
}

inline SymbolGrid moyal_product(const SymbolGrid& a, const SymbolGrid& b, const WeylOptions& o = {})
{
    if (!a.same_grid(b)) throw Error("grid-mismatch", "moyal_product needs matching grids");
    return kernel_to_symbol(compose(weyl_quantize(a, o), weyl_quantize(b, o)), o);
}

using Mat2 = Eigen::Matrix2d;

// (sigma o M)(x, xi) = sigma(M (x, xi))
inline SymbolGrid compose_linear(const SymbolGrid& s, const Mat2& M)
{
    if (std::abs(M.determinant()) <= 1e-12) throw Error("singular-matrix", "compose_linear needs an invertible matrix");
    Evaluator f;
    if (s.has_eval()) {
        auto e = s.eval;
        double a = M(0, 0), b = M(0, 1), c = M(1, 0), d = M(1, 1);
        f = [e, a, b, c, d](double x, double xi) { return e(a * x + b * xi, c * x + d * xi); };
        return SymbolGrid::sample(s.gx, s.gxi, f);
    }
    SymbolGrid r(s.gx, s.gxi);
    Interp2 ip(s.values, 16);
    for (int m = 0; m < s.gxi.N; ++m)
        for (int i = 0; i < s.gx.N; ++i) {
            double x = s.gx.x(i), xi = s.gxi.x(m);
            double u = M(0, 0) * x + M(0, 1) * xi, v = M(1, 0) * x + M(1, 1) * xi;
            r.values(i, m) = ip.at((u - s.gx.x(0)) / s.gx.h(), (v - s.gxi.x(0)) / s.gxi.h());
        }
    return r;
}

// Independent Moyal product: twisted convolution of the symplectic Fourier
// transforms, all integrals by direct quadrature on coarse lattices. Values are
// returned on an n_out x n_out block of grid nodes around the origin.
struct TwistedOracle {
    std::vector<int> ix, im;   // grid indices of the output block
    Mat oracle, primary;
    double rel_err = 0;
};

inline TwistedOracle twisted_product_oracle(const SymbolGrid& a, const SymbolGrid& b, int n_out = 32,
                                            double out_half = 2.0, double freq_half = 4.0, double dfreq = 0.125,
                                            const WeylOptions& o = {})
{
    if (!a.same_grid(b)) throw Error("grid-mismatch", "oracle needs matching grids");
    const Grid1d &gx = a.gx, &gxi = a.gxi;
    const int nf = static_cast<int>(std::lround(2 * freq_half / dfreq));
    std::vector<double> F(nf);
    for (int j = 0; j < nf; ++j) F[j] = -freq_half + j * dfreq;
    auto dft = [&](const Grid1d& g) {
        Mat E(nf, g.N);
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < nf; ++j) E(j, i) = std::exp(-2.0 * pi * I * F[j] * g.x(i)) * g.h();
        return E;
    };
    Mat Ex = dft(gx), Exi = dft(gxi);
    Mat ah = Ex * a.values * Exi.transpose();
    Mat bh = Ex * b.values * Exi.transpose();
    // T(Y, H) = sum e^{pi i (Y eta - H y)} a^(y, eta) b^(Y - y, H - eta) dfreq^2
    Mat T = Mat::Zero(nf, nf);
    const int c0 = static_cast<int>(std::lround(freq_half / dfreq));   // index of frequency 0
    for (int A = 0; A < nf; ++A)
        for (int B = 0; B < nf; ++B) {
            cplx acc = 0;
            for (int p = 0; p < nf; ++p) {
                int cp = A - p + c0;
                if (cp < 0 || cp >= nf) continue;
                for (int q = 0; q < nf; ++q) {
                    int cq = B - q + c0;
                    if (cq < 0 || cq >= nf) continue;
                    double ph = pi * (F[A] * F[q] - F[B] * F[p]);
                    acc += std::polar(1.0, ph) * ah(p, q) * bh(cp, cq);
                }
            }
            T(A, B) = acc * dfreq * dfreq;
        }
    TwistedOracle r;
    auto block = [&](const Grid1d& g) {
        std::vector<int> idx;
        int start = static_cast<int>(std::lround((-out_half - g.x(0)) / g.h()));
        int stride = std::max(1, static_cast<int>(std::lround(2 * out_half / n_out / g.h())));
        for (int k = 0; k < n_out; ++k)
            if (start + k * stride >= 0 && start + k * stride < g.N) idx.push_back(start + k * stride);
        return idx;
    };
    // coarse grids get a smaller block
    r.ix = block(gx);
    r.im = block(gxi);
    const int nx = static_cast<int>(r.ix.size()), nm = static_cast<int>(r.im.size());
    Mat Px(nx, nf), Pxi(nm, nf);
    for (int j = 0; j < nf; ++j) {
        for (int k = 0; k < nx; ++k) Px(k, j) = std::exp(2.0 * pi * I * gx.x(r.ix[k]) * F[j]) * dfreq;
        for (int k = 0; k < nm; ++k) Pxi(k, j) = std::exp(2.0 * pi * I * gxi.x(r.im[k]) * F[j]) * dfreq;
    }
    r.oracle = Px * T * Pxi.transpose();
    SymbolGrid prim = moyal_product(a, b, o);
    r.primary.resize(nx, nm);
    for (int k = 0; k < nx; ++k)
        for (int l = 0; l < nm; ++l) r.primary(k, l) = prim.values(r.ix[k], r.im[l]);
    r.rel_err = max_abs(r.primary - r.oracle) / max_abs(r.oracle);
    return r;
}

} // namespace tslice
