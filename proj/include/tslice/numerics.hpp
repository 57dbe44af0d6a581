#pragma once

#include "core.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <random>

namespace tslice {

// Gauss-Legendre rule on [-1, 1], Newton iteration on P_n
struct GaussLegendre {
    std::vector<double> x, w;

    explicit GaussLegendre(int n)
    {
        x.resize(n);
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                if (n == 1) { p1 = z; p0 = 1.0; }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[n - 1 - i] = z;
            w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

struct QuadNode {
    double t, w;
};

// composite rule: equal panels no wider than max_panel, `order` nodes each
inline std::vector<QuadNode> composite_gl(double a, double b, int order, double max_panel)
{
    std::vector<QuadNode> out;
    if (!(b > a)) return out;
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel - 1e-12)));
    GaussLegendre gl(order);
    double H = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * H;
        for (int i = 0; i < order; ++i) out.push_back({c + 0.5 * H * gl.x[i], 0.5 * H * gl.w[i]});
    }
    return out;
}

// Lagrange weights for the stencil offsets lo..lo+p-1 evaluated at offset s
inline std::vector<double> lagrange_weights(int lo, int p, double s)
{
    std::vector<double> w(p, 1.0);
    for (int a = 0; a < p; ++a) {
        double xa = lo + a;
        for (int b = 0; b < p; ++b) {
            if (b == a) continue;
            w[a] *= (s - (lo + b)) / (xa - (lo + b));
        }
    }
    return w;
}

inline int wrap(int i, int n)
{
    int r = i % n;
    return r < 0 ? r + n : r;
}

// C-infinity step: 0 for t<=0, 1 for t>=1
inline double smoothstep(double t)
{
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

// Periodic local interpolation of a sampled function of two variables at
// fractional index positions (u along rows, v along columns).
class Interp2 {
public:
    Interp2(const Mat& values, int order = 12) : v_(values), p_(order) {}

    cplx at(double u, double v) const
    {
        int nr = static_cast<int>(v_.rows()), nc = static_cast<int>(v_.cols());
        int iu = static_cast<int>(std::floor(u)), iv = static_cast<int>(std::floor(v));
        double fu = u - iu, fv = v - iv;
        int lo = -(p_ / 2 - 1);
        bool exact_u = std::abs(fu) < 1e-13, exact_v = std::abs(fv) < 1e-13;
        std::vector<double> wu = exact_u ? std::vector<double>{1.0} : lagrange_weights(lo, p_, fu);
        std::vector<double> wv = exact_v ? std::vector<double>{1.0} : lagrange_weights(lo, p_, fv);
        int ou = exact_u ? 0 : lo, ov = exact_v ? 0 : lo;
        cplx acc = 0;
        for (std::size_t b = 0; b < wv.size(); ++b) {
            int c = wrap(iv + ov + static_cast<int>(b), nc);
            cplx row = 0;
            for (std::size_t a = 0; a < wu.size(); ++a) row += wu[a] * v_(wrap(iu + ou + static_cast<int>(a), nr), c);
            acc += wv[b] * row;
        }
        return acc;
    }

private:
    const Mat& v_;
    int p_;
};

// top singular value; power iteration on M^H M with dense SVD fallback
inline double top_singular_value(const Mat& M, double rtol = 1e-8, int max_iter = 500, bool* fell_back = nullptr)
{
    if (fell_back) *fell_back = false;
    if (M.size() == 0) return 0.0;
    if (M.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> nd;
    Vec v(M.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(nd(rng), nd(rng));
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vec u = M * v;
        Vec w = M.adjoint() * u;
        double lam = std::sqrt(w.norm());
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        if (it > 3 && std::abs(lam - prev) <= rtol * lam) return (M * v).norm();
        prev = lam;
    }
    if (fell_back) *fell_back = true;
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()[0];
}

inline double dense_top_singular_value(const Mat& M)
{
    if (M.size() == 0) return 0.0;
    Eigen::BDCSVD<Mat> svd(M);
    return svd.singularValues()[0];
}

// least squares slope of log(err) against log(w)
struct SlopeFit {
    double slope = std::nan("");
    double constant = std::nan("");   // err ~ constant * w^slope
    int used = 0;
    bool ok() const { return used >= 2 && std::isfinite(slope); }
};

inline SlopeFit fit_slope(const std::vector<double>& w, const std::vector<double>& err, double floor = 0.0)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < w.size() && i < err.size(); ++i) {
        if (!(err[i] > 10.0 * floor) || !(w[i] > 0) || !std::isfinite(err[i])) continue;
        lx.push_back(std::log(w[i]));
        ly.push_back(std::log(err[i]));
    }
    SlopeFit f;
    f.used = static_cast<int>(lx.size());
    if (f.used < 2) return f;
    double mx = 0, my = 0;
    for (int i = 0; i < f.used; ++i) { mx += lx[i]; my += ly[i]; }
    mx /= f.used;
    my /= f.used;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < f.used; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.constant = std::exp(my - f.slope * mx);
    return f;
}

} // namespace tslice
