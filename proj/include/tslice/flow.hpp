#pragma once

#include "core.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>

namespace tslice {

// Q(x, xi) = 1/2 A xi.xi + B x.xi + 1/2 C x.x
struct QuadraticForm {
    int d = 1;
    RMat A, B, C;

    QuadraticForm() : A(RMat::Zero(1, 1)), B(RMat::Zero(1, 1)), C(RMat::Zero(1, 1)) {}

    QuadraticForm(RMat a, RMat b, RMat c, bool symmetrize = true) : A(std::move(a)), B(std::move(b)), C(std::move(c))
    {
        d = static_cast<int>(A.rows());
        if (A.cols() != d || B.rows() != d || B.cols() != d || C.rows() != d || C.cols() != d)
            throw Error("config", "quadratic form blocks must all be d x d");
        if (symmetrize) {
            A = 0.5 * (A + A.transpose()).eval();
            C = 0.5 * (C + C.transpose()).eval();
        }
    }

    static QuadraticForm scalar(double a, double b, double c)
    {
        RMat A(1, 1), B(1, 1), C(1, 1);
        A(0, 0) = a;
        B(0, 0) = b;
        C(0, 0) = c;
        return QuadraticForm(A, B, C);
    }

    static QuadraticForm zero() { return scalar(0, 0, 0); }
    static QuadraticForm free_particle() { return scalar(1, 0, 0); }
    static QuadraticForm harmonic() { return scalar(1, 0, 1); }

    bool is_zero() const { return A.isZero(0) && B.isZero(0) && C.isZero(0); }

    double eval(double x, double xi) const { return 0.5 * A(0, 0) * xi * xi + B(0, 0) * x * xi + 0.5 * C(0, 0) * x * x; }
};

inline RMat symplectic_J(int d)
{
    RMat J = RMat::Zero(2 * d, 2 * d);
    J.topRightCorner(d, d) = RMat::Identity(d, d);
    J.bottomLeftCorner(d, d) = -RMat::Identity(d, d);
    return J;
}

inline RMat hamilton_generator(const QuadraticForm& Q)
{
    int d = Q.d;
    RMat G(2 * d, 2 * d);
    G.topLeftCorner(d, d) = Q.B;
    G.topRightCorner(d, d) = Q.A;
    G.bottomLeftCorner(d, d) = -Q.C;
    G.bottomRightCorner(d, d) = -Q.B.transpose();
    return G;
}

// exp(M) by scaling and squaring with the degree 7 Pade approximant
inline RMat expm_pade7(const RMat& M)
{
    const int n = static_cast<int>(M.rows());
    static const double b[8] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
    double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    const double theta7 = 0.9504178996162932;
    if (norm1 > theta7) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta7))));
    RMat X = M / std::ldexp(1.0, s);
    RMat Id = RMat::Identity(n, n);
    RMat X2 = X * X, X4 = X2 * X2, X6 = X4 * X2;
    RMat U = X * (b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * Id);
    RMat V = b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * Id;
    RMat R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < s; ++k) R = (R * R).eval();
    return R;
}

struct SymplecticMatrix {
    RMat S;
    double tau = 0;

    int d() const { return static_cast<int>(S.rows() / 2); }
    RMat A() const { return S.topLeftCorner(d(), d()); }
    RMat B() const { return S.topRightCorner(d(), d()); }
    RMat C() const { return S.bottomLeftCorner(d(), d()); }
    RMat D() const { return S.bottomRightCorner(d(), d()); }

    // scalar blocks for d = 1
    double a() const { return S(0, 0); }
    double b() const { return S(0, 1); }
    double c() const { return S(1, 0); }
    double dd() const { return S(1, 1); }

    SymplecticMatrix inverse() const
    {
        // S^{-1} = -J S^T J
        RMat J = symplectic_J(d());
        return {-J * S.transpose() * J, -tau};
    }

    double symplectic_defect() const
    {
        RMat J = symplectic_J(d());
        return (S.transpose() * J * S - J).cwiseAbs().maxCoeff();
    }

    // (x, xi) -> S (x, xi) for d = 1
    std::pair<double, double> apply(double x, double xi) const
    {
        return {S(0, 0) * x + S(0, 1) * xi, S(1, 0) * x + S(1, 1) * xi};
    }
};

inline SymplecticMatrix flow_at(const QuadraticForm& Q, double tau)
{
    if (!std::isfinite(tau)) throw Error("domain", "flow time must be finite");
    return {expm_pade7(tau * hamilton_generator(Q)), tau};
}

struct ExceptionalTimeSet {
    std::vector<double> roots;
    bool degenerate = false;
    Warnings warnings;
};

inline double det_B(const QuadraticForm& Q, double tau) { return flow_at(Q, tau).B().determinant(); }

inline ExceptionalTimeSet exceptional_times(const QuadraticForm& Q, double t0, double t1, double tol = 1e-10,
                                            double step = 0)
{
    if (!(t0 < t1)) throw Error("domain", "exceptional_times needs t0 < t1");
    const double thresh = 1e-8;
    ExceptionalTimeSet out;
    if (step <= 0) step = (t1 - t0) / 1000.0;
    int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / step - 1e-9)));
    std::vector<double> ts(n + 1), fs(n + 1);
    bool all_zero = true;
    for (int i = 0; i <= n; ++i) {
        ts[i] = (i == n) ? t1 : t0 + i * (t1 - t0) / n;
        fs[i] = det_B(Q, ts[i]);
        if (std::abs(fs[i]) > thresh) all_zero = false;
    }
    if (all_zero) {
        out.degenerate = true;
        return out;
    }
    auto f = [&](double t) { return det_B(Q, t); };
    for (int i = 0; i < n; ++i) {
        double a = ts[i], b = ts[i + 1], fa = fs[i], fb = fs[i + 1];
        if (fa == 0.0) {
            if (out.roots.empty() || a - out.roots.back() > tol) out.roots.push_back(a);
            continue;
        }
        double fm = f(0.5 * (a + b));
        if ((fa < 0) != (fm < 0) && (fm < 0) != (fb < 0) && fb != 0.0)
            out.warnings.push_back("scan step near t=" + std::to_string(a) + " holds more than one sign change");
        if ((fa < 0) == (fb < 0) || fb == 0.0) continue;
        while (b - a > tol) {
            double m = 0.5 * (a + b), fmid = f(m);
            if (fmid == 0.0) { a = b = m; break; }
            if ((fmid < 0) == (fa < 0)) { a = m; fa = fmid; }
            else b = m;
        }
        double r = 0.5 * (a + b);
        if (std::abs(f(r)) <= thresh && (out.roots.empty() || r - out.roots.back() > tol)) out.roots.push_back(r);
    }
    if (fs[n] == 0.0 && (out.roots.empty() || t1 - out.roots.back() > tol)) out.roots.push_back(t1);
    return out;
}

inline double generating_function(const SymplecticMatrix& S, const RVec& x, const RVec& y)
{
    RMat B = S.B();
    if (std::abs(B.determinant()) <= 1e-8) throw Error("singular-block", "det B vanishes: exceptional time");
    auto lu = B.partialPivLu();
    RVec Bx = lu.solve(x);
    RMat BA = lu.solve(S.A());
    return 0.5 * (S.D() * Bx).dot(x) - Bx.dot(y) + 0.5 * (BA * y).dot(y);
}

inline double generating_function(const SymplecticMatrix& S, double x, double y)
{
    RVec X(1), Y(1);
    X[0] = x;
    Y[0] = y;
    return generating_function(S, X, Y);
}

inline double metaplectic_norm_factor(const SymplecticMatrix& S, double p)
{
    double e = std::abs(0.5 - (std::isinf(p) ? 0.0 : 1.0 / p));
    if (e == 0.0) return 1.0;
    Eigen::JacobiSVD<RMat> svd(S.S);
    RVec sv = svd.singularValues();
    double prod = 1.0;
    for (int i = 0; i < S.d(); ++i) prod *= sv[i];
    return std::pow(prod, e);
}

} // namespace tslice
