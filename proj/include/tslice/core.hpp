#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tslice {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// errors raised by the library, tagged so callers (and the CLI) can tell them apart
struct Error : std::runtime_error {
    std::string kind;
    Error(std::string k, const std::string& what) : std::runtime_error(what), kind(std::move(k)) {}
};

// warnings are collected rather than printed, unless the caller passes nothing
using Warnings = std::vector<std::string>;

inline void warn(Warnings* w, const std::string& msg)
{
    if (w) w->push_back(msg);
    else std::cerr << "warning: " << msg << "\n";
}

// uniform periodic grid on [-L/2, L/2)
struct Grid1d {
    int N = 256;
    double L = 16.0;

    Grid1d() = default;
    Grid1d(int n, double l) : N(n), L(l)
    {
        if (n < 8 || (n & (n - 1)) != 0) throw Error("grid", "N must be a power of two >= 8");
        if (!(l > 0)) throw Error("grid", "L must be positive");
    }

    double h() const { return L / N; }
    double x(int j) const { return -0.5 * L + j * h(); }
    // centred frequency sample, xi_k = (k - N/2)/L
    double xi(int k) const { return (k - N / 2) / L; }
    double nyquist() const { return 0.5 * N / L; }
    // grid carrying the frequency samples
    Grid1d dual() const { return Grid1d(N, N / L); }

    RVec points() const
    {
        RVec p(N);
        for (int j = 0; j < N; ++j) p[j] = x(j);
        return p;
    }

    bool operator==(const Grid1d& o) const { return N == o.N && std::abs(L - o.L) < 1e-12 * L; }
};

struct GridFunction {
    Grid1d grid;
    Vec values;

    GridFunction() = default;
    GridFunction(const Grid1d& g) : grid(g), values(Vec::Zero(g.N)) {}
    GridFunction(const Grid1d& g, Vec v) : grid(g), values(std::move(v))
    {
        if (values.size() != g.N) throw Error("grid", "value count differs from N");
    }

    template <class F>
    static GridFunction sample(const Grid1d& g, F&& f)
    {
        GridFunction u(g);
        for (int j = 0; j < g.N; ++j) u.values[j] = f(g.x(j));
        return u;
    }

    double norm() const { return std::sqrt(values.squaredNorm() * grid.h()); }
};

using Evaluator = std::function<cplx(double, double)>;

// sampled phase-space function; rows follow grid_x, columns grid_xi
struct SymbolGrid {
    Grid1d gx, gxi;
    Mat values;
    Evaluator eval;   // empty when only samples are known

    SymbolGrid() = default;
    SymbolGrid(const Grid1d& a, const Grid1d& b) : gx(a), gxi(b), values(Mat::Zero(a.N, b.N)) {}

    bool has_eval() const { return static_cast<bool>(eval); }

    cplx operator()(int i, int m) const { return values(i, m); }

    template <class F>
    static SymbolGrid sample(const Grid1d& a, const Grid1d& b, F&& f)
    {
        SymbolGrid s(a, b);
        for (int m = 0; m < b.N; ++m)
            for (int i = 0; i < a.N; ++i) s.values(i, m) = f(a.x(i), b.x(m));
        s.eval = f;
        return s;
    }

    // phase-space symbol on the standard (x, xi) grid pair
    template <class F>
    static SymbolGrid phase_space(const Grid1d& g, F&& f)
    {
        return sample(g, g.dual(), std::forward<F>(f));
    }

    static SymbolGrid constant(const Grid1d& g, cplx c)
    {
        return phase_space(g, [c](double, double) { return c; });
    }

    SymbolGrid without_eval() const
    {
        SymbolGrid s = *this;
        s.eval = nullptr;
        return s;
    }

    bool same_grid(const SymbolGrid& o) const { return gx == o.gx && gxi == o.gxi; }
};

inline SymbolGrid operator-(const SymbolGrid& a, const SymbolGrid& b)
{
    if (!a.same_grid(b)) throw Error("grid-mismatch", "symbol grids differ");
    SymbolGrid r(a.gx, a.gxi);
    r.values = a.values - b.values;
    if (a.has_eval() && b.has_eval()) {
        auto fa = a.eval, fb = b.eval;
        r.eval = [fa, fb](double x, double y) { return fa(x, y) - fb(x, y); };
    }
    return r;
}

inline SymbolGrid operator+(const SymbolGrid& a, const SymbolGrid& b)
{
    if (!a.same_grid(b)) throw Error("grid-mismatch", "symbol grids differ");
    SymbolGrid r(a.gx, a.gxi);
    r.values = a.values + b.values;
    if (a.has_eval() && b.has_eval()) {
        auto fa = a.eval, fb = b.eval;
        r.eval = [fa, fb](double x, double y) { return fa(x, y) + fb(x, y); };
    }
    return r;
}

inline SymbolGrid operator*(cplx c, const SymbolGrid& a)
{
    SymbolGrid r = a;
    r.values *= c;
    if (a.has_eval()) {
        auto fa = a.eval;
        r.eval = [fa, c](double x, double y) { return c * fa(x, y); };
    }
    return r;
}

// pointwise product
inline SymbolGrid pointwise(const SymbolGrid& a, const SymbolGrid& b)
{
    if (!a.same_grid(b)) throw Error("grid-mismatch", "symbol grids differ");
    SymbolGrid r(a.gx, a.gxi);
    r.values = a.values.cwiseProduct(b.values);
    if (a.has_eval() && b.has_eval()) {
        auto fa = a.eval, fb = b.eval;
        r.eval = [fa, fb](double x, double y) { return fa(x, y) * fb(x, y); };
    }
    return r;
}

// Kernel samples K(x_j, y_k). Applying the operator is K f h; products of two
// operators carry one factor h (see compose).
struct OperatorMatrix {
    Grid1d grid;
    Mat K;

    OperatorMatrix() = default;
    OperatorMatrix(const Grid1d& g) : grid(g), K(Mat::Zero(g.N, g.N)) {}
    OperatorMatrix(const Grid1d& g, Mat k) : grid(g), K(std::move(k)) {}

    static OperatorMatrix identity(const Grid1d& g)
    {
        return OperatorMatrix(g, Mat::Identity(g.N, g.N) / g.h());
    }

    // the matrix acting on sample vectors
    Mat matrix() const { return K * grid.h(); }
    static OperatorMatrix from_matrix(const Grid1d& g, const Mat& m) { return OperatorMatrix(g, m / g.h()); }

    GridFunction apply(const GridFunction& f) const
    {
        return GridFunction(grid, K * f.values * grid.h());
    }
};

inline OperatorMatrix compose(const OperatorMatrix& a, const OperatorMatrix& b)
{
    if (!(a.grid == b.grid)) throw Error("grid-mismatch", "operator grids differ");
    OperatorMatrix r(a.grid);
    r.K.noalias() = a.K * b.K;
    r.K *= a.grid.h();
    return r;
}

inline OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b)
{
    return OperatorMatrix(a.grid, a.K - b.K);
}

inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b)
{
    return OperatorMatrix(a.grid, a.K + b.K);
}

inline OperatorMatrix operator*(cplx c, const OperatorMatrix& a) { return OperatorMatrix(a.grid, c * a.K); }

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace tslice
