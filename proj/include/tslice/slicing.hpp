#pragma once

#include "core.hpp"
#include "flow.hpp"
#include "metaplectic.hpp"
#include "numerics.hpp"
#include "potential.hpp"
#include "transforms.hpp"
#include "weyl.hpp"

#include <random>

namespace tslice {

struct SliceOptions {
    int gl_order = 6;          // Gauss-Legendre nodes per panel for time integrals of b
    double max_panel = 0.5;    // composite rule beyond this length
    double ode_dt_max = 0.01;  // RK4 step ceiling
    double ode_tol = 1e-6;     // target global RK4 error, sets a finer step when needed
    double dyson_panel = 0.125;
    int dyson_order = 8;
    WeylOptions weyl{};
};

struct Subdivision {
    std::vector<double> t;

    Subdivision() = default;
    explicit Subdivision(std::vector<double> times) : t(std::move(times))
    {
        if (t.size() < 2) throw Error("subdivision", "need at least two time points");
        for (std::size_t j = 1; j < t.size(); ++j)
            if (!(t[j] > t[j - 1])) throw Error("subdivision", "times must be strictly increasing");
    }

    static Subdivision uniform(double s, double e, int L)
    {
        if (L < 1) throw Error("subdivision", "L must be >= 1");
        std::vector<double> t(L + 1);
        for (int j = 0; j <= L; ++j) t[j] = s + (e - s) * j / L;
        t[L] = e;
        return Subdivision(t);
    }

    // gaps drawn uniformly in [1, 2] then normalized to the interval
    static Subdivision random(double s, double e, int L, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(1.0, 2.0);
        std::vector<double> gaps(L);
        double tot = 0;
        for (auto& g : gaps) tot += (g = u(rng));
        std::vector<double> t(L + 1, s);
        for (int j = 0; j < L; ++j) t[j + 1] = t[j] + (e - s) * gaps[j] / tot;
        t[L] = e;
        return Subdivision(t);
    }

    int L() const { return static_cast<int>(t.size()) - 1; }
    double mesh() const
    {
        double w = 0;
        for (std::size_t j = 1; j < t.size(); ++j) w = std::max(w, t[j] - t[j - 1]);
        return w;
    }
};

inline Mat2 flow2(const QuadraticForm& Q, double tau)
{
    SymplecticMatrix S = flow_at(Q, tau);
    Mat2 M;
    M << S.a(), S.b(), S.c(), S.dd();
    return M;
}

// b(tau, s) = sigma_tau o S_{tau - s}
inline SymbolGrid b_symbol(const PotentialSpec& spec, const QuadraticForm& Q, double tau, double s, const Grid1d& g)
{
    Mat2 M = flow2(Q, tau - s);
    auto sig = spec.sigma;
    double a = M(0, 0), b = M(0, 1), c = M(1, 0), d = M(1, 1);
    return SymbolGrid::phase_space(g, [=](double x, double xi) { return sig(tau, a * x + b * xi, c * x + d * xi); });
}

namespace detail {

// z -> -2 pi i int_{t0}^{t1} sigma_tau(S_{tau - base} z) dtau, by composite Gauss-Legendre
struct PhaseIntegral {
    std::vector<double> w, tau;
    std::vector<Mat2> S;
    std::function<cplx(double, double, double)> sig;

    PhaseIntegral(const PotentialSpec& spec, const QuadraticForm& Q, double t0, double t1, double base, const SliceOptions& o)
        : sig(spec.sigma)
    {
        for (auto& n : composite_gl(t0, t1, o.gl_order, o.max_panel)) {
            w.push_back(n.w);
            tau.push_back(n.t);
            S.push_back(flow2(Q, n.t - base));
        }
    }

    cplx operator()(double x, double xi) const
    {
        cplx acc = 0;
        for (std::size_t q = 0; q < w.size(); ++q)
            acc += w[q] * sig(tau[q], S[q](0, 0) * x + S[q](0, 1) * xi, S[q](1, 0) * x + S[q](1, 1) * xi);
        return std::exp(-2.0 * pi * I * acc);
    }
};

} // namespace detail

// e(t, s) = exp(-2 pi i int_s^t b(tau, s) dtau)
inline SymbolGrid e_symbol(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s, const Grid1d& g,
                           const SliceOptions& o = {})
{
    if (!(t > s)) throw Error("domain", "e_symbol needs t > s");
    detail::PhaseIntegral f(spec, Q, s, t, s, o);
    return SymbolGrid::phase_space(g, f);
}

// sigma o S_{t_j - t_0}
inline SymbolGrid tilde_transform(const SymbolGrid& s, const QuadraticForm& Q, double tj, double t0)
{
    if (tj == t0 || Q.is_zero()) return s;
    return compose_linear(s, flow2(Q, tj - t0));
}

// the slice symbol e(t_{j+1}, t_j) already transported by S_{t_j - t_0}
inline SymbolGrid e_tilde(const PotentialSpec& spec, const QuadraticForm& Q, double t1, double t0, double base,
                          const Grid1d& g, const SliceOptions& o = {})
{
    detail::PhaseIntegral f(spec, Q, t0, t1, base, o);
    return SymbolGrid::phase_space(g, f);
}

// z lattice for norms of differences of computed symbols: patches of half width 3
// around |x|, |xi| <= 3L/16 stay clear of the xi taper and of samples that a
// flow pulled in across the periodic edge
inline SjostrandOptions trusted_options(const Grid1d& g)
{
    SjostrandOptions o;
    o.region_x = o.region_xi = 3.0 * g.L / 16.0;
    return o;
}

// ---- Dyson symbol a(t, s) ----

inline int rk4_steps(const PotentialSpec& spec, double span, const SliceOptions& o)
{
    double dt = o.ode_dt_max;
    double B = 2 * pi * spec.bound;
    if (B > 0 && o.ode_tol > 0) dt = std::min(dt, std::pow(120.0 * o.ode_tol / (span * std::pow(B, 5)), 0.25));
    return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
}

// a(t, s)^w from d/dt A = -2 pi i b(t, s)^w A, A(s) = identity, returned at each
// of the increasing times ts. Each stage is the Moyal product b # a carried out on
// the quantized side (the symbol of A is kernel_to_symbol(A)).
inline std::vector<OperatorMatrix> a_operator_path(const PotentialSpec& spec, const QuadraticForm& Q, double s,
                                                   const std::vector<double>& ts, const Grid1d& g,
                                                   const SliceOptions& o = {})
{
    for (std::size_t k = 0; k < ts.size(); ++k)
        if (!(ts[k] > (k ? ts[k - 1] : s))) throw Error("domain", "a_symbol_ode needs increasing times t > s");
    const int N = g.N;
    const double h = g.h();
    const cplx c = -2.0 * pi * I;
    std::vector<OperatorMatrix> out;
    if (spec.is_zero()) {
        for (std::size_t k = 0; k < ts.size(); ++k) out.push_back(OperatorMatrix::identity(g));
        return out;
    }

    if (Q.is_zero() && spec.x_only) {
        // every b is the same multiplication up to time: the equation is solved pointwise
        RVec x = g.points();
        Vec acc = Vec::Zero(N);
        double t0 = s;
        for (double t1 : ts) {
            for (auto& q : composite_gl(t0, t1, o.gl_order, o.max_panel))
                for (int j = 0; j < N; ++j) acc[j] += q.w * spec.sigma(q.t, x[j], 0.0);
            OperatorMatrix A(g);
            A.K.diagonal() = (c * acc).array().exp().matrix() / h;
            out.push_back(A);
            t0 = t1;
        }
        return out;
    }

    const bool frozen = Q.is_zero() && !spec.time_dependent;
    auto W = [&](double tau) { return weyl_quantize(b_symbol(spec, Q, tau, s, g), o.weyl).matrix(); };
    // matrices acting on samples: A_m = A h
    Mat Am = Mat::Identity(N, N);
    Mat W0 = W(s), Wm, W1;
    if (frozen) Wm = W1 = W0;
    Mat k1(N, N), k2(N, N), k3(N, N), k4(N, N);
    double t0 = s;
    for (double t1 : ts) {
        const int steps = rk4_steps(spec, t1 - t0, o);
        const double dt = (t1 - t0) / steps;
        for (int n = 0; n < steps; ++n) {
            double ta = t0 + n * dt;
            if (!frozen) {
                Wm = W(ta + 0.5 * dt);
                W1 = W(n + 1 == steps ? t1 : ta + dt);
            }
            k1.noalias() = W0 * Am;
            k1 *= c;
            k2.noalias() = Wm * (Am + 0.5 * dt * k1);
            k2 *= c;
            k3.noalias() = Wm * (Am + 0.5 * dt * k2);
            k3 *= c;
            k4.noalias() = W1 * (Am + dt * k3);
            k4 *= c;
            Am += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!frozen) W0.swap(W1);
        }
        out.push_back(OperatorMatrix::from_matrix(g, Am));
        t0 = t1;
    }
    return out;
}

inline OperatorMatrix a_operator_ode(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s,
                                     const Grid1d& g, const SliceOptions& o = {})
{
    return a_operator_path(spec, Q, s, {t}, g, o).front();
}

inline SymbolGrid a_symbol_ode(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s, const Grid1d& g,
                               const SliceOptions& o = {})
{
    return kernel_to_symbol(a_operator_ode(spec, Q, t, s, g, o), o.weyl);
}

struct DysonResult {
    OperatorMatrix A;
    double C1 = 0;          // 2 pi max |b|
    double tail_bound = 0;  // sum_{n > n_max} (C1 (t-s))^n / n!
};

// truncated series 1 + sum (-2 pi i)^n alpha_n with
// alpha_n(t) = int_s^t b(t1, s) # alpha_{n-1}(t1) dt1, every level on the same composite nodes
inline DysonResult a_operator_dyson(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s, int n_max,
                                    const Grid1d& g, const SliceOptions& o = {})
{
    if (n_max < 1) throw Error("domain", "n_max must be >= 1");
    if (!(t > s)) throw Error("domain", "a_symbol_dyson needs t > s");
    const int N = g.N;
    DysonResult r;
    r.C1 = 2 * pi * spec.bound;
    {
        double x = r.C1 * (t - s), term = 1, partial = 1;
        for (int n = 1; n <= n_max; ++n) partial += (term *= x / n);
        r.tail_bound = std::max(0.0, std::exp(x) - partial);
    }
    if (spec.is_zero()) {
        r.A = OperatorMatrix::identity(g);
        return r;
    }
    const int p = o.dyson_order;
    const int panels = std::max(1, static_cast<int>(std::ceil((t - s) / o.dyson_panel - 1e-9)));
    const double H = (t - s) / panels;
    GaussLegendre gl(p);
    // cumulative weights: int_{-1}^{x_i} l_k(u) du on the reference panel
    RMat cum(p, p);
    {
        GaussLegendre sub(p);
        for (int i = 0; i < p; ++i) {
            double a = -1, b = gl.x[i];
            for (int k = 0; k < p; ++k) {
                double acc = 0;
                for (int q = 0; q < p; ++q) {
                    double u = 0.5 * (a + b) + 0.5 * (b - a) * sub.x[q];
                    double l = 1;
                    for (int m = 0; m < p; ++m)
                        if (m != k) l *= (u - gl.x[m]) / (gl.x[k] - gl.x[m]);
                    acc += 0.5 * (b - a) * sub.w[q] * l;
                }
                cum(i, k) = acc;
            }
        }
    }
    std::vector<double> nodes;
    for (int pn = 0; pn < panels; ++pn)
        for (int i = 0; i < p; ++i) nodes.push_back(s + (pn + 0.5) * H + 0.5 * H * gl.x[i]);
    std::vector<Mat> Wn;
    for (double tau : nodes) Wn.push_back(weyl_quantize(b_symbol(spec, Q, tau, s, g), o.weyl).matrix());

    // matrices acting on samples; alpha_0 = identity at every node
    std::vector<Mat> prev(nodes.size(), Mat::Identity(N, N)), cur(nodes.size());
    Mat total = Mat::Identity(N, N);
    cplx coef = 1;
    for (int n = 1; n <= n_max; ++n) {
        std::vector<Mat> f(nodes.size());
        for (std::size_t q = 0; q < nodes.size(); ++q) f[q].noalias() = Wn[q] * prev[q];
        Mat start = Mat::Zero(N, N);
        for (int pn = 0; pn < panels; ++pn) {
            for (int i = 0; i < p; ++i) {
                Mat acc = start;
                for (int k = 0; k < p; ++k) acc += (0.5 * H * cum(i, k)) * f[pn * p + k];
                cur[pn * p + i] = std::move(acc);
            }
            for (int k = 0; k < p; ++k) start += (0.5 * H * gl.w[k]) * f[pn * p + k];
        }
        coef *= -2.0 * pi * I;
        total += coef * start;
        prev.swap(cur);
    }
    r.A = OperatorMatrix::from_matrix(g, total);
    return r;
}

// ---- propagators ----

// U0(t - s) e(t, s)^w
inline OperatorMatrix E_slice(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s,
                              const MetaplecticOracle& U0, const SliceOptions& o = {})
{
    const Grid1d& g = U0.grid();
    return compose(U0.at(t - s), weyl_quantize(e_symbol(spec, Q, t, s, g, o), o.weyl));
}

// E(t_L, t_{L-1}) ... E(t_1, t_0)
inline OperatorMatrix E_omega(const PotentialSpec& spec, const QuadraticForm& Q, const Subdivision& W,
                              const MetaplecticOracle& U0, const SliceOptions& o = {})
{
    OperatorMatrix E = E_slice(spec, Q, W.t[1], W.t[0], U0, o);
    for (int j = 1; j < W.L(); ++j) E = compose(E_slice(spec, Q, W.t[j + 1], W.t[j], U0, o), E);
    return E;
}

// e(Omega)^w = e~_L^w ... e~_1^w, the Moyal fold carried out on the quantized side
inline OperatorMatrix e_omega_operator(const PotentialSpec& spec, const QuadraticForm& Q, const Subdivision& W,
                                       const Grid1d& g, const SliceOptions& o = {})
{
    const double t0 = W.t[0];
    OperatorMatrix P = weyl_quantize(e_tilde(spec, Q, W.t[1], W.t[0], t0, g, o), o.weyl);
    for (int j = 1; j < W.L(); ++j)
        P = compose(weyl_quantize(e_tilde(spec, Q, W.t[j + 1], W.t[j], t0, g, o), o.weyl), P);
    return P;
}

inline SymbolGrid e_omega(const PotentialSpec& spec, const QuadraticForm& Q, const Subdivision& W, const Grid1d& g,
                          const SliceOptions& o = {})
{
    if (W.L() == 1) return e_symbol(spec, Q, W.t[1], W.t[0], g, o);
    return kernel_to_symbol(e_omega_operator(spec, Q, W, g, o), o.weyl);
}

// U0(t - s) a(t, s)^w
inline OperatorMatrix U_reference(const OperatorMatrix& A, double t, double s, const MetaplecticOracle& U0)
{
    return compose(U0.at(t - s), A);
}

inline OperatorMatrix U_reference(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s,
                                  const MetaplecticOracle& U0, const SliceOptions& o = {})
{
    return U_reference(a_operator_ode(spec, Q, t, s, U0.grid(), o), t, s, U0);
}

// Independent path: i d/dt psi = 2 pi (H0 + V(t)) psi integrated directly with
// RK4 for the columns of P (samples, l2-normalized). Returns U(t, s) P.
inline Mat direct_propagate(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s, const Mat& P,
                            const Grid1d& g, double dt_max = 1e-3, const WeylOptions& wo = {})
{
    Mat H0 = quadratic_hamiltonian(Q, g);
    const int steps = std::max(1, static_cast<int>(std::ceil((t - s) / dt_max - 1e-9)));
    const double dt = (t - s) / steps;
    const cplx c = -2.0 * pi * I;
    Mat Vfix;
    RVec x = g.points();
    if (!spec.time_dependent || spec.separable) {
        if (spec.x_only) {
            Vfix = Mat::Zero(g.N, g.N);
            for (int j = 0; j < g.N; ++j) Vfix(j, j) = spec.separable ? spec.V(x[j]) : spec.sigma(0.0, x[j], 0.0);
        } else {
            Vfix = weyl_quantize(SymbolGrid::phase_space(g, [&](double a, double b) { return spec.sigma(0.0, a, b); }), wo).matrix();
        }
    }
    auto Hm = [&](double tau) -> Mat {
        if (Vfix.size()) return H0 + (spec.separable ? spec.g(tau) : 1.0) * Vfix;
        return H0 + weyl_quantize(SymbolGrid::phase_space(g, [&](double a, double b) { return spec.sigma(tau, a, b); }), wo).matrix();
    };
    Mat psi = P;
    for (int n = 0; n < steps; ++n) {
        double t0 = s + n * dt;
        Mat Ha = Hm(t0), Hb = Hm(t0 + 0.5 * dt), Hc = Hm(t0 + dt);
        Mat k1 = c * (Ha * psi);
        Mat k2 = c * (Hb * (psi + 0.5 * dt * k1));
        Mat k3 = c * (Hb * (psi + 0.5 * dt * k2));
        Mat k4 = c * (Hc * (psi + dt * k3));
        psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi;
}

// (U0(Delta) e^{-2 pi i Delta V})^n; time-dependent g is integrated over each step
inline OperatorMatrix trotter(const PotentialSpec& spec, const QuadraticForm& Q, double t, double s, int n,
                              const MetaplecticOracle& U0, const SliceOptions& o = {})
{
    if (!spec.separable || !spec.x_only) throw Error("non-multiplicative-potential", "trotter needs an x-only potential");
    if (n < 1) throw Error("domain", "trotter needs n >= 1");
    const Grid1d& g = U0.grid();
    const double dt = (t - s) / n;
    Mat u = U0.matrix(dt);
    RVec x = g.points();
    Mat E = Mat::Identity(g.N, g.N);
    for (int k = 0; k < n; ++k) {
        double G = 0;
        for (auto& q : composite_gl(s + k * dt, s + (k + 1) * dt, o.gl_order, o.max_panel)) G += q.w * spec.g(q.t);
        Vec ph(g.N);
        for (int j = 0; j < g.N; ++j) ph[j] = std::exp(-2.0 * pi * I * G * spec.V(x[j]));
        E = u * ph.asDiagonal() * E;
    }
    return OperatorMatrix::from_matrix(g, E);
}

// ---- structural identities ----

// ||(a(t, tau) o S_{tau - s}) # a(tau, s) - a(t, s)|| on the trusted lattice
inline double composition_law_residual(const PotentialSpec& spec, const QuadraticForm& Q, double s, double tau, double t,
                                       const Grid1d& g, const SliceOptions& o = {})
{
    auto ats = a_operator_path(spec, Q, s, {tau, t}, g, o);
    SymbolGrid moved = tilde_transform(a_symbol_ode(spec, Q, t, tau, g, o), Q, tau, s);
    SymbolGrid lhs = kernel_to_symbol(compose(weyl_quantize(moved, o.weyl), ats[0]), o.weyl);
    return sjostrand_norm(lhs - kernel_to_symbol(ats[1], o.weyl), trusted_options(g));
}

// ||a~(t3, t2) # a~(t2, t1) - a~(t3, t1)|| with a~(t, s) = a(t, s) o S_{s - t0};
// t1 > t0 so every factor is transported
inline double tilde_semigroup_residual(const PotentialSpec& spec, const QuadraticForm& Q, double t0, double t1, double t2,
                                       double t3, const Grid1d& g, const SliceOptions& o = {})
{
    auto from1 = a_operator_path(spec, Q, t1, {t2, t3}, g, o);
    SymbolGrid a21 = tilde_transform(kernel_to_symbol(from1[0], o.weyl), Q, t1, t0);
    SymbolGrid a31 = tilde_transform(kernel_to_symbol(from1[1], o.weyl), Q, t1, t0);
    SymbolGrid a32 = tilde_transform(a_symbol_ode(spec, Q, t3, t2, g, o), Q, t2, t0);
    SymbolGrid lhs = kernel_to_symbol(compose(weyl_quantize(a32, o.weyl), weyl_quantize(a21, o.weyl)), o.weyl);
    return sjostrand_norm(lhs - a31, trusted_options(g));
}

// top singular value of (A - B) h
inline double operator_error(const OperatorMatrix& A, const OperatorMatrix& B)
{
    if (!(A.grid == B.grid)) throw Error("grid-mismatch", "operator_error needs a common grid");
    return top_singular_value((A.K - B.K) * A.grid.h());
}

} // namespace tslice
