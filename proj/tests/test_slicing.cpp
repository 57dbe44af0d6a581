#include <gtest/gtest.h>

#include "common.hpp"
#include "tslice/slicing.hpp"
#include "tslice/transforms.hpp"

using namespace tslice;

namespace {

const Grid1d G(256, 16.0);

PotentialSpec cosine() { return make_potential("cosine"); }
PotentialSpec bump() { return make_potential("gaussian-bump"); }

// max |a - b| over |x|, |xi| <= R
double interior_diff(const SymbolGrid& a, const SymbolGrid& b, double R = 4.0)
{
    double e = 0;
    for (int m = 0; m < a.gxi.N; ++m)
        for (int i = 0; i < a.gx.N; ++i)
            if (std::abs(a.gx.x(i)) <= R && std::abs(a.gxi.x(m)) <= R) e = std::max(e, std::abs(a(i, m) - b(i, m)));
    return e;
}

double interior_diff(const SymbolGrid& a, const Evaluator& f, double R = 4.0)
{
    return interior_diff(a, SymbolGrid::phase_space(a.gx, f), R);
}

} // namespace

TEST(Subdivision, Basics)
{
    Subdivision u = Subdivision::uniform(0.0, 1.0, 4);
    EXPECT_EQ(u.L(), 4);
    EXPECT_DOUBLE_EQ(u.mesh(), 0.25);
    Subdivision r = Subdivision::random(0.0, 1.0, 8, 7);
    EXPECT_EQ(r.L(), 8);
    EXPECT_DOUBLE_EQ(r.t.back(), 1.0);
    double w = 0;
    for (int j = 1; j <= 8; ++j) w = std::max(w, r.t[j] - r.t[j - 1]);
    EXPECT_DOUBLE_EQ(r.mesh(), w);
    // same seed, same times
    EXPECT_EQ(Subdivision::random(0.0, 1.0, 8, 7).t, r.t);
    EXPECT_THROW(Subdivision({0.0, 0.5, 0.5}), Error);
    EXPECT_THROW(Subdivision({0.0}), Error);
}

TEST(Potential, Catalog)
{
    for (auto& id : potential_catalog()) {
        PotentialSpec p = make_potential(id);
        for (double x : {-3.0, 0.0, 1.7})
            for (double xi : {-2.0, 0.5}) {
                cplx v = p.sigma(0.3, x, xi);
                EXPECT_TRUE(std::isfinite(std::abs(v)));
                EXPECT_LE(std::abs(v), p.bound + 1e-15);
                if (p.self_adjoint) EXPECT_EQ(v.imag(), 0.0);
            }
    }
    EXPECT_FALSE(make_potential("complex-bump").self_adjoint);
    EXPECT_THROW(make_potential("nope"), Error);
}

TEST(BSymbol, Examples)
{
    PotentialSpec V = bump();
    SymbolGrid b = b_symbol(V, QuadraticForm::zero(), 0.4, 0.1, G);
    EXPECT_LT(interior_diff(b, [&](double x, double) { return V.V(x); }), 1e-15);

    b = b_symbol(V, QuadraticForm::free_particle(), 0.7, 0.2, G);
    EXPECT_LT(interior_diff(b, [&](double x, double xi) { return V.V(x + 0.5 * xi); }), 1e-13);

    b = b_symbol(V, QuadraticForm::harmonic(), pi / 2 + 0.1, 0.1, G);
    EXPECT_LT(interior_diff(b, [&](double, double xi) { return V.V(xi); }), 1e-13);
}

TEST(ESymbol, Examples)
{
    SymbolGrid e = e_symbol(make_potential("zero"), QuadraticForm::harmonic(), 0.5, 0.0, G);
    EXPECT_LT(interior_diff(e, [](double, double) { return cplx(1.0); }, 8.0), 1e-15);

    PotentialSpec V = bump();
    e = e_symbol(V, QuadraticForm::zero(), 0.8, 0.1, G);
    EXPECT_LT(interior_diff(e, [&](double x, double) { return std::exp(-2.0 * pi * I * 0.7 * V.V(x)); }), 1e-13);

    // free flow: the time integral of a cosine in closed form
    PotentialSpec C = cosine();
    double T = 0.6, w = C.omega;
    e = e_symbol(C, QuadraticForm::free_particle(), 0.6, 0.0, G);
    auto ref = [&](double x, double xi) {
        double I1 = std::abs(xi) < 1e-12 ? T * std::cos(2 * pi * w * x)
                                         : (std::sin(2 * pi * w * (x + T * xi)) - std::sin(2 * pi * w * x)) / (2 * pi * w * xi);
        return std::exp(-2.0 * pi * I * I1);
    };
    EXPECT_LT(interior_diff(e, ref), 1e-12);
    EXPECT_TRUE(e.has_eval());
    EXPECT_THROW(e_symbol(C, QuadraticForm::free_particle(), 0.0, 0.0, G), Error);
}

TEST(ASymbol, ZeroAndCommutative)
{
    SymbolGrid a = a_symbol_ode(make_potential("zero"), QuadraticForm::harmonic(), 0.5, 0.0, G);
    EXPECT_LT(interior_diff(a, [](double, double) { return cplx(1.0); }, 8.0), 1e-15);

    PotentialSpec V = bump();
    a = a_symbol_ode(V, QuadraticForm::zero(), 0.7, 0.2, G);
    EXPECT_LT(interior_diff(a, [&](double x, double) { return std::exp(-2.0 * pi * I * 0.5 * V.V(x)); }), 1e-8);
}

TEST(ASymbol, LinearDepartureFromOne)
{
    PotentialSpec C = cosine();
    auto one = [](double, double) { return cplx(1.0); };
    double e1 = interior_diff(a_symbol_ode(C, QuadraticForm::free_particle(), 0.02, 0.0, G), one);
    double e2 = interior_diff(a_symbol_ode(C, QuadraticForm::free_particle(), 0.01, 0.0, G), one);
    EXPECT_GT(e1 / e2, 1.8);
    EXPECT_LT(e1 / e2, 2.2);
}

TEST(ASymbol, PathMatchesSingleRuns)
{
    PotentialSpec C = cosine();
    auto path = a_operator_path(C, QuadraticForm::harmonic(), 0.0, {0.1, 0.25}, G);
    OperatorMatrix single = a_operator_ode(C, QuadraticForm::harmonic(), 0.25, 0.0, G);
    EXPECT_LT(max_abs(path[1].matrix() - single.matrix()), 1e-8);
}

TEST(Dyson, FirstOrderMatchesE)
{
    // both equal 1 - 2 pi i int b up to second order
    PotentialSpec C = cosine();
    QuadraticForm Q = QuadraticForm::free_particle();
    std::vector<double> d;
    for (double T : {0.1, 0.05}) {
        DysonResult r = a_operator_dyson(C, Q, T, 0.0, 1, G);
        d.push_back(interior_diff(kernel_to_symbol(r.A), e_symbol(C, Q, T, 0.0, G)));
    }
    EXPECT_GT(d[0] / d[1], 3.5);
    EXPECT_LT(d[0], 0.5);
}

TEST(Dyson, ZeroSpec)
{
    for (int n : {1, 3}) {
        DysonResult r = a_operator_dyson(make_potential("zero"), QuadraticForm::harmonic(), 0.5, 0.0, n, G);
        EXPECT_LT(max_abs(r.A.matrix() - Mat::Identity(G.N, G.N)), 1e-15);
    }
}

TEST(Dyson, AgreesWithOde)
{
    QuadraticForm Q = QuadraticForm::free_particle();
    // amplitude 1 needs more terms than 8: the series tail at t - s = 0.5 is ~0.1
    PotentialSpec C = cosine();
    SymbolGrid ode = a_symbol_ode(C, Q, 0.5, 0.0, G);
    DysonResult r = a_operator_dyson(C, Q, 0.5, 0.0, 20, G);
    EXPECT_LT(r.tail_bound, 1e-8);
    EXPECT_LT(interior_diff(kernel_to_symbol(r.A), ode, 8.0), 1e-6);

    PotentialParams p;
    p.v0 = 0.1;
    PotentialSpec c1 = make_potential("cosine", p);
    r = a_operator_dyson(c1, Q, 0.5, 0.0, 8, G);
    EXPECT_LT(r.tail_bound, 1e-7);
    EXPECT_LT(interior_diff(kernel_to_symbol(r.A), a_symbol_ode(c1, Q, 0.5, 0.0, G), 8.0), 1e-6);
}

TEST(Tilde, Examples)
{
    auto s = SymbolGrid::phase_space(G, [](double x, double xi) { return cplx(std::exp(-pi * (x * x + xi * xi)), 0); });
    EXPECT_EQ(max_abs(tilde_transform(s, QuadraticForm::harmonic(), 0.3, 0.3).values - s.values), 0.0);
    EXPECT_EQ(max_abs(tilde_transform(s, QuadraticForm::zero(), 0.8, 0.1).values - s.values), 0.0);
    SymbolGrid t = tilde_transform(s, QuadraticForm::free_particle(), 1.2, 0.2);
    EXPECT_LT(interior_diff(t, [](double x, double xi) { return cplx(std::exp(-pi * ((x + xi) * (x + xi) + xi * xi)), 0); }, 8.0), 1e-14);
    // sample-only path agrees with the closed form away from the edge
    SymbolGrid ti = tilde_transform(s.without_eval(), QuadraticForm::free_particle(), 1.2, 0.2);
    EXPECT_LT(interior_diff(ti, t, 3.0), 1e-8);
}

TEST(EOmega, Examples)
{
    PotentialSpec C = cosine();
    QuadraticForm H = QuadraticForm::harmonic();
    Subdivision one = Subdivision::uniform(0.0, 0.5, 1);
    EXPECT_LT(interior_diff(e_omega(C, H, one, G), e_symbol(C, H, 0.5, 0.0, G), 8.0), 1e-15);

    Subdivision W = Subdivision::random(0.0, 0.5, 5, 11);
    EXPECT_LT(interior_diff(e_omega(make_potential("zero"), H, W, G), [](double, double) { return cplx(1.0); }, 8.0), 1e-12);

    PotentialSpec V = bump();
    auto ref = [&](double x, double) { return std::exp(-2.0 * pi * I * 0.5 * V.V(x)); };
    for (int L : {1, 3, 8}) EXPECT_LT(interior_diff(e_omega(V, QuadraticForm::zero(), Subdivision::uniform(0.0, 0.5, L), G), ref), 1e-12);
    EXPECT_LT(interior_diff(e_omega(V, QuadraticForm::zero(), W, G), ref), 1e-12);
}

TEST(Propagators, ZeroPotential)
{
    QuadraticForm H = QuadraticForm::harmonic();
    MetaplecticOracle U0(H, G);
    for (int L : {1, 4}) {
        OperatorMatrix E = E_omega(make_potential("zero"), H, Subdivision::uniform(0.0, 0.8, L), U0);
        EXPECT_LE(operator_error(E, U0.at(0.8)), 1e-10);
    }
}

TEST(Propagators, CommutativeExactness)
{
    QuadraticForm Z = QuadraticForm::zero();
    MetaplecticOracle U0(Z, G);
    PotentialSpec V = bump();
    OperatorMatrix U = U_reference(V, Z, 1.0, 0.0, U0);
    for (auto W : {Subdivision::uniform(0.0, 1.0, 1), Subdivision::uniform(0.0, 1.0, 7), Subdivision::random(0.0, 1.0, 5, 3)})
        EXPECT_LE(operator_error(E_omega(V, Z, W, U0), U), 1e-8);
}

TEST(Propagators, UnitarityAndDirectPath)
{
    QuadraticForm H = QuadraticForm::harmonic();
    MetaplecticOracle U0(H, G);
    PotentialSpec C = cosine();
    OperatorMatrix U = U_reference(C, H, 0.5, 0.0, U0);
    GridFunction f = normalized_gaussian(G, 0.5, -0.3);
    EXPECT_NEAR(U.apply(f).norm(), 1.0, 1e-6);

    Mat P = probe_basis(G, 10);
    Mat d = direct_propagate(C, H, 0.5, 0.0, P, G);
    EXPECT_LE(top_singular_value(U.matrix() * P - d), 1e-6);

    // non-self-adjoint potentials are allowed and do not keep the norm
    PotentialSpec cb = make_potential("complex-bump");
    OperatorMatrix Uc = U_reference(cb, H, 0.5, 0.0, U0);
    EXPECT_GT(std::abs(Uc.apply(normalized_gaussian(G)).norm() - 1.0), 1e-3);
}

TEST(Propagators, AssemblyOrder)
{
    QuadraticForm H = QuadraticForm::harmonic();
    MetaplecticOracle U0(H, G);
    PotentialSpec C = cosine();
    Mat P = probe_basis(G, 10);
    Subdivision W = Subdivision::uniform(0.0, 1.0, 4);
    OperatorMatrix lhs = E_omega(C, H, W, U0);
    OperatorMatrix rhs = compose(U0.at(1.0), e_omega_operator(C, H, W, G));
    EXPECT_LE(projected_error(lhs, rhs, P), 1e-6);
}

TEST(Trotter, Examples)
{
    QuadraticForm H = QuadraticForm::harmonic();
    MetaplecticOracle U0(H, G);
    OperatorMatrix E = trotter(make_potential("zero"), H, 0.9, 0.0, 3, U0);
    OperatorMatrix ref = compose(U0.at(0.3), compose(U0.at(0.3), U0.at(0.3)));
    EXPECT_LE(operator_error(E, ref), 1e-10);

    QuadraticForm Z = QuadraticForm::zero();
    MetaplecticOracle I0(Z, G);
    PotentialSpec V = bump();
    OperatorMatrix Uz = U_reference(V, Z, 1.0, 0.0, I0);
    for (int n : {1, 5}) EXPECT_LE(operator_error(trotter(V, Z, 1.0, 0.0, n, I0), Uz), 1e-10);

    EXPECT_THROW(trotter(make_potential("phase-gaussian"), H, 1.0, 0.0, 2, U0), Error);
}

TEST(Trotter, ConvergesOnFreeCosine)
{
    QuadraticForm F = QuadraticForm::free_particle();
    MetaplecticOracle U0(F, G);
    PotentialSpec C = cosine();
    OperatorMatrix U = U_reference(C, F, 1.0, 0.0, U0);
    Mat P = probe_basis(G, 10);
    double prev = INFINITY;
    for (int n : {4, 8, 16}) {
        double e = restricted_error(trotter(C, F, 1.0, 0.0, n, U0), U, P);
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(OperatorError, Calibration)
{
    OperatorMatrix A = OperatorMatrix::identity(G);
    EXPECT_EQ(operator_error(A, A), 0.0);
    EXPECT_NEAR(operator_error(A, OperatorMatrix(G)), 1.0, 1e-12);

    Grid1d g64(64, 8.0);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    Mat M(64, 64);
    for (int j = 0; j < 64; ++j)
        for (int k = 0; k < 64; ++k) M(j, k) = cplx(nd(rng), nd(rng));
    double p = operator_error(OperatorMatrix::from_matrix(g64, M), OperatorMatrix(g64));
    double d = dense_top_singular_value(M);
    EXPECT_LE(std::abs(p - d) / d, 1e-6);
}

// ---- structural identities ----

TEST(Structure, CompositionLaw)
{
    // (a(t, tau) o S_{tau - s}) # a(tau, s) = a(t, s)
    EXPECT_LE(composition_law_residual(cosine(), QuadraticForm::harmonic(), 0.0, 0.25, 0.5, G), 1e-4);
}

TEST(Structure, TildeSemigroup)
{
    EXPECT_LE(tilde_semigroup_residual(cosine(), QuadraticForm::harmonic(), 0.0, 0.25, 0.5, 0.75, G), 1e-4);
}

TEST(Structure, SymbolGrowthBound)
{
    // ||a(t, s)|| <= ||1|| exp(K (t - s)) with K = 2 pi max ||b|| / ||1||
    QuadraticForm H = QuadraticForm::harmonic();
    PotentialSpec C = cosine();
    double one = sjostrand_norm(SymbolGrid::constant(G, 1.0));
    double bmax = 0;
    for (double tau : {0.0, 0.25, 0.5, 0.75, 1.0}) bmax = std::max(bmax, sjostrand_norm(b_symbol(C, H, tau, 0.0, G)));
    double K = 2 * pi * bmax / one;
    std::vector<double> ts = {0.125, 0.25, 0.5, 1.0};
    auto as = a_operator_path(C, H, 0.0, ts, G);
    for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_LE(sjostrand_norm(kernel_to_symbol(as[k])), one * std::exp(K * ts[k]));
}
