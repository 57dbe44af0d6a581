#include <gtest/gtest.h>

#include "tslice/transforms.hpp"
#include "common.hpp"

#include <random>

using namespace tslice;

namespace {

const Grid1d G(256, 16.0);

double gauss(double x) { return std::exp(-pi * x * x); }

} // namespace

TEST(Fourier, GaussianSelfDual)
{
    GridFunction f = GridFunction::sample(G, gauss);
    GridFunction fh = fourier(f);
    EXPECT_TRUE(fh.grid == G.dual());
    double err = 0;
    for (int k = 0; k < G.N; ++k) err = std::max(err, std::abs(fh.values[k] - gauss(G.xi(k))));
    EXPECT_LT(err, 1e-10);
}

TEST(Fourier, ZeroAndRoundTrip)
{
    EXPECT_EQ(fourier(GridFunction(G)).values.norm(), 0.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    GridFunction f(G);
    for (int j = 0; j < G.N; ++j) f.values[j] = cplx(nd(rng), nd(rng));
    GridFunction back = inverse_fourier(fourier(f));
    EXPECT_TRUE(back.grid == G);
    EXPECT_LT((back.values - f.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fourier, Reflection)
{
    GridFunction f = GridFunction::sample(G, [](double x) { return std::exp(-pi * (x - 0.7) * (x - 0.7)) * std::exp(2.0 * pi * I * 0.5 * x); });
    GridFunction ff = fourier(fourier(f));
    EXPECT_TRUE(ff.grid == G);
    double err = 0;
    for (int j = 0; j < G.N; ++j) err = std::max(err, std::abs(ff.values[j] - f.values[wrap(G.N - j, G.N)]));
    EXPECT_LT(err, 1e-10);
}

TEST(Stft, GaussianWindow)
{
    GridFunction g = normalized_gaussian(G);
    GaborField F = stft(g, g);
    double err = 0;
    for (int j = 0; j < G.N; ++j)
        for (int k = 0; k < G.N; ++k) {
            double x = G.x(j), xi = G.xi(k);
            err = std::max(err, std::abs(std::abs(F.values(j, k)) - std::exp(-pi * (x * x + xi * xi) / 2)));
        }
    EXPECT_LT(err, 1e-6);
    EXPECT_NEAR(std::abs(F.values(G.N / 2, G.N / 2)), 1.0, 1e-10);
    EXPECT_EQ(stft(GridFunction(G), g).values.norm(), 0.0);
    EXPECT_THROW(stft(g, GridFunction(G)), Error);
}

TEST(Stft, MoyalIdentityAndRefinement)
{
    auto rel = [](const Grid1d& gr) {
        GridFunction u = GridFunction::sample(gr, [](double x) { return std::exp(-pi * 0.7 * (x - 0.5) * (x - 0.5)) * std::exp(2.0 * pi * I * 1.3 * x) + 0.5 * std::exp(-pi * 2.0 * (x + 1) * (x + 1)); });
        GridFunction g = normalized_gaussian(gr);
        GaborField F = stft(u, g);
        double lhs = F.values.squaredNorm() * F.cell();
        double rhs = std::pow(u.norm() * g.norm(), 2);
        return std::abs(lhs - rhs) / rhs;
    };
    double r1 = rel(G), r2 = rel(Grid1d(512, 16.0));
    EXPECT_LE(r1, 1e-4);
    EXPECT_LE(r2, std::max(r1, 1e-13));
}

TEST(MpNorm, Examples)
{
    GridFunction g = normalized_gaussian(G);
    GridFunction u = GridFunction::sample(G, [](double x) { return std::exp(-pi * (x - 1) * (x - 1) / 2.0); });
    EXPECT_NEAR(mp_norm(u, g, 2.0) / u.norm(), 1.0, 1e-4);
    EXPECT_EQ(mp_norm(GridFunction(G), g, 1.0), 0.0);
    EXPECT_LE(mp_norm(u, g, INFINITY), mp_norm(u, g, 1.0));
}

TEST(Wigner, GaussianClosedForm)
{
    GridFunction f = normalized_gaussian(G);
    SymbolGrid W = wigner(f, f);
    double err = 0, im = 0;
    for (int i = 0; i < G.N; ++i)
        for (int m = 0; m < G.N; ++m) {
            double x = G.x(i), xi = G.xi(m);
            err = std::max(err, std::abs(W.values(i, m) - 2.0 * std::exp(-2 * pi * (x * x + xi * xi))));
            im = std::max(im, std::abs(W.values(i, m).imag()));
        }
    EXPECT_LT(err, 1e-6);
    EXPECT_LT(im, 1e-10);
}

TEST(Wigner, MarginalAndSymmetry)
{
    GridFunction f = GridFunction::sample(G, [](double x) { return std::exp(-pi * (x - 0.3) * (x - 0.3)) * std::exp(2.0 * pi * I * 0.8 * x); });
    GridFunction g = GridFunction::sample(G, [](double x) { return cplx(1.0, 0.5) * std::exp(-pi * 1.5 * (x + 0.4) * (x + 0.4)); });
    SymbolGrid W = wigner(f, f);
    double total = W.values.sum().real() * G.h() / G.L;
    EXPECT_NEAR(total, f.norm() * f.norm(), 1e-8);
    EXPECT_LT(W.values.imag().cwiseAbs().maxCoeff(), 1e-10);
    SymbolGrid Wfg = wigner(f, g), Wgf = wigner(g, f);
    EXPECT_LT((Wfg.values - Wgf.values.conjugate()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(wigner(GridFunction(G), g).values.norm(), 0.0);
}

TEST(Sjostrand, ConstantSymbol)
{
    SymbolGrid one = SymbolGrid::constant(G, 1.0);
    double n = sjostrand_norm(one);
    EXPECT_NEAR(n / std::sqrt(2.0), 1.0, 0.02);
    EXPECT_EQ(sjostrand_norm(SymbolGrid::constant(G, 0.0)), 0.0);
}

TEST(Sjostrand, Stft2)
{
    SjostrandOptions o;
    o.nodes = 8;
    SymbolGrid one = SymbolGrid::constant(G, 1.0);
    GaborField4 F = stft2(one, o);
    ASSERT_EQ(F.blocks.size(), 64u);
    // |V| = |Phi^(zeta)| independent of z
    double err = 0;
    for (auto& b : F.blocks)
        for (int p = 0; p < b.rows(); ++p)
            for (int q = 0; q < b.cols(); ++q) {
                double zx = (p - b.rows() / 2) * F.dzeta_x, zxi = (q - b.cols() / 2) * F.dzeta_xi;
                err = std::max(err, std::abs(std::abs(b(p, q)) - std::sqrt(2.0) * std::exp(-pi * (zx * zx + zxi * zxi))));
            }
    EXPECT_LT(err, 1e-6);

    // Gaussian symbol against the Gaussian window peaks at the origin
    SymbolGrid s = SymbolGrid::phase_space(G, [](double x, double xi) { return cplx(std::sqrt(2.0) * std::exp(-pi * (x * x + xi * xi)), 0); });
    o.nodes = 9;
    o.region_x = o.region_xi = 2.0;
    F = stft2(s, o);
    double best = -1;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < F.zx.size(); ++a)
        for (std::size_t b = 0; b < F.zxi.size(); ++b) {
            double v = F.at(a, b).cwiseAbs().maxCoeff();
            if (v > best) { best = v; ba = a; bb = b; }
        }
    EXPECT_NEAR(F.zx[ba], 0.0, 1e-12);
    EXPECT_NEAR(F.zxi[bb], 0.0, 1e-12);
    Mat& blk = F.at(ba, bb);
    Eigen::Index r, c;
    blk.cwiseAbs().maxCoeff(&r, &c);
    EXPECT_EQ(r, blk.rows() / 2);
    EXPECT_EQ(c, blk.cols() / 2);

    for (auto& b : stft2(SymbolGrid::constant(G, 0.0), o).blocks) EXPECT_EQ(b.norm(), 0.0);
}

TEST(Sjostrand, TriangleInequality)
{
    std::mt19937_64 rng(11);
    for (int k = 0; k < 4; ++k) {
        SymbolGrid a = testutil::gaussian_mixture(rng, G), b = testutil::gaussian_mixture(rng, G);
        EXPECT_LE(sjostrand_norm(a + b), sjostrand_norm(a) + sjostrand_norm(b) + 1e-12);
    }
}

TEST(Sjostrand, LinearChangeOfVariables)
{
    SymbolGrid s = SymbolGrid::phase_space(G, [](double x, double xi) { return cplx(std::exp(-pi * (x * x + xi * xi)), 0); });
    double base = sjostrand_norm(s);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    int tested = 0;
    while (tested < 6) {
        double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        if (std::abs(a * d - b * c) < 0.5) continue;
        auto f = [a, b, c, d](double x, double xi) {
            double X = a * x + b * xi, Y = c * x + d * xi;
            return cplx(std::exp(-pi * (X * X + Y * Y)), 0);
        };
        double r = sjostrand_norm(SymbolGrid::phase_space(G, f)) / base;
        EXPECT_LE(r, 10.0);
        EXPECT_GE(r, 0.1);
        ++tested;
    }
}

TEST(Sjostrand, PointwiseAlgebra)
{
    std::mt19937_64 rng(17);
    std::vector<SymbolGrid> set;
    for (int k = 0; k < 20; ++k) set.push_back(testutil::gaussian_mixture(rng, G));
    std::vector<double> norms;
    for (auto& s : set) norms.push_back(sjostrand_norm(s));
    double K = 0;
    for (int k = 0; k + 1 < 20; k += 2) {
        double r = sjostrand_norm(pointwise(set[k], set[k + 1])) / (norms[k] * norms[k + 1]);
        K = std::max(K, r);
    }
    EXPECT_TRUE(std::isfinite(K));
    EXPECT_LT(K, 10.0);
}

TEST(NarrowDominator, Examples)
{
    SjostrandOptions o;
    o.nodes = 16;
    SymbolGrid s = SymbolGrid::phase_space(G, [](double x, double xi) { return cplx(std::exp(-pi * (x * x + 0.5 * xi * xi)), 0); });
    auto one = narrow_dominator({s}, o);
    EXPECT_NEAR(one.l1, sjostrand_norm(s, o), 1e-12);
    std::vector<SymbolGrid> fam;
    for (double t : {0.0, 0.2, 0.45, 0.7}) fam.push_back(std::cos(2 * pi * t) * s);
    EXPECT_NEAR(narrow_dominator(fam, o).l1, one.l1, 1e-12);
    EXPECT_EQ(narrow_dominator({SymbolGrid::constant(G, 0.0)}, o).l1, 0.0);
}
