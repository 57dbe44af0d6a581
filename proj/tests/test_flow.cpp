#include <gtest/gtest.h>

#include "tslice/flow.hpp"

using namespace tslice;

namespace {

std::vector<QuadraticForm> catalog()
{
    return {QuadraticForm::free_particle(), QuadraticForm::harmonic(), QuadraticForm::scalar(1.0, 0.3, 0.5),
            QuadraticForm::scalar(2.0, -0.7, -0.4), QuadraticForm::zero()};
}

QuadraticForm two_dim()
{
    RMat A(2, 2), B(2, 2), C(2, 2);
    A << 1.0, 0.2, 0.2, 0.5;
    B << 0.1, -0.3, 0.4, 0.0;
    C << 0.7, 0.1, 0.1, 1.3;
    return QuadraticForm(A, B, C);
}

} // namespace

TEST(Flow, GeneratorExamples)
{
    RMat g = hamilton_generator(QuadraticForm::free_particle());
    EXPECT_DOUBLE_EQ(g(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(g(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(g(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(g(1, 1), 0.0);

    g = hamilton_generator(QuadraticForm::harmonic());
    EXPECT_DOUBLE_EQ(g(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(g(1, 0), -1.0);

    EXPECT_TRUE(hamilton_generator(QuadraticForm::zero()).isZero(0));

    // J G symmetric for any form
    QuadraticForm q = two_dim();
    RMat JG = symplectic_J(2) * hamilton_generator(q);
    EXPECT_LT((JG - JG.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Flow, Symmetrized)
{
    RMat A(2, 2), B = RMat::Zero(2, 2), C = RMat::Identity(2, 2);
    A << 1.0, 0.4, 0.0, 1.0;
    QuadraticForm q(A, B, C);
    EXPECT_DOUBLE_EQ(q.A(0, 1), q.A(1, 0));
    EXPECT_DOUBLE_EQ(q.A(0, 1), 0.2);
}

TEST(Flow, ClosedForms)
{
    SymplecticMatrix S = flow_at(QuadraticForm::free_particle(), 1.0);
    EXPECT_NEAR(S.a(), 1, 1e-14);
    EXPECT_NEAR(S.b(), 1, 1e-14);
    EXPECT_NEAR(S.c(), 0, 1e-14);
    EXPECT_NEAR(S.dd(), 1, 1e-14);

    for (double t : {0.3, 1.0, 2.5, -3.7}) {
        S = flow_at(QuadraticForm::harmonic(), t);
        EXPECT_NEAR(S.a(), std::cos(t), 1e-13);
        EXPECT_NEAR(S.b(), std::sin(t), 1e-13);
        EXPECT_NEAR(S.c(), -std::sin(t), 1e-13);
        EXPECT_NEAR(S.dd(), std::cos(t), 1e-13);
    }
    for (auto& q : catalog()) EXPECT_TRUE(flow_at(q, 0.0).S.isIdentity(1e-15));
}

TEST(Flow, SymplecticAndGroupLaw)
{
    auto qs = catalog();
    qs.push_back(two_dim());
    for (auto& q : qs) {
        for (double t1 = -4; t1 <= 4; t1 += 0.5) {
            SymplecticMatrix S1 = flow_at(q, t1);
            EXPECT_LE(S1.symplectic_defect(), 1e-10);
            EXPECT_NEAR(S1.S.determinant(), 1.0, 1e-10);
            for (double t2 : {-1.3, 0.2, 2.0}) {
                if (std::abs(t1 + t2) > 4) continue;
                RMat lhs = flow_at(q, t1 + t2).S;
                RMat rhs = S1.S * flow_at(q, t2).S;
                EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
            }
            RMat inv = flow_at(q, -t1).S;
            EXPECT_LE((inv * S1.S - RMat::Identity(2 * q.d, 2 * q.d)).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_LE((S1.inverse().S - inv).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Flow, ExceptionalTimes)
{
    auto e = exceptional_times(QuadraticForm::harmonic(), -0.1, 7.0);
    ASSERT_EQ(e.roots.size(), 3u);
    EXPECT_NEAR(e.roots[0], 0.0, 1e-8);
    EXPECT_NEAR(e.roots[1], pi, 1e-8);
    EXPECT_NEAR(e.roots[2], 2 * pi, 1e-8);
    EXPECT_FALSE(e.degenerate);
    for (double r : e.roots) EXPECT_LE(std::abs(det_B(QuadraticForm::harmonic(), r)), 1e-8);

    e = exceptional_times(QuadraticForm::free_particle(), -1.0, 1.0);
    ASSERT_EQ(e.roots.size(), 1u);
    EXPECT_NEAR(e.roots[0], 0.0, 1e-8);

    e = exceptional_times(QuadraticForm::zero(), -2.0, 3.0);
    EXPECT_TRUE(e.degenerate);
    EXPECT_TRUE(e.roots.empty());

    // coarse scan over many oscillations triggers the step warning
    e = exceptional_times(QuadraticForm::scalar(400.0, 0.0, 400.0), 0.05, 10.0, 1e-10, 1.0);
    EXPECT_FALSE(e.warnings.empty());
}

TEST(Flow, GeneratingFunction)
{
    EXPECT_NEAR(generating_function(flow_at(QuadraticForm::free_particle(), 1.0), 1.0, 0.0), 0.5, 1e-14);
    EXPECT_NEAR(generating_function(flow_at(QuadraticForm::harmonic(), pi / 2), 1.0, 1.0), -1.0, 1e-13);
    EXPECT_NEAR(generating_function(flow_at(QuadraticForm::scalar(1.0, 0.3, 0.5), 0.7), 0.0, 0.0), 0.0, 1e-15);
    EXPECT_THROW(generating_function(flow_at(QuadraticForm::harmonic(), 0.0), 1.0, 1.0), Error);
}

TEST(Flow, GeneratingFunctionReconstructsBlocks)
{
    // y-derivative gives -eta, x-derivative gives xi for (x, xi) = S (y, eta)
    for (auto& q : {QuadraticForm::free_particle(), QuadraticForm::harmonic(), QuadraticForm::scalar(1.0, 0.3, 0.5)}) {
        SymplecticMatrix S = flow_at(q, 0.8);
        const double e = 1e-5;
        auto phi = [&](double x, double y) { return generating_function(S, x, y); };
        // d2Phi/dxdy = -1/B, d2Phi/dx2 = D/B, d2Phi/dy2 = A/B
        double pxy = (phi(e, e) - phi(e, -e) - phi(-e, e) + phi(-e, -e)) / (4 * e * e);
        double pxx = (phi(e, 0) - 2 * phi(0, 0) + phi(-e, 0)) / (e * e);
        double pyy = (phi(0, e) - 2 * phi(0, 0) + phi(0, -e)) / (e * e);
        double B = -1.0 / pxy, D = pxx * B, A = pyy * B;
        double C = (A * D - 1.0) / B;
        EXPECT_NEAR(B, S.b(), 1e-6);
        EXPECT_NEAR(D, S.dd(), 1e-6);
        EXPECT_NEAR(A, S.a(), 1e-6);
        EXPECT_NEAR(C, S.c(), 1e-6);
    }
}

TEST(Flow, MetaplecticNormFactor)
{
    SymplecticMatrix S = flow_at(QuadraticForm::free_particle(), 1.0);
    EXPECT_DOUBLE_EQ(metaplectic_norm_factor(S, 2.0), 1.0);
    EXPECT_NEAR(metaplectic_norm_factor(S, INFINITY), std::pow((3 + std::sqrt(5.0)) / 2, 0.25), 1e-12);
    EXPECT_NEAR(metaplectic_norm_factor(S, INFINITY), 1.2720, 1e-4);
    SymplecticMatrix Id = flow_at(QuadraticForm::zero(), 1.0);
    for (double p : {1.0, 2.0, 4.0, double(INFINITY)}) EXPECT_NEAR(metaplectic_norm_factor(Id, p), 1.0, 1e-14);
}
