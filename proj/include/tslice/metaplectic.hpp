#pragma once

#include "core.hpp"
#include "flow.hpp"
#include "transforms.hpp"
#include "weyl.hpp"

#include <Eigen/Eigenvalues>


namespace tslice {

// spectral derivative symbol: xi for each DFT bin (Nyquist bin at -nu)
inline RVec dft_frequencies(const Grid1d& g)
{
    RVec f(g.N);
    for (int n = 0; n < g.N; ++n) f[n] = (n < g.N / 2 ? n : n - g.N) / g.L;
    return f;
}

// F^{-1} diag(m) F as a dense matrix acting on samples
inline Mat fourier_multiplier_matrix(const Grid1d& g, const RVec& m)
{
    Mat M = Mat::Identity(g.N, g.N);
    fft::columns(M, -1);
    for (int k = 0; k < g.N; ++k) M.row(k) *= m[k];
    fft::columns(M, +1);
    return M / static_cast<double>(g.N);
}

// Q^w on the grid as a Hermitian matrix acting on samples:
// 1/2 A D^2 + 1/2 B (X D + D X) + 1/2 C X^2, D the spectral (1/2 pi i) d/dx.
// The symmetrized mixed term equals B X D - (i / 4 pi) B.
inline Mat quadratic_hamiltonian(const QuadraticForm& Q, const Grid1d& g)
{
    if (Q.d != 1) throw Error("domain", "sampled operators are one-dimensional");
    RVec f = dft_frequencies(g);
    RVec x = g.points();
    Mat H = Mat::Zero(g.N, g.N);
    double a = Q.A(0, 0), b = Q.B(0, 0), c = Q.C(0, 0);
    if (a != 0) H += 0.5 * a * fourier_multiplier_matrix(g, f.cwiseProduct(f));
    if (b != 0) {
        Mat D = fourier_multiplier_matrix(g, f);
        Mat XD = x.cast<cplx>().asDiagonal() * D;
        H += 0.5 * b * (XD + XD.adjoint());
    }
    if (c != 0)
        for (int j = 0; j < g.N; ++j) H(j, j) += 0.5 * c * x[j] * x[j];
    return 0.5 * (H + H.adjoint());
}

// exp(-2 pi i tau Q^w) through one Hermitian eigendecomposition, reusable for any tau
class MetaplecticOracle {
public:
    MetaplecticOracle(const QuadraticForm& Q, const Grid1d& g) : Q_(Q), g_(g)
    {
        Eigen::SelfAdjointEigenSolver<Mat> es(quadratic_hamiltonian(Q, g));
        V_ = es.eigenvectors();
        lam_ = es.eigenvalues();
    }

    // propagator as a matrix acting on samples
    Mat matrix(double tau) const
    {
        Vec ph(g_.N);
        for (int k = 0; k < g_.N; ++k) ph[k] = std::polar(1.0, -2.0 * pi * tau * lam_[k]);
        return V_ * ph.asDiagonal() * V_.adjoint();
    }

    OperatorMatrix at(double tau) const { return OperatorMatrix::from_matrix(g_, matrix(tau)); }

    const QuadraticForm& form() const { return Q_; }
    const Grid1d& grid() const { return g_; }
    const Mat& eigenvectors() const { return V_; }
    const RVec& eigenvalues() const { return lam_; }

private:
    QuadraticForm Q_;
    Grid1d g_;
    Mat V_;
    RVec lam_;
};

inline OperatorMatrix u0_oracle(const QuadraticForm& Q, double tau, const Grid1d& g)
{
    if (std::abs(tau) > 4) warn(nullptr, "u0_oracle beyond |tau| <= 4, accuracy not budgeted");
    return MetaplecticOracle(Q, g).at(tau);
}

// Orthonormal (in l2 of samples) low-energy subspace: first n eigenvectors of
// the discrete harmonic oscillator. All operator-norm claims are measured on
// it; these states carry no mass near the box edge.
inline Mat probe_basis(const Grid1d& g, int n)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(quadratic_hamiltonian(QuadraticForm::harmonic(), g));
    return es.eigenvectors().leftCols(n);
}

// ||P^H (A - B) h P||: both sides restricted to the probe space
inline double projected_error(const OperatorMatrix& A, const OperatorMatrix& B, const Mat& P)
{
    return top_singular_value(P.adjoint() * ((A.K - B.K) * P) * A.grid.h());
}

// ||P^H (A Pi B - C) h P|| with Pi the projector onto a wider low-energy space:
// sampled chirp kernels alias far from the origin, so compositions of kernel-route
// operators are only meaningful on band-limited intermediate states
inline double projected_composition_error(const OperatorMatrix& A, const OperatorMatrix& B, const OperatorMatrix& C,
                                          const Mat& P, const Mat& wide)
{
    const double h = A.grid.h();
    Mat mid = wide.adjoint() * (B.K * P) * h;
    Mat lhs = (P.adjoint() * (A.K * wide) * h) * mid;
    return top_singular_value(lhs - P.adjoint() * (C.K * P) * h);
}

// ||(A - B) h P||: inputs restricted, outputs unrestricted
inline double restricted_error(const OperatorMatrix& A, const OperatorMatrix& B, const Mat& P)
{
    return top_singular_value((A.K - B.K) * P * A.grid.h());
}

struct U0Kernel {
    OperatorMatrix K;
    cplx c = 1;
    double detB = 0;
    bool near_exceptional = false;   // 1e-8 < |det B| < 1e-3
};

// c |det B|^{-1/2} e^{2 pi i Phi(x, y)} sampled on the grid, no periodization
inline OperatorMatrix free_kernel(const SymplecticMatrix& S, const Grid1d& g, cplx c = 1.0)
{
    double A = S.a(), B = S.b(), D = S.dd();
    if (std::abs(B) <= 1e-8) throw Error("exceptional-time", "det B vanishes: no kernel representation");
    double amp = 1.0 / std::sqrt(std::abs(B));
    OperatorMatrix K(g);
    for (int k = 0; k < g.N; ++k) {
        double y = g.x(k);
        for (int j = 0; j < g.N; ++j) {
            double x = g.x(j);
            double phi = 0.5 * D / B * x * x - x * y / B + 0.5 * A / B * y * y;
            K.K(j, k) = c * amp * std::polar(1.0, 2.0 * pi * phi);
        }
    }
    return K;
}

// phase branch: align the c = 1 kernel with the oracle on the ground Gaussian
inline cplx kernel_phase(const OperatorMatrix& K1, const MetaplecticOracle& oracle, double tau)
{
    const Grid1d& g = K1.grid;
    GridFunction phi = normalized_gaussian(g);
    Vec u = oracle.matrix(tau) * phi.values;
    Vec k = K1.K * phi.values * g.h();
    cplx ip = k.dot(u);   // sum conj(k) u
    if (std::abs(ip) == 0.0) throw Error("phase", "kernel phase undetermined");
    return ip / std::abs(ip);
}

inline U0Kernel u0_kernel(const QuadraticForm& Q, double tau, const MetaplecticOracle& oracle)
{
    SymplecticMatrix S = flow_at(Q, tau);
    U0Kernel r;
    r.detB = S.b();
    if (std::abs(r.detB) <= 1e-8) throw Error("exceptional-time", "tau is an exceptional time");
    r.near_exceptional = std::abs(r.detB) < 1e-3;
    OperatorMatrix K1 = free_kernel(S, oracle.grid());
    r.c = kernel_phase(K1, oracle, tau);
    r.K = OperatorMatrix(oracle.grid(), r.c * K1.K);
    return r;
}

inline U0Kernel u0_kernel(const QuadraticForm& Q, double tau, const Grid1d& g)
{
    return u0_kernel(Q, tau, MetaplecticOracle(Q, g));
}

// ||(sigma o S_tau)^w - U0^{-1} sigma^w U0|| on the probe space. U0 comes from
// the kernel formula by default; the oracle path is usable at any tau, including
// the small times where the sampled chirp cannot be resolved.
inline double symplectic_covariance_check(const SymbolGrid& s, const QuadraticForm& Q, double tau,
                                          const MetaplecticOracle& oracle, const Mat& P, bool kernel_path = true,
                                          const WeylOptions& o = {})
{
    SymplecticMatrix S = flow_at(Q, tau);
    Mat2 M;
    M << S.a(), S.b(), S.c(), S.dd();
    OperatorMatrix lhs = weyl_quantize(compose_linear(s, M), o);
    Mat u = kernel_path ? u0_kernel(Q, tau, oracle).K.matrix() : oracle.matrix(tau);
    Mat rhs = u.adjoint() * weyl_quantize(s, o).matrix() * u;
    return top_singular_value(P.adjoint() * (lhs.matrix() - rhs) * P);
}

} // namespace tslice
