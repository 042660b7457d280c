// Exact master-equation steady state of one spin in a truncated cavity,
// compared against the cumulant closure at N = 1.

#include <doctest.h>

#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "srlaser/cumulant.hpp"

using namespace srl;

namespace {

using Mat = Eigen::MatrixXcd;

struct Exact {
    double s_z = 0.0;
    double n_phot = 0.0;
    double trace_error = 0.0;
};

// L vec(rho) with column-major vec: vec(A rho B) = (B^T kron A) vec(rho).
Mat dissipator(const Mat& c) {
    const auto d = c.rows();
    const Mat I = Mat::Identity(d, d);
    const Mat cdc = c.adjoint() * c;
    return Eigen::kroneckerProduct(c.conjugate(), c).eval() - 0.5 * Eigen::kroneckerProduct(I, cdc).eval() -
           0.5 * Eigen::kroneckerProduct(cdc.transpose(), I).eval();
}

Exact solve(const SystemParams& p, int nmax) {
    const int nf = nmax + 1;
    Mat a = Mat::Zero(nf, nf);
    for (int k = 1; k < nf; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    Mat sp = Mat::Zero(2, 2); // |e><g|, index 1 = excited
    sp(1, 0) = 1.0;
    Mat sz = Mat::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    const Mat If = Mat::Identity(nf, nf), Is = Mat::Identity(2, 2);
    const Mat A = Eigen::kroneckerProduct(Is, a);
    const Mat Sp = Eigen::kroneckerProduct(sp, If);
    const Mat Sm = Sp.adjoint();
    const Mat Sz = Eigen::kroneckerProduct(sz, If);
    const Mat H = p.Omega * (A.adjoint() * Sm + A * Sp);

    const auto d = H.rows();
    const Mat I = Mat::Identity(d, d);
    const std::complex<double> i{0.0, 1.0};
    Mat L = -i * (Eigen::kroneckerProduct(I, H).eval() - Eigen::kroneckerProduct(H.transpose(), I).eval());
    L += dissipator(std::sqrt(p.kappa) * A);
    if (p.gamma_plus > 0) L += dissipator(std::sqrt(p.gamma_plus) * Sp);
    if (p.gamma_minus > 0) L += dissipator(std::sqrt(p.gamma_minus) * Sm);
    if (p.gamma_z > 0) L += dissipator(std::sqrt(p.gamma_z / 2.0) * Sz);

    // replace one equation by the trace condition
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
    for (Eigen::Index k = 0; k < d * d; ++k) L(0, k) = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) L(0, k * d + k) = 1.0;
    rhs[0] = 1.0;
    const Eigen::VectorXcd v = L.fullPivLu().solve(rhs);
    const Mat rho = Eigen::Map<const Mat>(v.data(), d, d);

    Exact e;
    e.s_z = (rho * Sz).trace().real();
    e.n_phot = (rho * A.adjoint() * A).trace().real();
    e.trace_error = std::abs(rho.trace() - 1.0);
    return e;
}

SystemParams single(double gp, double gm, double gz) {
    ParamInput in;
    in.N = 1;
    in.p_d = 1.0;
    in.V = 1.0;
    in.bad_cavity_ratio = 10.0;
    in.gamma_plus = gp;
    in.gamma_minus = gm;
    in.gamma_z = gz;
    return from_input(in);
}

} // namespace

TEST_CASE("truncation is converged") {
    const SystemParams p = single(5.0, 0.1, 0.05);
    const Exact a = solve(p, 6), b = solve(p, 9);
    CHECK(a.trace_error < 1e-10);
    CHECK(std::abs(a.n_phot - b.n_phot) < 1e-8 * (1.0 + b.n_phot));
}

TEST_CASE("cumulant closure matches the exact single-spin steady state") {
    for (double gp : {0.5, 1.0, 3.0, 10.0})
        for (double gm : {0.0, 0.1})
            for (double gz : {0.0, 0.05}) {
                const SystemParams p = single(gp, gm, gz);
                REQUIRE(gp <= 0.2 * p.kappa);
                const Exact e = solve(p, 8);
                const CumulantState c = cumulant_steady_state(p).state;
                INFO("gamma_plus = " << gp << ", gamma_minus = " << gm << ", gamma_z = " << gz);
                CHECK(c.s_z_d == doctest::Approx(e.s_z).epsilon(0.05));
                CHECK(c.n_phot == doctest::Approx(e.n_phot).epsilon(0.05));
            }
}
