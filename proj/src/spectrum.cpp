#include "srlaser/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/tools/minima.hpp>
#include <spdlog/spdlog.h>
#include <unsupported/Eigen/NonLinearOptimization>

namespace srl {

Matrix3c regression_matrix(const SystemParams& p, double s_z_d, double s_z_ud) {
    const cplx i{0.0, 1.0};
    const double Om = p.Omega;
    Matrix3c M;
    M << -p.kappa / 2.0, i * static_cast<double>(p.N_d) * Om, i * static_cast<double>(p.N_ud) * Om,
        -i * Om * s_z_d, -(p.Gamma + p.gamma_plus) / 2.0, 0.0,
        -i * Om * s_z_ud, 0.0, -p.Gamma / 2.0;
    return M;
}

Vector3c correlation_vector(const CumulantState& s) {
    return {s.n_phot, std::conj(s.ad_sm_d), std::conj(s.ad_sm_ud)};
}

RegressionSystem regression_system(const SystemParams& p, const CumulantState& s) {
    return {regression_matrix(p, s.s_z_d, s.s_z_ud), correlation_vector(s)};
}

namespace {

// Components that never reach the field (empty class, zero first-row entry)
// are dropped: they contribute neither to S nor to the line shape, and at
// Gamma = 0 they would put a spurious eigenvalue on the imaginary axis.
struct Active {
    int n = 1;
    int idx[3] = {0, 0, 0};
};

Active active_components(const Matrix3c& M) {
    Active a;
    for (int j = 1; j < 3; ++j)
        if (M(0, j) != cplx{}) a.idx[a.n++] = j;
    return a;
}

template <int K>
double density_k(const Matrix3c& M, const Vector3c& c, const Active& a, double omega) {
    Eigen::Matrix<cplx, K, K> A;
    Eigen::Matrix<cplx, K, 1> b;
    for (int r = 0; r < K; ++r) {
        b[r] = c[a.idx[r]];
        for (int q = 0; q < K; ++q) A(r, q) = -M(a.idx[r], a.idx[q]);
        A(r, r) += cplx{0.0, omega};
    }
    const Eigen::PartialPivLU<Eigen::Matrix<cplx, K, K>> lu(A);
    const double rc = lu.rcond();
    if (!(rc > 64.0 * std::numeric_limits<double>::epsilon()))
        throw MarginalStabilityError("resolvent singular at omega = " + std::to_string(omega));
    return 2.0 * lu.solve(b)[0].real();
}

double density(const Matrix3c& M, const Vector3c& c, const Active& a, double omega) {
    switch (a.n) {
    case 1: {
        const cplx d = cplx{0.0, omega} - M(0, 0);
        if (std::abs(d) == 0.0) throw MarginalStabilityError("resolvent singular at omega = " + std::to_string(omega));
        return 2.0 * (c[0] / d).real();
    }
    case 2: return density_k<2>(M, c, a, omega);
    default: return density_k<3>(M, c, a, omega);
    }
}

void check_grid(std::span<const double> omegas) {
    for (std::size_t k = 1; k < omegas.size(); ++k)
        if (!(omegas[k] > omegas[k - 1])) throw std::invalid_argument("frequency grid must be strictly increasing");
}

void clamp(SpectrumGrid& g) {
    for (double& v : g.values)
        if (v < 0.0) {
            g.min_raw = std::min(g.min_raw, v);
            v = 0.0;
            ++g.clamped;
        }
}

} // namespace

double spectral_density(const RegressionSystem& sys, double omega) {
    return density(sys.M, sys.c0, active_components(sys.M), omega);
}

SpectrumGrid steady_state_spectrum(const RegressionSystem& sys, std::span<const double> omegas) {
    check_grid(omegas);
    const Active a = active_components(sys.M);
    SpectrumGrid g;
    g.omegas.assign(omegas.begin(), omegas.end());
    g.values.resize(omegas.size());
    const auto n = static_cast<std::ptrdiff_t>(omegas.size());
    bool singular = false;
    double bad_omega = 0.0;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            g.values[k] = density(sys.M, sys.c0, a, omegas[k]);
        } catch (const MarginalStabilityError&) {
#pragma omp critical(srl_spectrum_singular)
            {
                singular = true;
                bad_omega = omegas[k];
            }
        }
    }
    if (singular) throw MarginalStabilityError("resolvent singular at omega = " + std::to_string(bad_omega));
    clamp(g);
    return g;
}

SpectrumGrid steady_state_spectrum_serial(const RegressionSystem& sys, std::span<const double> omegas) {
    check_grid(omegas);
    const Active a = active_components(sys.M);
    SpectrumGrid g;
    g.omegas.assign(omegas.begin(), omegas.end());
    g.values.resize(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) g.values[k] = density(sys.M, sys.c0, a, omegas[k]);
    clamp(g);
    return g;
}

SpectrumGrid transient_spectrum(const SystemParams& p, const CumulantState& at_t, std::span<const double> omegas) {
    const RegressionSystem sys = regression_system(p, at_t);
    if (!quasi_static_ok(p, sys.M))
        spdlog::warn("transient spectrum: Gamma = {:.3g} is not small against the line frequency", p.Gamma);
    return steady_state_spectrum(sys, omegas);
}

bool quasi_static_ok(const SystemParams& p, const Matrix3c& M) {
    if (p.Gamma == 0.0) return true;
    return p.Gamma < 0.1 * linewidth_from_eigenvalues(M).delta;
}

LinewidthEstimate linewidth_from_eigenvalues(const Matrix3c& M) {
    const Active a = active_components(M);
    Eigen::MatrixXcd sub(a.n, a.n);
    for (int r = 0; r < a.n; ++r)
        for (int q = 0; q < a.n; ++q) sub(r, q) = M(a.idx[r], a.idx[q]);
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sub, false);

    LinewidthEstimate lw;
    lw.eigenvalues.setConstant(cplx{std::numeric_limits<double>::quiet_NaN(), 0.0});
    int best = 0;
    for (int k = 0; k < a.n; ++k) {
        lw.eigenvalues[k] = es.eigenvalues()[k];
        if (es.eigenvalues()[k].real() > es.eigenvalues()[best].real()) best = k;
    }
    lw.delta_nu = -es.eigenvalues()[best].real();
    lw.delta = std::abs(es.eigenvalues()[best].imag());
    return lw;
}

double max_real_eigenvalue(const Matrix3c& M) {
    const Eigen::ComplexEigenSolver<Matrix3c> es(M, false);
    return es.eigenvalues().real().maxCoeff();
}

std::vector<double> uniform_grid(double half_width, std::size_t n) {
    if (n < 2 || !(half_width > 0.0)) throw std::invalid_argument("uniform_grid needs n >= 2 and half_width > 0");
    std::vector<double> w(n);
    const double step = 2.0 * half_width / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) w[k] = -half_width + step * static_cast<double>(k);
    w[n - 1] = half_width;
    return w;
}

std::vector<double> peak_grid(const LinewidthEstimate& lw, std::size_t n) {
    const double dnu = std::abs(lw.delta_nu);
    const double d = std::abs(lw.delta);
    const double window = 10.0 * dnu;
    const double half = std::max({d + window, 3.0 * d, 0.5});
    if (n < 16 || !(dnu > 0.0)) return uniform_grid(half, std::max<std::size_t>(n, 2));

    std::vector<double> w;
    w.reserve(n + 8);
    const std::size_t fill = n / 5;
    for (double x : uniform_grid(half, fill)) w.push_back(x);
    auto add = [&w](double lo, double hi, std::size_t m) {
        const double step = (hi - lo) / static_cast<double>(m - 1);
        for (std::size_t k = 0; k < m; ++k) w.push_back(lo + step * static_cast<double>(k));
    };
    const std::size_t rest = n - fill;
    if (d <= window) {
        add(-d - window, d + window, rest);
    } else {
        add(-d - window, -d + window, rest / 2);
        add(d - window, d + window, rest - rest / 2);
    }
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    return w;
}

double peak_frequency(const RegressionSystem& sys, std::span<const double> omegas) {
    const Active a = active_components(sys.M);
    auto S = [&](double w) { return density(sys.M, sys.c0, a, w); };

    // bracket from the grid
    double best_w = 0.0, best_s = -std::numeric_limits<double>::infinity(), lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        if (omegas[k] < 0.0) continue;
        const double s = S(omegas[k]);
        if (s > best_s) {
            best_s = s;
            best_w = omegas[k];
            lo = k > 0 ? std::max(0.0, omegas[k - 1]) : omegas[k];
            hi = k + 1 < omegas.size() ? omegas[k + 1] : omegas[k];
        }
    }
    // bracket from the eigenvalue, which wins when the grid misses a narrow line
    const LinewidthEstimate lw = linewidth_from_eigenvalues(sys.M);
    if (std::isfinite(lw.delta) && lw.delta_nu > 0.0) {
        const double s = S(lw.delta);
        if (s > best_s) {
            best_s = s;
            best_w = lw.delta;
            lo = std::max(0.0, lw.delta - 2.0 * lw.delta_nu);
            hi = lw.delta + 2.0 * lw.delta_nu;
        }
    }
    if (!(hi > lo)) return best_w;
    const auto r = boost::math::tools::brent_find_minima([&](double w) { return -S(w); }, lo, hi, 50);
    return -r.second >= best_s ? r.first : best_w;
}

double double_lorentzian(double A, double delta_nu, double delta, double omega) {
    const double g2 = delta_nu * delta_nu;
    const double a = omega - delta, b = omega + delta;
    return A / std::numbers::pi * (delta_nu / (g2 + a * a) + delta_nu / (g2 + b * b));
}

namespace {

// Residuals in scaled variables x = omega / sw, y = S / sy; parameters (a, w, d).
struct LorentzFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    std::vector<double> x, y;

    int inputs() const { return 3; }
    int values() const { return static_cast<int>(x.size()); }

    int operator()(const Eigen::VectorXd& q, Eigen::VectorXd& f) const {
        for (std::size_t k = 0; k < x.size(); ++k)
            f[static_cast<Eigen::Index>(k)] = double_lorentzian(q[0], q[1], q[2], x[k]) - y[k];
        return 0;
    }

    int df(const Eigen::VectorXd& q, Eigen::MatrixXd& J) const {
        const double a = q[0], w = q[1], d = q[2], w2 = w * w;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double u = x[k] - d, v = x[k] + d;
            const double du = w2 + u * u, dv = w2 + v * v;
            const auto r = static_cast<Eigen::Index>(k);
            J(r, 0) = (w / du + w / dv) / std::numbers::pi;
            J(r, 1) = a / std::numbers::pi * ((u * u - w2) / (du * du) + (v * v - w2) / (dv * dv));
            J(r, 2) = a / std::numbers::pi * (2.0 * w * u / (du * du) - 2.0 * w * v / (dv * dv));
        }
        return 0;
    }
};

FitGuess guess_from_peak(const SpectrumGrid& spec) {
    std::size_t k0 = 0;
    for (std::size_t k = 0; k < spec.size(); ++k)
        if (spec.omegas[k] >= 0.0 && (spec.omegas[k0] < 0.0 || spec.values[k] > spec.values[k0])) k0 = k;
    const double smax = spec.values[k0];
    std::size_t r = k0;
    while (r + 1 < spec.size() && spec.values[r] > smax / 2.0) ++r;
    std::size_t l = k0;
    while (l > 0 && spec.values[l] > smax / 2.0) --l;
    double hw = spec.omegas[r] - spec.omegas[k0];
    // the left flank is contaminated by the mirror peak when the two merge
    if (spec.values[l] <= smax / 2.0 && spec.omegas[l] > 0.0) hw = std::min(hw, spec.omegas[k0] - spec.omegas[l]);
    if (!(hw > 0.0)) hw = spec.omegas.back() - spec.omegas.front();
    FitGuess g;
    g.delta = spec.omegas[k0];
    g.delta_nu = hw;
    const double overlap = hw * hw / (hw * hw + 4.0 * g.delta * g.delta);
    g.A = smax * std::numbers::pi * hw / (1.0 + overlap);
    return g;
}

} // namespace

LorentzianFit fit_double_lorentzian(const SpectrumGrid& spec, std::optional<FitGuess> init, int max_iterations) {
    if (spec.size() < 50) throw std::invalid_argument("fit_double_lorentzian needs at least 50 grid points");
    const FitGuess g = init.value_or(guess_from_peak(spec));
    if (!(g.delta_nu > 0.0) || !std::isfinite(g.A)) throw std::invalid_argument("fit guess needs delta_nu > 0");

    const double sy = *std::max_element(spec.values.begin(), spec.values.end());
    if (!(sy > 0.0)) throw FitError("spectrum is identically zero", {});
    const double sw = g.delta_nu;

    LorentzFunctor fn;
    fn.x.resize(spec.size());
    fn.y.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        fn.x[k] = spec.omegas[k] / sw;
        fn.y[k] = spec.values[k] / sy;
    }
    Eigen::VectorXd q(3);
    q << g.A / (sy * sw), 1.0, std::abs(g.delta) / sw;

    Eigen::LevenbergMarquardt<LorentzFunctor> lm(fn);
    lm.parameters.maxfev = max_iterations;
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    const auto status = lm.minimize(q);

    // The model is even in delta and in the joint sign of (A, delta_nu).
    if (q[1] < 0.0) {
        q[0] = -q[0];
        q[1] = -q[1];
    }
    LorentzianFit fit;
    fit.A = q[0] * sy * sw;
    fit.delta_nu = q[1] * sw;
    fit.delta = std::abs(q[2]) * sw;
    fit.iterations = static_cast<int>(lm.nfev);
    double ss = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double r = double_lorentzian(fit.A, fit.delta_nu, fit.delta, spec.omegas[k]) - spec.values[k];
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(spec.size()));

    using S = Eigen::LevenbergMarquardtSpace::Status;
    const bool ok = status == S::RelativeReductionTooSmall || status == S::RelativeErrorTooSmall ||
                    status == S::RelativeErrorAndReductionTooSmall || status == S::CosinusTooSmall ||
                    status == S::FtolTooSmall || status == S::XtolTooSmall || status == S::GtolTooSmall;
    if (!ok || !std::isfinite(fit.residual) || !(fit.delta_nu > 0.0))
        throw FitError("double-Lorentzian fit did not converge (status " + std::to_string(static_cast<int>(status)) +
                           ")",
                       fit);
    return fit;
}

LorentzianFit fit_double_lorentzian(const SpectrumGrid& spec, const LinewidthEstimate& eig) {
    if (eig.delta_nu > 0.0 && std::isfinite(eig.delta)) {
        // Amplitude from the peak height of the eigenvalue line shape.
        double smax = 0.0;
        for (std::size_t k = 0; k < spec.size(); ++k) smax = std::max(smax, spec.values[k]);
        const double unit = double_lorentzian(1.0, eig.delta_nu, eig.delta, eig.delta);
        FitGuess g{smax / unit, eig.delta_nu, eig.delta};
        try {
            return fit_double_lorentzian(spec, g);
        } catch (const FitError&) {
        }
    }
    return fit_double_lorentzian(spec, std::nullopt);
}

} // namespace srl
