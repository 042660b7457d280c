#include "srlaser/meanfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

namespace srl {

MeanFieldState mf_rhs_reduced(const MeanFieldState& s, const SystemParams& p) {
    const cplx sp = s.s_plus(p);
    MeanFieldState d;
    d.s_plus_d = p.V * sp * s.s_z_d - (p.Gamma + p.gamma_plus) * s.s_plus_d / 2.0;
    d.s_plus_ud = p.V * sp * s.s_z_ud - p.Gamma * s.s_plus_ud / 2.0;
    d.s_z_d = -4.0 * p.V * std::real(std::conj(s.s_plus_d) * sp) - p.gamma_minus * (1.0 + s.s_z_d) +
              p.gamma_plus * (1.0 - s.s_z_d);
    d.s_z_ud = -4.0 * p.V * std::real(std::conj(s.s_plus_ud) * sp) - p.gamma_minus * (1.0 + s.s_z_ud);
    return d;
}

MeanFieldState mf_rhs_with_cavity(const MeanFieldState& s, const SystemParams& p) {
    if (!s.alpha) throw std::invalid_argument("mf_rhs_with_cavity: state has no cavity amplitude");
    const cplx a = *s.alpha;
    const cplx i{0.0, 1.0};
    const double N = static_cast<double>(p.N);
    MeanFieldState d;
    d.s_z_d = -p.gamma_minus * (s.s_z_d + 1.0) - p.gamma_plus * (s.s_z_d - 1.0) +
              4.0 * p.Omega * std::imag(a * s.s_plus_d);
    d.s_z_ud = -p.gamma_minus * (s.s_z_ud + 1.0) + 4.0 * p.Omega * std::imag(a * s.s_plus_ud);
    d.s_plus_d = -(p.gamma_plus + p.Gamma) * s.s_plus_d / 2.0 - i * p.Omega * std::conj(a) * s.s_z_d;
    d.s_plus_ud = -p.Gamma * s.s_plus_ud / 2.0 - i * p.Omega * std::conj(a) * s.s_z_ud;
    d.alpha = -p.kappa * a / 2.0 - i * N * p.Omega * std::conj(s.s_plus(p));
    return d;
}

cplx adiabatic_alpha(const MeanFieldState& s, const SystemParams& p) {
    const double N = static_cast<double>(p.N);
    return cplx{0.0, -2.0 * N * p.Omega / p.kappa} * std::conj(s.s_plus(p));
}

PhaseView phase_view(const MeanFieldState& s, const SystemParams& p) {
    const cplx sp = s.s_plus(p);
    // std::arg returns [-pi, pi]; fold -pi onto pi
    auto fold = [](double a) { return a == -std::numbers::pi ? std::numbers::pi : a; };
    return {fold(std::arg(s.s_plus_d)), fold(std::arg(s.s_plus_ud)), fold(std::arg(sp)),
            std::abs(s.s_plus_d),       std::abs(s.s_plus_ud),       std::abs(sp)};
}

PhaseRates phase_rhs(const MeanFieldState& s, const SystemParams& p) {
    const PhaseView v = phase_view(s, p);
    PhaseRates r;
    if (v.abs_d > 0.0) r.d_phi_d = s.s_z_d * p.V * v.abs_bar / v.abs_d * std::sin(v.phi_bar - v.phi_d);
    if (v.abs_ud > 0.0) r.d_phi_ud = s.s_z_ud * p.V * v.abs_bar / v.abs_ud * std::sin(v.phi_bar - v.phi_ud);
    return r;
}

TravelingWaveSolution traveling_wave_frequency(const SystemParams& p) {
    const double V = p.V;
    const cplx v = 2.0 * V - p.gamma_plus;
    const cplx inner = v - 2.0 * V * p.p_ud - std::sqrt(v * (v - 4.0 * V * p.p_ud));
    const cplx omega = std::sqrt(p.gamma_plus / 4.0 * inner);
    TravelingWaveSolution sol;
    sol.exists = std::abs(omega.imag()) <= 1e-12 * V;
    if (sol.exists) sol.omega = std::abs(omega.real());
    return sol;
}

double lasing_threshold(const SystemParams& p) {
    if (!(p.gamma_plus > 0.0)) throw UndefinedQuantityError("lasing threshold needs gamma_plus > 0");
    return 0.5 * (1.0 + p.gamma_minus / p.gamma_plus) * (1.0 + p.Gamma / p.V + p.gamma_plus / (2.0 * p.V));
}

double lasing_threshold_decoupled(const SystemParams& p) {
    if (!(p.gamma_plus > p.gamma_minus))
        throw UndefinedQuantityError("decoupled threshold needs gamma_plus > gamma_minus (population inversion)");
    return (p.gamma_minus + p.gamma_plus) * (p.Gamma + p.gamma_plus) /
           (2.0 * (p.gamma_plus - p.gamma_minus) * p.V);
}

namespace {

double gamma_tilde_d_sq(const SystemParams& p) {
    return (p.gamma_minus + p.gamma_plus) * (p.gamma_minus + p.gamma_plus + 2.0 * p.gamma_z);
}

double gamma_tilde_ud_sq(const SystemParams& p) { return p.gamma_minus * (p.gamma_minus + 2.0 * p.gamma_z); }

} // namespace

cplx standard_laser_rhs(cplx alpha, const SystemParams& p) {
    const double N = static_cast<double>(p.N);
    const double a2 = 8.0 * std::norm(alpha);
    const double om2 = p.Omega * p.Omega;
    double rate = -p.kappa / 2.0;

    const double gain = p.gamma_plus - p.gamma_minus;
    if (p.p_d > 0.0 && gain != 0.0) {
        const double den = gamma_tilde_d_sq(p) / om2 + a2;
        rate += 2.0 * N * p.p_d * gain / den;
    }
    if (p.p_ud > 0.0 && p.gamma_minus > 0.0) {
        const double den = gamma_tilde_ud_sq(p) / om2 + a2;
        rate -= 2.0 * N * p.p_ud * p.gamma_minus / den;
    } else if (p.p_ud > 0.0 && gamma_tilde_ud_sq(p) == 0.0 && alpha == cplx{}) {
        throw UndefinedQuantityError("standard laser: undriven denominator vanishes at alpha = 0");
    }
    return rate * alpha;
}

StandardLaserThreshold standard_laser_threshold(const SystemParams& p) {
    double lhs = 0.0;
    if (p.p_d > 0.0) {
        const double g = gamma_tilde_d_sq(p);
        if (!(g > 0.0)) throw UndefinedQuantityError("standard laser threshold needs gamma_plus + gamma_minus > 0");
        lhs += p.p_d * (p.gamma_plus - p.gamma_minus) / g;
    }
    if (p.p_ud > 0.0) {
        const double g = gamma_tilde_ud_sq(p);
        if (!(g > 0.0)) throw UndefinedQuantityError("standard laser threshold needs gamma_minus > 0 when p_ud > 0");
        lhs -= p.p_ud * p.gamma_minus / g;
    }
    const double margin = lhs - 1.0 / (2.0 * p.V);
    return {margin > 0.0, margin};
}

MeanFieldState incoherent_fixed_point(const SystemParams& p) {
    const double total = p.gamma_plus + p.gamma_minus;
    if (!(total > 0.0)) throw UndefinedQuantityError("incoherent fixed point undefined for gamma_plus = gamma_minus = 0");
    MeanFieldState s;
    s.s_z_d = (p.gamma_plus - p.gamma_minus) / total;
    s.s_z_ud = -1.0;
    return s;
}

MeanFieldState default_initial_state(const SystemParams& p, std::uint64_t seed, double seed_amplitude) {
    MeanFieldState s = incoherent_fixed_point(p);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    s.s_plus_d = std::polar(seed_amplitude, phase(rng));
    s.s_plus_ud = std::polar(seed_amplitude, phase(rng));
    // stay inside the Bloch ball
    const double zmax = std::sqrt(std::max(0.0, 1.0 - 4.0 * seed_amplitude * seed_amplitude));
    s.s_z_d = std::clamp(s.s_z_d, -zmax, zmax);
    s.s_z_ud = std::clamp(s.s_z_ud, -zmax, zmax);
    return s;
}

double instantaneous_frequency(const MeanFieldState& s, const SystemParams& p) {
    const MeanFieldState d = mf_rhs_reduced(s, p);
    const cplx sp = s.s_plus(p);
    const cplx dsp = p.p_d * d.s_plus_d + p.p_ud * d.s_plus_ud;
    return std::imag(dsp / sp);
}

double incoherent_growth_rate(const SystemParams& p) {
    constexpr int n = static_cast<int>(MeanFieldState::kReducedDim);
    constexpr double h = 1e-5;
    const MeanFieldState fp = incoherent_fixed_point(p);
    std::array<double, n> x0{}, xp{}, xm{}, fpv{}, fmv{};
    fp.pack(x0);
    Eigen::Matrix<double, n, n> J;
    for (int j = 0; j < n; ++j) {
        xp = x0;
        xm = x0;
        xp[j] += h;
        xm[j] -= h;
        mf_rhs_reduced(MeanFieldState::unpack(xp), p).pack(fpv);
        mf_rhs_reduced(MeanFieldState::unpack(xm), p).pack(fmv);
        for (int i = 0; i < n; ++i) J(i, j) = (fpv[i] - fmv[i]) / (2.0 * h);
    }
    const Eigen::EigenSolver<Eigen::Matrix<double, n, n>> es(J, false);
    return es.eigenvalues().real().maxCoeff();
}

std::optional<double> bisect_stability_threshold(const SystemParams& p, double tol) {
    auto at = [&](double pd) {
        SystemParams q = p;
        q.p_d = pd;
        q.p_ud = 1.0 - pd;
        return q;
    };
    const double growth_tol = 1e-9 * std::max(1.0, p.V);
    auto unstable = [&](double pd) { return incoherent_growth_rate(at(pd)) > growth_tol; };

    if (!unstable(1.0)) return std::nullopt;
    if (unstable(0.0)) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (unstable(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

MeanFieldRun run_meanfield(const SystemParams& p, const MeanFieldState& initial, std::span<const double> sample_times,
                           const IntegratorOptions& opts) {
    const bool cavity = initial.alpha.has_value();
    RealRhs rhs = [&p, cavity](double, std::span<const double> y, std::span<double> dy) {
        const MeanFieldState s = MeanFieldState::unpack(y);
        (cavity ? mf_rhs_with_cavity(s, p) : mf_rhs_reduced(s, p)).pack(dy);
    };
    std::vector<double> y0(initial.packed_size());
    initial.pack(y0);
    const double t1 = sample_times.empty() ? 0.0 : sample_times.back();
    const Trajectory traj = integrate(rhs, y0, 0.0, t1, opts, sample_times);

    MeanFieldRun run;
    run.times = traj.times;
    run.states.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) run.states.push_back(MeanFieldState::unpack(traj.state(k)));
    return run;
}

} // namespace srl
