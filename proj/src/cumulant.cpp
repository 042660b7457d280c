#include "srlaser/cumulant.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/LU>

namespace srl {

CumulantState cumulant_rhs(const CumulantState& s, const SystemParams& p) {
    const cplx i{0.0, 1.0};
    const double Om = p.Omega;
    const double gp = p.gamma_plus;
    const double gm = p.gamma_minus;
    const double G = p.Gamma;
    const auto Nd = static_cast<double>(p.N_d);
    const auto Nud = static_cast<double>(p.N_ud);
    const double im_d = s.ad_sm_d.imag();
    const double im_ud = s.ad_sm_ud.imag();

    CumulantState d;
    d.s_z_d = -gm * (s.s_z_d + 1.0) - gp * (s.s_z_d - 1.0) - 4.0 * Om * im_d;
    d.s_z_ud = -gm * (s.s_z_ud + 1.0) - 4.0 * Om * im_ud;
    d.n_phot = -p.kappa * s.n_phot + 2.0 * Om * (Nd * im_d + Nud * im_ud);
    d.ad_sm_d = -(gp + G + p.kappa) * s.ad_sm_d / 2.0 +
                i * Om *
                    ((Nd - 1.0) * s.sp_sm_dd + (1.0 + s.s_z_d) / 2.0 + Nud * std::conj(s.sp_d_sm_ud) +
                     s.n_phot * s.s_z_d);
    d.ad_sm_ud = -(G + p.kappa) * s.ad_sm_ud / 2.0 +
                 i * Om * ((Nud - 1.0) * s.sp_sm_udud + (1.0 + s.s_z_ud) / 2.0 + Nd * s.sp_d_sm_ud +
                           s.n_phot * s.s_z_ud);
    d.sp_sm_dd = -(gp + G) * s.sp_sm_dd + 2.0 * Om * s.s_z_d * im_d;
    d.sp_sm_udud = -G * s.sp_sm_udud + 2.0 * Om * s.s_z_ud * im_ud;
    d.sp_d_sm_ud = -(gp / 2.0 + G) * s.sp_d_sm_ud +
                   i * Om * (s.s_z_ud * std::conj(s.ad_sm_d) - s.s_z_d * s.ad_sm_ud);
    return d;
}

CumulantState cumulant_ground_state() { return CumulantState{}; }

double max_rate(const SystemParams& p) {
    return std::max({p.kappa, p.V, p.gamma_plus, p.gamma_minus, p.Gamma,
                     std::sqrt(static_cast<double>(p.N)) * p.Omega});
}

IntegratorOptions cumulant_integrator_options(const SystemParams& p) {
    IntegratorOptions o;
    o.ss_tol = 1e-10 * max_rate(p);
    o.t_max = 2e5 / (p.V > 0.0 ? p.V : max_rate(p));
    return o;
}

namespace {

constexpr int kDim = static_cast<int>(CumulantState::kDim);
using Vec = Eigen::Matrix<double, kDim, 1>;
using Mat = Eigen::Matrix<double, kDim, kDim>;

Vec eval(const Vec& y, const SystemParams& p) {
    Vec f;
    cumulant_rhs(CumulantState::unpack({y.data(), CumulantState::kDim}), p).pack({f.data(), CumulantState::kDim});
    return f;
}

double scaled_residual(const Vec& y, const Vec& f) {
    return f.cwiseAbs().maxCoeff() / std::max(1.0, y.cwiseAbs().maxCoeff());
}

struct NewtonResult {
    Vec y;
    double residual;
    int iterations;
};

// Damped Newton on rhs(y) = 0 with a central-difference Jacobian.
NewtonResult newton_polish(Vec y, const SystemParams& p, double target) {
    Vec f = eval(y, p);
    double r = scaled_residual(y, f);
    int it = 0;
    for (; it < 60 && r > 0.0; ++it) {
        Mat J;
        for (int j = 0; j < kDim; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(y[j]));
            Vec yp = y, ym = y;
            yp[j] += h;
            ym[j] -= h;
            J.col(j) = (eval(yp, p) - eval(ym, p)) / (2.0 * h);
        }
        const Vec dx = J.fullPivLu().solve(-f);
        if (!dx.allFinite()) break;
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
            const Vec yt = y + lambda * dx;
            const Vec ft = eval(yt, p);
            const double rt = scaled_residual(yt, ft);
            if (std::isfinite(rt) && rt < r) {
                y = yt;
                f = ft;
                r = rt;
                improved = true;
                break;
            }
        }
        if (!improved) break;
        if (r < 1e-3 * target) break;
    }
    return {y, r, it};
}

} // namespace

CumulantSteadyState cumulant_steady_state(const SystemParams& p) {
    return cumulant_steady_state(p, cumulant_integrator_options(p));
}

CumulantSteadyState cumulant_steady_state(const SystemParams& p, const IntegratorOptions& opts,
                                          const CumulantState& initial) {
    RealRhs rhs = [&p](double, std::span<const double> y, std::span<double> dy) {
        cumulant_rhs(CumulantState::unpack(y), p).pack(dy);
    };
    Vec y0;
    initial.pack({y0.data(), CumulantState::kDim});

    // The time stepping only has to land inside Newton's basin; the polish
    // then drives the residual to rounding level.
    IntegratorOptions coarse = opts;
    coarse.ss_tol = std::max(opts.ss_tol, 1e-7);
    const SteadyStateResult sr = integrate_to_steady(rhs, {y0.data(), CumulantState::kDim}, coarse);

    if (sr.status == SteadyStatus::oscillating || sr.status == SteadyStatus::diverged)
        throw SteadyStateError(std::string("cumulant steady state: ") + to_string(sr.status), sr.status, sr.tail);

    Vec y = Eigen::Map<const Vec>(sr.state.data());
    const NewtonResult nr = newton_polish(y, p, opts.ss_tol);
    const Vec& best = nr.residual < sr.residual ? nr.y : y;
    const double best_r = std::min(nr.residual, sr.residual);
    if (!(best_r < opts.ss_tol))
        throw SteadyStateError("cumulant steady state not reached (residual " + std::to_string(best_r) + ")",
                               SteadyStatus::not_converged, sr.tail);

    CumulantSteadyState out;
    out.state = CumulantState::unpack({best.data(), CumulantState::kDim});
    out.time = sr.time;
    out.residual = best_r;
    out.newton_iterations = nr.iterations;
    return out;
}

CumulantRun run_cumulant(const SystemParams& p, const CumulantState& initial, std::span<const double> sample_times,
                         const IntegratorOptions& opts) {
    RealRhs rhs = [&p](double, std::span<const double> y, std::span<double> dy) {
        cumulant_rhs(CumulantState::unpack(y), p).pack(dy);
    };
    const auto y0 = initial.packed();
    const double t1 = sample_times.empty() ? 0.0 : sample_times.back();
    const Trajectory traj = integrate(rhs, y0, 0.0, t1, opts, sample_times);
    CumulantRun run;
    run.times = traj.times;
    run.states.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) run.states.push_back(CumulantState::unpack(traj.state(k)));
    return run;
}

PowerReport output_power(const CumulantState& s, const SystemParams& p) {
    return {p.kappa * s.n_phot, s.n_phot, s.n_phot / static_cast<double>(p.N)};
}

} // namespace srl
