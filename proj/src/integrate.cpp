#include "srlaser/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

namespace srl {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

// PI controller constants
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2; // max shrink 1/5 per step
constexpr double kFacMax = 10.0;

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

DormandPrince::DormandPrince(RealRhs rhs, std::span<const double> y0, double t0, const IntegratorOptions& opts)
    : rhs_(std::move(rhs)), opts_(opts), n_(y0.size()), t_(t0), t_old_(t0) {
    if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
    y_.assign(y0.begin(), y0.end());
    for (auto* v : {&y_old_, &y_new_, &tmp_, &k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &r1_, &r2_, &r3_, &r4_, &r5_})
        v->assign(n_, 0.0);
    y_old_ = y_;
    eval(t_, y_, k1_);
    if (!all_finite(k1_)) throw IntegrationError("non-finite derivative at initial state", t0);
    h_ = opts.initial_step > 0.0 ? std::min(opts.initial_step, opts.max_step) : initial_step();
}

void DormandPrince::eval(double t, std::span<const double> y, std::vector<double>& out) {
    ++stats_.rhs_calls;
    rhs_(t, y, out);
}

double DormandPrince::initial_step() {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double sk = opts_.atol + opts_.rtol * std::abs(y_[i]);
        dnf += (k1_[i] / sk) * (k1_[i] / sk);
        dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, opts_.max_step);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y_[i] + h * k1_[i];
    eval(t_ + h, tmp_, k2_);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double sk = opts_.atol + opts_.rtol * std::abs(y_[i]);
        der2 += ((k2_[i] - k1_[i]) / sk) * ((k2_[i] - k1_[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, opts_.max_step});
}

void DormandPrince::step(double t_limit) {
    bool rejected = false;
    bool saw_nonfinite = false;
    for (;;) {
        if (stats_.accepted + stats_.rejected >= opts_.max_steps)
            throw IntegrationError("maximum number of steps exceeded", t_);

        double h = std::min(h_, opts_.max_step);
        bool last = false;
        if (t_ + h >= t_limit) {
            h = t_limit - t_;
            last = true;
        }
        if (0.1 * std::abs(h) <= std::abs(t_) * std::numeric_limits<double>::epsilon() || h <= 0.0) {
            if (saw_nonfinite) throw IntegrationError("non-finite derivative", t_);
            throw StiffnessError("step size underflow", t_);
        }

        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y_[i] + h * a21 * k1_[i];
        eval(t_ + c2 * h, tmp_, k2_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        eval(t_ + c3 * h, tmp_, k3_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        eval(t_ + c4 * h, tmp_, k4_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        eval(t_ + c5 * h, tmp_, k5_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        const double t_new = last ? t_limit : t_ + h;
        eval(t_new, tmp_, k6_);
        for (std::size_t i = 0; i < n_; ++i)
            y_new_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        eval(t_new, y_new_, k7_);

        // max norm, as in Boost.Odeint's default error checker
        double err = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sk = opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
            const double e =
                h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]) / sk;
            if (!(std::abs(e) <= err)) err = std::abs(e); // keeps NaN
        }

        if (!std::isfinite(err) || !all_finite(k7_)) {
            saw_nonfinite = true;
            ++stats_.rejected;
            h_ = 0.1 * h;
            rejected = true;
            continue;
        }

        const double fac11 = std::pow(err, kExpo);
        double fac = fac11 / std::pow(err_old_, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
        double h_new = h / fac;

        if (err <= 1.0) {
            err_old_ = std::max(err, 1e-4);
            if (rejected) h_new = std::min(h_new, h);
            ++stats_.accepted;
            for (std::size_t i = 0; i < n_; ++i) {
                const double ydiff = y_new_[i] - y_[i];
                const double bspl = h * k1_[i] - ydiff;
                r1_[i] = y_[i];
                r2_[i] = ydiff;
                r3_[i] = bspl;
                r4_[i] = ydiff - h * k7_[i] - bspl;
                r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
            }
            y_old_.swap(y_);
            y_.swap(y_new_);
            k1_.swap(k7_);
            t_old_ = t_;
            t_ = t_new;
            // keep the pre-clip proposal when the step was shortened to hit t_limit
            h_ = last ? std::max(h_new, h_) : h_new;
            return;
        }
        h_new = h / std::min(1.0 / kFacMin, fac11 / kSafe);
        ++stats_.rejected;
        rejected = true;
        h_ = h_new;
    }
}

void DormandPrince::interpolate(double t, std::span<double> out) const {
    const double h = t_ - t_old_;
    if (h == 0.0) {
        std::copy(y_.begin(), y_.end(), out.begin());
        return;
    }
    const double s = (t - t_old_) / h;
    const double s1 = 1.0 - s;
    for (std::size_t i = 0; i < n_; ++i)
        out[i] = r1_[i] + s * (r2_[i] + s1 * (r3_[i] + s * (r4_[i] + s1 * r5_[i])));
}

Trajectory integrate(const RealRhs& rhs, std::span<const double> y0, double t0, double t1,
                     const IntegratorOptions& opts, std::span<const double> sample_times) {
    if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 < t0");
    Trajectory traj;
    traj.dim = y0.size();
    DormandPrince dp(rhs, y0, t0, opts);

    std::size_t next = 0;
    std::vector<double> buf(y0.size());
    if (sample_times.empty()) {
        traj.push(t0, y0);
    } else {
        if (!std::is_sorted(sample_times.begin(), sample_times.end()) || sample_times.front() < t0 ||
            sample_times.back() > t1)
            throw std::invalid_argument("integrate: sample times must be sorted and inside [t0, t1]");
        while (next < sample_times.size() && sample_times[next] <= t0) traj.push(sample_times[next++], y0);
    }

    while (dp.t() < t1) {
        dp.step(t1);
        if (sample_times.empty()) {
            traj.push(dp.t(), dp.y());
            continue;
        }
        while (next < sample_times.size() && sample_times[next] <= dp.t()) {
            const double ts = sample_times[next++];
            if (ts == dp.t()) {
                traj.push(ts, dp.y());
            } else {
                dp.interpolate(ts, buf);
                traj.push(ts, buf);
            }
        }
    }
    return traj;
}

RealRhs as_real(ComplexRhs rhs) {
    return [f = std::move(rhs)](double t, std::span<const double> y, std::span<double> dy) {
        // std::complex<double> is layout-compatible with double[2]
        const auto* yc = reinterpret_cast<const std::complex<double>*>(y.data());
        auto* dc = reinterpret_cast<std::complex<double>*>(dy.data());
        f(t, {yc, y.size() / 2}, {dc, dy.size() / 2});
    };
}

ComplexTrajectory integrate(const ComplexRhs& rhs, std::span<const std::complex<double>> y0, double t0,
                            double t1, const IntegratorOptions& opts, std::span<const double> sample_times) {
    const std::span<const double> y0r{reinterpret_cast<const double*>(y0.data()), 2 * y0.size()};
    Trajectory real = integrate(as_real(rhs), y0r, t0, t1, opts, sample_times);
    ComplexTrajectory out;
    out.dim = y0.size();
    out.times = std::move(real.times);
    out.data.resize(real.data.size() / 2);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = {real.data[2 * i], real.data[2 * i + 1]};
    return out;
}

const char* to_string(SteadyStatus s) {
    switch (s) {
    case SteadyStatus::converged: return "converged";
    case SteadyStatus::oscillating: return "oscillating";
    case SteadyStatus::diverged: return "diverged";
    case SteadyStatus::not_converged: return "not_converged";
    }
    return "?";
}

SteadyStateResult integrate_to_steady(const RealRhs& rhs, std::span<const double> y0,
                                      const IntegratorOptions& opts) {
    if (!std::isfinite(opts.t_max) || opts.t_max <= 0.0)
        throw std::invalid_argument("integrate_to_steady: t_max must be finite and > 0");

    constexpr std::size_t kTail = 16;
    SteadyStateResult res;
    res.tail.dim = y0.size();
    std::deque<std::pair<double, std::vector<double>>> tail;

    auto residual = [](std::span<const double> y, std::span<const double> f) {
        return inf_norm(f) / std::max(1.0, inf_norm(y));
    };
    auto finish = [&](std::span<const double> y, double t, double r, SteadyStatus st) {
        res.state.assign(y.begin(), y.end());
        res.time = t;
        res.residual = r;
        res.status = st;
        for (auto& [tt, yy] : tail) res.tail.push(tt, yy);
        return res;
    };

    // per-quarter statistics of the horizon for classifying non-convergence
    std::array<double, 4> res_max{}, y_max{};
    auto quarter = [&](double t) { return std::min<std::size_t>(3, static_cast<std::size_t>(4.0 * t / opts.t_max)); };

    DormandPrince dp(rhs, y0, 0.0, opts);
    double r = residual(dp.y(), dp.dydt());
    if (r < opts.ss_tol) return finish(dp.y(), 0.0, r, SteadyStatus::converged);

    try {
        while (dp.t() < opts.t_max) {
            dp.step(opts.t_max);
            r = residual(dp.y(), dp.dydt());
            tail.emplace_back(dp.t(), std::vector<double>(dp.y().begin(), dp.y().end()));
            if (tail.size() > kTail) tail.pop_front();
            if (r < opts.ss_tol) return finish(dp.y(), dp.t(), r, SteadyStatus::converged);
            const std::size_t q = quarter(dp.t_prev());
            res_max[q] = std::max(res_max[q], r);
            y_max[q] = std::max(y_max[q], inf_norm(dp.y()));
        }
    } catch (const StiffnessError&) {
        throw;
    } catch (const IntegrationError&) {
        return finish(dp.y(), dp.t(), std::numeric_limits<double>::infinity(), SteadyStatus::diverged);
    }

    SteadyStatus st;
    if (!all_finite(dp.y()) || y_max[3] > 1e6 * (1.0 + y_max[0])) {
        st = SteadyStatus::diverged;
    } else if (res_max[3] < 0.9 * res_max[2]) { // a limit cycle keeps its envelope
        st = SteadyStatus::not_converged;
    } else {
        st = SteadyStatus::oscillating;
    }
    return finish(dp.y(), dp.t(), r, st);
}

} // namespace srl
