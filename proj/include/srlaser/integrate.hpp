#pragma once

// Adaptive Dormand-Prince 5(4) integration with dense output and
// steady-state / limit-cycle classification.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srl {

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity(); // horizon for integrate_to_steady
    double ss_tol = 1e-10;
    double initial_step = 0.0; // 0 selects automatically
    std::size_t max_steps = 500'000'000;
};

/// Derivative evaluated at the end of the last accepted step was not finite.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_valid_time)
        : std::runtime_error(what), last_valid_time_(last_valid_time) {}
    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

/// Step size fell below the floating-point resolution of t.
class StiffnessError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

using RealRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
using ComplexRhs =
    std::function<void(double t, std::span<const std::complex<double>> y, std::span<std::complex<double>> dydt)>;

/// Row-major sequence of states sampled at increasing times.
template <class T>
struct BasicTrajectory {
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<T> data;

    std::size_t size() const { return times.size(); }
    std::span<const T> state(std::size_t i) const { return {data.data() + i * dim, dim}; }
    std::span<const T> back() const { return state(size() - 1); }
    void push(double t, std::span<const T> y) {
        times.push_back(t);
        data.insert(data.end(), y.begin(), y.end());
    }
};

using Trajectory = BasicTrajectory<double>;
using ComplexTrajectory = BasicTrajectory<std::complex<double>>;

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_calls = 0;
};

/// Stepper with Hairer's PI step control and 4th-order continuous extension.
class DormandPrince {
public:
    DormandPrince(RealRhs rhs, std::span<const double> y0, double t0, const IntegratorOptions& opts);

    /// Advances by one accepted step, never past `t_limit`.
    void step(double t_limit);

    double t() const { return t_; }
    double t_prev() const { return t_old_; }
    double h() const { return h_; }
    std::span<const double> y() const { return y_; }
    /// rhs at the current state (first-same-as-last, no extra evaluation).
    std::span<const double> dydt() const { return k1_; }
    /// Dense output inside the last step, t in [t_prev(), t()].
    void interpolate(double t, std::span<double> out) const;
    const IntegrationStats& stats() const { return stats_; }

private:
    void eval(double t, std::span<const double> y, std::vector<double>& out);
    double initial_step() ;

    RealRhs rhs_;
    IntegratorOptions opts_;
    std::size_t n_;
    double t_ = 0.0;
    double t_old_ = 0.0;
    double h_ = 0.0;
    double err_old_ = 1e-4;
    std::vector<double> y_, y_old_, y_new_, tmp_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    std::vector<double> r1_, r2_, r3_, r4_, r5_; // dense output coefficients
    IntegrationStats stats_;
};

/// Integrates over [t0, t1]. With empty `sample_times` every accepted step is
/// recorded (including t0); otherwise exactly the requested times, which must
/// lie in [t0, t1] and be nondecreasing.
Trajectory integrate(const RealRhs& rhs, std::span<const double> y0, double t0, double t1,
                     const IntegratorOptions& opts, std::span<const double> sample_times = {});

ComplexTrajectory integrate(const ComplexRhs& rhs, std::span<const std::complex<double>> y0, double t0,
                            double t1, const IntegratorOptions& opts,
                            std::span<const double> sample_times = {});

enum class SteadyStatus {
    converged,
    oscillating,   // bounded, non-decaying derivative: limit cycle
    diverged,      // state grows without bound
    not_converged, // derivative still decaying at the horizon
};

const char* to_string(SteadyStatus s);

struct SteadyStateResult {
    std::vector<double> state;
    double time = 0.0;
    double residual = 0.0; // ||rhs||_inf / max(1, ||y||_inf) at `time`
    SteadyStatus status = SteadyStatus::not_converged;
    Trajectory tail;       // last few accepted states, for diagnosis
};

/// Integrates from t = 0 until ||rhs(y)||_inf < ss_tol * max(1, ||y||_inf) or
/// opts.t_max is reached, then classifies non-convergence.
SteadyStateResult integrate_to_steady(const RealRhs& rhs, std::span<const double> y0,
                                      const IntegratorOptions& opts);

/// Adapts a complex right-hand side to the interleaved real core.
RealRhs as_real(ComplexRhs rhs);

} // namespace srl
