#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "srlaser/integrate.hpp"
#include "srlaser/meanfield.hpp"

using namespace srl;

namespace {

RealRhs decay = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };

// x'' = -w^2 x
RealRhs oscillator(double w) {
    return [w](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
    };
}

double max_error_exp(double rtol) {
    IntegratorOptions o;
    o.rtol = rtol;
    o.atol = rtol * 1e-3;
    const std::vector<double> y0{1.0};
    const Trajectory tr = integrate(decay, y0, 0.0, 5.0, o);
    double e = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) e = std::max(e, std::abs(tr.state(k)[0] - std::exp(-tr.times[k])));
    return e;
}

SystemParams mf_params(double p_d, double gamma_plus) {
    ParamInput in;
    in.N = 1000;
    in.p_d = p_d;
    in.V = 1.0;
    in.bad_cavity_ratio = 10.0;
    in.gamma_plus = gamma_plus;
    return from_input(in);
}

// At p_d = 1 the empty undriven class would precess forever; freeze it.
RealRhs mf_rhs(const SystemParams& p) {
    return [p](double, std::span<const double> y, std::span<double> dy) {
        MeanFieldState d = mf_rhs_reduced(MeanFieldState::unpack(y), p);
        if (p.p_ud == 0.0) {
            d.s_plus_ud = {};
            d.s_z_ud = 0.0;
        }
        d.pack(dy);
    };
}

} // namespace

TEST_CASE("exponential decay") {
    const std::vector<double> y0{1.0};
    const Trajectory tr = integrate(decay, y0, 0.0, 1.0, IntegratorOptions{});
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == 1.0);
    CHECK(std::abs(tr.back()[0] - std::exp(-1.0)) < 1e-9 * std::exp(-1.0) * 10);
    for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr.times[k] > tr.times[k - 1]);
}

TEST_CASE("complex phase rotation keeps the modulus") {
    const double w = 3.0;
    ComplexRhs f = [w](double, std::span<const std::complex<double>> y, std::span<std::complex<double>> dy) {
        dy[0] = std::complex<double>(0.0, w) * y[0];
    };
    const std::vector<std::complex<double>> y0{{1.0, 0.0}};
    const double T = 2.0 * std::numbers::pi / w;
    const ComplexTrajectory tr = integrate(f, y0, 0.0, T, IntegratorOptions{});
    CHECK(std::abs(tr.back()[0] - 1.0) < 1e-8);
    for (std::size_t k = 0; k < tr.size(); ++k) CHECK(std::abs(std::abs(tr.state(k)[0]) - 1.0) < 1e-8);
}

TEST_CASE("harmonic oscillator energy drift over 1e3 periods") {
    const double w = 1.0;
    const std::vector<double> y0{1.0, 0.0};
    const double T = 2.0 * std::numbers::pi / w;
    std::vector<double> ts;
    for (int k = 0; k <= 1000; ++k) ts.push_back(k * T);
    const Trajectory tr = integrate(oscillator(w), y0, 0.0, ts.back(), IntegratorOptions{}, ts);
    REQUIRE(tr.size() == ts.size());
    const double E0 = 0.5;
    double drift = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto y = tr.state(k);
        drift = std::max(drift, std::abs(0.5 * (y[1] * y[1] + w * w * y[0] * y[0]) - E0) / E0);
    }
    CHECK(drift < 1e-6);
    // closed form at the last period
    CHECK(std::abs(tr.back()[0] - 1.0) < 1e-5);
}

TEST_CASE("tighter rtol gives smaller error") {
    double prev = max_error_exp(1e-4);
    for (double rtol : {1e-6, 1e-8, 1e-10}) {
        const double e = max_error_exp(rtol);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("dense output matches the closed form between steps") {
    const std::vector<double> y0{1.0};
    std::vector<double> ts;
    for (int k = 0; k <= 97; ++k) ts.push_back(0.05 * k + 0.0123);
    const Trajectory tr = integrate(decay, y0, 0.0, 5.0, IntegratorOptions{}, ts);
    REQUIRE(tr.size() == ts.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        CHECK(tr.times[k] == ts[k]);
        CHECK(std::abs(tr.state(k)[0] - std::exp(-ts[k])) < 1e-8);
    }
}

TEST_CASE("sample times must be sorted and inside the span") {
    const std::vector<double> y0{1.0};
    const std::vector<double> bad{0.5, 0.2};
    CHECK_THROWS_AS(integrate(decay, y0, 0.0, 1.0, IntegratorOptions{}, bad), std::invalid_argument);
    const std::vector<double> outside{2.0};
    CHECK_THROWS_AS(integrate(decay, y0, 0.0, 1.0, IntegratorOptions{}, outside), std::invalid_argument);
}

TEST_CASE("non-finite derivative reports the last valid time") {
    // blows up at t = 1
    RealRhs f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
    const std::vector<double> y0{1.0};
    try {
        integrate(f, y0, 0.0, 2.0, IntegratorOptions{});
        FAIL("expected an integration error");
    } catch (const IntegrationError& e) {
        CHECK(e.last_valid_time() > 0.9);
        CHECK(e.last_valid_time() <= 1.0);
    }

    RealRhs nan_rhs = [](double t, std::span<const double>, std::span<double> dy) {
        dy[0] = t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    try {
        integrate(nan_rhs, y0, 0.0, 1.0, IntegratorOptions{});
        FAIL("expected an integration error");
    } catch (const IntegrationError& e) {
        CHECK(e.last_valid_time() <= 0.5);
        CHECK(e.last_valid_time() > 0.4);
    }

    RealRhs nan0 = [](double, std::span<const double>, std::span<double> dy) { dy[0] = std::nan(""); };
    CHECK_THROWS_AS(integrate(nan0, y0, 0.0, 1.0, IntegratorOptions{}), IntegrationError);
}

TEST_CASE("step size underflow raises a stiffness error") {
    // finite but discontinuous-in-state derivative forces endless rejection
    RealRhs f = [](double t, std::span<const double>, std::span<double> dy) { dy[0] = t > 0.3 ? 1e300 : 0.0; };
    const std::vector<double> y0{0.0};
    IntegratorOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-300;
    CHECK_THROWS_AS(integrate(f, y0, 0.0, 1.0, o), StiffnessError);
}

TEST_CASE("steady state of y' = -(y - 3)") {
    RealRhs f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -(y[0] - 3.0); };
    IntegratorOptions o;
    o.t_max = 100.0;
    const std::vector<double> y0{0.0};
    const SteadyStateResult r = integrate_to_steady(f, y0, o);
    CHECK(r.status == SteadyStatus::converged);
    CHECK(std::abs(r.state[0] - 3.0) < 1e-8);
    CHECK(r.residual < o.ss_tol);
    CHECK(r.time > 0.0);
}

TEST_CASE("mean-field lasing steady state at p_d = 1, gamma+ = V") {
    const SystemParams p = mf_params(1.0, 1.0);
    MeanFieldState s = incoherent_fixed_point(p);
    s.s_plus_d = {1e-3, 0.0};
    s.s_z_d = 0.999;
    std::array<double, 6> y0{};
    s.pack(y0);
    IntegratorOptions o;
    o.t_max = 1e4;
    const SteadyStateResult r = integrate_to_steady(mf_rhs(p), y0, o);
    REQUIRE(r.status == SteadyStatus::converged);
    const MeanFieldState f = MeanFieldState::unpack(r.state);
    // V sz = g+/2 and 4 V |s+|^2 = g+ (1 - sz)
    CHECK(f.s_z_d == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(std::abs(f.s_plus_d) == doctest::Approx(std::sqrt(1.0 / 8.0)).epsilon(1e-7));
}

TEST_CASE("mean field below threshold relaxes to the incoherent state") {
    const SystemParams p = mf_params(0.5, 1.0);
    std::array<double, 6> y0{};
    default_initial_state(p, 3).pack(y0);
    IntegratorOptions o;
    o.t_max = 1e5;
    o.ss_tol = 1e-11;
    const SteadyStateResult r = integrate_to_steady(mf_rhs(p), y0, o);
    REQUIRE(r.status == SteadyStatus::converged);
    const MeanFieldState f = MeanFieldState::unpack(r.state);
    CHECK(std::abs(f.s_plus(p)) < 1e-6);
    CHECK(f.s_z_ud == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("traveling wave is classified as oscillating") {
    const SystemParams p = mf_params(0.8, 1.0);
    std::array<double, 6> y0{};
    default_initial_state(p, 11).pack(y0);
    IntegratorOptions o;
    o.t_max = 4e3;
    const SteadyStateResult r = integrate_to_steady(mf_rhs(p), y0, o);
    CHECK(r.status == SteadyStatus::oscillating);
    CHECK(r.tail.size() > 0);
}

TEST_CASE("slow decay at the horizon is reported as not converged") {
    RealRhs f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -1e-3 * y[0]; };
    IntegratorOptions o;
    o.t_max = 2e3;
    const std::vector<double> y0{1.0};
    CHECK(integrate_to_steady(f, y0, o).status == SteadyStatus::not_converged);
}

TEST_CASE("unbounded growth is reported as diverged") {
    RealRhs f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; };
    IntegratorOptions o;
    o.t_max = 40.0;
    const std::vector<double> y0{1.0};
    CHECK(integrate_to_steady(f, y0, o).status == SteadyStatus::diverged);
}

TEST_CASE("integrate_to_steady needs a finite horizon") {
    const std::vector<double> y0{1.0};
    CHECK_THROWS_AS(integrate_to_steady(decay, y0, IntegratorOptions{}), std::invalid_argument);
}

TEST_CASE("invalid tolerances are rejected") {
    IntegratorOptions o;
    o.rtol = 0.0;
    const std::vector<double> y0{1.0};
    CHECK_THROWS_AS(integrate(decay, y0, 0.0, 1.0, o), std::invalid_argument);
}
