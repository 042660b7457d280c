#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "srlaser/cumulant.hpp"
#include "srlaser/meanfield.hpp"
#include "srlaser/spectrum.hpp"

using namespace srl;

namespace {

SystemParams params(std::int64_t N, double p_d, double gamma_plus, double gamma_minus = 0.0, double gamma_z = 0.0) {
    ParamInput in;
    in.N = N;
    in.p_d = p_d;
    in.V = 1.0;
    in.bad_cavity_ratio = 10.0;
    in.gamma_plus = gamma_plus;
    in.gamma_minus = gamma_minus;
    in.gamma_z = gamma_z;
    return from_input(in);
}

RegressionSystem steady_system(const SystemParams& p) { return regression_system(p, cumulant_steady_state(p).state); }

// Row 1 of (i w - M) x = c after eliminating x2 and x3.
double schur_density(const SystemParams& p, const CumulantState& s, double w) {
    const cplx i{0.0, 1.0};
    const double Om = p.Omega;
    const cplx a11 = i * w + p.kappa / 2.0;
    const cplx a12 = -i * static_cast<double>(p.N_d) * Om;
    const cplx a13 = -i * static_cast<double>(p.N_ud) * Om;
    const cplx a21 = i * Om * s.s_z_d;
    const cplx a31 = i * Om * s.s_z_ud;
    const cplx a22 = i * w + (p.Gamma + p.gamma_plus) / 2.0;
    const cplx a33 = i * w + p.Gamma / 2.0;
    const cplx c1 = s.n_phot, c2 = std::conj(s.ad_sm_d), c3 = std::conj(s.ad_sm_ud);
    cplx num = c1, den = a11;
    if (p.N_d > 0) {
        num -= a12 * c2 / a22;
        den -= a12 * a21 / a22;
    }
    if (p.N_ud > 0) {
        num -= a13 * c3 / a33;
        den -= a13 * a31 / a33;
    }
    return 2.0 * (num / den).real();
}

double integrate_spectrum(const RegressionSystem& sys, std::vector<double> breaks) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&sys](double w) { return spectral_density(sys, w); };
    const double inf = std::numeric_limits<double>::infinity();
    double total = gauss_kronrod<double, 61>::integrate(f, -inf, breaks.front(), 15, 1e-12);
    for (std::size_t k = 1; k < breaks.size(); ++k)
        total += gauss_kronrod<double, 61>::integrate(f, breaks[k - 1], breaks[k], 20, 1e-12);
    total += gauss_kronrod<double, 61>::integrate(f, breaks.back(), inf, 15, 1e-12);
    return total;
}

SpectrumGrid synthetic(double A, double dnu, double delta, double half, std::size_t n) {
    SpectrumGrid g;
    g.omegas = uniform_grid(half, n);
    for (double w : g.omegas) g.values.push_back(double_lorentzian(A, dnu, delta, w));
    return g;
}

} // namespace

TEST_CASE("regression matrix layout") {
    const SystemParams p = params(1000, 0.8, 1.0, 1e-4, 1e-3);
    const Matrix3c M = regression_matrix(p, 0.3, -0.2);
    CHECK(M(0, 0) == cplx{-p.kappa / 2.0, 0.0});
    CHECK(M(0, 1) / M(0, 2) == cplx{800.0 / 200.0, 0.0});
    CHECK(M(1, 1).real() == doctest::Approx(-(p.Gamma + 1.0) / 2.0));
    CHECK(M(2, 2).real() == doctest::Approx(-p.Gamma / 2.0));
    CHECK(M(1, 2) == cplx{});
    CHECK(M(2, 1) == cplx{});
    CHECK(M(1, 0) == cplx{0.0, -p.Omega * 0.3});
}

TEST_CASE("uncoupled cavity gives a single Lorentzian") {
    SystemParams raw;
    raw.N = 100;
    raw.p_d = 0.5;
    raw.Omega = 0.0;
    raw.kappa = 4.0;
    raw.gamma_plus = 0.3;
    const SystemParams p = derive(raw);
    CumulantState s;
    s.n_phot = 0.7;
    const RegressionSystem sys = regression_system(p, s);
    CHECK(sys.M.isDiagonal());
    for (double w : {-5.0, -1.0, 0.0, 0.3, 2.0, 40.0})
        CHECK(spectral_density(sys, w) == doctest::Approx(0.7 * 4.0 / (w * w + 4.0)).epsilon(1e-13));
    const LinewidthEstimate lw = linewidth_from_eigenvalues(sys.M);
    CHECK(lw.delta_nu == doctest::Approx(2.0));
    CHECK(lw.delta == 0.0);
}

TEST_CASE("steady-state regression matrix is stable") {
    for (double pd : {0.6, 0.8, 0.9, 1.0})
        for (double gp : {0.5, 1.0}) {
            const SystemParams p = params(1000, pd, gp, 1e-4, 1e-3);
            CHECK(max_real_eigenvalue(steady_system(p).M) < 0.0);
        }
}

TEST_CASE("resolvent matches the eliminated closed form") {
    for (double pd : {0.7, 0.8, 1.0}) {
        const SystemParams p = params(1000, pd, 1.0, 1e-4, 1e-3);
        const CumulantState s = cumulant_steady_state(p).state;
        const RegressionSystem sys = regression_system(p, s);
        for (double w : {-3.0, -0.2, -0.01, 0.0, 0.05, 0.19, 1.0, 60.0}) {
            const double ref = schur_density(p, s, w);
            CHECK(std::abs(spectral_density(sys, w) - ref) <= 1e-10 * std::abs(ref));
        }
    }
}

TEST_CASE("spectrum integrates to 2 pi n") {
    for (double pd : {0.8, 0.9}) {
        const SystemParams p = params(1000, pd, 1.0);
        const CumulantState s = cumulant_steady_state(p).state;
        const RegressionSystem sys = regression_system(p, s);
        const LinewidthEstimate lw = linewidth_from_eigenvalues(sys.M);
        const double d = std::max(lw.delta, 1e-6);
        const double total = integrate_spectrum(sys, {-p.kappa, -d, 0.0, d, p.kappa});
        CHECK(total == doctest::Approx(2.0 * std::numbers::pi * s.n_phot).epsilon(0.01));
    }
}

TEST_CASE("traveling-wave peaks and symmetry at N = 1e3") {
    for (double pd : {0.8, 0.9}) {
        const SystemParams p = params(1000, pd, 1.0);
        const RegressionSystem sys = steady_system(p);
        const std::vector<double> grid = uniform_grid(0.5, 2001);
        const SpectrumGrid spec = steady_state_spectrum(sys, grid);
        const double peak = peak_frequency(sys, grid);
        const double w = traveling_wave_frequency(p).omega;
        CHECK(std::abs(peak - w) / w < 0.05);
        for (std::size_t k = 0; k < grid.size(); ++k)
            CHECK(spec.values[k] == doctest::Approx(spec.values[grid.size() - 1 - k]).epsilon(1e-10));
        const double smax = *std::max_element(spec.values.begin(), spec.values.end());
        CHECK(spec.min_raw >= -1e-12 * smax);
    }
    const RegressionSystem full = steady_system(params(1000, 1.0, 1.0));
    CHECK(peak_frequency(full, uniform_grid(0.5, 2001)) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("parallel and serial spectra are identical") {
    const RegressionSystem sys = steady_system(params(100000, 0.8, 0.5, 1e-4, 1e-3));
    const std::vector<double> grid = peak_grid(linewidth_from_eigenvalues(sys.M), 20001);
    const SpectrumGrid a = steady_state_spectrum(sys, grid);
    const SpectrumGrid b = steady_state_spectrum_serial(sys, grid);
    REQUIRE(a.size() == b.size());
    bool same = true;
    for (std::size_t k = 0; k < a.size(); ++k) same = same && a.values[k] == b.values[k];
    CHECK(same);
    CHECK(a.clamped == b.clamped);
}

TEST_CASE("singular resolvent is reported") {
    RegressionSystem sys;
    sys.M << cplx{0.0, 0.0}, cplx{1.0, 0.0}, cplx{}, cplx{-1.0, 0.0}, cplx{0.0, 0.0}, cplx{}, cplx{}, cplx{}, cplx{-1.0, 0.0};
    sys.c0 << 1.0, 0.5, 0.0;
    const std::vector<double> grid{-1.0, 0.0, 1.0};
    // eigenvalues of the active block are +-i
    CHECK_THROWS_AS(steady_state_spectrum(sys, grid), MarginalStabilityError);
    CHECK_THROWS_AS(steady_state_spectrum_serial(sys, grid), MarginalStabilityError);
    const std::vector<double> unsorted{0.0, -1.0};
    CHECK_THROWS_AS(steady_state_spectrum(sys, unsorted), std::invalid_argument);
}

TEST_CASE("eigenvalue linewidth") {
    SUBCASE("p_d = 1 line is of order V / N") {
        for (std::int64_t N : {1000, 10000, 100000}) {
            const SystemParams p = params(N, 1.0, 1.0);
            const LinewidthEstimate lw = linewidth_from_eigenvalues(steady_system(p).M);
            const double scale = 1.0 / static_cast<double>(N);
            CHECK(lw.delta_nu > 0.1 * scale);
            CHECK(lw.delta_nu < 10.0 * scale);
            CHECK(lw.delta < 1e-12);
            CHECK(std::isnan(lw.eigenvalues[2].real()));
        }
    }
    SUBCASE("delta follows the traveling wave") {
        const SystemParams p = params(1000, 0.8, 1.0);
        const LinewidthEstimate lw = linewidth_from_eigenvalues(steady_system(p).M);
        CHECK(std::abs(lw.delta - traveling_wave_frequency(p).omega) / traveling_wave_frequency(p).omega < 0.05);
    }
}

TEST_CASE("grids") {
    const std::vector<double> u = uniform_grid(2.0, 5);
    CHECK(u == std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0});
    CHECK_THROWS_AS(uniform_grid(1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(uniform_grid(0.0, 10), std::invalid_argument);

    for (const LinewidthEstimate lw : {LinewidthEstimate{1e-5, 0.0017, {}}, LinewidthEstimate{1e-3, 0.0, {}},
                                       LinewidthEstimate{0.05, 0.2, {}}, LinewidthEstimate{0.0, 0.3, {}}}) {
        const std::vector<double> g = peak_grid(lw, 2001);
        for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
        CHECK(g.size() > 1500);
        CHECK(g.size() <= 2001);
        CHECK(g.front() <= -0.5);
        CHECK(g.back() >= 0.5);
        CHECK(g.front() == -g.back());
    }
    // the narrow line is resolved by many points
    const LinewidthEstimate narrow{1e-5, 0.0017, {}};
    const std::vector<double> g = peak_grid(narrow, 2001);
    const auto in_line = std::count_if(g.begin(), g.end(), [](double w) { return std::abs(w - 0.0017) < 1e-5; });
    CHECK(in_line > 50);
}

TEST_CASE("transient spectrum equals the steady spectrum at the same state") {
    const SystemParams p = params(1000, 0.8, 1.0);
    const CumulantState s = cumulant_steady_state(p).state;
    const std::vector<double> grid = uniform_grid(0.5, 501);
    const SpectrumGrid a = transient_spectrum(p, s, grid);
    const SpectrumGrid b = steady_state_spectrum(regression_system(p, s), grid);
    CHECK(a.values == b.values);
    CHECK(quasi_static_ok(p, regression_system(p, s).M));
    const SystemParams slow = params(1000, 0.8, 1.0, 0.1, 0.1);
    CHECK_FALSE(quasi_static_ok(slow, regression_system(slow, cumulant_steady_state(slow).state).M));
}

TEST_CASE("double-Lorentzian fit") {
    SUBCASE("synthetic recovery") {
        const SpectrumGrid g = synthetic(2.0, 0.01, 0.15, 0.5, 2001);
        const LorentzianFit f = fit_double_lorentzian(g, FitGuess{1.0, 0.02, 0.12});
        CHECK(f.A == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(f.delta_nu == doctest::Approx(0.01).epsilon(1e-6));
        CHECK(f.delta == doctest::Approx(0.15).epsilon(1e-6));
        CHECK(f.residual < 1e-8);
        const LorentzianFit auto_start = fit_double_lorentzian(g);
        CHECK(auto_start.delta == doctest::Approx(0.15).epsilon(1e-6));
    }
    SUBCASE("merged lines") {
        const SpectrumGrid g = synthetic(1.0, 0.05, 0.0, 0.5, 1001);
        const LorentzianFit f = fit_double_lorentzian(g);
        CHECK(f.delta_nu == doctest::Approx(0.05).epsilon(1e-6));
        CHECK(std::abs(f.delta) < 1e-4);
    }
    SUBCASE("iteration budget") {
        const SpectrumGrid g = synthetic(2.0, 0.01, 0.15, 0.5, 2001);
        try {
            fit_double_lorentzian(g, FitGuess{0.3, 0.1, 0.3}, 1);
            FAIL("expected FitError");
        } catch (const FitError& e) {
            CHECK(std::isfinite(e.best().A));
        }
        SpectrumGrid small = synthetic(1.0, 0.1, 0.1, 0.5, 20);
        CHECK_THROWS_AS(fit_double_lorentzian(small), std::invalid_argument);
    }
    SUBCASE("fit tracks the eigenvalue line when the peaks are separated") {
        // the line is not a pure Lorentzian pair (complex residues), so the bounds are the measured ones
        int separated = 0;
        for (double gp : {0.5, 1.0, 1.5, 2.0})
            for (double pd : {0.8, 0.88, 0.96}) {
                const SystemParams p = params(100000, pd, gp, 1e-4, 1e-3);
                const RegressionSystem sys = steady_system(p);
                const LinewidthEstimate lw = linewidth_from_eigenvalues(sys.M);
                if (!(2.0 * lw.delta > 3.0 * lw.delta_nu)) continue;
                ++separated;
                const LorentzianFit f = fit_double_lorentzian(steady_state_spectrum(sys, peak_grid(lw, 2001)), lw);
                CHECK(std::abs(f.delta_nu - lw.delta_nu) / lw.delta_nu < 0.15);
                CHECK(std::abs(f.delta - lw.delta) / lw.delta < 0.3);
            }
        CHECK(separated >= 6);
    }
}
