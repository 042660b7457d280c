#pragma once

// Emission spectra from the quantum regression theorem.
//
// The two-time correlation vector
//   c(tau) = (<a^dag(t+tau) a(t)>, <sigma+_d(t+tau) a(t)>, <sigma+_ud(t+tau) a(t)>)
// obeys dc/dtau = M c, with single-spin entries in components 2 and 3 and the
// class multiplicities N_d, N_ud carried by the first row of M. The spectrum is
//   S(omega) = 2 Re[(i omega - M)^{-1} c(0)]_1.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "srlaser/model.hpp"

namespace srl {

using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;

struct RegressionSystem {
    Matrix3c M = Matrix3c::Zero();
    Vector3c c0 = Vector3c::Zero();
};

/// (i omega - M) is singular on the grid: an eigenvalue sits on the imaginary axis.
class MarginalStabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rows (-kappa/2, i N_d Omega, i N_ud Omega),
///      (-i Omega sz_d, -(Gamma + g+)/2, 0),
///      (-i Omega sz_ud, 0, -Gamma/2).
Matrix3c regression_matrix(const SystemParams& p, double s_z_d, double s_z_ud);

/// Equal-time correlations (n_phot, conj<a^dag s-_d>, conj<a^dag s-_ud>).
Vector3c correlation_vector(const CumulantState& s);

RegressionSystem regression_system(const SystemParams& p, const CumulantState& s);

/// Spectral density at a single frequency, without clamping.
double spectral_density(const RegressionSystem& sys, double omega);

/// Evaluates the resolvent on `omegas` (strictly increasing) in parallel.
/// Negative rounding residues are clamped to zero and counted.
SpectrumGrid steady_state_spectrum(const RegressionSystem& sys, std::span<const double> omegas);

/// Serial reference of steady_state_spectrum; bitwise identical output.
SpectrumGrid steady_state_spectrum_serial(const RegressionSystem& sys, std::span<const double> omegas);

/// Quasi-static spectrum at one instant of a transient: M is frozen at the
/// instantaneous populations and c(t, 0) is taken from `at_t`. Logs a warning
/// when quasi_static_ok() fails.
SpectrumGrid transient_spectrum(const SystemParams& p, const CumulantState& at_t, std::span<const double> omegas);

/// True when Gamma = 0 or Gamma < 0.1 |Im lambda| for the slowest eigenvalue
/// of M, i.e. the populations drift slowly against the line frequency.
bool quasi_static_ok(const SystemParams& p, const Matrix3c& M);

struct LinewidthEstimate {
    double delta_nu = 0.0; // -Re(lambda) of the slowest eigenvalue
    double delta = 0.0;    // |Im(lambda)|
    Vector3c eigenvalues = Vector3c::Zero();
};

LinewidthEstimate linewidth_from_eigenvalues(const Matrix3c& M);

/// Largest real part among the eigenvalues of M.
double max_real_eigenvalue(const Matrix3c& M);

/// n uniform points on [-half_width, half_width].
std::vector<double> uniform_grid(double half_width, std::size_t n);

/// Grid for resolving the narrow lines: uniform points over each peak window
/// [+-delta - 10 dnu, +-delta + 10 dnu] plus a coarser fill over
/// +-max(delta + 10 dnu, 3 delta, 0.5), in total about n points. Rates in units of V.
std::vector<double> peak_grid(const LinewidthEstimate& lw, std::size_t n = 2001);

/// Location of the spectral maximum on omega >= 0, refined by Brent search
/// between the neighbours of the best grid point. Candidates come from the grid
/// and from the eigenvalue estimate.
double peak_frequency(const RegressionSystem& sys, std::span<const double> omegas);

// -- double-Lorentzian fit ----------------------------------------------------

/// (A/pi) [dnu / (dnu^2 + (w - delta)^2) + dnu / (dnu^2 + (w + delta)^2)]
double double_lorentzian(double A, double delta_nu, double delta, double omega);

struct FitGuess {
    double A = 0.0;
    double delta_nu = 0.0;
    double delta = 0.0;
};

class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, LorentzianFit best) : std::runtime_error(what), best_(best) {}
    const LorentzianFit& best() const noexcept { return best_; }

private:
    LorentzianFit best_;
};

/// Least-squares fit of the double Lorentzian over (A, delta_nu, delta) with
/// delta >= 0. Without a guess the start is taken from the spectrum peak.
LorentzianFit fit_double_lorentzian(const SpectrumGrid& spec, std::optional<FitGuess> init = std::nullopt,
                                    int max_iterations = 400);

/// Fit started from the eigenvalue estimate of M, falling back to peak finding.
LorentzianFit fit_double_lorentzian(const SpectrumGrid& spec, const LinewidthEstimate& eig);

} // namespace srl
