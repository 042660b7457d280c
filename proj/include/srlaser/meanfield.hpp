#pragma once

// Mean-field dynamics of the driven / undriven spin classes, their phase
// dynamics, traveling-wave frequency, fixed points and lasing thresholds.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "srlaser/integrate.hpp"
#include "srlaser/model.hpp"

namespace srl {

/// Threshold or fixed point is not defined for the given rates.
class UndefinedQuantityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Bad-cavity equations with the cavity adiabatically eliminated:
///   ds+_d/dt  = V s+ sz_d  - (Gamma + g+) s+_d / 2
///   ds+_ud/dt = V s+ sz_ud - Gamma s+_ud / 2
///   dsz_d/dt  = -4V Re[s-_d s+] - g-(1 + sz_d) + g+(1 - sz_d)
///   dsz_ud/dt = -4V Re[s-_ud s+] - g-(1 + sz_ud)
/// with s+ = p_d s+_d + p_ud s+_ud. Returns the derivative packed as a state.
MeanFieldState mf_rhs_reduced(const MeanFieldState& s, const SystemParams& p);

/// Same spin equations with an explicit cavity amplitude alpha,
/// dalpha/dt = -kappa alpha / 2 - i N Omega s-. Requires s.alpha.
MeanFieldState mf_rhs_with_cavity(const MeanFieldState& s, const SystemParams& p);

/// Adiabatic cavity amplitude -2 i N Omega s- / kappa.
cplx adiabatic_alpha(const MeanFieldState& s, const SystemParams& p);

struct PhaseView {
    double phi_d = 0.0, phi_ud = 0.0, phi_bar = 0.0; // in (-pi, pi]
    double abs_d = 0.0, abs_ud = 0.0, abs_bar = 0.0;
};

PhaseView phase_view(const MeanFieldState& s, const SystemParams& p);

/// dphi/dt = sz (V |s+| / |s+_mu|) sin(phi_bar - phi_mu); empty where |s+_mu| = 0.
struct PhaseRates {
    std::optional<double> d_phi_d;
    std::optional<double> d_phi_ud;
};

PhaseRates phase_rhs(const MeanFieldState& s, const SystemParams& p);

/// Closed-form traveling-wave frequency (valid for gamma_minus = gamma_z = 0).
/// Evaluated in complex arithmetic; exists = false when |Im omega| > 1e-12 V.
TravelingWaveSolution traveling_wave_frequency(const SystemParams& p);

/// Critical driven fraction p_c = (1 + g-/g+)(1 + Gamma/V + g+/(2V)) / 2.
/// Values above 1 mean no lasing at any p_d. Throws UndefinedQuantityError for g+ = 0.
double lasing_threshold(const SystemParams& p);

/// Critical p_d when the undriven spins are decoupled from the cavity.
/// Throws UndefinedQuantityError unless g+ > g-.
double lasing_threshold_decoupled(const SystemParams& p);

/// Good-cavity limit with spins adiabatically eliminated. The growth factor is
/// real so arg(alpha) is conserved.
cplx standard_laser_rhs(cplx alpha, const SystemParams& p);

struct StandardLaserThreshold {
    bool lasing = false;
    double margin = 0.0; // lhs - 1/(2V)
};

StandardLaserThreshold standard_laser_threshold(const SystemParams& p);

/// Incoherent fixed point: s+ = 0, sz_d = (g+ - g-)/(g+ + g-), sz_ud = -1.
MeanFieldState incoherent_fixed_point(const SystemParams& p);

/// Incoherent fixed point plus seed coherences of magnitude `seed_amplitude`
/// with independent random phases for the two classes.
MeanFieldState default_initial_state(const SystemParams& p, std::uint64_t seed, double seed_amplitude = 1e-3);

/// Instantaneous oscillation frequency of the average coherence, Im(ds+/dt / s+).
double instantaneous_frequency(const MeanFieldState& s, const SystemParams& p);

/// Largest real part of the eigenvalues of the finite-difference Jacobian of
/// mf_rhs_reduced at the incoherent fixed point.
double incoherent_growth_rate(const SystemParams& p);

/// Bisects p_d in [0, 1] for the sign change of incoherent_growth_rate.
/// Returns nullopt when the fixed point is stable for every p_d.
std::optional<double> bisect_stability_threshold(const SystemParams& p, double tol = 1e-10);

struct MeanFieldRun {
    std::vector<double> times;
    std::vector<MeanFieldState> states;
};

/// Integrates the reduced (or with-cavity, when initial.alpha is set) equations
/// and samples the state at `sample_times`.
MeanFieldRun run_meanfield(const SystemParams& p, const MeanFieldState& initial, std::span<const double> sample_times,
                           const IntegratorOptions& opts = {});

} // namespace srl
