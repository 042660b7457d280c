#pragma once

// Second-order cumulant equations for the partially driven ensemble at finite N.
//
// Permutation invariance within each class and the global U(1) symmetry leave
// eight moments (eleven real numbers). N enters only through the coefficients
// N_d and N_ud, so the cost does not depend on N.

#include <span>
#include <stdexcept>
#include <vector>

#include "srlaser/integrate.hpp"
#include "srlaser/model.hpp"

namespace srl {

CumulantState cumulant_rhs(const CumulantState& s, const SystemParams& p);

/// All spins in the ground state, no correlations.
CumulantState cumulant_ground_state();

/// Largest rate of the problem; sets the stationarity scale.
double max_rate(const SystemParams& p);

/// Defaults for cumulant runs: ss_tol = 1e-10 * max_rate, t_max = 2e5 / V.
IntegratorOptions cumulant_integrator_options(const SystemParams& p);

class SteadyStateError : public std::runtime_error {
public:
    SteadyStateError(const std::string& what, SteadyStatus status, Trajectory tail)
        : std::runtime_error(what), status_(status), tail_(std::move(tail)) {}
    SteadyStatus status() const noexcept { return status_; }
    const Trajectory& tail() const noexcept { return tail_; }

private:
    SteadyStatus status_;
    Trajectory tail_;
};

struct CumulantSteadyState {
    CumulantState state;
    double time = 0.0;     // integration time spent before polishing
    double residual = 0.0; // ||rhs||_inf / max(1, ||y||_inf)
    int newton_iterations = 0;
};

/// Steady state reached from `initial` (ground state by default). The
/// integration is followed by a damped Newton polish on the stationarity
/// condition, which resolves slow modes the time stepping only approaches
/// exponentially. Throws SteadyStateError (with the trajectory tail) when
/// neither route reaches opts.ss_tol.
CumulantSteadyState cumulant_steady_state(const SystemParams& p, const IntegratorOptions& opts,
                                          const CumulantState& initial = cumulant_ground_state());
CumulantSteadyState cumulant_steady_state(const SystemParams& p);

struct CumulantRun {
    std::vector<double> times;
    std::vector<CumulantState> states;
};

CumulantRun run_cumulant(const SystemParams& p, const CumulantState& initial, std::span<const double> sample_times,
                         const IntegratorOptions& opts);

struct PowerReport {
    double power = 0.0;      // kappa * n_phot
    double n_phot = 0.0;
    double n_per_atom = 0.0; // n_phot / N
};

PowerReport output_power(const CumulantState& s, const SystemParams& p);

} // namespace srl
