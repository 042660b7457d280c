#pragma once

// Parameters, derived couplings and state containers shared by every solver.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srl {

using cplx = std::complex<double>;

/// Raised when a parameter is out of its admissible range. `field()` names the offending key.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Physical rates and counts of the partially driven ensemble.
///
/// The first block is user input. The second block is filled by derive() and
/// is a pure function of the first, so re-deriving a derived set is a no-op.
struct SystemParams {
    std::int64_t N = 1;
    double p_d = 1.0;
    double Omega = 0.0;       // spin-cavity coupling
    double kappa = 1.0;       // cavity decay
    double gamma_plus = 0.0;  // incoherent drive (driven class only)
    double gamma_minus = 0.0; // spontaneous emission
    double gamma_z = 0.0;     // dephasing

    double V = 0.0;     // 2 N Omega^2 / kappa
    double Gamma = 0.0; // gamma_minus + 2 gamma_z
    double p_ud = 0.0;
    std::int64_t N_d = 0;
    std::int64_t N_ud = 0;
    double bad_cavity_ratio = 0.0; // kappa / (sqrt(N) Omega), +inf when Omega = 0
    bool N_d_rounded = false;      // p_d * N was not an integer

    /// Value of one rate unit in the caller's original units (1 unless normalize_to_V ran).
    double reference_rate = 1.0;
};

/// Validates the input block and fills the derived fields.
/// Throws ValidationError naming the field on bad input.
SystemParams derive(const SystemParams& input);

/// Rescales every rate so that V = 1; `reference_rate` records the old V.
/// Idempotent. Requires Omega > 0.
SystemParams normalize_to_V(const SystemParams& params);

/// Partial parameter description as read from a config file. Two input styles
/// are reconciled: (Omega, kappa) in absolute units, or V together with either
/// kappa or bad_cavity_ratio, in which case all rates are read in units of V.
struct ParamInput {
    std::optional<std::int64_t> N;
    std::optional<double> p_d;
    std::optional<double> Omega;
    std::optional<double> kappa;
    std::optional<double> V;
    std::optional<double> bad_cavity_ratio;
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    double gamma_z = 0.0;
};

/// Builds a derived, V-normalized parameter set from either input style.
SystemParams from_input(const ParamInput& in);

/// Default bad-cavity warning threshold on kappa / (sqrt(N) Omega).
inline constexpr double kBadCavityThreshold = 10.0;

/// Mean-field Bloch components of the driven (d) and undriven (ud) classes.
struct MeanFieldState {
    cplx s_plus_d{};
    cplx s_plus_ud{};
    double s_z_d = -1.0;
    double s_z_ud = -1.0;
    std::optional<cplx> alpha; // cavity amplitude, only for the with-cavity equations

    /// p_d s_plus_d + p_ud s_plus_ud
    cplx s_plus(const SystemParams& p) const { return p.p_d * s_plus_d + p.p_ud * s_plus_ud; }

    static constexpr std::size_t kReducedDim = 6;
    static constexpr std::size_t kCavityDim = 8;

    std::size_t packed_size() const { return alpha ? kCavityDim : kReducedDim; }
    void pack(std::span<double> out) const;
    static MeanFieldState unpack(std::span<const double> in);
};

/// Second-order moments of the permutation-invariant cumulant closure.
struct CumulantState {
    double s_z_d = -1.0;
    double s_z_ud = -1.0;
    double n_phot = 0.0;      // <a^dag a>
    cplx ad_sm_d{};           // <a^dag sigma^-_d>
    cplx ad_sm_ud{};          // <a^dag sigma^-_ud>
    double sp_sm_dd = 0.0;    // <sigma^+_d sigma^-_d>, distinct spins
    double sp_sm_udud = 0.0;  // <sigma^+_ud sigma^-_ud>, distinct spins
    cplx sp_d_sm_ud{};        // <sigma^+_d sigma^-_ud>

    static constexpr std::size_t kDim = 11;
    void pack(std::span<double> out) const;
    static CumulantState unpack(std::span<const double> in);
    std::array<double, kDim> packed() const {
        std::array<double, kDim> a{};
        pack(a);
        return a;
    }
};

/// Spectral density sampled on a strictly increasing frequency grid.
struct SpectrumGrid {
    std::vector<double> omegas;
    std::vector<double> values;
    std::size_t clamped = 0; // negative residues set to zero
    double min_raw = 0.0;    // most negative raw value before clamping (0 if none)

    std::size_t size() const { return omegas.size(); }
};

/// Double-Lorentzian fit result. delta_nu is the half width at half maximum.
struct LorentzianFit {
    double A = 0.0;
    double delta_nu = 0.0;
    double delta = 0.0;
    double residual = 0.0; // rms
    int iterations = 0;
};

/// Frequency of the traveling-wave states. Both +omega and -omega are valid when `exists`.
struct TravelingWaveSolution {
    bool exists = false;
    double omega = 0.0; // nonnegative branch

    std::array<double, 2> branches() const { return {omega, -omega}; }
};

} // namespace srl
