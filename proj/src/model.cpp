#include "srlaser/model.hpp"

#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace srl {

namespace {

void require_finite(const char* field, double v) {
    if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

void require_nonneg(const char* field, double v) {
    require_finite(field, v);
    if (v < 0.0) throw ValidationError(field, "must be >= 0");
}

} // namespace

SystemParams derive(const SystemParams& in) {
    if (in.N < 1) throw ValidationError("N", "must be >= 1");
    require_finite("p_d", in.p_d);
    if (in.p_d < 0.0 || in.p_d > 1.0) throw ValidationError("p_d", "must lie in [0, 1]");
    require_finite("kappa", in.kappa);
    if (in.kappa <= 0.0) throw ValidationError("kappa", "must be > 0");
    require_nonneg("Omega", in.Omega);
    require_nonneg("gamma_plus", in.gamma_plus);
    require_nonneg("gamma_minus", in.gamma_minus);
    require_nonneg("gamma_z", in.gamma_z);

    SystemParams p = in;
    const auto N = static_cast<double>(in.N);
    p.V = 2.0 * N * in.Omega * in.Omega / in.kappa;
    if (!std::isfinite(p.V)) throw ValidationError("Omega", "V = 2 N Omega^2 / kappa overflows");
    p.Gamma = in.gamma_minus + 2.0 * in.gamma_z;
    p.p_ud = 1.0 - in.p_d;

    // round half up
    const double exact = in.p_d * N;
    p.N_d = static_cast<std::int64_t>(std::floor(exact + 0.5));
    p.N_d = std::min(p.N_d, in.N);
    p.N_ud = in.N - p.N_d;
    p.N_d_rounded = std::abs(exact - std::round(exact)) > 1e-9 * std::max(1.0, exact);
    if (p.N_d_rounded && !in.N_d_rounded) {
        spdlog::warn("p_d * N = {} is not an integer; using N_d = {}", exact, p.N_d);
    }

    p.bad_cavity_ratio = in.Omega > 0.0 ? in.kappa / (std::sqrt(N) * in.Omega)
                                        : std::numeric_limits<double>::infinity();
    return p;
}

SystemParams normalize_to_V(const SystemParams& params) {
    SystemParams p = derive(params);
    if (p.V <= 0.0) throw ValidationError("Omega", "V must be > 0 to normalize rates");
    const double unit = p.V;
    if (std::abs(unit - 1.0) < 1e-12) return p;
    p.Omega /= unit;
    p.kappa /= unit;
    p.gamma_plus /= unit;
    p.gamma_minus /= unit;
    p.gamma_z /= unit;
    p.reference_rate *= unit;
    return derive(p);
}

SystemParams from_input(const ParamInput& in) {
    if (!in.N) throw ValidationError("N", "missing");
    if (!in.p_d) throw ValidationError("p_d", "missing");

    SystemParams p;
    p.N = *in.N;
    p.p_d = *in.p_d;
    p.gamma_plus = in.gamma_plus;
    p.gamma_minus = in.gamma_minus;
    p.gamma_z = in.gamma_z;
    if (p.N < 1) throw ValidationError("N", "must be >= 1");
    const double sqrtN = std::sqrt(static_cast<double>(p.N));

    if (in.V) {
        // Rates are given in units of V; build Omega and kappa with V = 1.
        if (*in.V <= 0.0) throw ValidationError("V", "must be > 0");
        if (in.Omega) throw ValidationError("Omega", "give either Omega or V, not both");
        double kappa = 0.0;
        if (in.kappa && in.bad_cavity_ratio)
            throw ValidationError("kappa", "give either kappa or bad_cavity_ratio with V");
        if (in.kappa) {
            kappa = *in.kappa / *in.V;
        } else if (in.bad_cavity_ratio) {
            if (*in.bad_cavity_ratio <= 0.0) throw ValidationError("bad_cavity_ratio", "must be > 0");
            // V = 2 sqrt(N) Omega / r and kappa = r sqrt(N) Omega  =>  kappa = r^2 V / 2
            kappa = *in.bad_cavity_ratio * *in.bad_cavity_ratio / 2.0;
        } else {
            throw ValidationError("kappa", "V-style input needs kappa or bad_cavity_ratio");
        }
        if (kappa <= 0.0) throw ValidationError("kappa", "must be > 0");
        p.kappa = kappa;
        p.Omega = std::sqrt(kappa / (2.0 * static_cast<double>(p.N)));
        p.reference_rate = *in.V;
        return derive(p);
    }

    if (!in.Omega) throw ValidationError("Omega", "missing (or give V)");
    p.Omega = *in.Omega;
    if (in.kappa) {
        p.kappa = *in.kappa;
    } else if (in.bad_cavity_ratio) {
        p.kappa = *in.bad_cavity_ratio * sqrtN * p.Omega;
    } else {
        throw ValidationError("kappa", "missing (or give bad_cavity_ratio)");
    }
    return normalize_to_V(p);
}

void MeanFieldState::pack(std::span<double> out) const {
    out[0] = s_plus_d.real();
    out[1] = s_plus_d.imag();
    out[2] = s_plus_ud.real();
    out[3] = s_plus_ud.imag();
    out[4] = s_z_d;
    out[5] = s_z_ud;
    if (alpha) {
        out[6] = alpha->real();
        out[7] = alpha->imag();
    }
}

MeanFieldState MeanFieldState::unpack(std::span<const double> in) {
    MeanFieldState s;
    s.s_plus_d = {in[0], in[1]};
    s.s_plus_ud = {in[2], in[3]};
    s.s_z_d = in[4];
    s.s_z_ud = in[5];
    if (in.size() >= kCavityDim) s.alpha = cplx{in[6], in[7]};
    return s;
}

void CumulantState::pack(std::span<double> out) const {
    out[0] = s_z_d;
    out[1] = s_z_ud;
    out[2] = n_phot;
    out[3] = ad_sm_d.real();
    out[4] = ad_sm_d.imag();
    out[5] = ad_sm_ud.real();
    out[6] = ad_sm_ud.imag();
    out[7] = sp_sm_dd;
    out[8] = sp_sm_udud;
    out[9] = sp_d_sm_ud.real();
    out[10] = sp_d_sm_ud.imag();
}

CumulantState CumulantState::unpack(std::span<const double> in) {
    CumulantState s;
    s.s_z_d = in[0];
    s.s_z_ud = in[1];
    s.n_phot = in[2];
    s.ad_sm_d = {in[3], in[4]};
    s.ad_sm_ud = {in[5], in[6]};
    s.sp_sm_dd = in[7];
    s.sp_sm_udud = in[8];
    s.sp_d_sm_ud = {in[9], in[10]};
    return s;
}

} // namespace srl
