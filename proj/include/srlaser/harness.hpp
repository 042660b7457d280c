#pragma once

// Parameter sweeps and plot datasets. Each run returns its results in memory
// and, when RunContext::out_dir is set, writes CSV files plus manifest.json.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "srlaser/io.hpp"
#include "srlaser/model.hpp"

namespace srl {

struct RunContext {
    std::filesystem::path out_dir; // empty: nothing is written
    std::uint64_t seed = 0;
    int workers = 1;
    std::filesystem::path config_path; // recorded in the manifest when set
};

struct PointFailure {
    std::size_t index = 0;
    std::string what;
};

struct OutputFile {
    std::filesystem::path path;
    std::size_t rows = 0;
    std::vector<std::string> columns;
};

struct RunReport {
    std::string command;
    std::vector<OutputFile> outputs;
    std::vector<PointFailure> failures;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, double>> summary;

    double summary_value(const std::string& key) const;
};

/// Seed for sweep point `index`; independent of worker count and scheduling.
std::uint64_t point_seed(std::uint64_t seed, std::size_t index);

// -- spectrum-sweep -------------------------------------------------------------

struct SweepPoint {
    double p_d = 0.0;
    bool ok = false;
    std::string error;
    double n_phot = 0.0;
    double power = 0.0;
    double peak_omega = 0.0; // |omega| of the spectral maximum
    double eig_delta_nu = 0.0, eig_delta = 0.0;
    double fit_delta_nu = 0.0, fit_delta = 0.0;
    bool fit_failed = false;
    double mf_omega = 0.0; // traveling-wave frequency, NaN when it does not exist
};

struct SpectrumSweepResult {
    SystemParams base;
    std::vector<double> omegas; // common grid of the heatmap
    std::vector<SweepPoint> points;
    std::vector<std::vector<double>> spectra; // one row per point, empty on failure
    RunReport report;
};

/// Keys: physical parameters, p_d_list, grid_half_width (0.5), grid_points (2001).
SpectrumSweepResult run_spectrum_sweep(const Config& cfg, const RunContext& ctx);

// -- steady-map -----------------------------------------------------------------

struct MapPoint {
    double gamma_plus = 0.0;
    double p_d = 0.0;
    bool ok = false;
    std::string error;
    double power = 0.0, n_phot = 0.0;
    double eig_delta_nu = 0.0, eig_delta = 0.0;
    double fit_delta_nu = 0.0, fit_delta = 0.0;
    bool fit_failed = false;
    bool hatched = false; // fit_delta > hatch_factor * V/N and fit_delta > fit_delta_nu / 2
};

struct SteadyMapResult {
    SystemParams base;
    std::vector<double> gamma_plus;
    std::vector<double> p_d;
    std::vector<MapPoint> points; // gamma_plus major
    std::vector<double> threshold_full;
    std::vector<double> threshold_decoupled;
    RunReport report;

    const MapPoint& at(std::size_t i_gamma, std::size_t i_pd) const { return points[i_gamma * p_d.size() + i_pd]; }
};

/// Keys: physical parameters, gamma_plus_list, p_d_list, hatch_factor (3), grid_points (2001).
SteadyMapResult run_steady_map(const Config& cfg, const RunContext& ctx);

// -- transient ------------------------------------------------------------------

struct ExpFit {
    double amplitude = 0.0;
    double rate = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Least squares of log|y| against t over samples with |y| > floor, R^2 in linear space.
ExpFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y, double floor);

struct TransientTrack {
    std::int64_t N = 0;
    bool ok = false;
    std::string error;
    std::vector<double> peak_omega; // per sample time
    std::vector<double> eig_delta;
    double residual = 0.0;          // peak_omega at the last sample
};

struct TransientResult {
    SystemParams base;
    std::vector<double> times;
    std::vector<double> mf_omega;
    ExpFit mf_fit;
    std::vector<TransientTrack> tracks;
    std::int64_t spectrogram_N = 0;
    std::vector<double> omegas;
    std::vector<std::vector<double>> spectrogram; // one row per time
    RunReport report;
};

/// Keys: physical parameters (final rates), N_list, spectrogram_N, t_end (2e4),
/// samples (201), settle_time (2e3), grid_half_width (0.3), grid_points (601),
/// fit_floor (1e-8, relative to |omega(0)|).
TransientResult run_transient(const Config& cfg, const RunContext& ctx);

// -- thresholds -----------------------------------------------------------------

struct ThresholdRow {
    double gamma_plus = 0.0;
    double ideal = 0.0;      // 1/2 + g+/(4V), the g- = gz = 0 form
    double full = 0.0;       // with g- and gz
    double decoupled = 0.0;  // undriven spins off the cavity
    double standard = 0.0;   // good-cavity p_c where the margin changes sign
    double standard_margin = 0.0; // at the configured p_d
    double bisected = 0.0;   // stability boundary of the mean-field Jacobian
};

struct ThresholdResult {
    SystemParams base;
    std::vector<ThresholdRow> rows;
    RunReport report;
};

/// Keys: physical parameters, gamma_plus_list. Undefined entries are NaN.
ThresholdResult run_threshold_report(const Config& cfg, const RunContext& ctx);

} // namespace srl
