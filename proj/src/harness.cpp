#include "srlaser/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "srlaser/cumulant.hpp"
#include "srlaser/meanfield.hpp"
#include "srlaser/spectrum.hpp"

namespace srl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Meta = std::vector<std::pair<std::string, std::string>>;

Meta header(const std::string& command, const RunContext& ctx, const SystemParams& base) {
    Meta m{{"software", std::string("srlaser ") + SRL_VERSION}, {"command", command},
           {"seed", std::to_string(ctx.seed)}};
    for (auto& kv : param_metadata(base)) m.push_back(std::move(kv));
    return m;
}

void emit(RunReport& report, const RunContext& ctx, const std::string& name, CsvTable table) {
    if (ctx.out_dir.empty()) return;
    std::filesystem::create_directories(ctx.out_dir);
    write_csv(ctx.out_dir / name, table);
    report.outputs.push_back({name, table.rows(), table.columns});
}

void write_manifest(const RunReport& report, const Config& cfg, const RunContext& ctx, const SystemParams& base) {
    if (ctx.out_dir.empty()) return;
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema"] = "srlaser.manifest/1";
    j["software"] = {{"name", "srlaser"}, {"version", SRL_VERSION}};
    j["command"] = report.command;
    j["seed"] = ctx.seed;
    j["workers"] = ctx.workers;

    ordered_json config = {{"path", nullptr}, {"sha256", nullptr}};
    if (!ctx.config_path.empty()) {
        config["path"] = ctx.config_path.string();
        config["sha256"] = sha256_file(ctx.config_path);
    }
    config["entries"] = ordered_json::object();
    for (const auto& [k, v] : cfg.entries()) config["entries"][k] = v;
    j["config"] = config;

    j["parameters"] = ordered_json::object();
    for (const auto& [k, v] : param_metadata(base)) j["parameters"][k] = v;

    j["outputs"] = ordered_json::array();
    for (const auto& o : report.outputs)
        j["outputs"].push_back({{"path", o.path.string()},
                                {"sha256", sha256_file(ctx.out_dir / o.path)},
                                {"rows", o.rows},
                                {"columns", o.columns}});
    j["failures"] = ordered_json::array();
    for (const auto& f : report.failures) j["failures"].push_back({{"index", f.index}, {"what", f.what}});
    j["warnings"] = report.warnings;
    j["summary"] = ordered_json::object();
    for (const auto& [k, v] : report.summary) j["summary"][k] = std::isfinite(v) ? ordered_json(v) : ordered_json();

    std::ofstream out(ctx.out_dir / "manifest.json");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest in " + ctx.out_dir.string());
}

void note_unused(RunReport& report, const Config& cfg) {
    for (const auto& k : cfg.unused_keys()) {
        spdlog::warn("config key '{}' is not used by {}", k, report.command);
        report.warnings.push_back("unused config key: " + k);
    }
}

int workers_of(const RunContext& ctx) { return std::max(1, ctx.workers); }

SystemParams with(SystemParams p, double p_d, double gamma_plus) {
    p.p_d = p_d;
    p.gamma_plus = gamma_plus;
    p.N_d_rounded = true; // the sweep echoes its own grid; no per-point rounding warnings
    return derive(p);
}

struct SteadyAnalysis {
    CumulantState state;
    LinewidthEstimate lw;
    double peak = 0.0;
    LorentzianFit fit;
    bool fit_failed = false;
    RegressionSystem sys;
};

SteadyAnalysis analyse_steady(const SystemParams& p, std::size_t grid_points) {
    SteadyAnalysis a;
    a.state = cumulant_steady_state(p).state;
    a.sys = regression_system(p, a.state);
    a.lw = linewidth_from_eigenvalues(a.sys.M);
    const std::vector<double> grid = peak_grid(a.lw, grid_points);
    const SpectrumGrid spec = steady_state_spectrum_serial(a.sys, grid);
    a.peak = peak_frequency(a.sys, grid);
    try {
        a.fit = fit_double_lorentzian(spec, a.lw);
    } catch (const FitError& e) {
        a.fit = e.best();
        a.fit_failed = true;
    }
    return a;
}

double b2d(bool b) { return b ? 1.0 : 0.0; }

} // namespace

double RunReport::summary_value(const std::string& key) const {
    for (const auto& [k, v] : summary)
        if (k == key) return v;
    throw std::out_of_range("no summary entry '" + key + "'");
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(std::uint64_t(index) >> 32)};
    std::mt19937_64 rng(seq);
    return rng();
}

// -- spectrum-sweep -------------------------------------------------------------

SpectrumSweepResult run_spectrum_sweep(const Config& cfg, const RunContext& ctx) {
    SpectrumSweepResult r;
    r.report.command = "spectrum-sweep";
    const std::vector<double> pds = cfg.get_list("p_d_list");
    r.base = params_from_config(cfg, pds.back());
    const double half = cfg.get_double("grid_half_width", 0.5);
    const auto npts = static_cast<std::size_t>(cfg.get_int("grid_points", 2001));
    r.omegas = uniform_grid(half, npts);
    note_unused(r.report, cfg);

    const auto n = static_cast<std::ptrdiff_t>(pds.size());
    r.points.resize(pds.size());
    r.spectra.resize(pds.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers_of(ctx))
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        SweepPoint& pt = r.points[k];
        pt.p_d = pds[k];
        try {
            const SystemParams p = with(r.base, pds[k], r.base.gamma_plus);
            const TravelingWaveSolution tw = traveling_wave_frequency(p);
            pt.mf_omega = tw.exists ? tw.omega : kNaN;
            const SteadyAnalysis a = analyse_steady(p, npts);
            const PowerReport pw = output_power(a.state, p);
            pt.n_phot = pw.n_phot;
            pt.power = pw.power;
            pt.peak_omega = a.peak;
            pt.eig_delta_nu = a.lw.delta_nu;
            pt.eig_delta = a.lw.delta;
            pt.fit_delta_nu = a.fit.delta_nu;
            pt.fit_delta = a.fit.delta;
            pt.fit_failed = a.fit_failed;
            r.spectra[k] = steady_state_spectrum_serial(a.sys, r.omegas).values;
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
    }

    CsvTable points, heat;
    points.meta = heat.meta = header(r.report.command, ctx, r.base);
    std::vector<double> c_pd, c_n, c_pow, c_peak, c_enu, c_ed, c_fnu, c_fd, c_ff, c_mf, c_ok;
    std::vector<double> h_pd, h_w, h_s;
    for (std::size_t k = 0; k < r.points.size(); ++k) {
        const SweepPoint& pt = r.points[k];
        if (!pt.ok) r.report.failures.push_back({k, pt.error});
        c_pd.push_back(pt.p_d);
        c_ok.push_back(b2d(pt.ok));
        c_n.push_back(pt.ok ? pt.n_phot : kNaN);
        c_pow.push_back(pt.ok ? pt.power : kNaN);
        c_peak.push_back(pt.ok ? pt.peak_omega : kNaN);
        c_enu.push_back(pt.ok ? pt.eig_delta_nu : kNaN);
        c_ed.push_back(pt.ok ? pt.eig_delta : kNaN);
        c_fnu.push_back(pt.ok ? pt.fit_delta_nu : kNaN);
        c_fd.push_back(pt.ok ? pt.fit_delta : kNaN);
        c_ff.push_back(b2d(pt.fit_failed));
        c_mf.push_back(pt.mf_omega);
        if (!pt.ok) continue;
        for (std::size_t w = 0; w < r.omegas.size(); ++w) {
            h_pd.push_back(pt.p_d);
            h_w.push_back(r.omegas[w]);
            h_s.push_back(r.spectra[k][w]);
        }
    }
    points.add_column("p_d", c_pd);
    points.add_column("ok", c_ok);
    points.add_column("n_phot", c_n);
    points.add_column("power", c_pow);
    points.add_column("peak_omega", c_peak);
    points.add_column("delta_nu_eig", c_enu);
    points.add_column("delta_eig", c_ed);
    points.add_column("delta_nu_fit", c_fnu);
    points.add_column("delta_fit", c_fd);
    points.add_column("fit_failed", c_ff);
    points.add_column("mf_omega", c_mf);
    heat.add_column("p_d", h_pd);
    heat.add_column("omega", h_w);
    heat.add_column("S", h_s);
    emit(r.report, ctx, "spectrum_sweep.csv", std::move(heat));
    emit(r.report, ctx, "spectrum_sweep_points.csv", std::move(points));
    r.report.summary.emplace_back("points", static_cast<double>(r.points.size()));
    r.report.summary.emplace_back("failures", static_cast<double>(r.report.failures.size()));
    write_manifest(r.report, cfg, ctx, r.base);
    return r;
}

// -- steady-map -----------------------------------------------------------------

SteadyMapResult run_steady_map(const Config& cfg, const RunContext& ctx) {
    SteadyMapResult r;
    r.report.command = "steady-map";
    r.gamma_plus = cfg.get_list("gamma_plus_list");
    r.p_d = cfg.get_list("p_d_list");
    r.base = params_from_config(cfg, r.p_d.back());
    const double hatch = cfg.get_double("hatch_factor", 3.0);
    const auto npts = static_cast<std::size_t>(cfg.get_int("grid_points", 2001));
    note_unused(r.report, cfg);

    const double dnu_min = r.base.V / static_cast<double>(r.base.N);
    const std::size_t ng = r.gamma_plus.size(), np = r.p_d.size();
    r.points.resize(ng * np);
    const auto n = static_cast<std::ptrdiff_t>(r.points.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers_of(ctx))
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        MapPoint& pt = r.points[k];
        pt.gamma_plus = r.gamma_plus[static_cast<std::size_t>(k) / np];
        pt.p_d = r.p_d[static_cast<std::size_t>(k) % np];
        try {
            const SystemParams p = with(r.base, pt.p_d, pt.gamma_plus);
            const SteadyAnalysis a = analyse_steady(p, npts);
            const PowerReport pw = output_power(a.state, p);
            pt.power = pw.power;
            pt.n_phot = pw.n_phot;
            pt.eig_delta_nu = a.lw.delta_nu;
            pt.eig_delta = a.lw.delta;
            pt.fit_delta_nu = a.fit.delta_nu;
            pt.fit_delta = a.fit.delta;
            pt.fit_failed = a.fit_failed;
            pt.hatched = !a.fit_failed && a.fit.delta > hatch * dnu_min && a.fit.delta > a.fit.delta_nu / 2.0;
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
    }

    for (double g : r.gamma_plus) {
        SystemParams p = with(r.base, r.base.p_d, g);
        double full = kNaN, dec = kNaN;
        try {
            full = lasing_threshold(p);
        } catch (const UndefinedQuantityError&) {
        }
        try {
            dec = lasing_threshold_decoupled(p);
        } catch (const UndefinedQuantityError&) {
        }
        r.threshold_full.push_back(full);
        r.threshold_decoupled.push_back(dec);
    }

    CsvTable map, thr;
    map.meta = thr.meta = header(r.report.command, ctx, r.base);
    map.meta.emplace_back("hatch_factor", format_double(hatch));
    map.meta.emplace_back("delta_nu_min", format_double(dnu_min));
    std::vector<double> c_g, c_pd, c_ok, c_pow, c_n, c_npa, c_enu, c_ed, c_fnu, c_fd, c_ff, c_h;
    for (std::size_t k = 0; k < r.points.size(); ++k) {
        const MapPoint& pt = r.points[k];
        if (!pt.ok) r.report.failures.push_back({k, pt.error});
        c_g.push_back(pt.gamma_plus);
        c_pd.push_back(pt.p_d);
        c_ok.push_back(b2d(pt.ok));
        c_pow.push_back(pt.ok ? pt.power : kNaN);
        c_n.push_back(pt.ok ? pt.n_phot : kNaN);
        c_npa.push_back(pt.ok ? pt.n_phot / static_cast<double>(r.base.N) : kNaN);
        c_enu.push_back(pt.ok ? pt.eig_delta_nu : kNaN);
        c_ed.push_back(pt.ok ? pt.eig_delta : kNaN);
        c_fnu.push_back(pt.ok ? pt.fit_delta_nu : kNaN);
        c_fd.push_back(pt.ok ? pt.fit_delta : kNaN);
        c_ff.push_back(b2d(pt.fit_failed || !pt.ok));
        c_h.push_back(b2d(pt.hatched));
    }
    map.add_column("gamma_plus", c_g);
    map.add_column("p_d", c_pd);
    map.add_column("ok", c_ok);
    map.add_column("power", c_pow);
    map.add_column("n_phot", c_n);
    map.add_column("n_per_atom", c_npa);
    map.add_column("delta_nu_eig", c_enu);
    map.add_column("delta_eig", c_ed);
    map.add_column("delta_nu_fit", c_fnu);
    map.add_column("delta_fit", c_fd);
    map.add_column("fit_failed", c_ff);
    map.add_column("hatched", c_h);
    thr.add_column("gamma_plus", r.gamma_plus);
    thr.add_column("p_c", r.threshold_full);
    thr.add_column("p_c_decoupled", r.threshold_decoupled);
    emit(r.report, ctx, "steady_map.csv", std::move(map));
    emit(r.report, ctx, "steady_map_threshold.csv", std::move(thr));
    r.report.summary.emplace_back("points", static_cast<double>(r.points.size()));
    r.report.summary.emplace_back("failures", static_cast<double>(r.report.failures.size()));
    write_manifest(r.report, cfg, ctx, r.base);
    return r;
}

// -- transient ------------------------------------------------------------------

ExpFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y, double floor) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(std::abs(y[k]) > floor)) continue;
        const double ly = std::log(std::abs(y[k]));
        sx += t[k];
        sy += ly;
        sxx += t[k] * t[k];
        sxy += t[k] * ly;
        ++m;
    }
    ExpFit f;
    f.points = m;
    if (m < 3) return f;
    const double md = static_cast<double>(m);
    const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / md;
    f.rate = -slope;
    f.amplitude = std::exp(icpt);

    double mean = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (std::abs(y[k]) > floor) mean += std::abs(y[k]);
    mean /= md;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(std::abs(y[k]) > floor)) continue;
        const double model = f.amplitude * std::exp(-f.rate * t[k]);
        ss_res += (std::abs(y[k]) - model) * (std::abs(y[k]) - model);
        ss_tot += (std::abs(y[k]) - mean) * (std::abs(y[k]) - mean);
    }
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return f;
}

TransientResult run_transient(const Config& cfg, const RunContext& ctx) {
    TransientResult r;
    r.report.command = "transient";
    r.base = params_from_config(cfg);
    std::vector<std::int64_t> Ns;
    for (double v : cfg.get_list("N_list", {static_cast<double>(r.base.N)})) Ns.push_back(std::llround(v));
    r.spectrogram_N = cfg.get_int("spectrogram_N", Ns.front());
    const double t_end = cfg.get_double("t_end", 2e4);
    const auto samples = static_cast<std::size_t>(cfg.get_int("samples", 201));
    const double settle = cfg.get_double("settle_time", 2e3);
    const double half = cfg.get_double("grid_half_width", 0.3);
    const auto npts = static_cast<std::size_t>(cfg.get_int("grid_points", 601));
    const double fit_floor = cfg.get_double("fit_floor", 1e-8);
    note_unused(r.report, cfg);
    if (samples < 2 || !(t_end > 0.0)) throw ConfigError("samples", "need samples >= 2 and t_end > 0");

    r.times.resize(samples);
    for (std::size_t k = 0; k < samples; ++k)
        r.times[k] = t_end * static_cast<double>(k) / static_cast<double>(samples - 1);
    r.omegas = uniform_grid(half, npts);

    auto dissipationless = [](SystemParams p) {
        p.gamma_minus = 0.0;
        p.gamma_z = 0.0;
        return derive(p);
    };
    ParamInput in = param_input(cfg);

    // mean field: settle on the traveling wave, then switch the dissipation on
    {
        const SystemParams p = r.base;
        const SystemParams p0 = dissipationless(p);
        const std::vector<double> ts{settle};
        const MeanFieldRun pre = run_meanfield(p0, default_initial_state(p0, point_seed(ctx.seed, 0)), ts);
        const MeanFieldRun run = run_meanfield(p, pre.states.back(), r.times);
        for (const auto& s : run.states) r.mf_omega.push_back(std::abs(instantaneous_frequency(s, p)));
        r.mf_fit = fit_exponential(r.times, r.mf_omega, fit_floor * r.mf_omega.front());
    }

    const std::size_t track_points = 2001;
    r.tracks.resize(Ns.size());
    std::vector<std::size_t> slow(Ns.size(), 0);
    std::vector<std::vector<std::vector<double>>> specs(Ns.size());
    const auto nN = static_cast<std::ptrdiff_t>(Ns.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers_of(ctx))
    for (std::ptrdiff_t k = 0; k < nN; ++k) {
        TransientTrack& tr = r.tracks[k];
        tr.N = Ns[k];
        try {
            ParamInput ik = in;
            ik.N = Ns[k];
            const SystemParams p = from_input(ik);
            const SystemParams p0 = dissipationless(p);
            const CumulantState init = cumulant_steady_state(p0).state;
            const CumulantRun run = run_cumulant(p, init, r.times, cumulant_integrator_options(p));
            for (const CumulantState& s : run.states) {
                const RegressionSystem sys = regression_system(p, s);
                const LinewidthEstimate lw = linewidth_from_eigenvalues(sys.M);
                tr.peak_omega.push_back(peak_frequency(sys, peak_grid(lw, track_points)));
                tr.eig_delta.push_back(lw.delta);
                if (Ns[k] == r.spectrogram_N) {
                    if (!quasi_static_ok(p, sys.M)) ++slow[k];
                    specs[k].push_back(steady_state_spectrum_serial(sys, r.omegas).values);
                }
            }
            tr.residual = tr.peak_omega.back();
            tr.ok = true;
        } catch (const std::exception& e) {
            tr.error = e.what();
        }
    }

    for (std::size_t k = 0; k < r.tracks.size(); ++k) {
        if (!r.tracks[k].ok) r.report.failures.push_back({k, r.tracks[k].error});
        if (!specs[k].empty()) r.spectrogram = std::move(specs[k]);
        if (slow[k] > 0) {
            const std::string w = "quasi-static spectrum: Gamma not small against the line frequency at " +
                                  std::to_string(slow[k]) + " of " + std::to_string(samples) + " times (N = " +
                                  std::to_string(Ns[k]) + ")";
            spdlog::warn("{}", w);
            r.report.warnings.push_back(w);
        }
    }

    const double G = r.base.Gamma;
    r.report.summary.emplace_back("mf_rate", r.mf_fit.rate);
    r.report.summary.emplace_back("mf_r2", r.mf_fit.r2);
    r.report.summary.emplace_back("mf_rate_over_Gamma", G > 0 ? r.mf_fit.rate / G : kNaN);
    r.report.summary.emplace_back("mf_rate_over_half_Gamma", G > 0 ? r.mf_fit.rate / (G / 2.0) : kNaN);
    r.report.summary.emplace_back("mf_omega_end", r.mf_omega.back());
    for (const auto& tr : r.tracks)
        r.report.summary.emplace_back("residual_N" + std::to_string(tr.N), tr.ok ? tr.residual : kNaN);

    const Meta meta = header(r.report.command, ctx, r.base);
    CsvTable track;
    track.meta = meta;
    track.meta.emplace_back("mf_fit_rate", format_double(r.mf_fit.rate));
    track.meta.emplace_back("mf_fit_amplitude", format_double(r.mf_fit.amplitude));
    track.meta.emplace_back("mf_fit_r2", format_double(r.mf_fit.r2));
    std::vector<double> c_N, c_t, c_peak, c_eig, c_mf;
    for (const auto& tr : r.tracks) {
        if (!tr.ok) continue;
        for (std::size_t k = 0; k < samples; ++k) {
            c_N.push_back(static_cast<double>(tr.N));
            c_t.push_back(r.times[k]);
            c_peak.push_back(tr.peak_omega[k]);
            c_eig.push_back(tr.eig_delta[k]);
            c_mf.push_back(r.mf_omega[k]);
        }
    }
    track.add_column("N", c_N);
    track.add_column("t", c_t);
    track.add_column("peak_omega", c_peak);
    track.add_column("delta_eig", c_eig);
    track.add_column("mf_omega", c_mf);
    emit(r.report, ctx, "transient_track.csv", std::move(track));

    if (!r.spectrogram.empty()) {
        CsvTable sg;
        sg.meta = meta;
        sg.meta.emplace_back("spectrogram_N", std::to_string(r.spectrogram_N));
        std::vector<double> c_tt, c_w, c_s;
        for (std::size_t k = 0; k < samples; ++k)
            for (std::size_t w = 0; w < r.omegas.size(); ++w) {
                c_tt.push_back(r.times[k]);
                c_w.push_back(r.omegas[w]);
                c_s.push_back(r.spectrogram[k][w]);
            }
        sg.add_column("t", c_tt);
        sg.add_column("omega", c_w);
        sg.add_column("S", c_s);
        emit(r.report, ctx, "transient_spectrogram.csv", std::move(sg));
    }
    write_manifest(r.report, cfg, ctx, r.base);
    return r;
}

// -- thresholds -----------------------------------------------------------------

ThresholdResult run_threshold_report(const Config& cfg, const RunContext& ctx) {
    ThresholdResult r;
    r.report.command = "thresholds";
    r.base = params_from_config(cfg);
    const std::vector<double> gps = cfg.get_list("gamma_plus_list", {r.base.gamma_plus});
    note_unused(r.report, cfg);

    r.rows.resize(gps.size());
    const auto n = static_cast<std::ptrdiff_t>(gps.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers_of(ctx))
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const SystemParams p = with(r.base, r.base.p_d, gps[k]);
        ThresholdRow& row = r.rows[k];
        row.gamma_plus = gps[k];
        try {
            SystemParams q = p;
            q.gamma_minus = q.gamma_z = 0.0;
            row.ideal = lasing_threshold(derive(q));
        } catch (const UndefinedQuantityError&) {
            row.ideal = kNaN;
        }
        try {
            row.full = lasing_threshold(p);
        } catch (const UndefinedQuantityError&) {
            row.full = kNaN;
        }
        try {
            row.decoupled = lasing_threshold_decoupled(p);
        } catch (const UndefinedQuantityError&) {
            row.decoupled = kNaN;
        }
        try {
            // the margin is affine in p_d
            const double m0 = standard_laser_threshold(with(p, 0.0, p.gamma_plus)).margin;
            const double m1 = standard_laser_threshold(with(p, 1.0, p.gamma_plus)).margin;
            row.standard = m1 > m0 ? -m0 / (m1 - m0) : kNaN;
        } catch (const UndefinedQuantityError&) {
            row.standard = kNaN;
        }
        try {
            row.standard_margin = standard_laser_threshold(p).margin;
        } catch (const UndefinedQuantityError&) {
            row.standard_margin = kNaN;
        }
        const std::optional<double> b = bisect_stability_threshold(p);
        row.bisected = b ? *b : kNaN;
    }
    for (const auto& row : r.rows) {
        const std::string g = format_double(row.gamma_plus);
        if (std::isnan(row.full)) r.report.warnings.push_back("threshold undefined at gamma_plus = " + g);
        if (std::isnan(row.decoupled))
            r.report.warnings.push_back("decoupled threshold undefined (no inversion) at gamma_plus = " + g);
        if (std::isnan(row.standard))
            r.report.warnings.push_back("standard-laser threshold undefined at gamma_plus = " + g);
    }

    CsvTable t;
    t.meta = header(r.report.command, ctx, r.base);
    std::vector<double> c_g, c_i, c_f, c_d, c_s, c_m, c_b;
    for (const auto& row : r.rows) {
        c_g.push_back(row.gamma_plus);
        c_i.push_back(row.ideal);
        c_f.push_back(row.full);
        c_d.push_back(row.decoupled);
        c_s.push_back(row.standard);
        c_m.push_back(row.standard_margin);
        c_b.push_back(row.bisected);
    }
    t.add_column("gamma_plus", c_g);
    t.add_column("p_c_ideal", c_i);
    t.add_column("p_c", c_f);
    t.add_column("p_c_decoupled", c_d);
    t.add_column("p_c_standard", c_s);
    t.add_column("standard_margin", c_m);
    t.add_column("p_c_bisected", c_b);
    emit(r.report, ctx, "thresholds.csv", std::move(t));
    write_manifest(r.report, cfg, ctx, r.base);
    return r;
}

} // namespace srl
