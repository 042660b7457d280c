// srlaser: command-line front end for the harness runs.

#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "srlaser/harness.hpp"

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    int workers = 1;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "key = value parameter file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    sub->add_option("--workers", c.workers, "parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
}

void print_report(const srl::RunReport& r, const std::string& out) {
    std::printf("%s: wrote %zu file(s) to %s\n", r.command.c_str(), r.outputs.size(), out.c_str());
    for (const auto& f : r.failures) std::printf("  point %zu failed: %s\n", f.index, f.what.c_str());
    for (const auto& [k, v] : r.summary) std::printf("  %s = %.10g\n", k.c_str(), v);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partially driven superradiant laser simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(SRL_VERSION));
    std::string level = "info";
    app.add_option("--log-level", level, "trace, debug, info, warn, error, off")->capture_default_str();

    Common c;
    auto* sweep = app.add_subcommand("spectrum-sweep", "emission spectra against p_d");
    auto* map = app.add_subcommand("steady-map", "steady-state power, linewidth and shift over (gamma_plus, p_d)");
    auto* trans = app.add_subcommand("transient", "frequency shift after switching on decay and dephasing");
    auto* thr = app.add_subcommand("thresholds", "lasing thresholds and the bisected stability boundary");
    for (auto* s : {sweep, map, trans, thr}) add_common(s, c);

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(level));

    try {
        const srl::Config cfg = srl::Config::load(c.config);
        const srl::RunContext ctx{c.out, c.seed, c.workers, c.config};
        if (sweep->parsed()) print_report(srl::run_spectrum_sweep(cfg, ctx).report, c.out);
        if (map->parsed()) print_report(srl::run_steady_map(cfg, ctx).report, c.out);
        if (trans->parsed()) print_report(srl::run_transient(cfg, ctx).report, c.out);
        if (thr->parsed()) print_report(srl::run_threshold_report(cfg, ctx).report, c.out);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
