#pragma once

#include <leadnet/dynamics.hpp>
#include <leadnet/io.hpp>
#include <leadnet/metrics.hpp>
#include <leadnet/sweep.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace leadnet::cli {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

struct RunOptions {
    fs::path config;
    fs::path out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> steps;
    std::uint64_t record_stride = 1;
    std::uint64_t dump_status_stride = 0;
};

struct SweepOptions {
    fs::path config;
    fs::path out;
    unsigned workers = 1;
};

struct AnalyzeOptions {
    fs::path in;
    std::string fit_range;
};

/// Parses "A:B" into an inclusive bin range.
inline std::pair<std::uint32_t, std::uint32_t> parse_fit_range(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw CLI::ValidationError("--fit-range", "expected A:B");
    }
    try {
        const auto a = io::parse_uint(std::string_view(text).substr(0, colon));
        const auto b = io::parse_uint(std::string_view(text).substr(colon + 1));
        if (a > b || b > 0xFFFFFFFFULL) {
            throw CLI::ValidationError("--fit-range", "need A <= B");
        }
        return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    } catch (const io::IoError&) {
        throw CLI::ValidationError("--fit-range", "expected two non-negative integers A:B");
    }
}

namespace detail {

inline std::optional<PowerLawFit> try_fit(const DegreeHistogram& hist,
                                          std::optional<std::pair<std::uint32_t, std::uint32_t>> range)
{
    try {
        return range ? fit_power_law(hist, range->first, range->second) : fit_power_law(hist);
    } catch (const InsufficientData&) {
        return std::nullopt;
    }
}

} // namespace detail

inline int run_command(const RunOptions& opt, std::ostream& out)
{
    io::Config cfg = io::load_config(opt.config);
    if (opt.seed) {
        cfg.model.seed = *opt.seed;
    }
    if (opt.steps) {
        cfg.model.steps = *opt.steps;
    }
    validate(cfg.model);
    fs::create_directories(opt.out);

    const auto start = std::chrono::steady_clock::now();
    RunRecorder recorder(cfg.metrics, cfg.model.steps, opt.record_stride);
    std::vector<StepObserver> observers{recorder.observer()};
    std::optional<io::StatusSnapshotWriter> snapshots;
    if (opt.dump_status_stride > 0) {
        snapshots.emplace(opt.out / "status_snapshots.csv", cfg.model.n);
        observers.push_back([&](const StepView& v) {
            if (v.step % opt.dump_status_stride == 0) {
                snapshots->write(v.state);
            }
        });
    }
    const NetworkState final_state = simulate(cfg.model, observers);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const RunSummary summary = recorder.summarize();
    std::vector<std::string> files{"timeseries.csv", "crossings.csv", "episodes.csv",
                                   "histogram.csv",  "network_nodes.csv", "network_links.csv",
                                   "summary.json"};
    io::emit_timeseries(recorder.records(), opt.out / "timeseries.csv");
    io::emit_crossings(recorder.trajectory().crossings, opt.out / "crossings.csv");
    io::emit_episodes(summary.episodes, opt.out / "episodes.csv");
    io::emit_histogram(recorder.histogram(), opt.out / "histogram.csv");
    io::emit_network(final_state, opt.out / "network_nodes.csv", opt.out / "network_links.csv");
    const auto fit = detail::try_fit(recorder.histogram(), std::nullopt);
    io::write_json(io::summary_json(summary, cfg.metrics, fit), opt.out / "summary.json");
    if (snapshots) {
        snapshots->close();
        files.push_back("status_snapshots.csv");
    }

    io::RunManifest manifest;
    manifest.command = "run";
    manifest.params = cfg.model;
    manifest.metrics = cfg.metrics;
    manifest.record_stride = opt.record_stride;
    manifest.wall_seconds = seconds;
    for (const auto& f : files) {
        manifest.add_file(opt.out, f);
    }
    io::write_json(io::to_json(manifest), opt.out / "manifest.json");

    out << "run: " << cfg.model.steps << " steps in " << seconds << " s, phase "
        << to_string(classify_phase(summary, cfg.metrics)) << ", " << summary.episodes.size()
        << " episodes -> " << opt.out.string() << '\n';
    return exit_ok;
}

inline int sweep_command(const SweepOptions& opt, std::ostream& out)
{
    const io::Config cfg = io::load_config(opt.config);
    if (!cfg.sweep) {
        throw io::ConfigError("/sweep", "sweep command needs a \"sweep\" section");
    }
    const std::size_t rows = grid_size(*cfg.sweep);
    out << "sweep: " << rows << " rows on " << opt.workers << " worker(s)\n" << std::flush;
    fs::create_directories(opt.out);

    const auto start = std::chrono::steady_clock::now();
    const auto result = run_sweep(*cfg.sweep, opt.workers);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::emit_sweep(result, opt.out / "sweep.csv");

    io::RunManifest manifest;
    manifest.command = "sweep";
    manifest.params = cfg.model;
    manifest.metrics = cfg.metrics;
    manifest.sweep = io::to_json(cfg)["sweep"];
    manifest.wall_seconds = seconds;
    manifest.add_file(opt.out, "sweep.csv");
    io::write_json(io::to_json(manifest), opt.out / "manifest.json");

    std::size_t failed = 0;
    for (const auto& r : result) {
        failed += r.ok() ? 0 : 1;
    }
    out << "sweep: " << rows - failed << " ok, " << failed << " failed in " << seconds << " s\n";
    return exit_ok;
}

/// Recomputes the run-level observables from a run directory's CSVs and
/// writes analysis.json next to them.
inline int analyze_command(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err)
{
    const io::RunManifest manifest = io::read_manifest(opt.in / "manifest.json");
    if (manifest.command != "run") {
        throw io::IoError("analyze needs the output directory of a run");
    }
    for (const auto& name : io::verify_manifest(manifest, opt.in)) {
        err << "warning: " << name << " does not match its manifest checksum\n";
    }
    std::optional<std::pair<std::uint32_t, std::uint32_t>> range;
    if (!opt.fit_range.empty()) {
        range = parse_fit_range(opt.fit_range);
    }

    const auto records = io::read_timeseries(opt.in / "timeseries.csv");
    const auto crossings = io::read_crossings(opt.in / "crossings.csv");
    const auto hist = io::read_histogram(opt.in / "histogram.csv", manifest.params.n);

    RunRecorder recorder(manifest.metrics, manifest.params.steps);
    recorder.set_population(manifest.params.n);
    std::size_t c = 0;
    std::vector<ThresholdCrossing> batch;
    for (const auto& rec : records) {
        batch.clear();
        while (c < crossings.size() && crossings[c].step <= rec.step) {
            batch.push_back(crossings[c++]);
        }
        recorder.add(rec, batch);
    }
    const RunSummary summary = recorder.summarize();
    const auto fit = detail::try_fit(hist, range);
    const auto doc = io::summary_json(summary, manifest.metrics, fit);
    io::write_json(doc, opt.in / "analysis.json");
    out << doc.dump(2) << '\n';
    return exit_ok;
}

/// Entry point of the `leadnet` tool. Exit codes: 0 success, 1 runtime
/// failure, 2 usage error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr)
{
    CLI::App app{"Dynamic alliance-network leadership simulator", "leadnet"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Simulate one run and write its data files");
    run->add_option("--config", run_opt.config, "JSON configuration")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_opt.out, "Output directory")->required();
    run->add_option("--seed", run_opt.seed, "Override the configured seed");
    run->add_option("--steps", run_opt.steps, "Override the configured number of steps");
    run->add_option("--record-stride", run_opt.record_stride, "Keep every K-th step in timeseries.csv")
        ->check(CLI::PositiveNumber);
    run->add_option("--dump-status-stride", run_opt.dump_status_stride,
                    "Write all statuses every K steps to status_snapshots.csv (0 = off)");

    SweepOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "Run a parameter grid and write sweep.csv");
    sweep->add_option("--config", sweep_opt.config, "JSON configuration with a sweep section")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_opt.out, "Output directory")->required();
    sweep->add_option("--workers", sweep_opt.workers, "Worker threads")->check(CLI::PositiveNumber);

    AnalyzeOptions analyze_opt;
    auto* analyze = app.add_subcommand("analyze", "Recompute metrics from a run directory");
    analyze->add_option("--in", analyze_opt.in, "Run output directory")->required()->check(CLI::ExistingDirectory);
    analyze->add_option("--fit-range", analyze_opt.fit_range, "Power-law fit bins A:B (inclusive)");

    try {
        app.parse(argc, argv);
        if (!analyze_opt.fit_range.empty()) {
            parse_fit_range(analyze_opt.fit_range);
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "leadnet: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (run->parsed()) {
            return run_command(run_opt, out);
        }
        if (sweep->parsed()) {
            return sweep_command(sweep_opt, out);
        }
        return analyze_command(analyze_opt, out, err);
    } catch (const std::exception& e) {
        err << "leadnet: " << e.what() << '\n';
        return exit_runtime;
    }
}

} // namespace leadnet::cli
