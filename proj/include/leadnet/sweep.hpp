#pragma once

#include <leadnet/dynamics.hpp>
#include <leadnet/metrics.hpp>
#include <leadnet/params.hpp>
#include <leadnet/rng.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace leadnet {

/// One swept parameter. `name` is one of q, r, w, lambda, n, steps.
struct SweepAxis {
    std::string name;
    std::vector<double> values;

    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct SweepConfig {
    ModelParams base;
    std::vector<SweepAxis> axes;
    std::uint32_t replicates = 1;
    std::uint64_t master_seed = 0;
    MetricsConfig metrics;

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct GridRow {
    std::size_t index = 0;
    std::size_t point = 0;
    std::uint32_t replicate = 0;
    ModelParams params;
    std::uint64_t seed = 0;
};

struct SweepRow {
    std::size_t index = 0;
    std::size_t point = 0;
    std::uint32_t replicate = 0;
    ModelParams params;
    std::uint64_t seed = 0;
    /// Empty on success, otherwise the reason the row could not run.
    std::string error;
    std::uint64_t new_leaders = 0;
    std::size_t episodes = 0;
    double mean_tenure = 0.0;
    double median_tenure = 0.0;
    /// Fractions of steps with 0, 1, 2 and >= 3 individuals above threshold.
    std::array<double, 4> count_fractions{};
    std::optional<double> exponent;
    std::optional<double> r_squared;
    PhaseLabel phase = PhaseLabel::no_leader;

    bool ok() const { return error.empty(); }
};

namespace detail {

inline bool is_integral_axis(const std::string& name)
{
    return name == "lambda" || name == "n" || name == "steps";
}

/// Applies one axis value; throws InvalidParams for unknown names or values
/// outside the parameter's own range.
inline void apply_axis(ModelParams& p, const std::string& name, double v)
{
    const auto where = "axis " + name + " value " + std::to_string(v);
    if (name == "q" || name == "r" || name == "w") {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidParams(where + " is outside [0, 1]");
        }
        (name == "q" ? p.q : name == "r" ? p.r : p.w) = v;
        return;
    }
    if (!is_integral_axis(name)) {
        throw InvalidParams("unknown sweep axis '" + name + "'");
    }
    const double limit = name == "steps" ? 0x1p53 : 4294967295.0;
    if (!(v >= 0.0) || v != std::floor(v) || v > limit) {
        throw InvalidParams(where + " is not a non-negative integer");
    }
    if (name == "steps") {
        p.steps = static_cast<std::uint64_t>(v);
    } else if (name == "lambda") {
        if (v < 1) {
            throw InvalidParams(where + " must be at least 1");
        }
        p.lambda = static_cast<std::uint32_t>(v);
    } else {
        if (v < 2) {
            throw InvalidParams(where + " must be at least 2");
        }
        p.n = static_cast<std::uint32_t>(v);
    }
}

} // namespace detail

/// Number of rows expand_grid will produce.
inline std::size_t grid_size(const SweepConfig& config)
{
    std::size_t rows = config.replicates;
    for (const auto& axis : config.axes) {
        rows *= axis.values.size();
    }
    return rows;
}

/**
 * Cartesian product of the axes, first axis varying slowest and replicates
 * fastest. Row k gets seed derive_seed(master_seed, k). Combinations that are
 * jointly invalid (lambda >= n, say) are kept; run_sweep reports them per row.
 */
inline std::vector<GridRow> expand_grid(const SweepConfig& config)
{
    if (config.replicates < 1) {
        throw InvalidParams("replicates must be at least 1");
    }
    for (const auto& axis : config.axes) {
        if (axis.values.empty()) {
            throw InvalidParams("axis " + axis.name + " has no values");
        }
        ModelParams probe = config.base;
        for (double v : axis.values) {
            detail::apply_axis(probe, axis.name, v);
        }
    }

    std::vector<GridRow> rows;
    rows.reserve(grid_size(config));
    std::vector<std::size_t> digit(config.axes.size(), 0);
    std::size_t point = 0;
    for (;;) {
        ModelParams p = config.base;
        for (std::size_t a = 0; a < config.axes.size(); ++a) {
            detail::apply_axis(p, config.axes[a].name, config.axes[a].values[digit[a]]);
        }
        for (std::uint32_t rep = 0; rep < config.replicates; ++rep) {
            const std::size_t index = rows.size();
            GridRow row{index, point, rep, p, derive_seed(config.master_seed, index)};
            row.params.seed = row.seed;
            rows.push_back(row);
        }
        ++point;
        // odometer increment, last axis fastest
        std::size_t a = config.axes.size();
        while (a > 0) {
            --a;
            if (++digit[a] < config.axes[a].values.size()) {
                break;
            }
            digit[a] = 0;
            if (a == 0) {
                return rows;
            }
        }
        if (config.axes.empty()) {
            return rows;
        }
    }
}

/// Simulates one row and reduces it to its summary. Never throws; failures
/// land in SweepRow::error.
inline SweepRow run_row(const GridRow& row, const MetricsConfig& metrics)
{
    SweepRow out;
    out.index = row.index;
    out.point = row.point;
    out.replicate = row.replicate;
    out.params = row.params;
    out.seed = row.seed;
    try {
        validate(row.params);
        RunRecorder recorder(metrics, row.params.steps);
        simulate(row.params, recorder.observer());
        const RunSummary s = recorder.summarize();
        out.new_leaders = s.new_leaders;
        out.episodes = s.episodes.size();
        out.mean_tenure = s.episodes.empty() ? 0.0 : s.mean_tenure();
        out.median_tenure = s.episodes.empty() ? 0.0 : s.median_tenure();
        const auto f = s.count_fractions(4);
        std::copy(f.begin(), f.end(), out.count_fractions.begin());
        out.phase = classify_phase(s, metrics);
        try {
            const auto fit = fit_power_law(recorder.histogram());
            out.exponent = fit.exponent;
            out.r_squared = fit.r_squared;
        } catch (const InsufficientData&) {
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

/// Runs every grid row on `workers` threads. Rows are stored by index, so
/// the result does not depend on the worker count or completion order.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config, unsigned workers = 1)
{
    validate(config.metrics);
    const auto grid = expand_grid(config);
    std::vector<SweepRow> results(grid.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < grid.size(); k = next++) {
            results[k] = run_row(grid[k], config.metrics);
        }
    };
    workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(grid.size(), 1)));
    if (workers == 1) {
        work();
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back(work);
    }
    pool.clear(); // joins
    return results;
}

} // namespace leadnet
