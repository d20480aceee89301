#pragma once

#include <leadnet/dynamics.hpp>
#include <leadnet/network.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace leadnet {

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MetricsConfig {
    /// Status level an individual must strictly exceed to count as a leader.
    double threshold = 3.0;
    /// A leader is new unless it is among the last `leader_memory` distinct leaders.
    std::uint32_t leader_memory = 2;
    /// Debounce for threshold crossings: dips below the threshold shorter than
    /// this are bridged, then above-threshold intervals shorter than this are
    /// dropped. 0 keeps every interval.
    std::uint64_t episode_min_steps = 0;
    std::uint64_t histogram_sample_period = 100;
    /// classify_phase: minimum fraction of window steps with a leader above threshold.
    double p_lead = 0.5;
    /// classify_phase: trailing fraction of the run used as the stability window.
    double stable_window = 0.8;

    friend bool operator==(const MetricsConfig&, const MetricsConfig&) = default;
};

inline void validate(const MetricsConfig& cfg)
{
    if (!(cfg.threshold > 1.0)) {
        throw InvalidParams("threshold must exceed 1 (the uniform status)");
    }
    if (cfg.leader_memory < 1) {
        throw InvalidParams("leader_memory must be at least 1");
    }
    if (cfg.histogram_sample_period < 1) {
        throw InvalidParams("histogram_sample_period must be at least 1");
    }
    if (!(cfg.p_lead >= 0.0 && cfg.p_lead <= 1.0)) {
        throw InvalidParams("p_lead must lie in [0, 1]");
    }
    if (!(cfg.stable_window > 0.0 && cfg.stable_window <= 1.0)) {
        throw InvalidParams("stable_window must lie in (0, 1]");
    }
}

struct StepRecord {
    std::uint64_t step = 0;
    IndividualId leader = 0;
    double leader_status = 0.0;
    std::uint32_t count_above = 0;
    double total_status = 0.0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// Individual `individual` moved above (up) or back to/below (down) the
/// threshold at `step`.
struct ThresholdCrossing {
    std::uint64_t step = 0;
    IndividualId individual = 0;
    bool up = true;

    friend bool operator==(const ThresholdCrossing&, const ThresholdCrossing&) = default;
};

/// `leader` holds maximal status from `step` until the next run starts.
struct LeaderRun {
    std::uint64_t step = 0;
    IndividualId leader = 0;

    friend bool operator==(const LeaderRun&, const LeaderRun&) = default;
};

struct LeaderEpisode {
    IndividualId individual = 0;
    std::uint64_t rise_step = 0;
    std::uint64_t above_from = 0;
    /// First step at or below the threshold (exclusive end).
    std::uint64_t above_to = 0;
    std::uint64_t tenure_above = 0;
    /// Still above the threshold when the record ended.
    bool censored = false;

    friend bool operator==(const LeaderEpisode&, const LeaderEpisode&) = default;
};

/// Highest status, ties to the lowest id.
inline std::pair<IndividualId, double> leader_of(std::span<const double> statuses)
{
    IndividualId best = 0;
    for (IndividualId i = 1; i < statuses.size(); ++i) {
        if (statuses[i] > statuses[best]) {
            best = i;
        }
    }
    return {best, statuses.empty() ? 0.0 : statuses[best]};
}

inline std::pair<IndividualId, double> leader_of(const NetworkState& state)
{
    return leader_of(state.statuses());
}

inline std::uint32_t count_above(std::span<const double> statuses, double threshold)
{
    return static_cast<std::uint32_t>(
        std::ranges::count_if(statuses, [threshold](double s) { return s > threshold; }));
}

inline std::uint32_t count_above(const NetworkState& state, double threshold)
{
    return count_above(state.statuses(), threshold);
}

inline StepRecord make_record(const NetworkState& state, double threshold)
{
    const auto [leader, top] = leader_of(state);
    return {state.step(), leader, top, count_above(state, threshold), state.total_status()};
}

/// Number of new leaders in a leader sequence. Consecutive repeats collapse
/// into one leadership; an incoming leader is new unless it is among the last
/// `memory` distinct leaders (the outgoing one included). The first leader is
/// always new, so memory = 1 counts every change.
template <typename Ids>
std::uint64_t new_leader_count(const Ids& leaders, std::uint32_t memory)
{
    if (memory < 1) {
        throw InvalidParams("leader memory must be at least 1");
    }
    std::vector<IndividualId> recent; // most recent first
    std::uint64_t count = 0;
    bool first = true;
    IndividualId current = 0;
    for (IndividualId id : leaders) {
        if (!first && id == current) {
            continue;
        }
        first = false;
        current = id;
        auto it = std::ranges::find(recent, id);
        if (it == recent.end()) {
            ++count;
            recent.insert(recent.begin(), id);
            if (recent.size() > memory) {
                recent.pop_back();
            }
        } else {
            std::rotate(recent.begin(), it, it + 1);
        }
    }
    return count;
}

inline std::uint64_t new_leader_count(std::span<const LeaderRun> runs, std::uint32_t memory)
{
    std::vector<IndividualId> ids;
    ids.reserve(runs.size());
    for (const auto& run : runs) {
        ids.push_back(run.leader);
    }
    return new_leader_count(ids, memory);
}

/// Leader runs plus threshold crossings over steps [first_step, last_step];
/// enough to reconstruct every leadership episode.
struct Trajectory {
    std::uint64_t first_step = 1;
    std::uint64_t last_step = 0;
    std::vector<LeaderRun> leader_runs;
    std::vector<ThresholdCrossing> crossings;

    /// Builds a trajectory from a dense per-step status matrix. Individuals
    /// are considered below the threshold before the first row.
    static Trajectory from_status_rows(const std::vector<std::vector<double>>& rows,
                                       double threshold, std::uint64_t first_step = 1)
    {
        Trajectory t;
        t.first_step = first_step;
        t.last_step = first_step + rows.size() - 1;
        std::vector<bool> above;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const std::uint64_t step = first_step + k;
            above.resize(rows[k].size(), false);
            for (IndividualId i = 0; i < rows[k].size(); ++i) {
                const bool now = rows[k][i] > threshold;
                if (now != above[i]) {
                    t.crossings.push_back({step, i, now});
                    above[i] = now;
                }
            }
            const auto leader = leader_of(rows[k]).first;
            if (t.leader_runs.empty() || t.leader_runs.back().leader != leader) {
                t.leader_runs.push_back({step, leader});
            }
        }
        return t;
    }
};

namespace detail {

struct Interval {
    IndividualId individual;
    std::uint64_t from;
    std::uint64_t to;
    bool censored;
};

inline std::vector<Interval> above_intervals(const Trajectory& t, std::uint64_t debounce)
{
    std::map<IndividualId, std::vector<Interval>> per;
    std::map<IndividualId, std::uint64_t> open;
    for (const auto& c : t.crossings) {
        if (c.up) {
            open[c.individual] = c.step;
        } else if (auto it = open.find(c.individual); it != open.end()) {
            per[c.individual].push_back({c.individual, it->second, c.step, false});
            open.erase(it);
        }
    }
    for (const auto& [id, from] : open) {
        per[id].push_back({id, from, t.last_step + 1, true});
    }

    std::vector<Interval> out;
    for (auto& [id, list] : per) {
        std::vector<Interval> merged;
        for (const auto& iv : list) {
            if (!merged.empty() && iv.from - merged.back().to < debounce) {
                merged.back().to = iv.to;
                merged.back().censored = iv.censored;
            } else {
                merged.push_back(iv);
            }
        }
        for (const auto& iv : merged) {
            if (iv.to - iv.from >= debounce) {
                out.push_back(iv);
            }
        }
    }
    return out;
}

/// End (exclusive) of leader run k.
inline std::uint64_t run_end(const Trajectory& t, std::size_t k)
{
    return k + 1 < t.leader_runs.size() ? t.leader_runs[k + 1].step : t.last_step + 1;
}

} // namespace detail

/**
 * Leadership episodes: each above-threshold interval of an individual that
 * contains at least one step where the individual holds maximal status. The
 * tenure runs from the first such step until the individual falls to the
 * threshold or below. Sorted by rise_step.
 */
inline std::vector<LeaderEpisode> detect_episodes(const Trajectory& t, const MetricsConfig& cfg)
{
    // leader-run indices per individual, in time order
    std::map<IndividualId, std::vector<std::size_t>> runs_of;
    for (std::size_t k = 0; k < t.leader_runs.size(); ++k) {
        runs_of[t.leader_runs[k].leader].push_back(k);
    }

    std::vector<LeaderEpisode> episodes;
    for (const auto& iv : detail::above_intervals(t, cfg.episode_min_steps)) {
        auto it = runs_of.find(iv.individual);
        if (it == runs_of.end()) {
            continue;
        }
        const auto& ks = it->second;
        // first run of this individual ending after the interval starts
        auto pos = std::ranges::partition_point(
            ks, [&](std::size_t k) { return detail::run_end(t, k) <= iv.from; });
        if (pos == ks.end()) {
            continue;
        }
        const std::uint64_t rise = std::max(t.leader_runs[*pos].step, iv.from);
        if (rise >= iv.to) {
            continue;
        }
        episodes.push_back({iv.individual, rise, iv.from, iv.to, iv.to - rise, iv.censored});
    }
    std::ranges::sort(episodes, [](const LeaderEpisode& a, const LeaderEpisode& b) {
        return std::tie(a.rise_step, a.individual) < std::tie(b.rise_step, b.individual);
    });
    return episodes;
}

/// For consecutive episodes (by rise) held by different individuals, the
/// steps between the first one's end and the successor crossing the
/// threshold, clamped at 0 when they overlap. Empty with fewer than two
/// episodes.
inline std::vector<std::uint64_t> replacement_lag(std::span<const LeaderEpisode> episodes)
{
    std::vector<std::uint64_t> lags;
    for (std::size_t k = 1; k < episodes.size(); ++k) {
        const auto& prev = episodes[k - 1];
        const auto& next = episodes[k];
        if (prev.individual == next.individual) {
            continue;
        }
        lags.push_back(next.above_from > prev.above_to ? next.above_from - prev.above_to : 0);
    }
    return lags;
}

template <typename T>
double median(std::vector<T> values)
{
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t mid = values.size() / 2;
    std::ranges::nth_element(values, values.begin() + mid);
    const double upper = static_cast<double>(values[mid]);
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = static_cast<double>(*std::max_element(values.begin(), values.begin() + mid));
    return 0.5 * (lower + upper);
}

template <typename T>
double mean(const std::vector<T>& values)
{
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double sum = 0.0;
    for (const auto& v : values) {
        sum += static_cast<double>(v);
    }
    return sum / static_cast<double>(values.size());
}

inline std::vector<std::uint64_t> tenures(std::span<const LeaderEpisode> episodes)
{
    std::vector<std::uint64_t> out;
    out.reserve(episodes.size());
    for (const auto& e : episodes) {
        out.push_back(e.tenure_above);
    }
    return out;
}

/// In-degree frequencies accumulated over sampled states.
struct DegreeHistogram {
    std::map<std::uint32_t, std::uint64_t> counts;
    std::uint64_t sample_count = 0;

    void add(const NetworkState& state)
    {
        for (IndividualId i = 0; i < state.size(); ++i) {
            ++counts[state.in_degree(i)];
        }
        ++sample_count;
    }

    std::uint64_t total() const
    {
        std::uint64_t sum = 0;
        for (const auto& [x, f] : counts) {
            sum += f;
        }
        return sum;
    }

    friend bool operator==(const DegreeHistogram&, const DegreeHistogram&) = default;
};

template <typename States>
DegreeHistogram degree_histogram(const States& states)
{
    DegreeHistogram h;
    for (const NetworkState& s : states) {
        h.add(s);
    }
    return h;
}

struct PowerLawFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::uint32_t x_min = 0;
    std::uint32_t x_max = 0;
    std::size_t bins = 0;
};

/// Least squares on (log x, log frequency) over the non-empty bins with
/// x_min <= x <= x_max and x > 0. Throws InsufficientData with fewer than
/// three usable bins. A perfectly flat histogram gives exponent 0, R^2 = 1.
inline PowerLawFit fit_power_law(const DegreeHistogram& hist, std::uint32_t x_min,
                                 std::uint32_t x_max)
{
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [x, f] : hist.counts) {
        if (x >= x_min && x <= x_max && x > 0 && f > 0) {
            xs.push_back(std::log(static_cast<double>(x)));
            ys.push_back(std::log(static_cast<double>(f)));
        }
    }
    if (xs.size() < 3) {
        throw InsufficientData("power-law fit needs at least 3 non-empty bins in [" +
                               std::to_string(x_min) + ", " + std::to_string(x_max) + "], got " +
                               std::to_string(xs.size()));
    }
    const double k = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.x_min = x_min;
    fit.x_max = x_max;
    fit.bins = xs.size();
    return fit;
}

/// Default fit range: from the histogram's mode (the start of the decaying
/// side) up to the last non-empty bin before the first run of at least three
/// empty bins, which separates the bulk from any leader hump.
inline std::pair<std::uint32_t, std::uint32_t> default_fit_range(const DegreeHistogram& hist)
{
    if (hist.counts.empty()) {
        throw InsufficientData("empty histogram");
    }
    std::uint32_t mode = 0;
    std::uint64_t best = 0;
    for (const auto& [x, f] : hist.counts) {
        if (f > best) {
            best = f;
            mode = x;
        }
    }
    const std::uint32_t lo = std::max<std::uint32_t>(mode, 1);
    std::uint32_t hi = lo;
    for (const auto& [x, f] : hist.counts) {
        if (x < lo || f == 0) {
            continue;
        }
        if (x - hi > 3) {
            break; // x - hi - 1 >= 3 empty bins in between
        }
        hi = x;
    }
    return {lo, hi};
}

inline PowerLawFit fit_power_law(const DegreeHistogram& hist)
{
    const auto [lo, hi] = default_fit_range(hist);
    return fit_power_law(hist, lo, hi);
}

enum class PhaseLabel {
    no_leader,
    transient_single,
    stable_single,
    transient_double,
    stable_double,
};

inline std::string_view to_string(PhaseLabel label)
{
    switch (label) {
    case PhaseLabel::no_leader:
        return "NO_LEADER";
    case PhaseLabel::transient_single:
        return "TRANSIENT_SINGLE";
    case PhaseLabel::stable_single:
        return "STABLE_SINGLE";
    case PhaseLabel::transient_double:
        return "TRANSIENT_DOUBLE";
    case PhaseLabel::stable_double:
        return "STABLE_DOUBLE";
    }
    return "UNKNOWN";
}

inline std::optional<PhaseLabel> phase_from_string(std::string_view s)
{
    for (auto p : {PhaseLabel::no_leader, PhaseLabel::transient_single, PhaseLabel::stable_single,
                   PhaseLabel::transient_double, PhaseLabel::stable_double}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    return std::nullopt;
}

/// Everything the observables and classify_phase need from one run.
struct RunSummary {
    std::uint64_t first_step = 0;
    std::uint64_t last_step = 0;
    std::uint64_t window_start = 0;
    /// Steps with exactly k individuals above the threshold, whole run and
    /// within the stability window.
    std::vector<std::uint64_t> count_steps;
    std::vector<std::uint64_t> window_count_steps;
    std::uint64_t new_leaders = 0;
    std::uint64_t window_new_leaders = 0;
    std::uint64_t window_new_leaders_double = 0;
    std::vector<LeaderEpisode> episodes;
    std::vector<std::uint64_t> lags;
    double max_total_drift = 0.0;

    std::uint64_t steps() const { return last_step >= first_step ? last_step - first_step + 1 : 0; }

    /// Fraction of all steps with exactly k above threshold; the last entry
    /// of a `buckets`-sized vector aggregates k >= buckets - 1.
    std::vector<double> count_fractions(std::size_t buckets = 4) const
    {
        return fractions(count_steps, buckets);
    }

    std::vector<double> window_count_fractions(std::size_t buckets = 4) const
    {
        return fractions(window_count_steps, buckets);
    }

    double fraction_exactly(std::uint32_t k) const
    {
        const auto total = sum(count_steps);
        return total == 0 || k >= count_steps.size()
                   ? 0.0
                   : static_cast<double>(count_steps[k]) / static_cast<double>(total);
    }

    /// Most frequent count among window steps with at least one leader;
    /// 0 when no window step has one.
    std::uint32_t window_modal_leader_count() const
    {
        std::uint32_t mode = 0;
        std::uint64_t best = 0;
        for (std::uint32_t k = 1; k < window_count_steps.size(); ++k) {
            if (window_count_steps[k] > best) {
                best = window_count_steps[k];
                mode = k;
            }
        }
        return mode;
    }

    /// Most frequent count over the window, 0 included.
    std::uint32_t window_modal_count() const
    {
        std::uint32_t mode = 0;
        for (std::uint32_t k = 1; k < window_count_steps.size(); ++k) {
            if (window_count_steps[k] > window_count_steps[mode]) {
                mode = k;
            }
        }
        return mode;
    }

    double window_fraction_with_leader() const
    {
        const auto total = sum(window_count_steps);
        if (total == 0) {
            return 0.0;
        }
        return 1.0 - static_cast<double>(window_count_steps.empty() ? 0 : window_count_steps[0]) /
                         static_cast<double>(total);
    }

    double mean_tenure() const { return mean(tenures(episodes)); }
    double median_tenure() const { return median(tenures(episodes)); }
    double median_lag() const { return median(lags); }

    std::size_t distinct_episode_leaders() const
    {
        std::vector<IndividualId> ids;
        for (const auto& e : episodes) {
            ids.push_back(e.individual);
        }
        std::ranges::sort(ids);
        return static_cast<std::size_t>(std::ranges::distance(ids.begin(), std::unique(ids.begin(), ids.end())));
    }

private:
    static std::uint64_t sum(const std::vector<std::uint64_t>& v)
    {
        std::uint64_t s = 0;
        for (auto x : v) {
            s += x;
        }
        return s;
    }

    static std::vector<double> fractions(const std::vector<std::uint64_t>& v, std::size_t buckets)
    {
        std::vector<double> out(buckets, 0.0);
        const auto total = sum(v);
        if (total == 0 || buckets == 0) {
            return out;
        }
        for (std::size_t k = 0; k < v.size(); ++k) {
            out[std::min(k, buckets - 1)] += static_cast<double>(v[k]) / static_cast<double>(total);
        }
        return out;
    }
};

/**
 * Phase of a completed run.
 *
 * NO_LEADER when fewer than p_lead of the window steps have anybody above
 * the threshold. Otherwise the modal positive count over the window picks
 * SINGLE (1) or DOUBLE (>= 2), and the run is TRANSIENT when the window
 * sees more new leaders than there are leadership slots.
 */
inline PhaseLabel classify_phase(const RunSummary& summary, const MetricsConfig& cfg)
{
    if (summary.window_fraction_with_leader() < cfg.p_lead) {
        return PhaseLabel::no_leader;
    }
    if (summary.window_modal_leader_count() >= 2) {
        return summary.window_new_leaders_double > 2 ? PhaseLabel::transient_double
                                                     : PhaseLabel::stable_double;
    }
    return summary.window_new_leaders > 1 ? PhaseLabel::transient_single
                                          : PhaseLabel::stable_single;
}

/**
 * Accumulates the observables of one run step by step. Feed it either live
 * states through observe() / observer(), or stored records and crossings
 * through add(); both paths produce the same summary.
 */
class RunRecorder {
public:
    /// total_steps fixes where the stability window begins; record_stride 0
    /// keeps no StepRecords.
    RunRecorder(MetricsConfig cfg, std::uint64_t total_steps, std::uint64_t record_stride = 0,
                std::uint64_t first_step = 1)
        : cfg_(cfg), first_step_(first_step), record_stride_(record_stride)
    {
        validate(cfg_);
        const auto steps = total_steps;
        const auto window = static_cast<std::uint64_t>(std::floor(cfg_.stable_window *
                                                                  static_cast<double>(steps)));
        window_start_ = first_step_ + (steps - window);
        trajectory_.first_step = first_step_;
        trajectory_.last_step = first_step_ - 1;
    }

    void observe(const NetworkState& state)
    {
        const auto n = state.size();
        if (above_.size() != n) {
            above_.assign(n, 0);
            expected_total_ = static_cast<double>(n);
        }
        crossing_buf_.clear();
        auto s = state.statuses();
        for (IndividualId i = 0; i < n; ++i) {
            const std::uint8_t now = s[i] > cfg_.threshold ? 1 : 0;
            if (now != above_[i]) {
                crossing_buf_.push_back({state.step(), i, now != 0});
                above_[i] = now;
            }
        }
        add(make_record(state, cfg_.threshold), crossing_buf_);
        if (state.step() % cfg_.histogram_sample_period == 0) {
            histogram_.add(state);
        }
    }

    StepObserver observer()
    {
        return [this](const StepView& view) { observe(view.state); };
    }

    void add(const StepRecord& rec, std::span<const ThresholdCrossing> crossings)
    {
        trajectory_.last_step = rec.step;
        for (const auto& c : crossings) {
            trajectory_.crossings.push_back(c);
        }
        if (trajectory_.leader_runs.empty() || trajectory_.leader_runs.back().leader != rec.leader) {
            trajectory_.leader_runs.push_back({rec.step, rec.leader});
        }
        bump(count_steps_, rec.count_above);
        if (rec.step >= window_start_) {
            bump(window_count_steps_, rec.count_above);
        }
        if (expected_total_ > 0.0) {
            max_drift_ = std::max(max_drift_, std::abs(rec.total_status - expected_total_));
        }
        if (record_stride_ > 0 && (rec.step - first_step_) % record_stride_ == 0) {
            records_.push_back(rec);
        }
    }

    /// Population size used for the drift diagnostic when add() is fed directly.
    void set_population(std::uint32_t n) { expected_total_ = static_cast<double>(n); }

    RunSummary summarize() const
    {
        RunSummary s;
        s.first_step = first_step_;
        s.last_step = trajectory_.last_step;
        s.window_start = window_start_;
        s.count_steps = count_steps_;
        s.window_count_steps = window_count_steps_;
        s.new_leaders = new_leader_count(std::span<const LeaderRun>(trajectory_.leader_runs),
                                         cfg_.leader_memory);
        const auto window_runs = runs_from(window_start_);
        s.window_new_leaders = new_leader_count(std::span<const LeaderRun>(window_runs),
                                                cfg_.leader_memory);
        s.window_new_leaders_double = new_leader_count(
            std::span<const LeaderRun>(window_runs), std::max<std::uint32_t>(cfg_.leader_memory, 2));
        s.episodes = detect_episodes(trajectory_, cfg_);
        s.lags = replacement_lag(s.episodes);
        s.max_total_drift = max_drift_;
        return s;
    }

    const MetricsConfig& config() const { return cfg_; }
    const Trajectory& trajectory() const { return trajectory_; }
    const std::vector<StepRecord>& records() const { return records_; }
    const DegreeHistogram& histogram() const { return histogram_; }

private:
    static void bump(std::vector<std::uint64_t>& v, std::uint32_t k)
    {
        if (v.size() <= k) {
            v.resize(k + 1, 0);
        }
        ++v[k];
    }

    std::vector<LeaderRun> runs_from(std::uint64_t start) const
    {
        const auto& runs = trajectory_.leader_runs;
        auto it = std::ranges::upper_bound(runs, start, {}, &LeaderRun::step);
        std::vector<LeaderRun> out;
        if (it != runs.begin()) {
            out.push_back({start, std::prev(it)->leader});
        }
        out.insert(out.end(), it, runs.end());
        return out;
    }

    MetricsConfig cfg_;
    std::uint64_t first_step_ = 1;
    std::uint64_t window_start_ = 1;
    std::uint64_t record_stride_ = 0;
    double expected_total_ = 0.0;
    double max_drift_ = 0.0;
    std::vector<std::uint8_t> above_;
    std::vector<ThresholdCrossing> crossing_buf_;
    std::vector<std::uint64_t> count_steps_;
    std::vector<std::uint64_t> window_count_steps_;
    std::vector<StepRecord> records_;
    Trajectory trajectory_;
    DegreeHistogram histogram_;
};

} // namespace leadnet
