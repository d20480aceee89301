#include "test_support.hpp"

#include <leadnet/metrics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace leadnet;

namespace {

constexpr IndividualId A = 0;
constexpr IndividualId B = 1;
constexpr IndividualId C = 2;

/// Status rows for n individuals over `steps` steps, all at the baseline 1.0.
std::vector<std::vector<double>> flat_rows(std::size_t steps, std::size_t n)
{
    return std::vector<std::vector<double>>(steps, std::vector<double>(n, 1.0));
}

/// Sets individual i to `value` on steps [from, to) of rows that start at step 1.
void paint(std::vector<std::vector<double>>& rows, IndividualId i, std::uint64_t from,
           std::uint64_t to, double value)
{
    for (std::uint64_t s = from; s < to; ++s) {
        rows[s - 1][i] = value;
    }
}

/// Reference count: for every change walk backwards through earlier
/// leaderships collecting distinct ids until `memory` of them are known.
std::uint64_t oracle_new_leaders(const std::vector<IndividualId>& seq, std::uint32_t memory)
{
    std::vector<IndividualId> changes;
    for (IndividualId id : seq) {
        if (changes.empty() || changes.back() != id) {
            changes.push_back(id);
        }
    }
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < changes.size(); ++k) {
        std::set<IndividualId> seen;
        for (std::size_t j = k; j-- > 0 && seen.size() < memory;) {
            seen.insert(changes[j]);
        }
        count += seen.count(changes[k]) == 0 ? 1 : 0;
    }
    return count;
}

} // namespace

TEST(LeaderOf, UniqueMaximum)
{
    const std::vector<double> s{1, 1, 5};
    EXPECT_EQ(leader_of(s), (std::pair<IndividualId, double>{2, 5.0}));
}

TEST(LeaderOf, TiesGoToTheLowestId)
{
    const std::vector<double> s{2, 2, 1};
    EXPECT_EQ(leader_of(s), (std::pair<IndividualId, double>{0, 2.0}));
    ModelParams p;
    RngStream rng(1);
    EXPECT_EQ(leader_of(init_network(p, rng)), (std::pair<IndividualId, double>{0, 1.0}));
}

TEST(CountAbove, IsStrict)
{
    const std::vector<double> s{1, 1, 5};
    EXPECT_EQ(count_above(s, 3.0), 1u);
    const std::vector<double> edge{3.0, 3.0000001, 2.9};
    EXPECT_EQ(count_above(edge, 3.0), 1u);
    EXPECT_EQ(count_above(std::vector<double>(50, 1.0), 3.0), 0u);
}

TEST(DetectEpisodes, SingleLeaderOfHundredSteps)
{
    auto rows = flat_rows(200, 3);
    paint(rows, A, 10, 110, 4.0);
    const auto t = Trajectory::from_status_rows(rows, 3.0);
    const auto eps = detect_episodes(t, MetricsConfig{});
    ASSERT_EQ(eps.size(), 1u);
    EXPECT_EQ(eps[0].individual, A);
    EXPECT_EQ(eps[0].rise_step, 10u);
    EXPECT_EQ(eps[0].above_to, 110u);
    EXPECT_EQ(eps[0].tenure_above, 100u);
    EXPECT_FALSE(eps[0].censored);
}

TEST(DetectEpisodes, NobodyAboveThresholdGivesNothing)
{
    auto rows = flat_rows(100, 4);
    paint(rows, B, 20, 60, 2.5); // top but below the threshold
    const auto t = Trajectory::from_status_rows(rows, 3.0);
    EXPECT_TRUE(detect_episodes(t, MetricsConfig{}).empty());
}

TEST(DetectEpisodes, HandOverBetweenTwoLeaders)
{
    auto rows = flat_rows(200, 3);
    paint(rows, A, 11, 61, 4.0);
    paint(rows, B, 61, 131, 4.0);
    const auto t = Trajectory::from_status_rows(rows, 3.0);
    const auto eps = detect_episodes(t, MetricsConfig{});
    ASSERT_EQ(eps.size(), 2u);
    EXPECT_EQ(eps[0].individual, A);
    EXPECT_EQ(eps[0].tenure_above, 50u);
    EXPECT_EQ(eps[1].individual, B);
    EXPECT_EQ(eps[1].tenure_above, 70u);
    EXPECT_DOUBLE_EQ(median(tenures(eps)), 60.0);
    EXPECT_DOUBLE_EQ(mean(tenures(eps)), 60.0);
}

TEST(DetectEpisodes, TenureStartsAtTheFirstTopStep)
{
    // B is above threshold from step 5 but only overtakes A at step 40
    auto rows = flat_rows(100, 3);
    paint(rows, A, 1, 40, 6.0);
    paint(rows, B, 5, 80, 4.0);
    paint(rows, A, 40, 101, 2.0);
    const auto t = Trajectory::from_status_rows(rows, 3.0);
    const auto eps = detect_episodes(t, MetricsConfig{});
    ASSERT_EQ(eps.size(), 2u);
    EXPECT_EQ(eps[1].individual, B);
    EXPECT_EQ(eps[1].above_from, 5u);
    EXPECT_EQ(eps[1].rise_step, 40u);
    EXPECT_EQ(eps[1].tenure_above, 40u);
}

TEST(DetectEpisodes, SecondRankedIndividualHasNoEpisode)
{
    auto rows = flat_rows(100, 3);
    paint(rows, A, 1, 101, 6.0);
    paint(rows, B, 10, 90, 4.0);
    const auto t = Trajectory::from_status_rows(rows, 3.0);
    const auto eps = detect_episodes(t, MetricsConfig{});
    ASSERT_EQ(eps.size(), 1u);
    EXPECT_EQ(eps[0].individual, A);
    EXPECT_TRUE(eps[0].censored);
    EXPECT_EQ(eps[0].above_to, 101u);
    EXPECT_EQ(eps[0].tenure_above, 100u);
}

TEST(DetectEpisodes, DebounceBridgesShortDipsAndDropsShortBursts)
{
    auto rows = flat_rows(300, 3);
    paint(rows, A, 10, 100, 4.0);
    paint(rows, A, 103, 200, 4.0); // 3-step dip
    paint(rows, B, 250, 252, 4.0); // 2-step burst
    const auto t = Trajectory::from_status_rows(rows, 3.0);

    const auto literal = detect_episodes(t, MetricsConfig{});
    EXPECT_EQ(literal.size(), 3u);

    MetricsConfig cfg;
    cfg.episode_min_steps = 5;
    const auto eps = detect_episodes(t, cfg);
    ASSERT_EQ(eps.size(), 1u);
    EXPECT_EQ(eps[0].above_from, 10u);
    EXPECT_EQ(eps[0].above_to, 200u);
    EXPECT_EQ(eps[0].tenure_above, 190u);
}

TEST(ReplacementLag, GapBetweenSuccessiveLeaders)
{
    auto rows = flat_rows(300, 3);
    paint(rows, A, 1, 101, 4.0);   // A falls at step 101 (last above: 100)
    paint(rows, B, 131, 201, 4.0); // B exceeds the threshold 30 steps later
    const auto t = Trajectory::from_status_rows(rows, 3.0);
    const auto eps = detect_episodes(t, MetricsConfig{});
    ASSERT_EQ(eps.size(), 2u);
    EXPECT_EQ(replacement_lag(eps), (std::vector<std::uint64_t>{30}));
}

TEST(ReplacementLag, OverlapClampsToZero)
{
    auto rows = flat_rows(300, 3);
    paint(rows, A, 1, 101, 6.0);
    paint(rows, B, 80, 201, 4.0);
    const auto t = Trajectory::from_status_rows(rows, 3.0);
    const auto eps = detect_episodes(t, MetricsConfig{});
    ASSERT_EQ(eps.size(), 2u);
    EXPECT_EQ(replacement_lag(eps), (std::vector<std::uint64_t>{0}));
}

TEST(ReplacementLag, FewerThanTwoEpisodesIsEmpty)
{
    EXPECT_TRUE(replacement_lag({}).empty());
    const std::vector<LeaderEpisode> one{{A, 1, 1, 10, 9, false}};
    EXPECT_TRUE(replacement_lag(one).empty());
}

TEST(ReplacementLag, SameLeaderReturningIsNotAReplacement)
{
    const std::vector<LeaderEpisode> eps{{A, 1, 1, 10, 9, false}, {A, 20, 20, 30, 10, false},
                                         {B, 40, 35, 50, 10, false}};
    EXPECT_EQ(replacement_lag(eps), (std::vector<std::uint64_t>{5}));
}

TEST(NewLeaderCount, WorkedExamples)
{
    EXPECT_EQ(new_leader_count(std::vector<IndividualId>{A, B, A, B, C}, 2), 3u);
    EXPECT_EQ(new_leader_count(std::vector<IndividualId>{A, B, A}, 1), 3u);
    for (std::uint32_t l = 1; l < 5; ++l) {
        EXPECT_EQ(new_leader_count(std::vector<IndividualId>(40, A), l), 1u);
    }
    EXPECT_EQ(new_leader_count(std::vector<IndividualId>{}, 2), 0u);
}

TEST(NewLeaderCount, PerStepSequenceCollapsesRepeats)
{
    EXPECT_EQ(new_leader_count(std::vector<IndividualId>{A, A, B, B, B, A, A, B, C, C}, 2), 3u);
}

TEST(NewLeaderCount, ZeroMemoryIsRejected)
{
    EXPECT_THROW(new_leader_count(std::vector<IndividualId>{A}, 0), InvalidParams);
}

TEST(NewLeaderCount, MatchesOracleAndIsMonotoneInMemory)
{
    RngStream rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const auto len = rng.below(60);
        const auto alphabet = 1 + rng.below(6);
        std::vector<IndividualId> seq(len);
        for (auto& id : seq) {
            id = static_cast<IndividualId>(rng.below(alphabet));
        }
        std::uint64_t previous = std::numeric_limits<std::uint64_t>::max();
        for (std::uint32_t l = 1; l <= 7; ++l) {
            const auto got = new_leader_count(seq, l);
            ASSERT_EQ(got, oracle_new_leaders(seq, l));
            ASSERT_LE(got, previous);
            previous = got;
        }
    }
}

TEST(NewLeaderCount, RunOverloadAgrees)
{
    const std::vector<LeaderRun> runs{{1, A}, {5, B}, {9, A}, {12, C}};
    EXPECT_EQ(new_leader_count(std::span<const LeaderRun>(runs), 2),
              new_leader_count(std::vector<IndividualId>{A, B, A, C}, 2));
}

TEST(DegreeHistogram, ThreeNodeSample)
{
    const auto s = NetworkState::from_links({1, 1, 1}, {{1}, {0}, {0}});
    const auto h = degree_histogram(std::vector<NetworkState>{s});
    EXPECT_EQ(h.counts, (std::map<std::uint32_t, std::uint64_t>{{0, 1}, {1, 1}, {2, 1}}));
    EXPECT_EQ(h.sample_count, 1u);
}

TEST(DegreeHistogram, MassIdentities)
{
    RngStream rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = fixtures::random_params(rng, 40);
        std::vector<NetworkState> states;
        const auto samples = 1 + rng.below(5);
        for (std::uint64_t k = 0; k < samples; ++k) {
            states.push_back(fixtures::random_state(rng, p));
        }
        const auto h = degree_histogram(states);
        EXPECT_EQ(h.total(), samples * p.n);
        std::uint64_t weighted = 0;
        for (const auto& [x, f] : h.counts) {
            weighted += x * f;
        }
        EXPECT_EQ(weighted, samples * p.n * p.lambda);
    }
}

TEST(FitPowerLaw, RecoversAnExactPowerLaw)
{
    DegreeHistogram h;
    for (std::uint32_t x = 1; x <= 20; ++x) {
        h.counts[x] = static_cast<std::uint64_t>(std::llround(1e12 / (double(x) * x)));
    }
    const auto fit = fit_power_law(h, 1, 20);
    EXPECT_NEAR(fit.exponent, -2.0, 1e-9);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    EXPECT_EQ(fit.bins, 20u);
}

TEST(FitPowerLaw, FlatHistogramHasZeroExponent)
{
    DegreeHistogram h;
    for (std::uint32_t x = 1; x <= 10; ++x) {
        h.counts[x] = 500;
    }
    const auto fit = fit_power_law(h, 1, 10);
    EXPECT_NEAR(fit.exponent, 0.0, 1e-12);
}

TEST(FitPowerLaw, NeedsThreeUsableBins)
{
    DegreeHistogram h;
    h.counts = {{0, 100}, {1, 50}, {2, 10}, {9, 0}};
    EXPECT_THROW(fit_power_law(h, 0, 10), InsufficientData);
    EXPECT_THROW(fit_power_law(DegreeHistogram{}), InsufficientData);
}

TEST(FitPowerLaw, DefaultRangeStopsBeforeTheHump)
{
    DegreeHistogram h;
    h.counts = {{0, 10}, {1, 40}, {2, 90}, {3, 100}, {4, 50}, {5, 12}, {6, 2}, {7, 1}, {30, 2}, {31, 1}};
    EXPECT_EQ(default_fit_range(h), (std::pair<std::uint32_t, std::uint32_t>{3, 7}));
    const auto fit = fit_power_law(h);
    EXPECT_EQ(fit.x_min, 3u);
    EXPECT_EQ(fit.x_max, 7u);
    EXPECT_EQ(fit.bins, 5u);
    EXPECT_LT(fit.exponent, 0.0);
}

TEST(FitPowerLaw, ShortGapsDoNotEndTheRange)
{
    DegreeHistogram h;
    h.counts = {{1, 100}, {2, 30}, {4, 5}, {6, 1}, {20, 1}};
    EXPECT_EQ(default_fit_range(h), (std::pair<std::uint32_t, std::uint32_t>{1, 6}));
}

namespace {

RunSummary window_summary(std::vector<std::uint64_t> counts, std::uint64_t new_single,
                          std::uint64_t new_double)
{
    RunSummary s;
    s.first_step = 1;
    s.last_step = 1000;
    s.window_start = 201;
    s.window_count_steps = std::move(counts);
    s.count_steps = s.window_count_steps;
    s.window_new_leaders = new_single;
    s.window_new_leaders_double = new_double;
    return s;
}

} // namespace

TEST(ClassifyPhase, SyntheticSummaries)
{
    const MetricsConfig cfg;
    EXPECT_EQ(classify_phase(window_summary({800}, 500, 400), cfg), PhaseLabel::no_leader);
    EXPECT_EQ(classify_phase(window_summary({500, 300}, 1, 1), cfg), PhaseLabel::no_leader);
    EXPECT_EQ(classify_phase(window_summary({300, 500}, 1, 1), cfg), PhaseLabel::stable_single);
    EXPECT_EQ(classify_phase(window_summary({401, 399}, 1, 1), cfg), PhaseLabel::no_leader);
    EXPECT_EQ(classify_phase(window_summary({40, 760}, 1, 1), cfg), PhaseLabel::stable_single);
    EXPECT_EQ(classify_phase(window_summary({40, 760}, 7, 5), cfg), PhaseLabel::transient_single);
    EXPECT_EQ(classify_phase(window_summary({0, 100, 700}, 2, 2), cfg), PhaseLabel::stable_double);
    EXPECT_EQ(classify_phase(window_summary({0, 100, 600, 100}, 9, 3), cfg),
              PhaseLabel::transient_double);
}

TEST(ClassifyPhase, LabelsRoundTripThroughStrings)
{
    for (auto p : {PhaseLabel::no_leader, PhaseLabel::transient_single, PhaseLabel::stable_single,
                   PhaseLabel::transient_double, PhaseLabel::stable_double}) {
        EXPECT_EQ(phase_from_string(to_string(p)), p);
    }
    EXPECT_EQ(phase_from_string("nope"), std::nullopt);
}

TEST(RunRecorder, StableLeaderRunIsStableSingle)
{
    // A rises above the threshold at step 11 and stays on top
    auto rows = flat_rows(1000, 4);
    paint(rows, A, 11, 1001, 5.0);
    MetricsConfig cfg;
    RunRecorder rec(cfg, rows.size());
    const auto t = Trajectory::from_status_rows(rows, cfg.threshold);
    std::size_t c = 0;
    for (std::uint64_t step = 1; step <= rows.size(); ++step) {
        std::vector<ThresholdCrossing> batch;
        while (c < t.crossings.size() && t.crossings[c].step == step) {
            batch.push_back(t.crossings[c++]);
        }
        const auto [leader, top] = leader_of(rows[step - 1]);
        rec.add({step, leader, top, count_above(rows[step - 1], cfg.threshold), 8.0}, batch);
    }
    const auto s = rec.summarize();
    EXPECT_EQ(s.window_start, 201u);
    EXPECT_EQ(s.steps(), 1000u);
    EXPECT_NEAR(s.fraction_exactly(1), 0.99, 1e-12);
    EXPECT_EQ(s.new_leaders, 1u);
    EXPECT_EQ(s.window_new_leaders, 1u);
    ASSERT_EQ(s.episodes.size(), 1u);
    EXPECT_EQ(s.episodes[0].tenure_above, 990u);
    EXPECT_EQ(classify_phase(s, cfg), PhaseLabel::stable_single);
}

TEST(RunRecorder, LiveAndReplayedSummariesAgree)
{
    ModelParams p;
    p.q = 0.54;
    p.steps = 20000;
    p.seed = 4;
    MetricsConfig cfg;
    cfg.histogram_sample_period = 50;
    RunRecorder live(cfg, p.steps, 1);
    simulate(p, live.observer());
    const auto a = live.summarize();

    RunRecorder replay(cfg, p.steps);
    replay.set_population(p.n);
    std::size_t c = 0;
    const auto& crossings = live.trajectory().crossings;
    for (const auto& r : live.records()) {
        std::vector<ThresholdCrossing> batch;
        while (c < crossings.size() && crossings[c].step <= r.step) {
            batch.push_back(crossings[c++]);
        }
        replay.add(r, batch);
    }
    const auto b = replay.summarize();
    EXPECT_EQ(a.count_steps, b.count_steps);
    EXPECT_EQ(a.window_count_steps, b.window_count_steps);
    EXPECT_EQ(a.new_leaders, b.new_leaders);
    EXPECT_EQ(a.episodes, b.episodes);
    EXPECT_EQ(a.lags, b.lags);
    EXPECT_EQ(a.max_total_drift, b.max_total_drift);
    EXPECT_EQ(live.histogram().sample_count, p.steps / 50);
    EXPECT_EQ(live.histogram().total(), p.steps / 50 * p.n);
}

TEST(RunRecorder, EpisodesMatchADenseStatusReplay)
{
    ModelParams p;
    p.q = 0.532;
    p.steps = 30000;
    p.seed = 2;
    MetricsConfig cfg;
    std::vector<std::vector<double>> rows;
    RunRecorder rec(cfg, p.steps);
    simulate(p, std::vector<StepObserver>{rec.observer(), [&](const StepView& v) {
                                              rows.emplace_back(v.state.statuses().begin(),
                                                                v.state.statuses().end());
                                          }});
    const auto dense = Trajectory::from_status_rows(rows, cfg.threshold);
    EXPECT_EQ(dense.crossings, rec.trajectory().crossings);
    EXPECT_EQ(dense.leader_runs, rec.trajectory().leader_runs);
    EXPECT_EQ(detect_episodes(dense, cfg), rec.summarize().episodes);
}

TEST(MetricsConfig, Validation)
{
    MetricsConfig cfg;
    EXPECT_NO_THROW(validate(cfg));
    cfg.leader_memory = 0;
    EXPECT_THROW(validate(cfg), InvalidParams);
    cfg = {};
    cfg.histogram_sample_period = 0;
    EXPECT_THROW(validate(cfg), InvalidParams);
    cfg = {};
    cfg.stable_window = 0.0;
    EXPECT_THROW(validate(cfg), InvalidParams);
}
