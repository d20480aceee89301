#pragma once

#include <leadnet/network.hpp>
#include <leadnet/params.hpp>
#include <leadnet/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace leadnet {

struct RewireEvent {
    IndividualId actor = 0;
    IndividualId old_target = 0;
    IndividualId new_target = 0;
    std::uint64_t step = 0;

    friend bool operator==(const RewireEvent&, const RewireEvent&) = default;
};

/**
 * Status update stage, applied synchronously from the pre-update statuses.
 *
 * Each individual i pools r * s_i and splits it evenly over its d_i incident
 * links, c_i = r * s_i / d_i. A link i -> j carries c_i + c_j; the target j
 * receives the fraction q of it and the source i keeps 1 - q. The unshared
 * (1 - r) * s_i stays put, so total status is conserved.
 */
inline void status_update(NetworkState& state, const ModelParams& params)
{
    const std::uint32_t n = state.size();
    auto s = state.statuses();
    auto& scratch = state.scratch();
    scratch.resize(std::size_t{2} * n);
    const std::span<double> contrib(scratch.data(), n);
    const std::span<double> next(scratch.data() + n, n);

    for (IndividualId i = 0; i < n; ++i) {
        contrib[i] = params.r * s[i] / state.incident_degree(i);
        next[i] = (1.0 - params.r) * s[i];
    }

    const double keep = 1.0 - params.q;
    for (IndividualId i = 0; i < n; ++i) {
        const double ci = contrib[i];
        for (IndividualId j : state.out_links(i)) {
            const double link = ci + contrib[j];
            next[i] += keep * link;
            next[j] += params.q * link;
        }
    }
    std::copy(next.begin(), next.end(), s.begin());
}

/// How one link's status is split between its two endpoints in an update.
struct LinkShares {
    double to_source = 0.0;
    double to_target = 0.0;
};

/// Throws MissingLink if source -> target does not exist.
inline LinkShares link_shares(const NetworkState& state, const ModelParams& params,
                              IndividualId source, IndividualId target)
{
    if (source >= state.size() || target >= state.size() || !state.has_link(source, target)) {
        throw MissingLink("no link " + std::to_string(source) + " -> " + std::to_string(target));
    }
    const double cs = params.r * state.status(source) / state.incident_degree(source);
    const double ct = params.r * state.status(target) / state.incident_degree(target);
    return {(1.0 - params.q) * (cs + ct), params.q * (cs + ct)};
}

/// Status the source gets back from link source -> target in one update.
/// Across one individual's out-links this orders like s_target / d_target.
inline double link_value(const NetworkState& state, const ModelParams& params, IndividualId source,
                         IndividualId target)
{
    return link_shares(state, params, source, target).to_source;
}

namespace detail {

inline bool eligible_target(const NetworkState& state, EligibilityRule rule, IndividualId actor,
                            IndividualId candidate) noexcept
{
    if (candidate == actor || state.has_link(actor, candidate)) {
        return false;
    }
    return rule == EligibilityRule::no_outgoing_link || !state.has_link(candidate, actor);
}

inline std::uint32_t eligible_count(const NetworkState& state, EligibilityRule rule,
                                    IndividualId actor) noexcept
{
    const std::uint32_t excluded = rule == EligibilityRule::no_outgoing_link
                                       ? state.lambda()
                                       : state.neighbour_count(actor);
    return state.size() - 1 - excluded;
}

/// Uniform pick from the eligible set, which must be non-empty. Rejection
/// sampling when the set is large, otherwise an indexed scan.
inline IndividualId pick_target(const NetworkState& state, EligibilityRule rule,
                                IndividualId actor, std::uint32_t count, RngStream& rng) noexcept
{
    const std::uint32_t n = state.size();
    if (std::uint64_t{count} * 4 >= n - 1) {
        for (;;) {
            auto c = static_cast<IndividualId>(rng.below(n - 1));
            if (c >= actor) {
                ++c;
            }
            if (eligible_target(state, rule, actor, c)) {
                return c;
            }
        }
    }
    auto k = static_cast<std::uint32_t>(rng.below(count));
    for (IndividualId c = 0; c < n; ++c) {
        if (eligible_target(state, rule, actor, c) && k-- == 0) {
            return c;
        }
    }
    return actor; // unreachable when count is accurate
}

/// Slot of actor's least-valued out-link, ties broken uniformly.
inline std::uint32_t least_valued_slot(const NetworkState& state, const ModelParams& params,
                                       IndividualId actor, RngStream& rng)
{
    auto links = state.out_links(actor);
    std::uint32_t best = 0;
    double best_value = link_value(state, params, actor, links[0]);
    std::uint32_t ties = 1;
    for (std::uint32_t k = 1; k < links.size(); ++k) {
        const double v = link_value(state, params, actor, links[k]);
        if (v < best_value) {
            best = k;
            best_value = v;
            ties = 1;
        } else if (v == best_value) {
            ++ties;
            if (rng.below(ties) == 0) {
                best = k;
            }
        }
    }
    return best;
}

} // namespace detail

/**
 * Rewiring phase. Individuals act one at a time in a fresh uniform random
 * order; each, with probability w, drops its least-valued out-link and links
 * to a uniformly chosen eligible individual instead. Later actors see the
 * rewires of earlier ones. An actor with no eligible target does nothing.
 * `events` is cleared and receives one entry per rewire.
 */
inline void rewire_step(NetworkState& state, const ModelParams& params, RngStream& rng,
                        std::vector<RewireEvent>& events)
{
    events.clear();
    const std::uint32_t n = state.size();
    auto& order = state.order_scratch();
    order.resize(n);
    std::iota(order.begin(), order.end(), IndividualId{0});
    for (std::uint32_t k = n - 1; k > 0; --k) {
        std::swap(order[k], order[rng.below(k + 1)]);
    }

    for (IndividualId actor : order) {
        if (!rng.bernoulli(params.w)) {
            continue;
        }
        const std::uint32_t slot = detail::least_valued_slot(state, params, actor, rng);
        const std::uint32_t count = detail::eligible_count(state, params.eligibility, actor);
        if (count == 0) {
            continue;
        }
        const IndividualId target =
            detail::pick_target(state, params.eligibility, actor, count, rng);
        const IndividualId old = state.out_links(actor)[slot];
        state.replace_link(actor, slot, target);
        events.push_back({actor, old, target, state.step()});
    }
}

inline std::vector<RewireEvent> rewire_step(NetworkState& state, const ModelParams& params,
                                            RngStream& rng)
{
    std::vector<RewireEvent> events;
    rewire_step(state, params, rng, events);
    return events;
}

/// One timestep: status update, then rewiring. Events are stamped with the
/// new step index.
inline void step(NetworkState& state, const ModelParams& params, RngStream& rng,
                 std::vector<RewireEvent>& events)
{
    status_update(state, params);
    state.set_step(state.step() + 1);
    rewire_step(state, params, rng, events);
}

inline std::vector<RewireEvent> step(NetworkState& state, const ModelParams& params,
                                     RngStream& rng)
{
    std::vector<RewireEvent> events;
    step(state, params, rng, events);
    return events;
}

/// What an observer sees after each timestep.
struct StepView {
    std::uint64_t step;
    const NetworkState& state;
    std::span<const RewireEvent> events;
};

using StepObserver = std::function<void(const StepView&)>;

/// Runs params.steps timesteps from a fresh network seeded by params.seed,
/// calling every observer after each step. Throws InvalidParams.
inline NetworkState simulate(const ModelParams& params, std::span<const StepObserver> observers = {})
{
    validate(params);
    RngStream rng(params.seed);
    NetworkState state = init_network(params, rng);
    std::vector<RewireEvent> events;
    for (std::uint64_t t = 0; t < params.steps; ++t) {
        step(state, params, rng, events);
        const StepView view{state.step(), state, events};
        for (const auto& observe : observers) {
            observe(view);
        }
    }
    return state;
}

inline NetworkState simulate(const ModelParams& params, const StepObserver& observer)
{
    return simulate(params, std::span<const StepObserver>(&observer, 1));
}

} // namespace leadnet
