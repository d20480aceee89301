#pragma once

#include <leadnet/params.hpp>
#include <leadnet/rng.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace leadnet {

class MissingLink : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/**
 * Statuses and directed alliance links of the population.
 *
 * Every individual owns exactly lambda out-links, stored in an ordered
 * per-individual list. In-degrees, an n x n link matrix and undirected
 * neighbour counts are kept alongside as derived indices so the dynamics can
 * answer "is i linked to j" in O(1); they are never part of equality.
 */
class NetworkState {
public:
    NetworkState() = default;

    /// Builds a state from explicit out-lists. Throws InvalidParams if any
    /// list has the wrong length, a self-link, a duplicate or an id >= n.
    static NetworkState from_links(std::vector<double> statuses,
                                   const std::vector<std::vector<IndividualId>>& out_links,
                                   std::uint64_t step = 0)
    {
        const auto n = static_cast<std::uint32_t>(statuses.size());
        if (n < 2 || out_links.size() != n) {
            throw InvalidParams("need at least 2 individuals and one out-list per individual");
        }
        const auto lambda = static_cast<std::uint32_t>(out_links.front().size());
        NetworkState s(n, lambda);
        s.statuses_ = std::move(statuses);
        s.step_ = step;
        for (IndividualId i = 0; i < n; ++i) {
            if (out_links[i].size() != lambda) {
                throw InvalidParams("individual " + std::to_string(i) + " has " +
                                    std::to_string(out_links[i].size()) + " out-links, expected " +
                                    std::to_string(lambda));
            }
            for (std::uint32_t k = 0; k < lambda; ++k) {
                const IndividualId j = out_links[i][k];
                if (j >= n || j == i || s.has_link(i, j)) {
                    throw InvalidParams("invalid out-link " + std::to_string(i) + " -> " +
                                        std::to_string(j));
                }
                s.out_[std::size_t{i} * lambda + k] = j;
                s.attach(i, j);
            }
        }
        return s;
    }

    std::uint32_t size() const noexcept { return n_; }
    std::uint32_t lambda() const noexcept { return lambda_; }
    std::uint64_t step() const noexcept { return step_; }
    void set_step(std::uint64_t step) noexcept { step_ = step; }

    std::span<const double> statuses() const noexcept { return statuses_; }
    std::span<double> statuses() noexcept { return statuses_; }
    double status(IndividualId i) const { return statuses_[i]; }

    std::span<const IndividualId> out_links(IndividualId i) const noexcept
    {
        return {out_.data() + std::size_t{i} * lambda_, lambda_};
    }

    std::uint32_t in_degree(IndividualId i) const noexcept { return in_degree_[i]; }

    /// lambda plus the number of individuals linking to i.
    std::uint32_t incident_degree(IndividualId i) const noexcept { return lambda_ + in_degree_[i]; }

    bool has_link(IndividualId source, IndividualId target) const noexcept
    {
        return link_matrix_[std::size_t{source} * n_ + target] != 0;
    }

    bool linked_either_way(IndividualId a, IndividualId b) const noexcept
    {
        return has_link(a, b) || has_link(b, a);
    }

    /// Number of distinct individuals linked to i in either direction.
    std::uint32_t neighbour_count(IndividualId i) const noexcept { return neighbours_[i]; }

    double total_status() const noexcept
    {
        return std::accumulate(statuses_.begin(), statuses_.end(), 0.0);
    }

    /// Replaces source's out-link at `slot` with a link to new_target.
    /// The caller guarantees new_target is a valid, currently unlinked target.
    void replace_link(IndividualId source, std::uint32_t slot, IndividualId new_target) noexcept
    {
        IndividualId& entry = out_[std::size_t{source} * lambda_ + slot];
        detach(source, entry);
        entry = new_target;
        attach(source, new_target);
    }

    /// Scratch space for the synchronous status update.
    std::vector<double>& scratch() noexcept { return scratch_; }
    std::vector<IndividualId>& order_scratch() noexcept { return order_; }

    /// Full scan of the structural invariants: exactly lambda distinct,
    /// non-self targets per individual and derived indices consistent.
    bool structure_valid() const
    {
        std::vector<std::uint32_t> in(n_, 0);
        for (IndividualId i = 0; i < n_; ++i) {
            auto links = out_links(i);
            for (std::size_t a = 0; a < links.size(); ++a) {
                if (links[a] >= n_ || links[a] == i) {
                    return false;
                }
                for (std::size_t b = a + 1; b < links.size(); ++b) {
                    if (links[a] == links[b]) {
                        return false;
                    }
                }
                ++in[links[a]];
            }
        }
        for (IndividualId i = 0; i < n_; ++i) {
            if (in[i] != in_degree_[i]) {
                return false;
            }
            std::uint32_t nb = 0;
            for (IndividualId j = 0; j < n_; ++j) {
                const bool out = std::ranges::find(out_links(i), j) != out_links(i).end();
                const bool inc = std::ranges::find(out_links(j), i) != out_links(j).end();
                if (out != has_link(i, j)) {
                    return false;
                }
                nb += (out || inc) ? 1 : 0;
            }
            if (nb != neighbours_[i]) {
                return false;
            }
        }
        return true;
    }

    /// Equal statuses, out-lists (in order) and step counter.
    friend bool operator==(const NetworkState& a, const NetworkState& b)
    {
        return a.n_ == b.n_ && a.lambda_ == b.lambda_ && a.step_ == b.step_ &&
               a.statuses_ == b.statuses_ && a.out_ == b.out_;
    }

private:
    NetworkState(std::uint32_t n, std::uint32_t lambda)
        : n_(n), lambda_(lambda), statuses_(n, 1.0), out_(std::size_t{n} * lambda, 0),
          in_degree_(n, 0), neighbours_(n, 0), link_matrix_(std::size_t{n} * n, 0)
    {
    }

    friend NetworkState init_network(const ModelParams&, RngStream&);

    void attach(IndividualId s, IndividualId t) noexcept
    {
        if (!has_link(t, s)) {
            ++neighbours_[s];
            ++neighbours_[t];
        }
        link_matrix_[std::size_t{s} * n_ + t] = 1;
        ++in_degree_[t];
    }

    void detach(IndividualId s, IndividualId t) noexcept
    {
        link_matrix_[std::size_t{s} * n_ + t] = 0;
        --in_degree_[t];
        if (!has_link(t, s)) {
            --neighbours_[s];
            --neighbours_[t];
        }
    }

    std::uint32_t n_ = 0;
    std::uint32_t lambda_ = 0;
    std::uint64_t step_ = 0;
    std::vector<double> statuses_;
    std::vector<IndividualId> out_;
    std::vector<std::uint32_t> in_degree_;
    std::vector<std::uint32_t> neighbours_;
    std::vector<std::uint8_t> link_matrix_;
    std::vector<double> scratch_;
    std::vector<IndividualId> order_;
};

/// All statuses 1.0; each individual's lambda targets drawn uniformly
/// without replacement from the other n - 1 (partial Fisher-Yates).
inline NetworkState init_network(const ModelParams& params, RngStream& rng)
{
    validate(params);
    NetworkState s(params.n, params.lambda);
    std::vector<IndividualId> others(params.n - 1);
    for (IndividualId i = 0; i < params.n; ++i) {
        for (IndividualId j = 0, k = 0; j < params.n; ++j) {
            if (j != i) {
                others[k++] = j;
            }
        }
        for (std::uint32_t k = 0; k < params.lambda; ++k) {
            const auto pick = k + rng.below(others.size() - k);
            std::swap(others[k], others[pick]);
            s.out_[std::size_t{i} * params.lambda + k] = others[k];
            s.attach(i, others[k]);
        }
    }
    return s;
}

inline std::uint32_t incident_degree(const NetworkState& state, IndividualId i)
{
    return state.incident_degree(i);
}

} // namespace leadnet
