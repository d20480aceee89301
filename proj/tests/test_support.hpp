#pragma once

#include <leadnet/network.hpp>
#include <leadnet/params.hpp>
#include <leadnet/rng.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

namespace leadnet::fixtures {

/// Uniform double in [lo, hi).
inline double uniform(RngStream& rng, double lo, double hi)
{
    return lo + (hi - lo) * rng.uniform01();
}

/// Random valid parameters with n in [2, max_n].
inline ModelParams random_params(RngStream& rng, std::uint32_t max_n)
{
    ModelParams p;
    p.n = 2 + static_cast<std::uint32_t>(rng.below(max_n - 1));
    p.lambda = 1 + static_cast<std::uint32_t>(rng.below(p.n - 1));
    p.r = rng.uniform01();
    p.q = rng.uniform01();
    p.w = rng.uniform01();
    p.seed = rng();
    return p;
}

/// Random state for `p` with statuses drawn from [0.1, 5) and random links.
inline NetworkState random_state(RngStream& rng, const ModelParams& p)
{
    std::vector<double> statuses(p.n);
    for (auto& s : statuses) {
        s = uniform(rng, 0.1, 5.0);
    }
    std::vector<std::vector<IndividualId>> links(p.n);
    for (IndividualId i = 0; i < p.n; ++i) {
        std::vector<IndividualId> others;
        for (IndividualId j = 0; j < p.n; ++j) {
            if (j != i) {
                others.push_back(j);
            }
        }
        for (std::uint32_t k = 0; k < p.lambda; ++k) {
            std::swap(others[k], others[k + rng.below(others.size() - k)]);
            links[i].push_back(others[k]);
        }
    }
    return NetworkState::from_links(std::move(statuses), links);
}

} // namespace leadnet::fixtures
