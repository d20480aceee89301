#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace leadnet {

using IndividualId = std::uint32_t;

class InvalidParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Which individuals an actor may rewire to.
enum class EligibilityRule {
    /// No link between actor and candidate in either direction.
    no_link_either_direction,
    /// Only the actor's current out-targets are excluded.
    no_outgoing_link,
};

/// Model constants plus run length and seed. Defaults are the baseline
/// (n = 50, lambda = 3, r = 0.2, w = 0.5) with the symmetric q = 0.5.
struct ModelParams {
    std::uint32_t n = 50;
    std::uint32_t lambda = 3;
    double r = 0.2;
    double q = 0.5;
    double w = 0.5;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    EligibilityRule eligibility = EligibilityRule::no_link_either_direction;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

namespace detail {

inline void check_unit(const char* name, double v)
{
    // written as a negated range test so NaN is rejected too
    if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidParams(std::string(name) + " = " + std::to_string(v) + " is outside [0, 1]");
    }
}

} // namespace detail

/// Throws InvalidParams naming the first violated constraint.
inline void validate(const ModelParams& p)
{
    if (p.n < 2) {
        throw InvalidParams("n = " + std::to_string(p.n) + " must be at least 2");
    }
    if (p.lambda < 1) {
        throw InvalidParams("lambda must be at least 1");
    }
    if (p.lambda > p.n - 1) {
        throw InvalidParams("lambda = " + std::to_string(p.lambda) + " exceeds n - 1 = " +
                            std::to_string(p.n - 1));
    }
    detail::check_unit("r", p.r);
    detail::check_unit("q", p.q);
    detail::check_unit("w", p.w);
}

} // namespace leadnet
