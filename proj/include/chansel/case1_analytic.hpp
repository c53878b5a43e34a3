#pragma once

// Full observation: closed-form choice between "stay" and the greedy policy
// that always holds a good channel when one exists.

#include <chansel/markov_core.hpp>
#include <chansel/policy_spec.hpp>

#include <cmath>

namespace chansel {

struct Case1Solution {
    PolicyKind policy; ///< greedy_full or stay
    double g_star;     ///< normalized average reward
};

/// Average reward of the greedy full-observation policy:
/// 1 - (1-gamma)^n - c (1 - gamma - (1-gamma)^n) / gamma.
inline double greedy_full_reward(int n, double gamma, double c)
{
    const double all_bad = std::pow(1.0 - gamma, n);
    return 1.0 - all_bad - c * (1.0 - gamma - all_bad) / gamma;
}

inline Case1Solution solve_case1(ChannelCount n, double gamma, double c)
{
    if (n.is_infinite())
        throw DomainError("full-observation closed form is defined for finite n only");
    const int channels = n.value();
    detail::require(channels >= 1, "channel count must be >= 1");
    validate_gamma(gamma);
    validate_cost(c);

    // A single channel has nothing to switch to.
    if (channels == 1 || c >= gamma)
        return {PolicyKind::stay, gamma};
    return {PolicyKind::greedy_full, greedy_full_reward(channels, gamma, c)};
}

inline Case1Solution solve_case1(int n, double gamma, double c)
{
    return solve_case1(ChannelCount::finite(n), gamma, c);
}

/// Greedy reward via the aggregate chain as a Markov reward process: reward
/// accrues while some channel is good; a switch is paid on 0 -> 1 jumps that
/// hit another channel (probability (n-1)/n) and on k -> k-1 jumps that hit
/// the selected channel (probability 1/k).
inline double g_markov_reward(ChannelCount n, double gamma, double c)
{
    if (n.is_infinite())
        throw DomainError("Markov reward formula is defined for finite n only");
    validate_cost(c);
    const EhrenfestChain chain = ehrenfest(n.value(), gamma);
    const int channels = chain.n;
    const auto& rho = chain.stationary;

    double g = 1.0 - rho[0];
    g -= c * (channels - 1.0) / channels * chain.birth(0) * rho[0];
    for (int k = 2; k <= channels; ++k)
        g -= c / k * chain.death(k) * rho[static_cast<std::size_t>(k)];
    return g;
}

inline double g_markov_reward(int n, double gamma, double c)
{
    return g_markov_reward(ChannelCount::finite(n), gamma, c);
}

} // namespace chansel
