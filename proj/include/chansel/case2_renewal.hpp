#pragma once

// Partial observation, call-gapping / cool-off for n = 2 and n = infinity.
// Regeneration points are switches into a bad channel; a cycle is a first
// sojourn W0 followed by M sojourns W1 that each started in a good channel.

#include <chansel/errors.hpp>
#include <chansel/markov_core.hpp>
#include <chansel/policy_spec.hpp>

#include <cmath>
#include <limits>

namespace chansel {

enum class Regime {
    two_channels,
    infinite, ///< every entered channel is drawn from the stationary law
};

inline ChannelCount channel_count(Regime regime)
{
    return regime == Regime::two_channels ? ChannelCount::finite(2) : ChannelCount::infinite();
}

namespace detail {

inline void require_tau_positive(double tau) { require(tau > 0.0 && std::isfinite(tau), "tau must be > 0"); }

} // namespace detail

/// CDF of the sojourn after a switch into a channel at level i: an atom of
/// mass 1 - p(tau; i) at tau, then an Exp((1-gamma)/gamma) tail.
inline double cdf_W(double t, int i, double gamma, double tau)
{
    detail::require_tau_positive(tau);
    validate_gamma(gamma);
    detail::require(i == 0 || i == 1, "channel state must be 0 or 1");
    if (t < tau)
        return 0.0;
    const double good = transient_prob(tau, i, gamma);
    return (1.0 - good) + good * (-std::expm1(-good_exit_rate(gamma) * (t - tau)));
}

struct RenewalQuantities {
    double mean_W0; ///< E[W0], sojourn after entering a bad channel
    double mean_W1; ///< E[W1], sojourn after entering a good channel
    double mean_I0; ///< P(next entered channel is good) after a W0 sojourn
    double mean_I1; ///< same after a W1 sojourn
    double mean_R0; ///< expected good time during W0
    double mean_R1; ///< expected good time during W1
    double mean_W;  ///< expected cycle length
    double mean_R;  ///< expected good time per cycle
    double mean_M;  ///< expected switches into a good channel per cycle
};

inline RenewalQuantities renewal_quantities(double gamma, double tau)
{
    detail::require_tau_positive(tau);
    validate_gamma(gamma);

    const double p0 = transient_prob(tau, 0, gamma);
    const double p1 = transient_prob(tau, 1, gamma);
    const double decay = std::exp(-tau / gamma);
    const double good_sojourn = gamma / (1.0 - gamma);

    RenewalQuantities q{};
    q.mean_W0 = tau + p0 * good_sojourn;
    q.mean_W1 = tau + p1 * good_sojourn;
    q.mean_I0 = gamma - decay * gamma * (gamma + p0 - 2.0) / (gamma - 2.0);
    q.mean_I1 = gamma - decay * gamma * (gamma + p1 - 2.0) / (gamma - 2.0);
    // integral_0^tau p(t; i) dt, plus the good sojourn left at tau
    q.mean_R0 = gamma * (tau - p0) + p0 * good_sojourn;
    q.mean_R1 = gamma * (tau - p1 + 1.0) + p1 * good_sojourn;

    q.mean_M = q.mean_I0 / (1.0 - q.mean_I1);
    q.mean_W = q.mean_W0 + q.mean_M * q.mean_W1;
    q.mean_R = q.mean_R0 + q.mean_M * q.mean_R1;
    return q;
}

/// E[V] / E[W] from the cycle quantities.
inline double renewal_reward(const RenewalQuantities& q, double c) { return (q.mean_R - c * (q.mean_M + 1.0)) / q.mean_W; }

/// Fully expanded rational-exponential forms of E[W], E[R], E[M]. Kept as an
/// independent route to the compositional quantities; valid for moderate tau.
struct ExpandedCycleMeans {
    double mean_W;
    double mean_R;
    double mean_M;
};

inline ExpandedCycleMeans expanded_cycle_means(double gamma, double tau)
{
    const double g = gamma;
    const double e1 = std::exp(tau / g);
    const double e2 = std::exp(2.0 * tau / g);
    const double den = (g - 2.0) * e2 - 2.0 * e1 * g + g;
    const double sq = (g - 1.0) * (g - 1.0);
    ExpandedCycleMeans out{};
    out.mean_W = (e2 * (g * g * g - (tau + 2.0) * g * g + 3.0 * tau * g - 2.0 * tau) - g * g * g - (tau - 2.0) * g * g + tau * g) /
                 (sq * den);
    out.mean_R = (e2 * ((1.0 - tau) * g * g * g + (3.0 * tau - 2.0) * g * g - 2.0 * tau * g) + 2.0 * e1 * g * g * sq -
                  2.0 * g * g * g * g + (3.0 - tau) * g * g * g + tau * g * g) /
                 (sq * den);
    out.mean_M = (e2 * (2.0 - g) - g) / (den * (g - 1.0)) - 1.0;
    return out;
}

/// A1, A2, A3 of g(tau) = (A1 - c A2) / A3, all multiplied by a common
/// positive `scale` (1 for tau <= gamma, e^{-2 tau / gamma} beyond).
struct RewardCoefficients {
    double A1;
    double A2;
    double A3;
    double scale;
};

/// The coefficients exactly as printed; overflows and cancels badly at the
/// extremes of tau. Used for cross-checking only.
inline RewardCoefficients literal_coefficients(double gamma, double tau)
{
    const double g = gamma;
    const double e1 = std::exp(tau / g);
    const double e2 = std::exp(2.0 * tau / g);
    RewardCoefficients k{};
    k.A1 = e2 * ((tau - 1.0) * g * g * g - (3.0 * tau - 2.0) * g * g + 2.0 * tau * g) - 2.0 * e1 * g * g * (1.0 - g) * (1.0 - g) +
           2.0 * g * g * g * g + (tau - 3.0) * g * g * g - tau * g * g;
    k.A2 = (g - 1.0) * (e2 * (g - 2.0) + g);
    k.A3 = g * g * g + (tau - 2.0) * g * g - tau * g - e2 * (g * g * g - (tau + 2.0) * g * g + 3.0 * tau * g - 2.0 * tau);
    k.scale = 1.0;
    return k;
}

inline RewardCoefficients reward_coefficients(double gamma, double tau)
{
    const double g = gamma;
    const double x = tau / g;
    const double sq = (1.0 - g) * (1.0 - g);
    const double lead1 = (tau - 1.0) * g * g * g - (3.0 * tau - 2.0) * g * g + 2.0 * tau * g;
    const double lead3 = g * g * g - (tau + 2.0) * g * g + 3.0 * tau * g - 2.0 * tau;
    RewardCoefficients k{};
    if (x <= 1.0) {
        // e^{k x} = 1 + expm1(k x); the O(1) parts cancel analytically.
        const double m1 = std::expm1(x);
        const double m2 = std::expm1(2.0 * x);
        k.A1 = 2.0 * tau * g * sq + m2 * lead1 - 2.0 * m1 * g * g * sq;
        k.A2 = (g - 1.0) * (2.0 * (g - 1.0) + m2 * (g - 2.0));
        k.A3 = 2.0 * tau * sq - m2 * lead3;
        k.scale = 1.0;
    } else {
        const double s1 = std::exp(-x);
        const double s2 = s1 * s1;
        k.A1 = lead1 - 2.0 * s1 * g * g * sq + s2 * (2.0 * g * g * g * g + (tau - 3.0) * g * g * g - tau * g * g);
        k.A2 = (g - 1.0) * ((g - 2.0) + s2 * g);
        k.A3 = s2 * (g * g * g + (tau - 2.0) * g * g - tau * g) - lead3;
        k.scale = s2;
    }
    return k;
}

/// Long-run average reward of call-gapping with parameter tau (equivalently
/// cool-off with sigma = tau).
inline double g_tau(double gamma, double c, double tau, Regime regime)
{
    validate_gamma(gamma);
    validate_cost(c);
    if (regime == Regime::infinite) {
        detail::require(tau >= 0.0 && std::isfinite(tau), "tau must be >= 0");
        const double g = gamma;
        return ((g - 1.0) * c + g * (g - g * tau + tau)) / (g * g - g * tau + tau);
    }
    detail::require_tau_positive(tau);
    const RewardCoefficients k = reward_coefficients(gamma, tau);
    return (k.A1 - c * k.A2) / k.A3;
}

/// gamma - g(tau) at c = gamma^2, i.e. 2 e^{tau/gamma} (gamma-1)^2 gamma^2 / A3,
/// computed without cancellation so it stays positive for large tau.
inline double threshold_deficit(double gamma, double tau)
{
    validate_gamma(gamma);
    detail::require_tau_positive(tau);
    const RewardCoefficients k = reward_coefficients(gamma, tau);
    // e^{tau/gamma} carries the same scale as A3
    const double e1_scaled = k.scale == 1.0 ? std::exp(tau / gamma) : std::exp(-tau / gamma);
    const double sq = (gamma - 1.0) * (gamma - 1.0);
    return 2.0 * e1_scaled * sq * gamma * gamma / k.A3;
}

/// g(tau) at c = gamma^2.
inline double g_at_threshold(double gamma, double tau) { return gamma - threshold_deficit(gamma, tau); }

/// Sign-carrying factor of g'(tau) = h(tau) f(tau), h > 0.
inline double f_opt(double gamma, double c, double tau)
{
    const double e1 = std::exp(tau / gamma);
    const double e2 = e1 * e1;
    const double slack = gamma * gamma - c;
    return e2 * slack * (gamma - 2.0) + 2.0 * e1 * gamma * (gamma - tau * (gamma - 1.0)) - gamma * slack;
}

namespace detail {

// f(tau) e^{-2 tau/gamma}; same sign as f without overflow.
inline double f_opt_scaled(double gamma, double c, double tau)
{
    const double s1 = std::exp(-tau / gamma);
    const double slack = gamma * gamma - c;
    return slack * (gamma - 2.0) + 2.0 * s1 * gamma * (gamma - tau * (gamma - 1.0)) - s1 * s1 * gamma * slack;
}

} // namespace detail

/// Positive factor h(tau) = (gamma-1)^2 (e^{2tau/gamma}(2-gamma) + gamma) / A3^2.
inline double h_factor(double gamma, double tau)
{
    validate_gamma(gamma);
    detail::require_tau_positive(tau);
    const RewardCoefficients k = reward_coefficients(gamma, tau);
    const double sq = (gamma - 1.0) * (gamma - 1.0);
    if (k.scale == 1.0) {
        const double e2 = std::exp(2.0 * tau / gamma);
        return sq * (e2 * (2.0 - gamma) + gamma) / (k.A3 * k.A3);
    }
    return sq * ((2.0 - gamma) + k.scale * gamma) * k.scale / (k.A3 * k.A3);
}

/// g''(tau) at a stationary point of g.
inline double g_second_derivative_at_root(double gamma, double c, double tau)
{
    const double e1 = std::exp(tau / gamma);
    return 2.0 * h_factor(gamma, tau) * ((1.0 - e1) * gamma * gamma - c - e1 * tau * (1.0 - gamma));
}

struct Case2Solution {
    PolicyKind policy = PolicyKind::stay; ///< call_gap (== cool_off here) or stay
    double tau = std::numeric_limits<double>::infinity(); ///< tau* = sigma*
    double g_star = 0.0;
    double f_residual = 0.0;
    double second_derivative = 0.0;
};

/// Optimal gap for n = 2 (root of f) or n = infinity (tau* = 0), or stay
/// when c >= gamma^2.
inline Case2Solution tau_star(double gamma, double c, Regime regime)
{
    validate_gamma(gamma);
    validate_cost(c);

    Case2Solution sol;
    if (at_or_above_threshold(gamma, c)) {
        sol.policy = PolicyKind::stay;
        sol.g_star = gamma;
        return sol;
    }
    sol.policy = PolicyKind::call_gap;

    if (regime == Regime::infinite) {
        sol.tau = 0.0;
        sol.g_star = 1.0 - c * (1.0 - gamma) / (gamma * gamma);
        return sol;
    }

    if (c == 0.0) {
        // f(0) = 2c vanishes: the optimum is the tau -> 0 limit.
        sol.tau = 0.0;
        sol.g_star = 1.0 - (1.0 - gamma) * (1.0 - gamma);
        return sol;
    }

    // f(0) = 2c > 0 and f eventually negative.
    double lo = 0.0;
    double hi = gamma;
    while (detail::f_opt_scaled(gamma, c, hi) >= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e3 * gamma)
            throw SolverError("could not bracket the optimal call-gapping time");
    }
    double mid = 0.5 * (lo + hi);
    while (true) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const double fm = f_opt(gamma, c, mid);
        if (hi - lo <= 1e-12 && std::abs(fm) <= 1e-10)
            break;
        if (fm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    sol.tau = mid;
    sol.f_residual = f_opt(gamma, c, mid);
    sol.g_star = g_tau(gamma, c, mid, Regime::two_channels);
    sol.second_derivative = g_second_derivative_at_root(gamma, c, mid);
    if (!(sol.second_derivative < 0.0))
        throw SolverError("stationary point of g is not a maximum");
    return sol;
}

} // namespace chansel
