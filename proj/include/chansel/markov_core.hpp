#pragma once

// Two-state channel law, parameter normalization and the aggregate
// (Ehrenfest) birth-death chain of n independent channels.

#include <chansel/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace chansel {

/// Number of channels: a finite count >= 1, or the n = infinity
/// approximation. Infinity is a tag, never a sentinel integer.
class ChannelCount {
public:
    static constexpr ChannelCount finite(int n) { return ChannelCount(n, false); }
    static constexpr ChannelCount infinite() { return ChannelCount(0, true); }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }

    int value() const
    {
        if (infinite_)
            throw DomainError("channel count is infinite");
        return n_;
    }

    std::string to_string() const { return infinite_ ? "inf" : std::to_string(n_); }

    friend constexpr bool operator==(ChannelCount, ChannelCount) = default;

private:
    constexpr ChannelCount(int n, bool inf) : n_(n), infinite_(inf) {}
    int n_;
    bool infinite_;
};

/// Parses "inf" / "infinity" or a positive integer.
inline ChannelCount parse_channel_count(const std::string& text)
{
    if (text == "inf" || text == "infinity" || text == "Infinity")
        return ChannelCount::infinite();
    std::size_t used = 0;
    int n = 0;
    try {
        n = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw DomainError("invalid channel count '" + text + "'");
    }
    if (used != text.size() || n < 1)
        throw DomainError("invalid channel count '" + text + "'");
    return ChannelCount::finite(n);
}

/// Channel model in raw units.
struct RawParams {
    double lambda; ///< 0 -> 1 rate
    double mu;     ///< 1 -> 0 rate
    double zeta;   ///< reward rate in the good state
    double kappa;  ///< cost per switch
};

/// Normalized two-parameter channel law: time in units of 1/lambda and
/// reward in units of zeta.
struct NormalizedParams {
    double gamma;
    double c;
};

struct ModelParams {
    double gamma;
    double c;
    ChannelCount n = ChannelCount::finite(1);
};

struct Normalization {
    NormalizedParams params;
    /// raw average reward = reward_scale * normalized average reward
    double reward_scale;
    /// raw time = time_scale * normalized time
    double time_scale;
};

inline void validate_gamma(double gamma)
{
    detail::require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
}

inline void validate_cost(double c)
{
    detail::require(c >= 0.0 && std::isfinite(c), "switching cost must be finite and >= 0");
}

/// c >= gamma^2, with relative slack so that a cost such as 0.16 at
/// gamma = 0.4 (where gamma * gamma rounds up) counts as the threshold.
inline bool at_or_above_threshold(double gamma, double c) { return c >= gamma * gamma * (1.0 - 1e-12); }

inline void validate(const ModelParams& p)
{
    validate_gamma(p.gamma);
    validate_cost(p.c);
}

/// Time is rescaled by 1/lambda so that the 0 -> 1 rate is one. Over a raw
/// horizon t the accrued reward is zeta * (good time) - kappa * N; in
/// rescaled time this becomes zeta * [good time' - (kappa*lambda/zeta) N] / lambda,
/// hence c = kappa*lambda/zeta and g_raw = zeta * g_normalized.
inline Normalization normalize(const RawParams& raw)
{
    detail::require(raw.lambda > 0.0 && std::isfinite(raw.lambda), "lambda must be > 0");
    detail::require(raw.mu > 0.0 && std::isfinite(raw.mu), "mu must be > 0");
    detail::require(raw.zeta > 0.0 && std::isfinite(raw.zeta), "zeta must be > 0");
    detail::require(raw.kappa >= 0.0 && std::isfinite(raw.kappa), "kappa must be >= 0");

    Normalization out{};
    out.params.gamma = raw.lambda / (raw.lambda + raw.mu);
    out.params.c = raw.kappa * raw.lambda / raw.zeta;
    out.reward_scale = raw.zeta;
    out.time_scale = 1.0 / raw.lambda;
    return out;
}

/// Rate of leaving the good state, (1 - gamma) / gamma, in normalized time.
inline double good_exit_rate(double gamma) { return (1.0 - gamma) / gamma; }

/// P(X(t) = 1 | X(0) = x) for the normalized two-state chain.
inline double transient_prob(double t, int x, double gamma)
{
    detail::require(t >= 0.0, "time must be nonnegative");
    detail::require(x == 0 || x == 1, "channel state must be 0 or 1");
    validate_gamma(gamma);
    // 1 - e^{-t/gamma}, accurate for small t
    const double decay = -std::expm1(-t / gamma);
    if (x == 0)
        return gamma * decay;
    return 1.0 - (1.0 - gamma) * decay;
}

/// Normalized generator [[-1, 1], [1/gamma - 1, -(1/gamma - 1)]].
inline Eigen::Matrix2d generator(double gamma)
{
    validate_gamma(gamma);
    const double down = 1.0 / gamma - 1.0;
    Eigen::Matrix2d q;
    q << -1.0, 1.0, down, -down;
    return q;
}

/// Binomial pmf C(n,i) p^i (1-p)^(n-i). Log space beyond n = 30.
inline double binomial_pmf(int n, int i, double p)
{
    if (i < 0 || i > n)
        return 0.0;
    if (n <= 30) {
        double coeff = 1.0;
        for (int k = 1; k <= i; ++k)
            coeff = coeff * (n - i + k) / k;
        return coeff * std::pow(p, i) * std::pow(1.0 - p, n - i);
    }
    const double log_coeff = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    return std::exp(log_coeff + i * std::log(p) + (n - i) * std::log1p(-p));
}

/// Birth-death chain of the number of good channels among n.
struct EhrenfestChain {
    int n;
    std::vector<double> birth_rates; ///< lambda_i, i = 0..n-1
    std::vector<double> death_rates; ///< mu_i, i = 1..n, stored at index i-1
    std::vector<double> stationary;  ///< rho_i, i = 0..n

    double birth(int i) const { return birth_rates.at(static_cast<std::size_t>(i)); }
    double death(int i) const { return death_rates.at(static_cast<std::size_t>(i - 1)); }
};

inline EhrenfestChain ehrenfest(int n, double gamma)
{
    detail::require(n >= 1, "channel count must be >= 1");
    validate_gamma(gamma);

    EhrenfestChain chain{n, {}, {}, {}};
    const double down = 1.0 / gamma - 1.0;
    chain.birth_rates.reserve(n);
    chain.death_rates.reserve(n);
    for (int i = 0; i < n; ++i)
        chain.birth_rates.push_back(static_cast<double>(n - i));
    for (int i = 1; i <= n; ++i)
        chain.death_rates.push_back(i * down);
    chain.stationary.reserve(n + 1);
    for (int i = 0; i <= n; ++i)
        chain.stationary.push_back(binomial_pmf(n, i, gamma));
    return chain;
}

} // namespace chansel
