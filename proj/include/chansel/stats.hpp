#pragma once

#include <cmath>
#include <numeric>
#include <span>

namespace chansel {

/// Two-sided 95% standard normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct SampleSummary {
    double mean = 0.0;
    double stddev = 0.0;        ///< sample standard deviation (n - 1)
    double ci_halfwidth = 0.0;  ///< normal approximation; 0 for fewer than 2 samples
};

inline SampleSummary summarize(std::span<const double> xs)
{
    SampleSummary s;
    if (xs.empty())
        return s;
    const double n = static_cast<double>(xs.size());
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2)
        return s;
    double ss = 0.0;
    for (const double x : xs)
        ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
    s.ci_halfwidth = kZ95 * s.stddev / std::sqrt(n);
    return s;
}

} // namespace chansel
