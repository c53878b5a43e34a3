#pragma once

// Channel-selection policies and the observation interfaces they may read.
// Partial-information policies only ever see PartialObservation, which has
// no access to the levels of channels other than the selected one.

#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>

#include <chansel/markov_core.hpp>

namespace chansel {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct PartialObservation {
    double now;
    std::size_t channels;
    std::size_t current;
    int current_level; ///< observed: the selected channel is always visible
    double last_switch_time;
    std::span<const double> last_visit_times; ///< when each channel was last in use
    std::span<const int> last_seen_levels;    ///< level observed when it was left

    /// Time since channel i was last in use; zero for the selected channel.
    double absence(std::size_t i) const { return i == current ? 0.0 : now - last_visit_times[i]; }

    /// P(channel i is good) given what has been observed.
    double belief(std::size_t i, double gamma) const
    {
        if (i == current)
            return current_level;
        return transient_prob(absence(i), last_seen_levels[i], gamma);
    }

    std::size_t next_in_rotation() const { return (current + 1) % channels; }
};

struct FullObservation {
    PartialObservation partial;
    std::span<const int> levels; ///< every channel's current level
};

/// choose() returns the channel to switch into now, if any. next_wakeup()
/// returns the next time the decision can change without any observed level
/// changing (gap expiry, cool-off eligibility).
template <class P>
concept PartialInformationPolicy = requires(const P& p, const PartialObservation& o) {
    { p.choose(o) } -> std::same_as<std::optional<std::size_t>>;
    { p.next_wakeup(o) } -> std::convertible_to<double>;
};

template <class P>
concept FullInformationPolicy = requires(const P& p, const FullObservation& o) {
    { p.choose(o) } -> std::same_as<std::optional<std::size_t>>;
    { p.next_wakeup(o) } -> std::convertible_to<double>;
};

struct StayPolicy {
    std::optional<std::size_t> choose(const PartialObservation&) const { return std::nullopt; }
    double next_wakeup(const PartialObservation&) const { return kNever; }
};

/// Leave a bad channel for the longest-unused one, but never within `tau`
/// of the previous switch.
struct CallGapPolicy {
    double tau;

    std::optional<std::size_t> choose(const PartialObservation& o) const
    {
        if (o.current_level == 0 && o.now >= o.last_switch_time + tau)
            return o.next_in_rotation();
        return std::nullopt;
    }

    double next_wakeup(const PartialObservation& o) const
    {
        const double ready = o.last_switch_time + tau;
        return o.current_level == 0 && o.now < ready ? ready : kNever;
    }
};

/// Leave a bad channel only into one that has been unused for at least
/// `sigma`. Rotation order makes the next channel the longest-unused one.
struct CoolOffPolicy {
    double sigma;

    std::optional<std::size_t> choose(const PartialObservation& o) const
    {
        if (o.current_level != 0)
            return std::nullopt;
        const std::size_t next = o.next_in_rotation();
        if (o.now >= o.last_visit_times[next] + sigma)
            return next;
        return std::nullopt;
    }

    double next_wakeup(const PartialObservation& o) const
    {
        if (o.current_level != 0)
            return kNever;
        const double ready = o.last_visit_times[o.next_in_rotation()] + sigma;
        return o.now < ready ? ready : kNever;
    }
};

/// Full observation: keep a good channel; from a bad one move to the
/// lowest-index good channel, if any.
struct GreedyFullPolicy {
    std::optional<std::size_t> choose(const FullObservation& o) const
    {
        if (o.partial.current_level != 0)
            return std::nullopt;
        for (std::size_t i = 0; i < o.levels.size(); ++i)
            if (i != o.partial.current && o.levels[i] == 1)
                return i;
        return std::nullopt;
    }

    double next_wakeup(const FullObservation&) const { return kNever; }
};

static_assert(PartialInformationPolicy<StayPolicy>);
static_assert(PartialInformationPolicy<CallGapPolicy>);
static_assert(PartialInformationPolicy<CoolOffPolicy>);
static_assert(FullInformationPolicy<GreedyFullPolicy> && !PartialInformationPolicy<GreedyFullPolicy>);

} // namespace chansel
