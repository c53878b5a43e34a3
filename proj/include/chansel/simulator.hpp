#pragma once

// Exact event-driven simulation of n independent two-state channels.
//
// Each channel owns a keyed random stream and draws its own holding times,
// so its trajectory is the same under every policy and every parameter
// value (common random numbers). Channels that are not in use are advanced
// lazily when next entered; this is equivalent to simulating them
// continuously because their streams are private. Full-observation
// policies advance every channel at every event.
//
// In the infinite mode there are two virtual channels and the level of a
// channel is redrawn from the stationary law on every switch-in.

#include <chansel/errors.hpp>
#include <chansel/markov_core.hpp>
#include <chansel/parallel.hpp>
#include <chansel/policies.hpp>
#include <chansel/policy_spec.hpp>
#include <chansel/rng.hpp>
#include <chansel/stats.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chansel {

struct SimConfig {
    ChannelCount n = ChannelCount::finite(2);
    double gamma = 0.4;
    double c = 0.0;
    PolicySpec policy = PolicySpec::stay();
    double horizon = 1e5;
    std::uint64_t seed = 1;
    int reps = 1;
};

inline void validate(const SimConfig& cfg)
{
    auto check = [](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError(what);
    };
    check(cfg.gamma > 0.0 && cfg.gamma < 1.0, "gamma must lie in (0, 1)");
    check(cfg.c >= 0.0 && std::isfinite(cfg.c), "c must be finite and >= 0");
    check(cfg.horizon > 0.0 && std::isfinite(cfg.horizon), "horizon must be finite and > 0");
    check(cfg.reps >= 1, "reps must be >= 1");
    if (cfg.n.is_infinite()) {
        check(cfg.policy.is_parametric(), "the infinite mode supports only call_gap and cool_off");
        check(cfg.policy.parameter >= 0.0 && std::isfinite(cfg.policy.parameter),
              "policy parameter must be finite and >= 0");
    } else {
        check(cfg.n.value() >= 2, "simulation needs n >= 2 channels");
        if (cfg.policy.is_parametric())
            check(cfg.policy.parameter > 0.0 && std::isfinite(cfg.policy.parameter),
                  "policy parameter must be finite and > 0 for finite n");
    }
}

enum class EventKind { start, transition, switch_channel, wakeup, end };

inline std::string_view to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::start:
        return "start";
    case EventKind::transition:
        return "transition";
    case EventKind::switch_channel:
        return "switch";
    case EventKind::wakeup:
        return "wakeup";
    case EventKind::end:
        return "end";
    }
    return "?";
}

struct EventRecord {
    double time;
    EventKind kind;
    std::size_t channel; ///< the channel concerned (the entered one for switches)
    int level;
    double cumulative_reward;
};

using EventSink = std::function<void(const EventRecord&)>;

struct PathResult {
    double horizon = 0.0;
    double good_time = 0.0;
    std::uint64_t switches = 0;
    double g_estimate = 0.0; ///< (good_time - c N(T)) / T

    double switch_rate() const { return static_cast<double>(switches) / horizon; }
    double good_fraction() const { return good_time / horizon; }
};

struct SimResult {
    std::vector<PathResult> paths;
    SampleSummary g;
    double mean = 0.0;
    double ci_halfwidth = 0.0;
    double mean_switch_rate = 0.0;
    double mean_good_fraction = 0.0;
};

namespace detail {

/// Stream id reserved for the stationary draws of the infinite mode.
inline constexpr std::uint64_t kEntryStream = 0xffffffffULL;

struct ChannelTrack {
    int level = 0;
    double next_change = 0.0;
    RandomStream stream;

    double rate(double gamma) const { return level == 0 ? 1.0 : good_exit_rate(gamma); }

    void restart(double t, int lvl, double gamma)
    {
        level = lvl;
        next_change = t + stream.exponential(rate(gamma));
    }

    /// Applies every transition scheduled at or before t.
    void advance_to(double t, double gamma)
    {
        while (next_change <= t) {
            level ^= 1;
            next_change += stream.exponential(rate(gamma));
        }
    }
};

struct PathSetup {
    std::size_t channels; ///< 2 in the infinite mode
    bool infinite;
    double gamma;
    double c;
    double horizon;
    std::uint64_t seed;
    std::uint64_t replication;
};

template <class Policy>
PathResult run_path(const Policy& policy, const PathSetup& setup, const EventSink* sink)
{
    constexpr bool full = !PartialInformationPolicy<Policy>;
    static_assert(PartialInformationPolicy<Policy> || FullInformationPolicy<Policy>);

    const std::size_t m = setup.channels;
    const double gamma = setup.gamma;
    std::vector<ChannelTrack> ch(m);
    std::vector<int> levels(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        ch[i].stream = RandomStream(setup.seed, setup.replication, i);
        ch[i].restart(0.0, 0, gamma);
    }
    RandomStream entry(setup.seed, setup.replication, kEntryStream);

    std::vector<double> last_visit(m, 0.0);
    std::vector<int> last_seen(m, 0);
    std::size_t cur = 0;
    double last_switch = 0.0;
    double t = 0.0;
    double good = 0.0;
    std::uint64_t switches = 0;

    auto partial = [&] {
        return PartialObservation{t, m, cur, ch[cur].level, last_switch, last_visit, last_seen};
    };
    auto choose = [&] {
        if constexpr (full)
            return policy.choose(FullObservation{partial(), levels});
        else
            return policy.choose(partial());
    };
    auto wakeup = [&] {
        if constexpr (full)
            return policy.next_wakeup(FullObservation{partial(), levels});
        else
            return policy.next_wakeup(partial());
    };
    auto emit = [&](EventKind kind, std::size_t channel, int lvl) {
        if (sink)
            (*sink)(EventRecord{t, kind, channel, lvl, good - setup.c * static_cast<double>(switches)});
    };

    auto decide = [&] {
        std::size_t hops = 0;
        while (const std::optional<std::size_t> target = choose()) {
            const std::size_t j = *target;
            if (j >= m || j == cur)
                throw std::logic_error("policy chose an invalid channel");
            if (ch[cur].level != 0)
                throw std::logic_error("policy switched away from a good channel");
            if (!setup.infinite && ++hops > m)
                throw std::logic_error("switch chain did not terminate");
            last_visit[cur] = t;
            last_seen[cur] = ch[cur].level;
            cur = j;
            if (setup.infinite)
                ch[j].restart(t, entry.bernoulli(gamma) ? 1 : 0, gamma);
            else
                ch[j].advance_to(t, gamma);
            levels[j] = ch[j].level;
            last_switch = t;
            ++switches;
            emit(EventKind::switch_channel, j, ch[j].level);
        }
    };

    emit(EventKind::start, cur, ch[cur].level);
    decide();
    for (;;) {
        double next = std::min(ch[cur].next_change, setup.horizon);
        const double wake = wakeup();
        if (wake <= t)
            throw std::logic_error("policy wake-up is not in the future");
        next = std::min(next, wake);
        if constexpr (full)
            for (std::size_t i = 0; i < m; ++i)
                next = std::min(next, ch[i].next_change);

        good += ch[cur].level * (next - t);
        t = next;
        if (t >= setup.horizon)
            break;

        bool changed = false;
        for (std::size_t i = 0; i < m; ++i) {
            if (!full && i != cur)
                continue;
            if (ch[i].next_change <= t) {
                ch[i].advance_to(t, gamma);
                levels[i] = ch[i].level;
                changed = true;
                emit(EventKind::transition, i, ch[i].level);
            }
        }
        if (!changed)
            emit(EventKind::wakeup, cur, ch[cur].level);
        decide();
    }
    t = setup.horizon;
    emit(EventKind::end, cur, ch[cur].level);

    PathResult out;
    out.horizon = setup.horizon;
    out.good_time = good;
    out.switches = switches;
    out.g_estimate = (good - setup.c * static_cast<double>(switches)) / setup.horizon;
    return out;
}

/// Worst-case switch counts implied by the policy definitions.
inline void check_switch_bounds(const SimConfig& cfg, std::size_t channels, const PathResult& path)
{
    const double parameter = cfg.policy.parameter;
    if (!cfg.policy.is_parametric() || parameter <= 0.0)
        return;
    const double N = static_cast<double>(path.switches);
    const double T = path.horizon;
    const double nd = static_cast<double>(channels);
    const bool ok = cfg.policy.kind == PolicyKind::call_gap ? N <= T / parameter + 1.0
                                                             : N <= nd * T / parameter + nd;
    if (!ok)
        throw std::logic_error("switch-count bound violated");
}

} // namespace detail

/// One replication of `cfg`; the randomness depends only on (seed, rep).
inline PathResult simulate(const SimConfig& cfg, std::uint64_t rep = 0, const EventSink* sink = nullptr)
{
    validate(cfg);
    const bool infinite = cfg.n.is_infinite();
    const std::size_t channels = infinite ? 2 : static_cast<std::size_t>(cfg.n.value());
    const detail::PathSetup setup{channels, infinite, cfg.gamma, cfg.c, cfg.horizon, cfg.seed, rep};

    PathResult path;
    switch (cfg.policy.kind) {
    case PolicyKind::stay:
        path = detail::run_path(StayPolicy{}, setup, sink);
        break;
    case PolicyKind::greedy_full:
        path = detail::run_path(GreedyFullPolicy{}, setup, sink);
        break;
    case PolicyKind::call_gap:
        path = detail::run_path(CallGapPolicy{cfg.policy.parameter}, setup, sink);
        break;
    case PolicyKind::cool_off:
        path = detail::run_path(CoolOffPolicy{cfg.policy.parameter}, setup, sink);
        break;
    }
    detail::check_switch_bounds(cfg, channels, path);
    return path;
}

inline SimResult summarize_paths(std::vector<PathResult> paths)
{
    SimResult out;
    out.paths = std::move(paths);
    std::vector<double> g;
    g.reserve(out.paths.size());
    for (const auto& p : out.paths) {
        g.push_back(p.g_estimate);
        out.mean_switch_rate += p.switch_rate();
        out.mean_good_fraction += p.good_fraction();
    }
    const double count = static_cast<double>(std::max<std::size_t>(1, out.paths.size()));
    out.mean_switch_rate /= count;
    out.mean_good_fraction /= count;
    out.g = summarize(g);
    out.mean = out.g.mean;
    out.ci_halfwidth = out.g.ci_halfwidth;
    return out;
}

/// `cfg.reps` replications, run in parallel; results are stored by index.
inline SimResult simulate_reps(const SimConfig& cfg, unsigned max_threads = 0)
{
    validate(cfg);
    std::vector<PathResult> paths(static_cast<std::size_t>(cfg.reps));
    parallel_for(
        paths.size(), [&](std::size_t r) { paths[r] = simulate(cfg, r); }, max_threads);
    return summarize_paths(std::move(paths));
}

/// Infinite-mode entry point; rejects finite configurations.
inline SimResult simulate_infinite(const SimConfig& cfg, unsigned max_threads = 0)
{
    if (!cfg.n.is_infinite())
        throw ConfigError("simulate_infinite needs the infinite channel mode");
    return simulate_reps(cfg, max_threads);
}

struct GridSearchResult {
    std::size_t best_index = 0;
    double best_param = 0.0;
    SimResult best_result;
    std::vector<double> means; ///< mean g per grid point
    std::vector<double> ci_halfwidths;
};

/// Evaluates the policy of `base` at every parameter in `grid` with the same
/// seed (common random numbers) and returns the best mean. Ties keep the
/// first point.
inline GridSearchResult grid_search(const SimConfig& base, std::span<const double> grid, unsigned max_threads = 0)
{
    if (grid.empty())
        throw ConfigError("parameter grid is empty");
    if (!base.policy.is_parametric())
        throw ConfigError("grid search needs call_gap or cool_off");
    validate(base);

    const std::size_t reps = static_cast<std::size_t>(base.reps);
    std::vector<SimConfig> configs(grid.size(), base);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        configs[k].policy.parameter = grid[k];
        validate(configs[k]);
    }

    // Flatten (grid point, rep) so small grids still use every thread.
    std::vector<PathResult> paths(grid.size() * reps);
    parallel_for(
        paths.size(), [&](std::size_t i) { paths[i] = simulate(configs[i / reps], i % reps); }, max_threads);

    GridSearchResult out;
    std::vector<SimResult> results;
    results.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        results.push_back(summarize_paths({paths.begin() + static_cast<std::ptrdiff_t>(k * reps),
                                           paths.begin() + static_cast<std::ptrdiff_t>((k + 1) * reps)}));
        out.means.push_back(results.back().mean);
        out.ci_halfwidths.push_back(results.back().ci_halfwidth);
    }
    out.best_index = static_cast<std::size_t>(std::max_element(out.means.begin(), out.means.end()) - out.means.begin());
    out.best_param = grid[out.best_index];
    out.best_result = std::move(results[out.best_index]);
    return out;
}

/// `points` evenly spaced values upper*k/points, k = 1..points.
inline std::vector<double> warm_start_grid(double upper, std::size_t points)
{
    if (!(upper > 0.0) || points == 0)
        throw ConfigError("warm-start grid needs upper > 0 and at least one point");
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k)
        grid[k] = upper * static_cast<double>(k + 1) / static_cast<double>(points);
    return grid;
}

} // namespace chansel
