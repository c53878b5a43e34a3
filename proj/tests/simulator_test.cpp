#include <chansel/case1_analytic.hpp>
#include <chansel/case2_renewal.hpp>
#include <chansel/simulator.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

using namespace chansel;

// ---------------------------------------------------------------------------
// Observation boundary: partial-information policies cannot name hidden state.

template <class O>
concept ExposesAllLevels = requires(const O& o) { o.levels; };

struct PeekingPolicy {
    std::optional<std::size_t> choose(const FullObservation& o) const
    {
        return o.levels[1] == 1 ? std::optional<std::size_t>(1) : std::nullopt;
    }
    double next_wakeup(const FullObservation&) const { return kNever; }
};

static_assert(!ExposesAllLevels<PartialObservation>);
static_assert(ExposesAllLevels<FullObservation>);
static_assert(!PartialInformationPolicy<PeekingPolicy>);
static_assert(FullInformationPolicy<PeekingPolicy>);
static_assert(PartialInformationPolicy<CallGapPolicy> && PartialInformationPolicy<CoolOffPolicy>);
static_assert(!FullInformationPolicy<CallGapPolicy>);

namespace {

// Whole trajectories of each channel, drawn from the same keyed streams the
// simulator uses, with the policy applied afterwards by a separate scan.
struct Trajectory {
    std::vector<double> flips; ///< transition times; the level starts at 0

    int level_at(double t) const
    {
        const auto k = std::upper_bound(flips.begin(), flips.end(), t) - flips.begin();
        return static_cast<int>(k % 2);
    }

    /// First transition strictly after t.
    double next_flip(double t) const
    {
        const auto it = std::upper_bound(flips.begin(), flips.end(), t);
        return it == flips.end() ? kNever : *it;
    }

    double good_time(double a, double b) const
    {
        double total = 0.0;
        double t = a;
        int level = level_at(a);
        for (auto it = std::upper_bound(flips.begin(), flips.end(), a); it != flips.end() && *it < b; ++it) {
            if (level)
                total += *it - t;
            t = *it;
            level ^= 1;
        }
        if (level)
            total += b - t;
        return total;
    }
};

// rate_scale multiplies both rates, giving the same path in another time unit.
std::vector<Trajectory> trajectories(std::size_t n, double gamma, double horizon, std::uint64_t seed,
                                     std::uint64_t rep, double rate_scale = 1.0)
{
    std::vector<Trajectory> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream s(seed, rep, i);
        int level = 0;
        double t = 0.0;
        while (true) {
            t += s.exponential(rate_scale * (level == 0 ? 1.0 : (1.0 - gamma) / gamma));
            if (t > horizon)
                break;
            out[i].flips.push_back(t);
            level ^= 1;
        }
    }
    return out;
}

struct OracleResult {
    double good = 0.0;
    std::uint64_t switches = 0;
};

// Round-robin gap/cool-off rules evaluated directly on trajectories.
OracleResult oracle_run(const std::vector<Trajectory>& ch, bool cool_off, double param, double horizon)
{
    const std::size_t n = ch.size();
    std::vector<double> left(n, 0.0);
    std::size_t cur = 0;
    double last = 0.0;
    double t = 0.0;
    OracleResult r;
    while (t < horizon) {
        const std::size_t next = (cur + 1) % n;
        const double ready = cool_off ? left[next] + param : last + param;
        if (ch[cur].level_at(t) == 0 && t >= ready) {
            left[cur] = t;
            cur = next;
            last = t;
            ++r.switches;
            continue;
        }
        const double until = std::min(horizon, ch[cur].level_at(t) == 0 ? std::min(ready, ch[cur].next_flip(t))
                                                                          : ch[cur].next_flip(t));
        r.good += ch[cur].good_time(t, until);
        t = until;
    }
    return r;
}

SimConfig make(ChannelCount n, double gamma, double c, PolicySpec p, double horizon, std::uint64_t seed = 1, int reps = 1)
{
    return SimConfig{n, gamma, c, p, horizon, seed, reps};
}

struct LoggedPath {
    std::vector<EventRecord> events;
    PathResult result;
};

LoggedPath logged(const SimConfig& cfg, std::uint64_t rep = 0)
{
    LoggedPath out;
    const EventSink sink = [&](const EventRecord& e) { out.events.push_back(e); };
    out.result = simulate(cfg, rep, &sink);
    return out;
}

} // namespace

TEST(Config, Rejections)
{
    const auto two = ChannelCount::finite(2);
    EXPECT_THROW(simulate(make(ChannelCount::infinite(), 0.4, 0.1, PolicySpec::greedy_full(), 10)), ConfigError);
    EXPECT_THROW(simulate(make(ChannelCount::infinite(), 0.4, 0.1, PolicySpec::stay(), 10)), ConfigError);
    EXPECT_THROW(simulate(make(two, 0.4, 0.1, PolicySpec::call_gap(0.0), 10)), ConfigError);
    EXPECT_THROW(simulate(make(two, 0.4, 0.1, PolicySpec::cool_off(-1.0), 10)), ConfigError);
    EXPECT_THROW(simulate(make(ChannelCount::finite(1), 0.4, 0.1, PolicySpec::stay(), 10)), ConfigError);
    EXPECT_THROW(simulate(make(two, 1.0, 0.1, PolicySpec::stay(), 10)), ConfigError);
    EXPECT_THROW(simulate(make(two, 0.4, -0.1, PolicySpec::stay(), 10)), ConfigError);
    EXPECT_THROW(simulate(make(two, 0.4, 0.1, PolicySpec::stay(), 0.0)), ConfigError);
    EXPECT_THROW(simulate_reps(make(two, 0.4, 0.1, PolicySpec::stay(), 10, 1, 0)), ConfigError);
    EXPECT_THROW(simulate_infinite(make(two, 0.4, 0.1, PolicySpec::call_gap(1.0), 10)), ConfigError);
    EXPECT_NO_THROW(simulate(make(ChannelCount::infinite(), 0.4, 0.1, PolicySpec::cool_off(0.0), 10)));
}

TEST(Exactness, MatchesTrajectoryOracle)
{
    for (std::size_t n : {2U, 3U, 5U})
        for (bool cool : {false, true})
            for (double param : {0.05, 0.4, 1.3})
                for (std::uint64_t rep : {0U, 7U}) {
                    const double T = 2000.0;
                    const double g = 0.4;
                    const SimConfig cfg = make(ChannelCount::finite(static_cast<int>(n)), g, 0.0,
                                               cool ? PolicySpec::cool_off(param) : PolicySpec::call_gap(param), T, 99);
                    const PathResult sim = simulate(cfg, rep);
                    const OracleResult o = oracle_run(trajectories(n, g, T, 99, rep), cool, param, T);
                    EXPECT_EQ(sim.switches, o.switches) << n << ' ' << cool << ' ' << param;
                    EXPECT_NEAR(sim.good_time, o.good, 1e-8 * T) << n << ' ' << cool << ' ' << param;
                }
}

TEST(Exactness, SingleChannelOccupancy)
{
    // time-average variance of the two-state chain: 2 gamma (1-gamma) * gamma / T
    const double T = 1e6;
    for (double g : {0.2, 0.5, 0.8}) {
        const PathResult p = simulate(make(ChannelCount::finite(2), g, 0.0, PolicySpec::stay(), T, 3));
        const double sd = std::sqrt(2.0 * g * (1.0 - g) * g / T);
        EXPECT_LE(std::abs(p.good_fraction() - g), 3.0 * sd) << g;
        EXPECT_EQ(p.switches, 0U);
    }
}

TEST(Exactness, StayEarnsGamma)
{
    const SimResult r = simulate_reps(make(ChannelCount::finite(3), 0.4, 0.3, PolicySpec::stay(), 1e4, 17, 40));
    EXPECT_LE(std::abs(r.mean - 0.4), 3.0 * r.g.stddev / std::sqrt(40.0));
}

TEST(Exactness, GreedyFullMatchesClosedForm)
{
    const SimResult r = simulate_reps(make(ChannelCount::finite(3), 0.4, 0.1, PolicySpec::greedy_full(), 1e5, 5, 100));
    const double g_star = solve_case1(3, 0.4, 0.1).g_star;
    EXPECT_LE(std::abs(r.mean - g_star), r.ci_halfwidth) << r.mean << " vs " << g_star;
}

TEST(Exactness, TwoChannelCallGapMatchesRenewal)
{
    for (double tau : {0.2, 0.6275498650306871, 1.5}) {
        const SimResult r =
            simulate_reps(make(ChannelCount::finite(2), 0.4, 0.08, PolicySpec::call_gap(tau), 2e4, 23, 60));
        const double g = g_tau(0.4, 0.08, tau, Regime::two_channels);
        EXPECT_LE(std::abs(r.mean - g), 1.5 * r.ci_halfwidth) << tau << ": " << r.mean << " vs " << g;
    }
}

TEST(Exactness, RawUnitsScaleExactly)
{
    // lambda = 2, mu = 3, zeta = 0.5, kappa = 0.05 normalizes to gamma = 0.4, c = 0.2
    const RawParams raw{2.0, 3.0, 0.5, 0.05};
    const Normalization norm = normalize(raw);
    const double tau = 0.6;
    const double T = 5000.0;
    const SimConfig cfg =
        make(ChannelCount::finite(2), norm.params.gamma, norm.params.c, PolicySpec::call_gap(tau), T, 8);
    for (std::uint64_t rep : {0U, 1U, 2U}) {
        const PathResult p = simulate(cfg, rep);
        // the same paths in raw time: rates multiplied by lambda
        const double T_raw = T * norm.time_scale;
        const auto ch = trajectories(2, norm.params.gamma, T_raw, 8, rep, raw.lambda);
        const OracleResult o = oracle_run(ch, false, tau * norm.time_scale, T_raw);
        const double g_raw = (raw.zeta * o.good - raw.kappa * static_cast<double>(o.switches)) / T_raw;
        EXPECT_EQ(o.switches, p.switches);
        EXPECT_NEAR(g_raw, norm.reward_scale * p.g_estimate, 1e-9);
    }
}

TEST(Policies, CallGapSpacingAndRoundRobin)
{
    for (int n : {2, 3, 4}) {
        const double tau = 0.3;
        const LoggedPath lp = logged(make(ChannelCount::finite(n), 0.4, 0.05, PolicySpec::call_gap(tau), 3000.0, 4));
        double last = -kNever;
        std::size_t prev_channel = 0;
        std::uint64_t switches = 0;
        for (const EventRecord& e : lp.events) {
            if (e.kind != EventKind::switch_channel)
                continue;
            EXPECT_GE(e.time, last + tau);
            EXPECT_EQ(e.channel, (prev_channel + 1) % static_cast<std::size_t>(n));
            last = e.time;
            prev_channel = e.channel;
            ++switches;
        }
        EXPECT_EQ(switches, lp.result.switches);
        EXPECT_GT(switches, 100U);
    }
}

TEST(Policies, CoolOffRoundRobinAndEligibility)
{
    const int n = 4;
    const double sigma = 0.5;
    const LoggedPath lp = logged(make(ChannelCount::finite(n), 0.4, 0.05, PolicySpec::cool_off(sigma), 3000.0, 6));
    std::vector<double> left(n, 0.0);
    std::size_t cur = 0;
    for (const EventRecord& e : lp.events) {
        if (e.kind != EventKind::switch_channel)
            continue;
        EXPECT_EQ(e.channel, (cur + 1) % n);
        EXPECT_GE(e.time, left[e.channel] + sigma);
        left[cur] = e.time;
        cur = e.channel;
    }
}

TEST(Policies, NeverLeavesGoodChannel)
{
    for (const PolicySpec p : {PolicySpec::call_gap(0.2), PolicySpec::cool_off(0.2), PolicySpec::greedy_full()})
        for (int n : {2, 5}) {
            const LoggedPath lp = logged(make(ChannelCount::finite(n), 0.5, 0.02, p, 2000.0, 12));
            std::size_t cur = 0;
            int level = 0;
            std::uint64_t switches = 0;
            for (const EventRecord& e : lp.events) {
                if (e.kind == EventKind::switch_channel) {
                    EXPECT_EQ(level, 0);
                    ++switches;
                }
                if (e.kind == EventKind::start || e.kind == EventKind::switch_channel) {
                    cur = e.channel;
                    level = e.level;
                } else if (e.kind == EventKind::transition && e.channel == cur) {
                    level = e.level;
                }
            }
            EXPECT_GT(switches, 0U);
        }
}

TEST(Policies, GreedyPicksLowestGoodChannel)
{
    GreedyFullPolicy greedy;
    const std::vector<double> visits(4, 0.0);
    const std::vector<int> seen(4, 0);
    const std::vector<int> levels{0, 0, 1, 1};
    const PartialObservation base{1.0, 4, 0, 0, 0.0, visits, seen};
    EXPECT_EQ(greedy.choose(FullObservation{base, levels}), std::optional<std::size_t>(2));
    const std::vector<int> none{0, 0, 0, 0};
    EXPECT_EQ(greedy.choose(FullObservation{base, none}), std::nullopt);
}

TEST(Policies, BeliefFromObservedHistory)
{
    const std::vector<double> visits{0.0, 1.0};
    const std::vector<int> seen{0, 0};
    const PartialObservation o{3.0, 2, 0, 0, 1.0, visits, seen};
    EXPECT_NEAR(o.belief(1, 0.4), transient_prob(2.0, 0, 0.4), 1e-15);
    EXPECT_EQ(o.belief(0, 0.4), 0.0);
}

TEST(Bounds, SwitchCountsRespectPolicyLimits)
{
    for (int n : {2, 3, 6})
        for (double p : {0.01, 0.1, 1.0})
            for (std::uint64_t rep : {0U, 1U}) {
                const double T = 500.0;
                const PathResult cg = simulate(make(ChannelCount::finite(n), 0.3, 0.0, PolicySpec::call_gap(p), T, 2), rep);
                EXPECT_LE(static_cast<double>(cg.switches), T / p + 1.0);
                const PathResult co = simulate(make(ChannelCount::finite(n), 0.3, 0.0, PolicySpec::cool_off(p), T, 2), rep);
                EXPECT_LE(static_cast<double>(co.switches), n * T / p + n);
            }
}

TEST(Determinism, SameSeedSameResult)
{
    const SimConfig cfg = make(ChannelCount::finite(3), 0.4, 0.05, PolicySpec::cool_off(0.4), 2000.0, 77, 12);
    const SimResult a = simulate_reps(cfg, 1);
    const SimResult b = simulate_reps(cfg, 4);
    ASSERT_EQ(a.paths.size(), b.paths.size());
    for (std::size_t r = 0; r < a.paths.size(); ++r) {
        EXPECT_EQ(a.paths[r].g_estimate, b.paths[r].g_estimate);
        EXPECT_EQ(a.paths[r].switches, b.paths[r].switches);
    }
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.ci_halfwidth, b.ci_halfwidth);

    SimConfig other = cfg;
    other.seed = 78;
    EXPECT_NE(simulate_reps(other).mean, a.mean);
}

TEST(Determinism, TwoChannelCallGapEqualsCoolOff)
{
    for (double x : {0.05, 0.3, 1.2}) {
        const SimResult a = simulate_reps(make(ChannelCount::finite(2), 0.4, 0.08, PolicySpec::call_gap(x), 3000.0, 9, 10));
        const SimResult b = simulate_reps(make(ChannelCount::finite(2), 0.4, 0.08, PolicySpec::cool_off(x), 3000.0, 9, 10));
        for (std::size_t r = 0; r < a.paths.size(); ++r) {
            EXPECT_EQ(a.paths[r].g_estimate, b.paths[r].g_estimate);
            EXPECT_EQ(a.paths[r].switches, b.paths[r].switches);
        }
    }
}

TEST(Statistics, ConfidenceIntervalShrinksWithReps)
{
    const SimConfig base = make(ChannelCount::finite(2), 0.4, 0.08, PolicySpec::call_gap(0.6), 1000.0, 31);
    SimConfig small = base;
    small.reps = 25;
    SimConfig large = base;
    large.reps = 100;
    const double ratio = simulate_reps(small).ci_halfwidth / simulate_reps(large).ci_halfwidth;
    EXPECT_NEAR(ratio, 2.0, 0.6);
}

TEST(Statistics, SummaryMatchesHandComputation)
{
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const SampleSummary s = summarize(xs);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_NEAR(s.ci_halfwidth, 1.959963984540054 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(summarize(std::vector<double>{5.0}).ci_halfwidth, 0.0);
}

TEST(Infinite, FreeGapMatchesClosedForm)
{
    const SimResult r =
        simulate_infinite(make(ChannelCount::infinite(), 0.4, 0.08, PolicySpec::call_gap(0.0), 2e4, 13, 60));
    EXPECT_LE(std::abs(r.mean - 0.70), r.ci_halfwidth * 1.5);
    EXPECT_DOUBLE_EQ(r.mean_good_fraction, 1.0);
}

TEST(Infinite, MatchesClosedFormAtPositiveGap)
{
    for (double tau : {0.3, 1.0}) {
        const SimResult r =
            simulate_infinite(make(ChannelCount::infinite(), 0.4, 0.08, PolicySpec::call_gap(tau), 2e4, 14, 60));
        const double g = g_tau(0.4, 0.08, tau, Regime::infinite);
        EXPECT_LE(std::abs(r.mean - g), 1.5 * r.ci_halfwidth) << tau;
    }
}

TEST(Infinite, LargeGapApproachesStay)
{
    const SimResult r =
        simulate_infinite(make(ChannelCount::infinite(), 0.4, 0.2, PolicySpec::call_gap(500.0), 1e5, 15, 20));
    EXPECT_NEAR(r.mean, 0.4, 0.01);
}

TEST(Infinite, CallGapEqualsCoolOff)
{
    for (double x : {0.0, 0.4}) {
        const SimResult a =
            simulate_infinite(make(ChannelCount::infinite(), 0.4, 0.08, PolicySpec::call_gap(x), 2000.0, 16, 8));
        const SimResult b =
            simulate_infinite(make(ChannelCount::infinite(), 0.4, 0.08, PolicySpec::cool_off(x), 2000.0, 16, 8));
        for (std::size_t r = 0; r < a.paths.size(); ++r)
            EXPECT_EQ(a.paths[r].g_estimate, b.paths[r].g_estimate);
    }
}

TEST(GridSearch, SinglePointAndValidation)
{
    const SimConfig cfg = make(ChannelCount::finite(2), 0.4, 0.08, PolicySpec::call_gap(1.0), 500.0, 3, 4);
    const std::vector<double> one{0.7};
    const GridSearchResult r = grid_search(cfg, one);
    EXPECT_EQ(r.best_index, 0U);
    EXPECT_EQ(r.best_param, 0.7);
    EXPECT_THROW(grid_search(cfg, std::vector<double>{}), ConfigError);
    EXPECT_THROW(grid_search(cfg, std::vector<double>{0.0, 0.5}), ConfigError);
    EXPECT_THROW(grid_search(make(ChannelCount::finite(2), 0.4, 0.08, PolicySpec::stay(), 500.0), one), ConfigError);
}

TEST(GridSearch, CommonRandomNumbersAcrossPoints)
{
    const SimConfig cfg = make(ChannelCount::finite(3), 0.4, 0.05, PolicySpec::cool_off(1.0), 800.0, 21, 5);
    const std::vector<double> grid{0.2, 0.5, 0.9};
    const GridSearchResult r = grid_search(cfg, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        SimConfig single = cfg;
        single.policy.parameter = grid[k];
        EXPECT_EQ(r.means[k], simulate_reps(single).mean);
    }
    EXPECT_EQ(r.best_param, grid[r.best_index]);
    EXPECT_EQ(r.means[r.best_index], *std::max_element(r.means.begin(), r.means.end()));
}

TEST(GridSearch, FindsAnalyticOptimumForTwoChannels)
{
    const double tau_star_value = tau_star(0.4, 0.08, Regime::two_channels).tau;
    std::vector<double> grid;
    for (int k = 1; k <= 155; ++k)
        grid.push_back(0.01 * k);
    const SimConfig cfg = make(ChannelCount::finite(2), 0.4, 0.08, PolicySpec::call_gap(1.0), 1e5, 1, 4);
    const GridSearchResult r = grid_search(cfg, grid);
    // g is flat at the optimum; judge the choice by its true reward
    const double g_star = g_tau(0.4, 0.08, tau_star_value, Regime::two_channels);
    EXPECT_GE(g_tau(0.4, 0.08, r.best_param, Regime::two_channels), g_star - 1e-3) << r.best_param;
    EXPECT_NEAR(r.best_param, tau_star_value, 0.25);
}

TEST(GridSearch, WarmStartGrid)
{
    const std::vector<double> g = warm_start_grid(1.0, 4);
    EXPECT_EQ(g, (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
    EXPECT_THROW(warm_start_grid(0.0, 4), ConfigError);
    EXPECT_THROW(warm_start_grid(1.0, 0), ConfigError);
}
