#pragma once

// Experiment drivers producing CSV tables: the optimal-reward curves against
// c (figure1), the cool-off versus call-gapping gap (table1), sensitivity to
// a misperceived gamma (robustness), g as a function of the gap (curve) and
// per-replication output of one configuration (single).

#include <chansel/case1_analytic.hpp>
#include <chansel/case2_renewal.hpp>
#include <chansel/csv.hpp>
#include <chansel/errors.hpp>
#include <chansel/markov_core.hpp>
#include <chansel/policy_spec.hpp>
#include <chansel/rng.hpp>
#include <chansel/simulator.hpp>
#include <chansel/stats.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chansel {

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    /// Points min, min+step, ... up to max (inclusive within rounding).
    std::size_t count() const
    {
        return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    }

    /// The grid with its point count multiplied by `scale` (at least three
    /// points, never more than the full grid), spread evenly over [min, max].
    std::vector<double> values(double scale = 1.0) const
    {
        const std::size_t full = count();
        std::size_t k = full;
        if (scale < 1.0 && full > 3)
            k = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(full) * scale)), 3,
                                        full);
        std::vector<double> out(k);
        for (std::size_t i = 0; i < k; ++i) {
            if (k == full)
                out[i] = min + static_cast<double>(i) * step;
            else
                out[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(k - 1);
        }
        return out;
    }
};

inline void validate(const GridSpec& g)
{
    if (!(std::isfinite(g.min) && std::isfinite(g.max) && std::isfinite(g.step)))
        throw ConfigError("grid bounds must be finite");
    if (!(g.step > 0.0))
        throw ConfigError("grid step must be > 0");
    if (g.max < g.min)
        throw ConfigError("grid max must be >= min");
}

/// Parses "min:max:step".
inline GridSpec parse_grid(const std::string& text)
{
    GridSpec g;
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
    if (b == std::string::npos || text.find(':', b + 1) != std::string::npos)
        throw ConfigError("grid must look like min:max:step, got '" + text + "'");
    try {
        std::size_t used = 0;
        const std::string parts[3] = {text.substr(0, a), text.substr(a + 1, b - a - 1), text.substr(b + 1)};
        double* dst[3] = {&g.min, &g.max, &g.step};
        for (int i = 0; i < 3; ++i) {
            *dst[i] = std::stod(parts[i], &used);
            if (used != parts[i].size())
                throw ConfigError("bad number");
        }
    } catch (const std::exception&) {
        throw ConfigError("grid must look like min:max:step, got '" + text + "'");
    }
    validate(g);
    return g;
}

struct ExperimentSpec {
    std::vector<double> gammas{0.4};
    std::vector<ChannelCount> n_list;    ///< empty: the experiment's default
    std::optional<GridSpec> c_grid;
    std::optional<GridSpec> param_grid;  ///< tau/sigma grid (figure1, curve); gamma-hat grid (robustness)
    std::vector<double> c_list;          ///< robustness costs; single/curve use the first
    std::optional<double> horizon;
    std::optional<int> reps;
    std::uint64_t seed = 1;
    double scale = 1.0;
    PolicySpec policy = PolicySpec::call_gap(0.5); ///< single
    unsigned threads = 0;
};

namespace detail {

inline void check_spec(const ExperimentSpec& spec)
{
    if (!(spec.scale > 0.0 && spec.scale <= 1.0))
        throw ConfigError("scale must lie in (0, 1]");
    if (spec.gammas.empty())
        throw ConfigError("at least one gamma is required");
    for (const double g : spec.gammas)
        if (!(g > 0.0 && g < 1.0))
            throw ConfigError("gamma must lie in (0, 1)");
    if (spec.c_grid)
        validate(*spec.c_grid);
    if (spec.param_grid)
        validate(*spec.param_grid);
    if (spec.reps && *spec.reps < 1)
        throw ConfigError("reps must be >= 1");
    if (spec.horizon && !(*spec.horizon > 0.0))
        throw ConfigError("horizon must be > 0");
}

inline double single_gamma(const ExperimentSpec& spec)
{
    if (spec.gammas.size() != 1)
        throw ConfigError("this experiment takes exactly one gamma");
    return spec.gammas.front();
}

inline double scaled_horizon(const ExperimentSpec& spec, double full)
{
    return spec.horizon ? *spec.horizon : full * spec.scale;
}

inline std::size_t scaled_count(double full, double scale)
{
    return std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(full * scale)));
}

/// Seed for re-evaluating a selected parameter, independent of the search.
inline std::uint64_t evaluation_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x6576616c75617465ULL); }

inline std::string n_label(ChannelCount n) { return n.to_string(); }

} // namespace detail

// --------------------------------------------------------------------------
// figure1

/// Columns: case, policy, n, c, g, ci_halfwidth, source, param.
/// Full observation rows come from the closed form for each finite n. Partial
/// observation rows are analytic for n = 2 and n = inf and simulated for every
/// finite n when c < gamma^2 (grid search, then the best parameter is rerun
/// with an independent seed). For c >= gamma^2 the partial observation rows
/// are the analytic stay value.
inline CsvTable run_figure1(const ExperimentSpec& spec)
{
    detail::check_spec(spec);
    const double gamma = detail::single_gamma(spec);
    const std::vector<ChannelCount> ns = spec.n_list.empty()
        ? std::vector<ChannelCount>{ChannelCount::finite(2), ChannelCount::finite(3), ChannelCount::finite(4),
                                    ChannelCount::infinite()}
        : spec.n_list;
    const std::vector<double> cs = spec.c_grid.value_or(GridSpec{0.0, 0.5, 0.005}).values(spec.scale);
    const std::vector<double> taus = spec.param_grid.value_or(GridSpec{0.001, 1.55, 0.001}).values(spec.scale);
    const double horizon = detail::scaled_horizon(spec, 1e5);
    const int reps = spec.reps.value_or(10);

    CsvTable table({"case", "policy", "n", "c", "g", "ci_halfwidth", "source", "param"});
    for (const double c : cs) {
        for (const ChannelCount n : ns) {
            if (n.is_infinite() || n.value() < 2)
                continue;
            const Case1Solution s = solve_case1(n, gamma, c);
            table.add_row({"I", std::string(to_string(s.policy)), detail::n_label(n), c, s.g_star, 0.0, "analytic",
                           "nan"});
        }
        for (const ChannelCount n : ns) {
            if (n.is_finite() && n.value() < 2)
                continue;
            const bool closed_form = n.is_infinite() || n.value() == 2;
            if (closed_form || at_or_above_threshold(gamma, c)) {
                const Case2Solution s =
                    tau_star(gamma, c, n.is_infinite() ? Regime::infinite : Regime::two_channels);
                if (s.policy == PolicyKind::stay) {
                    table.add_row({"II", "stay", detail::n_label(n), c, s.g_star, 0.0, "analytic", "inf"});
                } else {
                    for (const char* p : {"call_gap", "cool_off"})
                        table.add_row({"II", p, detail::n_label(n), c, s.g_star, 0.0, "analytic", s.tau});
                }
            }
            if (n.is_infinite() || at_or_above_threshold(gamma, c))
                continue;
            for (const PolicyKind kind : {PolicyKind::call_gap, PolicyKind::cool_off}) {
                SimConfig cfg{n, gamma, c, PolicySpec{kind, taus.front()}, horizon, spec.seed, reps};
                const GridSearchResult search = grid_search(cfg, taus, spec.threads);
                cfg.policy.parameter = search.best_param;
                cfg.seed = detail::evaluation_seed(spec.seed);
                const SimResult eval = simulate_reps(cfg, spec.threads);
                table.add_row({"II", std::string(to_string(kind)), detail::n_label(n), c, eval.mean,
                               eval.ci_halfwidth, "simulated", search.best_param});
            }
        }
    }
    return table;
}

// --------------------------------------------------------------------------
// table1

struct GapEstimate {
    double c = 0.0;
    double tau = 0.0;   ///< selected call-gapping parameter
    double sigma = 0.0; ///< selected cool-off parameter
    SampleSummary gap;  ///< per-replication cool-off minus call-gapping
};

/// Per-c gap estimates for each requested n. Searches warm-start from the
/// n = 2 optimum: n = 3 uses tau*(2) as the grid's upper end and every later
/// n uses the previous n's selected value, for each policy separately.
inline std::map<int, std::vector<GapEstimate>> table1_gaps(const ExperimentSpec& spec, double gamma)
{
    std::vector<int> requested;
    for (const ChannelCount n : spec.n_list.empty()
             ? std::vector<ChannelCount>{ChannelCount::finite(3), ChannelCount::finite(5), ChannelCount::finite(7)}
             : spec.n_list) {
        if (n.is_infinite() || n.value() < 2)
            throw ConfigError("table1 needs finite n >= 2");
        requested.push_back(n.value());
    }
    std::sort(requested.begin(), requested.end());
    requested.erase(std::unique(requested.begin(), requested.end()), requested.end());
    const int n_max = requested.back();

    const std::size_t c_points = detail::scaled_count(25.0, spec.scale);
    const std::size_t grid_points = detail::scaled_count(20.0, spec.scale);
    const double horizon = detail::scaled_horizon(spec, 1e3);
    const int reps = spec.reps.value_or(100);

    std::vector<double> cs;
    if (spec.c_grid) {
        cs = spec.c_grid->values(spec.scale);
    } else {
        for (std::size_t k = 1; k <= c_points; ++k)
            cs.push_back(static_cast<double>(k) * (gamma * gamma / 2.0) / static_cast<double>(c_points));
    }

    auto search = [&](int n, double c, PolicyKind kind, double upper) {
        const SimConfig cfg{ChannelCount::finite(n), gamma, c, PolicySpec{kind, upper}, horizon, spec.seed, reps};
        return grid_search(cfg, warm_start_grid(upper, grid_points), spec.threads).best_param;
    };

    std::map<int, std::vector<GapEstimate>> out;
    for (const double c : cs) {
        if (at_or_above_threshold(gamma, c))
            throw ConfigError("table1 costs must lie below gamma^2");
        const Case2Solution two = tau_star(gamma, c, Regime::two_channels);
        // tau*(2) = 0 only at c = 0; keep the grid nondegenerate
        const double u2 = two.tau > 0.0 ? two.tau : gamma;
        double up_gap = u2;
        double up_cool = u2;
        for (int n = 2; n <= n_max; ++n) {
            double tau = 0.0;
            double sigma = 0.0;
            if (n == 2) {
                if (!std::binary_search(requested.begin(), requested.end(), 2))
                    continue;
                tau = sigma = search(2, c, PolicyKind::call_gap, 2.0 * u2);
            } else {
                tau = search(n, c, PolicyKind::call_gap, up_gap);
                sigma = search(n, c, PolicyKind::cool_off, up_cool);
                up_gap = tau;
                up_cool = sigma;
            }
            if (!std::binary_search(requested.begin(), requested.end(), n))
                continue;

            // both policies share the evaluation seed, so differences are paired
            const std::uint64_t eval_seed = detail::evaluation_seed(spec.seed);
            const SimConfig gap_cfg{ChannelCount::finite(n), gamma, c, PolicySpec::call_gap(tau), horizon, eval_seed,
                                    reps};
            const SimConfig cool_cfg{ChannelCount::finite(n), gamma, c, PolicySpec::cool_off(sigma), horizon,
                                     eval_seed, reps};
            const SimResult a = simulate_reps(gap_cfg, spec.threads);
            const SimResult b = simulate_reps(cool_cfg, spec.threads);
            std::vector<double> diff(a.paths.size());
            for (std::size_t r = 0; r < diff.size(); ++r)
                diff[r] = b.paths[r].g_estimate - a.paths[r].g_estimate;
            out[n].push_back({c, tau, sigma, summarize(diff)});
        }
    }
    return out;
}

/// Columns: gamma, n, max_gap, gap_ci, worst_c, tau, sigma.
inline CsvTable run_table1(const ExperimentSpec& spec)
{
    detail::check_spec(spec);
    CsvTable table({"gamma", "n", "max_gap", "gap_ci", "worst_c", "tau", "sigma"});
    for (const double gamma : spec.gammas) {
        for (const auto& [n, estimates] : table1_gaps(spec, gamma)) {
            const auto worst = std::max_element(estimates.begin(), estimates.end(), [](const auto& x, const auto& y) {
                return x.gap.mean < y.gap.mean;
            });
            table.add_row({gamma, n, worst->gap.mean, worst->gap.ci_halfwidth, worst->c, worst->tau, worst->sigma});
        }
    }
    return table;
}

// --------------------------------------------------------------------------
// robustness

struct MisspecifiedChoice {
    PolicyKind policy;
    double tau_used; ///< 0 when the perceived optimum is to stay
    double g_hat;    ///< reward under the true gamma
};

/// Two channels run with the policy that is optimal for gamma-hat, scored
/// under the true gamma.
inline MisspecifiedChoice misspecified_choice(double gamma, double gamma_hat, double c)
{
    const Case2Solution chosen = tau_star(gamma_hat, c, Regime::two_channels);
    double g_hat = gamma;
    if (chosen.policy != PolicyKind::stay)
        g_hat = chosen.tau > 0.0 ? g_tau(gamma, c, chosen.tau, Regime::two_channels)
                                 : 1.0 - (1.0 - gamma) * (1.0 - gamma); // tau -> 0 limit at c = 0
    return {chosen.policy, chosen.tau, g_hat};
}

/// Two channels controlled with the optimal gap for a perceived gamma-hat,
/// scored under the true gamma. Columns: c, gamma_hat, tau_used, g_hat,
/// g_opt, ratio.
inline CsvTable run_robustness(const ExperimentSpec& spec)
{
    detail::check_spec(spec);
    const double gamma = detail::single_gamma(spec);
    const std::vector<double> cs = spec.c_list.empty() ? std::vector<double>{0.04, 0.08, 0.12, 0.16} : spec.c_list;
    const std::vector<double> hats = spec.param_grid.value_or(GridSpec{0.2, 0.6, 0.001}).values(spec.scale);

    CsvTable table({"c", "gamma_hat", "tau_used", "g_hat", "g_opt", "ratio"});
    for (const double c : cs) {
        const double g_opt = tau_star(gamma, c, Regime::two_channels).g_star;
        for (const double hat : hats) {
            if (!(hat > 0.0 && hat < 1.0))
                throw ConfigError("gamma-hat grid must lie in (0, 1)");
            const MisspecifiedChoice m = misspecified_choice(gamma, hat, c);
            table.add_row({c, hat, m.tau_used, m.g_hat, g_opt, m.g_hat / g_opt});
        }
    }
    return table;
}

// --------------------------------------------------------------------------
// curve

/// g against the policy parameter for one cost. Columns: n, policy, param,
/// g, ci_halfwidth, source. Analytic rows for n = 2 and n = inf; simulated
/// rows (common random numbers across the grid) for every n.
inline CsvTable run_curve(const ExperimentSpec& spec)
{
    detail::check_spec(spec);
    const double gamma = detail::single_gamma(spec);
    const double c = spec.c_list.empty() ? gamma * gamma / 2.0 : spec.c_list.front();
    const std::vector<ChannelCount> ns =
        spec.n_list.empty() ? std::vector<ChannelCount>{ChannelCount::finite(2), ChannelCount::infinite()} : spec.n_list;
    const std::vector<double> taus = spec.param_grid.value_or(GridSpec{0.01, 1.55, 0.01}).values(spec.scale);
    const double horizon = detail::scaled_horizon(spec, 1e4);
    const int reps = spec.reps.value_or(10);

    CsvTable table({"n", "policy", "param", "g", "ci_halfwidth", "source"});
    for (const ChannelCount n : ns) {
        if (n.is_finite() && n.value() < 2)
            throw ConfigError("curve needs n >= 2");
        if (n.is_infinite() || n.value() == 2) {
            const Regime regime = n.is_infinite() ? Regime::infinite : Regime::two_channels;
            for (const double tau : taus)
                table.add_row({detail::n_label(n), "call_gap", tau, g_tau(gamma, c, tau, regime), 0.0, "analytic"});
        }
        for (const PolicyKind kind : {PolicyKind::call_gap, PolicyKind::cool_off}) {
            const SimConfig cfg{n, gamma, c, PolicySpec{kind, taus.front()}, horizon, spec.seed, reps};
            const GridSearchResult search = grid_search(cfg, taus, spec.threads);
            for (std::size_t k = 0; k < taus.size(); ++k)
                table.add_row({detail::n_label(n), std::string(to_string(kind)), taus[k], search.means[k],
                               search.ci_halfwidths[k], "simulated"});
        }
    }
    return table;
}

// --------------------------------------------------------------------------
// single

/// Per-replication results of one configuration. Columns: rep, g,
/// switches, switch_rate, good_fraction.
inline CsvTable run_single(const ExperimentSpec& spec)
{
    detail::check_spec(spec);
    const double gamma = detail::single_gamma(spec);
    if (spec.n_list.size() > 1)
        throw ConfigError("single takes one n");
    const SimConfig cfg{spec.n_list.empty() ? ChannelCount::finite(2) : spec.n_list.front(),
                        gamma,
                        spec.c_list.empty() ? 0.0 : spec.c_list.front(),
                        spec.policy,
                        detail::scaled_horizon(spec, 1e5),
                        spec.seed,
                        spec.reps.value_or(10)};
    const SimResult res = simulate_reps(cfg, spec.threads);
    CsvTable table({"rep", "g", "switches", "switch_rate", "good_fraction"});
    for (std::size_t r = 0; r < res.paths.size(); ++r) {
        const PathResult& p = res.paths[r];
        table.add_row({static_cast<unsigned long>(r), p.g_estimate, static_cast<unsigned long long>(p.switches),
                       p.switch_rate(), p.good_fraction()});
    }
    return table;
}

inline CsvTable run_experiment(const std::string& name, const ExperimentSpec& spec)
{
    if (name == "figure1")
        return run_figure1(spec);
    if (name == "table1")
        return run_table1(spec);
    if (name == "robustness")
        return run_robustness(spec);
    if (name == "curve")
        return run_curve(spec);
    if (name == "single")
        return run_single(spec);
    throw ConfigError("unknown experiment '" + name + "'");
}

} // namespace chansel
