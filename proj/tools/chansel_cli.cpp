// chansel: closed forms, verification and simulation for channel selection
// with switching costs.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 solver failure,
// 64 usage error.

#include <chansel/chansel.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace chansel;

constexpr int kExitIo = 1;
constexpr int kExitDomain = 2;
constexpr int kExitSolver = 3;
constexpr int kExitUsage = 64;

struct Options {
    std::string gamma = "0.4";
    std::string c = "0";
    std::string n = "2";
    double tau = 0.0;
    double sigma = 0.0;
    std::string policy;
    double horizon = 0.0;
    int reps = 0;
    std::uint64_t seed = 1;
    double scale = 1.0;
    std::string out;
    std::string grid;
    std::string c_grid;
    std::string events;
    unsigned threads = 0;
};

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty())
            out.push_back(item);
    if (out.empty())
        throw DomainError("empty list '" + text + "'");
    return out;
}

double parse_double(const std::string& text, const char* what)
{
    try {
        std::size_t used = 0;
        const double x = std::stod(text, &used);
        if (used == text.size())
            return x;
    } catch (const std::exception&) {
    }
    throw DomainError(std::string("invalid ") + what + " '" + text + "'");
}

std::vector<double> parse_doubles(const std::string& text, const char* what)
{
    std::vector<double> out;
    for (const auto& item : split_list(text))
        out.push_back(parse_double(item, what));
    return out;
}

double single_double(const std::string& text, const char* what)
{
    const auto xs = parse_doubles(text, what);
    if (xs.size() != 1)
        throw DomainError(std::string("expected a single ") + what);
    return xs.front();
}

ChannelCount single_n(const std::string& text)
{
    const auto items = split_list(text);
    if (items.size() != 1)
        throw DomainError("expected a single channel count");
    return parse_channel_count(items.front());
}

void kv(const std::string& key, double value) { std::cout << key << '=' << format_number(value) << '\n'; }
void kv(const std::string& key, const std::string& value) { std::cout << key << '=' << value << '\n'; }
void kv(const std::string& key, bool value) { std::cout << key << '=' << (value ? "true" : "false") << '\n'; }

Regime regime_for(ChannelCount n)
{
    if (n.is_infinite())
        return Regime::infinite;
    if (n.value() != 2)
        throw DomainError("closed-form partial observation results exist for n = 2 and n = inf only");
    return Regime::two_channels;
}

PolicySpec policy_from(const Options& o)
{
    if (o.policy.empty())
        throw ConfigError("--policy is required");
    const PolicyKind kind = parse_policy_kind(o.policy);
    if (kind == PolicyKind::call_gap)
        return PolicySpec::call_gap(o.tau);
    if (kind == PolicyKind::cool_off)
        return PolicySpec::cool_off(o.sigma);
    return {kind, 0.0};
}

int cmd_case1(const Options& o)
{
    const ChannelCount n = single_n(o.n);
    const double gamma = single_double(o.gamma, "gamma");
    const double c = single_double(o.c, "c");
    const Case1Solution s = solve_case1(n, gamma, c);
    kv("policy", std::string(to_string(s.policy)));
    kv("g_star", s.g_star);
    kv("greedy_reward", greedy_full_reward(n.value(), gamma, c));
    return 0;
}

int cmd_case2(const Options& o, bool tau_given)
{
    const ChannelCount n = single_n(o.n);
    const double gamma = single_double(o.gamma, "gamma");
    const double c = single_double(o.c, "c");
    const Regime regime = regime_for(n);
    if (tau_given) {
        kv("tau", o.tau);
        kv("g", g_tau(gamma, c, o.tau, regime));
        return 0;
    }
    const Case2Solution s = tau_star(gamma, c, regime);
    kv("policy", std::string(to_string(s.policy)));
    kv("tau", s.tau);
    kv("g_star", s.g_star);
    return 0;
}

int cmd_tau_star(const Options& o)
{
    const ChannelCount n = single_n(o.n);
    const double gamma = single_double(o.gamma, "gamma");
    const double c = single_double(o.c, "c");
    const Case2Solution s = tau_star(gamma, c, regime_for(n));
    kv("policy", std::string(to_string(s.policy)));
    kv("tau", s.tau);
    kv("g_star", s.g_star);
    kv("f_residual", s.f_residual);
    kv("second_derivative", s.second_derivative);
    return 0;
}

int cmd_mdp_verify(const Options& o)
{
    const int n = single_n(o.n).value();
    const double gamma = single_double(o.gamma, "gamma");
    const double c = single_double(o.c, "c");
    const OptimalityReport r = verify_optimality(n, gamma, c);
    kv("is_optimal", r.is_optimal);
    kv("gain", r.gain);
    kv("g_star", r.gain * n / gamma);
    kv("max_violation", r.max_violation);
    kv("bellman_residual", r.bellman_residual);
    return r.is_optimal ? 0 : kExitSolver;
}

int cmd_whittle(const Options& o)
{
    const double gamma = single_double(o.gamma, "gamma");
    const double c = single_double(o.c, "c");
    const IndexTable table = whittle_index(gamma, c);
    const char* names[4] = {"00", "01", "10", "11"};
    double worst_residual = 0.0;
    double worst_numeric = 0.0;
    for (const SubsidyState s : all_subsidy_states) {
        const std::string tag = names[static_cast<int>(s)];
        kv("nu_" + tag, table[s]);
        worst_residual = std::max(worst_residual, verify_indifference(gamma, c, s));
        worst_numeric = std::max(worst_numeric, std::abs(solve_index_numeric(gamma, c, s) - table[s]));
    }
    kv("max_indifference_residual", worst_residual);
    kv("max_numeric_difference", worst_numeric);
    kv("equivalence", check_equivalence_inequalities(gamma, c));
    return 0;
}

int cmd_simulate(const Options& o)
{
    SimConfig cfg;
    cfg.n = single_n(o.n);
    cfg.gamma = single_double(o.gamma, "gamma");
    cfg.c = single_double(o.c, "c");
    cfg.policy = policy_from(o);
    cfg.horizon = o.horizon > 0.0 ? o.horizon : 1e4;
    cfg.reps = o.reps > 0 ? o.reps : 10;
    cfg.seed = o.seed;

    if (!o.events.empty()) {
        std::ofstream log(o.events, std::ios::binary);
        if (!log)
            throw std::ios_base::failure("cannot open '" + o.events + "'");
        log << "time,kind,channel,level,cumulative_reward\n";
        const EventSink sink = [&](const EventRecord& e) {
            log << format_number(e.time) << ',' << to_string(e.kind) << ',' << e.channel << ',' << e.level << ','
                << format_number(e.cumulative_reward) << '\n';
        };
        simulate(cfg, 0, &sink);
        if (!log)
            throw std::ios_base::failure("failed writing '" + o.events + "'");
    }

    const SimResult r = simulate_reps(cfg, o.threads);
    kv("mean", r.mean);
    kv("ci_halfwidth", r.ci_halfwidth);
    kv("stddev", r.g.stddev);
    kv("switch_rate", r.mean_switch_rate);
    kv("good_fraction", r.mean_good_fraction);
    kv("reps", static_cast<double>(cfg.reps));
    return 0;
}

int cmd_experiment(const std::string& name, const Options& o, const CLI::App& root)
{
    ExperimentSpec spec;
    spec.gammas = parse_doubles(o.gamma, "gamma");
    if (root.count("--n"))
        for (const auto& item : split_list(o.n))
            spec.n_list.push_back(parse_channel_count(item));
    if (root.count("--c"))
        spec.c_list = parse_doubles(o.c, "c");
    if (!o.c_grid.empty())
        spec.c_grid = parse_grid(o.c_grid);
    if (!o.grid.empty())
        spec.param_grid = parse_grid(o.grid);
    if (o.horizon > 0.0)
        spec.horizon = o.horizon;
    if (o.reps > 0)
        spec.reps = o.reps;
    spec.seed = o.seed;
    spec.scale = o.scale;
    spec.threads = o.threads;
    if (name == "single")
        spec.policy = policy_from(o);

    const CsvTable table = run_experiment(name, spec);
    if (o.out.empty()) {
        table.write(std::cout);
    } else {
        table.save(o.out);
        kv("rows", static_cast<double>(table.rows().size()));
        kv("out", o.out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Channel selection with switching costs: closed forms, verification and simulation", "chansel"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a key=value file (command line wins)");

    Options o;
    app.add_option("--gamma", o.gamma, "Stationary probability of the good state (comma list for table1)")
        ->capture_default_str();
    app.add_option("--c", o.c, "Switching cost (comma list for robustness)")->capture_default_str();
    app.add_option("--n", o.n, "Channel count, integer or inf (comma list for experiments)")->capture_default_str();
    auto* tau_opt = app.add_option("--tau", o.tau, "Call-gapping time");
    app.add_option("--sigma", o.sigma, "Cool-off time");
    app.add_option("--policy", o.policy, "stay | greedy | call_gap | cool_off");
    app.add_option("--horizon", o.horizon, "Simulated time per replication");
    app.add_option("--reps", o.reps, "Replications");
    app.add_option("--seed", o.seed, "Base random seed")->envname("CHANSEL_SEED")->capture_default_str();
    app.add_option("--scale", o.scale, "Shrink horizon and grid sizes, in (0, 1]")->capture_default_str();
    app.add_option("--out", o.out, "Write CSV here instead of stdout");
    app.add_option("--grid", o.grid, "Parameter grid min:max:step (gamma-hat grid for robustness)");
    app.add_option("--c-grid", o.c_grid, "Cost grid min:max:step");
    app.add_option("--events", o.events, "simulate: write the event log of replication 0 here");
    app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");

    auto* analytic = app.add_subcommand("analytic", "Closed-form optimal policies");
    analytic->require_subcommand(1);
    auto* case1 = analytic->add_subcommand("case1", "Full observation");
    auto* case2 = analytic->add_subcommand("case2", "Partial observation, n = 2 or inf (g(tau) with --tau)");
    auto* tau_cmd = app.add_subcommand("tau-star", "Optimal call-gapping time and reward");
    auto* mdp = app.add_subcommand("mdp", "Uniformized full-observation MDP");
    mdp->require_subcommand(1);
    auto* verify = mdp->add_subcommand("verify", "Check optimality of the greedy policy");
    auto* whittle = app.add_subcommand("whittle", "Whittle indices and their checks");
    auto* sim = app.add_subcommand("simulate", "Simulate one configuration");
    auto* experiment = app.add_subcommand("experiment", "Run an experiment and emit CSV");
    experiment->require_subcommand(1);
    std::vector<std::pair<std::string, CLI::App*>> experiments;
    for (const char* name : {"figure1", "table1", "robustness", "curve", "single"})
        experiments.emplace_back(name, experiment->add_subcommand(name, std::string("Experiment ") + name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*case1)
            return cmd_case1(o);
        if (*case2)
            return cmd_case2(o, tau_opt->count() > 0);
        if (*tau_cmd)
            return cmd_tau_star(o);
        if (*verify)
            return cmd_mdp_verify(o);
        if (*whittle)
            return cmd_whittle(o);
        if (*sim)
            return cmd_simulate(o);
        for (const auto& [name, sub] : experiments)
            if (*sub)
                return cmd_experiment(name, o, app);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const EvaluationError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    std::cerr << app.help();
    return kExitUsage;
}
