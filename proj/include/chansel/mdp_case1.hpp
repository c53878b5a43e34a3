#pragma once

// Uniformized discrete-time MDP for full observation. A state (w, s) holds
// the selected channel's level w and the number s of other good channels;
// the uniformization rate is n / gamma.

#include <chansel/average_reward.hpp>
#include <chansel/case1_analytic.hpp>
#include <chansel/markov_core.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace chansel {

struct ChannelMdpState {
    int w; ///< level of the selected channel
    int s; ///< good channels among the others

    friend bool operator==(const ChannelMdpState&, const ChannelMdpState&) = default;
};

struct UniformizedMdp : TwoActionMdp {
    int n = 0;
    double gamma = 0.0;
    double c = 0.0;
    std::vector<ChannelMdpState> states; ///< lexicographic: (0,0), (0,1), ..., (1,n-1)

    Eigen::Index index(int w, int s) const { return static_cast<Eigen::Index>(w) * n + s; }
};

namespace detail {

// Rates of the other n-1 channels after uniformization.
inline double others_up(int n, double gamma, int s) { return gamma * (n - 1 - s) / n; }
inline double others_down(int n, double gamma, int s) { return (1.0 - gamma) * s / n; }

} // namespace detail

inline UniformizedMdp build_mdp(int n, double gamma, double c)
{
    detail::require(n >= 2, "uniformized MDP needs n >= 2");
    validate_gamma(gamma);
    validate_cost(c);

    UniformizedMdp mdp;
    mdp.n = n;
    mdp.gamma = gamma;
    mdp.c = c;
    const Eigen::Index m = 2 * n;
    for (int w = 0; w <= 1; ++w)
        for (int s = 0; s < n; ++s)
            mdp.states.push_back({w, s});

    auto& P0 = mdp.P[0];
    auto& P1 = mdp.P[1];
    P0 = Eigen::MatrixXd::Zero(m, m);
    P1 = Eigen::MatrixXd::Zero(m, m);
    mdp.r[0] = Eigen::VectorXd::Zero(m);
    mdp.r[1] = Eigen::VectorXd::Zero(m);

    const double nd = n;
    auto up = [&](int s) { return detail::others_up(n, gamma, s); };
    auto down = [&](int s) { return detail::others_down(n, gamma, s); };
    // self-loop mass when w + k channels are good in total
    auto hold = [&](int k) { return (k * gamma + (n - k) * (1.0 - gamma)) / nd; };

    // Staying.
    for (int w = 0; w <= 1; ++w) {
        for (int s = 0; s < n; ++s) {
            const auto x = mdp.index(w, s);
            if (s <= n - 2)
                P0(x, mdp.index(w, s + 1)) += up(s);
            if (s >= 1)
                P0(x, mdp.index(w, s - 1)) += down(s);
            if (w == 0)
                P0(x, mdp.index(1, s)) += gamma / nd;
            else
                P0(x, mdp.index(0, s)) += (1.0 - gamma) / nd;
            P0(x, x) += hold(w + s);
            mdp.r[0](x) = gamma / nd * w;
        }
    }

    // Switching from a bad channel into a good one: lands in (1, s-1).
    for (int s = 1; s < n; ++s) {
        const auto x = mdp.index(0, s);
        P1(x, mdp.index(1, s)) += up(s - 1);
        if (s >= 2)
            P1(x, mdp.index(1, s - 2)) += down(s - 1);
        P1(x, mdp.index(0, s - 1)) += (1.0 - gamma) / nd;
        P1(x, mdp.index(1, s - 1)) += hold(s);
    }
    // Switching from a good channel into a bad one: lands in (0, s+1).
    for (int s = 0; s <= n - 2; ++s) {
        const auto x = mdp.index(1, s);
        if (s <= n - 3)
            P1(x, mdp.index(0, s + 2)) += up(s + 1);
        P1(x, mdp.index(0, s)) += down(s + 1);
        P1(x, mdp.index(1, s + 1)) += gamma / nd;
        P1(x, mdp.index(0, s + 1)) += hold(s + 1);
    }
    // No channel of the other level exists: the switch leaves the state as is.
    for (const auto x : {mdp.index(0, 0), mdp.index(1, n - 1)})
        P1.row(x) = P0.row(x);

    for (int w = 0; w <= 1; ++w) {
        for (int s = 0; s < n; ++s) {
            const bool lands_good = (w == 0 && s > 0) || (w == 1 && s == n - 1);
            mdp.r[1](mdp.index(w, s)) = (lands_good ? gamma / nd : 0.0) - c;
        }
    }

    constexpr double tol = 1e-12;
    if (stochasticity_defect(P0) > tol || stochasticity_defect(P1) > tol)
        throw std::logic_error("uniformized transition matrix is not stochastic");
    return mdp;
}

/// Switch exactly at (0, s), s >= 1, when c < gamma; otherwise never.
inline PolicyTable pi_star(int n, double gamma, double c)
{
    detail::require(n >= 2, "pi_star needs n >= 2");
    validate_gamma(gamma);
    validate_cost(c);
    PolicyTable policy(static_cast<std::size_t>(2 * n), Action::passive);
    if (c < gamma)
        for (int s = 1; s < n; ++s)
            policy[static_cast<std::size_t>(s)] = Action::active;
    return policy;
}

/// Never switch.
inline PolicyTable stay_policy(int n) { return PolicyTable(static_cast<std::size_t>(2 * n), Action::passive); }

inline EvaluationResult policy_evaluation(const UniformizedMdp& mdp, const PolicyTable& policy)
{
    return evaluate_policy(mdp, policy, 0.0, mdp.index(0, 0));
}

/// Advantage of staying, R0 - R1, per state. Positive entries favour staying.
inline Eigen::VectorXd bellman_gap(const UniformizedMdp& mdp, const EvaluationResult& ev)
{
    return action_values(mdp, Action::passive, ev.values) - action_values(mdp, Action::active, ev.values);
}

struct OptimalityReport {
    bool is_optimal = false;
    double max_violation = 0.0;   ///< worst disagreement of a gap sign with pi*
    double gain = 0.0;            ///< uniformized gain of pi*
    double bellman_residual = 0.0;
    Eigen::VectorXd gap;
};

/// Evaluates pi* and checks that every gap sign agrees with its action.
/// A gap within `tolerance` of zero agrees with either action.
inline OptimalityReport verify_optimality(int n, double gamma, double c, double tolerance = 1e-9)
{
    detail::require(n >= 2 && n <= 12, "optimality check supports 2 <= n <= 12");
    const UniformizedMdp mdp = build_mdp(n, gamma, c);
    const PolicyTable policy = pi_star(n, gamma, c);
    const EvaluationResult ev = policy_evaluation(mdp, policy);

    OptimalityReport report;
    report.gain = ev.gain;
    report.gap = bellman_gap(mdp, ev);
    report.bellman_residual = bellman_residual(mdp, ev);
    for (Eigen::Index x = 0; x < mdp.size(); ++x) {
        const double gap = report.gap(x);
        const double violation = policy[static_cast<std::size_t>(x)] == Action::passive ? -gap : gap;
        report.max_violation = std::max(report.max_violation, violation);
    }
    report.is_optimal = report.max_violation <= tolerance;
    return report;
}

} // namespace chansel
