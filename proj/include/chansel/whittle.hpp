#pragma once

// One-arm subsidy problem for a single channel, uniformized at rate 1/gamma.
// States (x, u): x = channel level, u = channel in use. Action 0 rests the
// channel and collects the subsidy nu; action 1 uses it. Changing u costs c/2.

#include <chansel/average_reward.hpp>
#include <chansel/markov_core.hpp>

#include <array>
#include <cmath>
#include <limits>

namespace chansel {

/// Lexicographic index of (x, u).
enum class SubsidyState : int { x0u0 = 0, x0u1 = 1, x1u0 = 2, x1u1 = 3 };

inline constexpr std::array<SubsidyState, 4> all_subsidy_states{SubsidyState::x0u0, SubsidyState::x0u1,
                                                                 SubsidyState::x1u0, SubsidyState::x1u1};

inline constexpr int level(SubsidyState s) { return static_cast<int>(s) / 2; }
inline constexpr int in_use(SubsidyState s) { return static_cast<int>(s) % 2; }
inline constexpr Eigen::Index idx(SubsidyState s) { return static_cast<Eigen::Index>(s); }

struct SubsidyMdp : TwoActionMdp {
    double gamma = 0.0;
    double c = 0.0;
};

/// The subsidy is not stored here; it is an argument of the evaluation and
/// Bellman routines so one object serves every nu.
inline SubsidyMdp build_subsidy_mdp(double gamma, double c)
{
    validate_gamma(gamma);
    validate_cost(c);
    SubsidyMdp mdp;
    mdp.gamma = gamma;
    mdp.c = c;
    for (int a = 0; a <= 1; ++a) {
        auto& P = mdp.P[static_cast<std::size_t>(a)];
        auto& r = mdp.r[static_cast<std::size_t>(a)];
        P = Eigen::MatrixXd::Zero(4, 4);
        r = Eigen::VectorXd::Zero(4);
        for (const SubsidyState s : all_subsidy_states) {
            // after the action the channel is in use iff a = 1
            P(idx(s), 2 * 0 + a) = 1.0 - gamma;
            P(idx(s), 2 * 1 + a) = gamma;
            r(idx(s)) = gamma * level(s) * a - (a != in_use(s) ? c / 2.0 : 0.0);
        }
    }
    return mdp;
}

struct IndexTable {
    std::array<double, 4> nu{}; ///< lexicographic (0,0), (0,1), (1,0), (1,1)

    double operator[](SubsidyState s) const { return nu[static_cast<std::size_t>(s)]; }
};

inline IndexTable whittle_index(double gamma, double c)
{
    validate_gamma(gamma);
    validate_cost(c);
    if (c < gamma)
        return {{0.0, c * gamma, c * gamma + (gamma - c), gamma}};
    return {{0.0, gamma * gamma, gamma * gamma, gamma}};
}

/// Closed-form relative values and gain of the subsidy problem at nu equal
/// to the index of a given state.
struct SubsidySolution {
    Eigen::Vector4d values;
    double gain;
    double nu;
};

inline SubsidySolution closed_form_solution(double gamma, double c, SubsidyState state)
{
    const IndexTable table = whittle_index(gamma, c);
    const double h = c / 2.0;
    const double g2 = gamma * gamma;
    SubsidySolution sol{Eigen::Vector4d::Zero(), 0.0, table[state]};
    switch (state) {
    case SubsidyState::x0u0:
        sol.values << 0.0, h, gamma, gamma + h;
        sol.gain = g2;
        break;
    case SubsidyState::x0u1:
        if (c < gamma)
            sol.values << 0.0, -h, gamma - c, gamma - h;
        else
            sol.values << 0.0, -h, 0.0, gamma - h;
        sol.gain = g2;
        break;
    case SubsidyState::x1u0:
        if (c < gamma) {
            sol.values << 0.0, -h, 0.0, h;
            sol.gain = gamma - c + c * gamma;
        } else {
            sol.values << 0.0, h - gamma, 0.0, h;
            sol.gain = g2;
        }
        break;
    case SubsidyState::x1u1:
        sol.values << 0.0, -h, 0.0, -h;
        sol.gain = gamma;
        break;
    }
    return sol;
}

/// Max of the Bellman residual of the closed-form (V, g) and of
/// |R0 - R1| at `state`.
inline double verify_indifference(double gamma, double c, SubsidyState state)
{
    const SubsidyMdp mdp = build_subsidy_mdp(gamma, c);
    const SubsidySolution sol = closed_form_solution(gamma, c, state);
    const Eigen::VectorXd V = sol.values;
    const Eigen::VectorXd R0 = action_values(mdp, Action::passive, V, sol.nu);
    const Eigen::VectorXd R1 = action_values(mdp, Action::active, V, sol.nu);
    const double bellman = (R0.cwiseMax(R1) - V - Eigen::VectorXd::Constant(4, sol.gain)).cwiseAbs().maxCoeff();
    return std::max(bellman, std::abs(R0(idx(state)) - R1(idx(state))));
}

/// Optimal (V, g) of the subsidy problem at a given nu: policy iteration
/// started from the best-gain deterministic policy.
///
/// The policy that keeps u unchanged everywhere has two closed classes and no
/// single gain; it is skipped. It can only tie with the best single-class
/// policy (at nu = gamma^2), so dropping it never loses the optimum.
inline PolicyIterationResult solve_subsidy_problem(const SubsidyMdp& mdp, double nu)
{
    PolicyIterationResult best;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < 16; ++mask) {
        PolicyTable policy(4);
        for (std::size_t x = 0; x < 4; ++x)
            policy[x] = (mask >> x) & 1U ? Action::active : Action::passive;
        try {
            EvaluationResult ev = evaluate_policy(mdp, policy, nu);
            if (ev.gain > best_gain + 1e-14) {
                best_gain = ev.gain;
                best = {policy, std::move(ev), 0};
            }
        } catch (const EvaluationError&) {
        }
    }
    try {
        return policy_iteration(mdp, best.policy, nu);
    } catch (const EvaluationError&) {
        return best; // improvement reached the tied two-class policy
    }
}

/// R0 - R1 at `state` under the optimal solution for subsidy nu.
inline double passive_advantage(const SubsidyMdp& mdp, double nu, SubsidyState state)
{
    const PolicyIterationResult opt = solve_subsidy_problem(mdp, nu);
    const Eigen::VectorXd& V = opt.evaluation.values;
    return action_values(mdp, Action::passive, V, nu)(idx(state)) - action_values(mdp, Action::active, V, nu)(idx(state));
}

/// Bisection for the subsidy at which resting and using are indifferent
/// at `state`.
inline double solve_index_numeric(double gamma, double c, SubsidyState state, double lo = -1.0, double hi = 2.0,
                                  double width = 1e-12)
{
    const SubsidyMdp mdp = build_subsidy_mdp(gamma, c);
    if (!(passive_advantage(mdp, lo, state) < 0.0 && passive_advantage(mdp, hi, state) > 0.0))
        throw SolverError("subsidy indifference point not bracketed");
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (passive_advantage(mdp, mid, state) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Ordering properties under which the index policy coincides with the
/// optimal full-observation policy.
inline bool check_equivalence_inequalities(double gamma, double c)
{
    const IndexTable t = whittle_index(gamma, c);
    const double n00 = t[SubsidyState::x0u0];
    const double n01 = t[SubsidyState::x0u1];
    const double n10 = t[SubsidyState::x1u0];
    const double n11 = t[SubsidyState::x1u1];

    bool ok = n10 <= n11 && n00 < n11;
    if (c > 0.0)
        ok = ok && n10 < n11 && n00 < n01;
    if (c < gamma)
        ok = ok && n01 < n10;
    else
        ok = ok && n01 == n10;
    return ok;
}

} // namespace chansel
