#pragma once

// Finite two-action average-reward MDPs: policy evaluation with a pinned
// reference state, one-step action values and policy improvement.

#include <chansel/errors.hpp>

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace chansel {

enum class Action : std::uint8_t {
    passive = 0, ///< stay on the channel / rest
    active = 1,  ///< switch / use
};

/// Deterministic stationary policy: one action per state.
using PolicyTable = std::vector<Action>;

struct TwoActionMdp {
    std::array<Eigen::MatrixXd, 2> P; ///< row-stochastic, indexed by Action
    std::array<Eigen::VectorXd, 2> r;

    Eigen::Index size() const { return r[0].size(); }
    const Eigen::MatrixXd& transitions(Action a) const { return P[static_cast<std::size_t>(a)]; }
    const Eigen::VectorXd& rewards(Action a) const { return r[static_cast<std::size_t>(a)]; }
};

struct EvaluationResult {
    Eigen::VectorXd values; ///< relative values, zero at the reference state
    double gain = 0.0;
    double residual = 0.0; ///< max |V + g - r - P V| under the evaluated policy
};

/// Largest deviation of any row sum from one, or of any entry from [0,1].
inline double stochasticity_defect(const Eigen::MatrixXd& P)
{
    double defect = (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
    defect = std::max(defect, std::max(0.0, -P.minCoeff()));
    defect = std::max(defect, std::max(0.0, P.maxCoeff() - 1.0));
    return defect;
}

/// Reward of action a plus the subsidy (added to passive rewards only).
inline Eigen::VectorXd subsidized_rewards(const TwoActionMdp& mdp, Action a, double subsidy)
{
    Eigen::VectorXd out = mdp.rewards(a);
    if (a == Action::passive)
        out.array() += subsidy;
    return out;
}

/// Solves V(x) + g = r(x) + sum_y P(x,y) V(y) with V(reference) = 0.
/// The unknown V(reference) is replaced by g, giving a square system.
inline EvaluationResult evaluate_policy(const TwoActionMdp& mdp, const PolicyTable& policy, double subsidy = 0.0,
                                        Eigen::Index reference = 0)
{
    const Eigen::Index m = mdp.size();
    if (static_cast<Eigen::Index>(policy.size()) != m)
        throw EvaluationError("policy table size does not match state count");

    Eigen::MatrixXd P(m, m);
    Eigen::VectorXd r(m);
    for (Eigen::Index x = 0; x < m; ++x) {
        const Action a = policy[static_cast<std::size_t>(x)];
        P.row(x) = mdp.transitions(a).row(x);
        r(x) = subsidized_rewards(mdp, a, subsidy)(x);
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) - P;
    A.col(reference).setOnes(); // column now multiplies g

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw EvaluationError("policy evaluation system is singular");
    Eigen::VectorXd sol = lu.solve(r);

    EvaluationResult out;
    out.gain = sol(reference);
    out.values = sol;
    out.values(reference) = 0.0;
    out.residual = (out.values + Eigen::VectorXd::Constant(m, out.gain) - r - P * out.values).cwiseAbs().maxCoeff();
    if (!std::isfinite(out.gain) || !std::isfinite(out.residual))
        throw EvaluationError("policy evaluation produced non-finite values");
    return out;
}

/// r^(a) (+ subsidy if passive) + P^(a) V.
inline Eigen::VectorXd action_values(const TwoActionMdp& mdp, Action a, const Eigen::VectorXd& V, double subsidy = 0.0)
{
    return subsidized_rewards(mdp, a, subsidy) + mdp.transitions(a) * V;
}

/// max over states of |max(R0, R1) - V - g|.
inline double bellman_residual(const TwoActionMdp& mdp, const EvaluationResult& ev, double subsidy = 0.0)
{
    const Eigen::VectorXd R0 = action_values(mdp, Action::passive, ev.values, subsidy);
    const Eigen::VectorXd R1 = action_values(mdp, Action::active, ev.values, subsidy);
    return (R0.cwiseMax(R1) - ev.values - Eigen::VectorXd::Constant(mdp.size(), ev.gain)).cwiseAbs().maxCoeff();
}

/// Greedy improvement; keeps the incumbent action unless the other one is
/// better by more than `tie_tolerance`.
inline PolicyTable improve_policy(const TwoActionMdp& mdp, const PolicyTable& incumbent, const Eigen::VectorXd& V,
                                  double subsidy = 0.0, double tie_tolerance = 1e-12)
{
    const Eigen::VectorXd R0 = action_values(mdp, Action::passive, V, subsidy);
    const Eigen::VectorXd R1 = action_values(mdp, Action::active, V, subsidy);
    PolicyTable next = incumbent;
    for (Eigen::Index x = 0; x < mdp.size(); ++x) {
        auto& a = next[static_cast<std::size_t>(x)];
        if (a == Action::passive && R1(x) > R0(x) + tie_tolerance)
            a = Action::active;
        else if (a == Action::active && R0(x) > R1(x) + tie_tolerance)
            a = Action::passive;
    }
    return next;
}

struct PolicyIterationResult {
    PolicyTable policy;
    EvaluationResult evaluation;
    int iterations = 0;
};

/// Howard policy iteration; valid when every stationary policy is unichain.
inline PolicyIterationResult policy_iteration(const TwoActionMdp& mdp, PolicyTable start, double subsidy = 0.0,
                                              int max_iterations = 1000)
{
    PolicyIterationResult out{std::move(start), {}, 0};
    for (; out.iterations < max_iterations; ++out.iterations) {
        out.evaluation = evaluate_policy(mdp, out.policy, subsidy);
        PolicyTable next = improve_policy(mdp, out.policy, out.evaluation.values, subsidy);
        if (next == out.policy)
            return out;
        out.policy = std::move(next);
    }
    throw SolverError("policy iteration did not converge");
}

} // namespace chansel
