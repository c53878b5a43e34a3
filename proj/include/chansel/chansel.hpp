#pragma once

#include <chansel/average_reward.hpp>
#include <chansel/case1_analytic.hpp>
#include <chansel/case2_renewal.hpp>
#include <chansel/csv.hpp>
#include <chansel/errors.hpp>
#include <chansel/experiments.hpp>
#include <chansel/markov_core.hpp>
#include <chansel/mdp_case1.hpp>
#include <chansel/policies.hpp>
#include <chansel/policy_spec.hpp>
#include <chansel/simulator.hpp>
#include <chansel/whittle.hpp>
