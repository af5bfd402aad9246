#pragma once

#include <cstddef>
#include <vector>

#include "mpcsb/core.hpp"

namespace mpcsb {

// Exact integer transport plan minimizing sum_{xy} plan_xy * costs_xy subject
// to row sums = supplies and column sums = demands. Costs are row-major.
// Throws if the marginals are unbalanced or a cost is not finite.
ActionVector ot_oracle(const std::vector<int>& supplies, const std::vector<int>& demands,
                       const std::vector<double>& costs);

// Exact unbounded-knapsack maximizer of counts . values subject to
// counts . weights <= capacity. Ties resolve to the lexicographically
// smallest count vector.
ActionVector knapsack_oracle(const std::vector<int>& weights, int capacity,
                             const std::vector<double>& values);

// argmin over the instance's action set of sum_i a_i * rho_i, dispatching to
// the kind-specific oracle. Explicit sets break ties toward the
// lexicographically smallest action.
ActionVector argmin_action(const InstanceSpec& spec, const std::vector<double>& rho);

// Every integer point of the action set in lexicographically ascending
// order. Throws once more than `limit` actions are produced.
std::vector<ActionVector> enumerate_actions(const InstanceSpec& spec, std::size_t limit);

}  // namespace mpcsb
