#pragma once

#include <cstdint>
#include <vector>

#include "mpcsb/core.hpp"
#include "mpcsb/environment.hpp"
#include "mpcsb/gencts.hpp"
#include "mpcsb/genlbinfv.hpp"

namespace mpcsb {

// Transport instance expanded so every supplier unit becomes its own
// unit-capacity supplier ("truck"). All expanded caps are 1, which turns the
// multi-play problem into an ordinary binary semi-bandit.
struct DuplicatedInstance {
    InstanceSpec original;  // transport
    InstanceSpec expanded;  // transport with unit supplies
    // expanded arm (truck, demander) -> original arm (supplier, demander)
    std::vector<int> edge_map;

    DuplicatedInstance(InstanceSpec orig, InstanceSpec exp, std::vector<int> map)
        : original(std::move(orig)), expanded(std::move(exp)), edge_map(std::move(map)) {}

    int expanded_arms() const { return expanded.num_arms(); }
};

DuplicatedInstance duplicate_instance(const InstanceSpec& spec);

// Maps an expanded 0/1 action back to original play counts.
ActionVector pull_back(const DuplicatedInstance& dup, const ActionVector& expanded_action);

// Builds the expanded observation: trucks from one supplier picking the same
// demander consume that original edge's loss slots in truck-index order.
Observation expand_observation(const DuplicatedInstance& dup, const LossTable& original_table,
                               const ActionVector& expanded_action, int round);

struct BaselineRound {
    ActionVector action;  // original coordinates
    double realized_loss = 0.0;
};

// Ordinary CTS run on the expanded instance, per-copy posteriors.
class DupCts {
  public:
    DupCts(DuplicatedInstance dup, std::uint64_t seed);

    BaselineRound play_round(const RoundLosses& original_losses, int t);
    BaselineRound run_round(Environment& env, int t);

    const DuplicatedInstance& duplicated() const { return dup_; }
    const GenCts& inner() const { return inner_; }

  private:
    DuplicatedInstance dup_;
    GenCts inner_;
};

// Ordinary LBINFV (cap-1 specialization) run on the expanded instance.
class DupLbinfv {
  public:
    DupLbinfv(DuplicatedInstance dup, int horizon, Predictor::Mode mode, std::uint64_t seed,
              double eta = 0.25, double epsilon_frac = 0.5);

    BaselineRound play_round(const RoundLosses& original_losses, int t);
    BaselineRound run_round(Environment& env, int t);

    const DuplicatedInstance& duplicated() const { return dup_; }
    const GenLbinfv& inner() const { return inner_; }

  private:
    DuplicatedInstance dup_;
    GenLbinfv inner_;
};

// Convenience drivers returning cumulative pseudo-regret over T rounds
// against the optimal action for the environment's stationary means.
std::vector<double> run_duplicated_cts(const DuplicatedInstance& dup, Environment& env, int T,
                                       std::uint64_t seed);
std::vector<double> run_duplicated_lbinfv(const DuplicatedInstance& dup, Environment& env, int T,
                                          Predictor::Mode mode, std::uint64_t seed);

}  // namespace mpcsb
