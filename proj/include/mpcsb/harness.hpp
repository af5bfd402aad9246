#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpcsb/core.hpp"
#include "mpcsb/environment.hpp"
#include "mpcsb/genlbinfv.hpp"

namespace mpcsb {

struct AlgorithmConfig {
    enum class Name { GenCts, GenLbinfv, DupCts, DupLbinfv };
    Name name = Name::GenCts;
    Predictor::Mode predictor = Predictor::Mode::LeastSquares;
    double eta = 0.25;
    double epsilon_frac = 0.5;
};

std::string algorithm_name(AlgorithmConfig::Name name);

// Two ways to specify the loss process:
//  - Explicit: one fixed distribution per arm, optional replacement list that
//    kicks in after `corrupt_after` rounds.
//  - CostScaled: each trial draws per-arm costs c_i ~ U[cost_low, cost_high];
//    arm i is U(0, 2 c_i), switching to U(1 - 2 c_i, 1) after `corrupt_after`.
struct EnvironmentConfig {
    enum class Mode { Explicit, CostScaled };
    // Shared: one cost matrix per experiment, drawn from the base seed, so
    // trials differ only in loss draws and learner randomness. PerTrial:
    // every trial redraws its own costs.
    enum class CostDraw { Shared, PerTrial };

    Mode mode = Mode::Explicit;
    CostDraw cost_draw = CostDraw::Shared;

    std::vector<ArmDistribution> arm_dists;
    std::vector<std::optional<ArmDistribution>> corrupt_dists;

    double cost_low = 0.10;
    double cost_high = 0.50;

    int corrupt_after = 0;  // 0 = stochastic (identity schedule)
};

struct ExperimentConfig {
    InstanceSpec instance = InstanceSpec::knapsack({1}, 1);
    EnvironmentConfig environment;
    AlgorithmConfig algorithm;
    int horizon = 1;
    int trials = 1;
    std::uint64_t base_seed = 0;
    std::string out_dir = "out";
    int threads = 0;  // 0 = one worker per hardware thread
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// [instance] section in the config syntax; parse_config_text reads it back.
std::string instance_to_config(const InstanceSpec& spec);

// Builds the trial's environment: per-trial seed is base_seed + trial_index,
// and CostScaled cost draws come from a dedicated stream of that seed.
Environment make_trial_environment(const ExperimentConfig& cfg, int trial_index);

struct RegretCurve {
    std::vector<std::vector<double>> per_trial;  // trials x horizon
    std::vector<double> mean;                    // horizon
};

struct TrialDiagnostics {
    std::uint64_t seed = 0;
    ActionVector optimal_action;
    std::vector<double> horizon_means;
    std::vector<double> variances;
    std::vector<double> gaps;  // valid only when gaps_available
    bool gaps_available = false;
    double corruption_level = 0.0;
    double final_pseudo_regret = 0.0;
    double final_realized_regret = 0.0;
};

struct ExperimentResult {
    RegretCurve pseudo;
    std::optional<RegretCurve> realized;  // tracked under corruption
    std::vector<TrialDiagnostics> trials;
    double seconds = 0.0;
};

// argmin_action for the given means, cross-checked against enumeration when
// the action set is small enough to enumerate.
ActionVector compute_optimal_action(const InstanceSpec& spec, const std::vector<double>& means);

// <a - a*, means>; nonnegative whenever a* is optimal for `means`.
double pseudo_regret_increment(const std::vector<double>& means, const ActionVector& a,
                               const ActionVector& astar);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes regret.csv (+ regret_realized.csv under corruption) and
// summary.json into out_dir.
void emit(const ExperimentResult& result, const ExperimentConfig& cfg,
          const std::string& out_dir);

}  // namespace mpcsb
