#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpcsb/core.hpp"
#include "mpcsb/rng.hpp"

namespace mpcsb {

// Per-arm loss distribution with support inside [0, 1].
class ArmDistribution {
  public:
    enum class Family { Uniform, Bernoulli, Constant };

    static ArmDistribution uniform(double lo, double hi);
    static ArmDistribution bernoulli(double p);
    static ArmDistribution constant(double c);

    double mean() const;
    double variance() const;
    double sample(Rng& rng) const;

    Family family() const { return family_; }
    double param_a() const { return a_; }
    double param_b() const { return b_; }
    std::string describe() const;

  private:
    ArmDistribution(Family f, double a, double b) : family_(f), a_(a), b_(b) {}
    Family family_;
    double a_, b_;
};

// Rule mapping (round, arm) to a replacement distribution; identity means the
// clean draw is kept. Only time-triggered switches are representable.
class CorruptionSchedule {
  public:
    static CorruptionSchedule identity();
    // Rounds t > last_clean_round draw arm i from replacement[i] instead.
    static CorruptionSchedule switch_after(int last_clean_round,
                                           std::vector<ArmDistribution> replacement);

    bool is_identity() const { return replacement_.empty(); }
    int switch_round() const { return last_clean_round_; }
    std::size_t replacement_count() const { return replacement_.size(); }
    const ArmDistribution* replacement_for(int round, int arm) const;

  private:
    int last_clean_round_ = 0;
    std::vector<ArmDistribution> replacement_;
};

struct RoundLosses {
    LossTable clean;
    LossTable corrupted;
};

// Draws full loss tables each round (all n_i slots, so any action can be
// served) and accounts the running corruption level
// C = sum_t max_{i,j} |corrupted_ij - clean_ij|.
class Environment {
  public:
    Environment(InstanceSpec spec, std::vector<ArmDistribution> arm_dists,
                CorruptionSchedule schedule, std::uint64_t seed);

    RoundLosses draw_round(int t);

    const InstanceSpec& spec() const { return spec_; }
    const std::vector<ArmDistribution>& arm_distributions() const { return dists_; }
    const CorruptionSchedule& schedule() const { return schedule_; }
    double corruption_level() const { return corruption_; }

    // mean of the distribution that actually feeds arm `i` at round `t`
    double mean_at(int t, int arm) const;
    std::vector<double> clean_means() const;
    std::vector<double> clean_variances() const;

  private:
    InstanceSpec spec_;
    std::vector<ArmDistribution> dists_;
    CorruptionSchedule schedule_;
    Rng rng_;
    double corruption_ = 0.0;
};

// The first a_i entries of each played row, as (arm, slot, loss) triples.
Observation observe(const LossTable& table, const ActionVector& a, int round);

// sum_i a_i * mean_i under the stochastic regime. Throws if the schedule is
// not identity, since the per-round means then drift.
double expected_action_loss(const Environment& env, const ActionVector& a);

}  // namespace mpcsb
