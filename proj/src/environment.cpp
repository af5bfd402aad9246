#include "mpcsb/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpcsb {

ArmDistribution ArmDistribution::uniform(double lo, double hi) {
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
        throw std::invalid_argument("uniform: need 0 <= lo <= hi <= 1");
    return ArmDistribution(Family::Uniform, lo, hi);
}

ArmDistribution ArmDistribution::bernoulli(double p) {
    if (!(0.0 <= p && p <= 1.0)) throw std::invalid_argument("bernoulli: p outside [0,1]");
    return ArmDistribution(Family::Bernoulli, p, 0.0);
}

ArmDistribution ArmDistribution::constant(double c) {
    if (!(0.0 <= c && c <= 1.0)) throw std::invalid_argument("constant: value outside [0,1]");
    return ArmDistribution(Family::Constant, c, 0.0);
}

double ArmDistribution::mean() const {
    switch (family_) {
        case Family::Uniform: return 0.5 * (a_ + b_);
        case Family::Bernoulli: return a_;
        case Family::Constant: return a_;
    }
    return 0.0;
}

double ArmDistribution::variance() const {
    switch (family_) {
        case Family::Uniform: return (b_ - a_) * (b_ - a_) / 12.0;
        case Family::Bernoulli: return a_ * (1.0 - a_);
        case Family::Constant: return 0.0;
    }
    return 0.0;
}

double ArmDistribution::sample(Rng& rng) const {
    switch (family_) {
        case Family::Uniform: return a_ == b_ ? a_ : rng.uniform(a_, b_);
        case Family::Bernoulli: return rng.bernoulli(a_) ? 1.0 : 0.0;
        case Family::Constant: return a_;
    }
    return 0.0;
}

std::string ArmDistribution::describe() const {
    std::ostringstream out;
    switch (family_) {
        case Family::Uniform: out << "uniform " << a_ << ' ' << b_; break;
        case Family::Bernoulli: out << "bernoulli " << a_; break;
        case Family::Constant: out << "constant " << a_; break;
    }
    return out.str();
}

CorruptionSchedule CorruptionSchedule::identity() { return CorruptionSchedule{}; }

CorruptionSchedule CorruptionSchedule::switch_after(int last_clean_round,
                                                    std::vector<ArmDistribution> replacement) {
    if (last_clean_round < 0)
        throw std::invalid_argument("corruption: switch round must be >= 0");
    if (replacement.empty())
        throw std::invalid_argument("corruption: empty replacement list");
    CorruptionSchedule s;
    s.last_clean_round_ = last_clean_round;
    s.replacement_ = std::move(replacement);
    return s;
}

const ArmDistribution* CorruptionSchedule::replacement_for(int round, int arm) const {
    if (replacement_.empty() || round <= last_clean_round_) return nullptr;
    return &replacement_[static_cast<std::size_t>(arm)];
}

Environment::Environment(InstanceSpec spec, std::vector<ArmDistribution> arm_dists,
                         CorruptionSchedule schedule, std::uint64_t seed)
    : spec_(std::move(spec)),
      dists_(std::move(arm_dists)),
      schedule_(std::move(schedule)),
      rng_(seed, /*stream=*/0x0e5fULL) {
    if (static_cast<int>(dists_.size()) != spec_.num_arms())
        throw std::invalid_argument("environment: one distribution per arm required");
    if (!schedule_.is_identity() &&
        schedule_.replacement_count() != static_cast<std::size_t>(spec_.num_arms()))
        throw std::invalid_argument("environment: one replacement distribution per arm required");
}

RoundLosses Environment::draw_round(int t) {
    if (t < 1) throw std::invalid_argument("draw_round: rounds are 1-based");
    RoundLosses out;
    const int d = spec_.num_arms();
    out.clean.rows.resize(static_cast<std::size_t>(d));
    out.corrupted.rows.resize(static_cast<std::size_t>(d));
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
        const int slots = spec_.cap(i);
        auto& clean_row = out.clean.rows[static_cast<std::size_t>(i)];
        clean_row.resize(static_cast<std::size_t>(slots));
        for (double& x : clean_row) x = dists_[static_cast<std::size_t>(i)].sample(rng_);

        const ArmDistribution* repl = schedule_.replacement_for(t, i);
        auto& dirty_row = out.corrupted.rows[static_cast<std::size_t>(i)];
        if (repl == nullptr) {
            dirty_row = clean_row;
        } else {
            dirty_row.resize(static_cast<std::size_t>(slots));
            for (std::size_t j = 0; j < dirty_row.size(); ++j) {
                dirty_row[j] = repl->sample(rng_);
                worst = std::max(worst, std::abs(dirty_row[j] - clean_row[j]));
            }
        }
    }
    corruption_ += worst;
    return out;
}

double Environment::mean_at(int t, int arm) const {
    const ArmDistribution* repl = schedule_.replacement_for(t, arm);
    return repl ? repl->mean() : dists_[static_cast<std::size_t>(arm)].mean();
}

std::vector<double> Environment::clean_means() const {
    std::vector<double> out(dists_.size());
    for (std::size_t i = 0; i < dists_.size(); ++i) out[i] = dists_[i].mean();
    return out;
}

std::vector<double> Environment::clean_variances() const {
    std::vector<double> out(dists_.size());
    for (std::size_t i = 0; i < dists_.size(); ++i) out[i] = dists_[i].variance();
    return out;
}

Observation observe(const LossTable& table, const ActionVector& a, int round) {
    if (a.counts.size() != table.rows.size())
        throw std::invalid_argument("observe: action/table arm counts differ");
    Observation obs;
    obs.round = round;
    for (int i = 0; i < a.size(); ++i) {
        const int plays = a[i];
        if (plays > static_cast<int>(table.rows[static_cast<std::size_t>(i)].size()))
            throw std::invalid_argument("observe: action exceeds available loss slots");
        for (int j = 0; j < plays; ++j)
            obs.entries.push_back(
                {i, j, table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]});
    }
    return obs;
}

double expected_action_loss(const Environment& env, const ActionVector& a) {
    if (!env.schedule().is_identity())
        throw std::logic_error("expected_action_loss: no stationary mean under corruption");
    if (a.size() != env.spec().num_arms())
        throw std::invalid_argument("expected_action_loss: action length mismatch");
    double total = 0.0;
    for (int i = 0; i < a.size(); ++i)
        total += a[i] * env.arm_distributions()[static_cast<std::size_t>(i)].mean();
    return total;
}

}  // namespace mpcsb
