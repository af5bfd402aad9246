#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mpcsb/core.hpp"
#include "mpcsb/environment.hpp"
#include "mpcsb/rng.hpp"

namespace mpcsb {

// Beta(p, q) over an arm's binarized losses. p - 1 counts ones, q - 1 counts
// zeros, so p + q - 2 is the number of binarized observations.
struct BetaPosterior {
    double p = 1.0;
    double q = 1.0;
    double observations() const { return p + q - 2.0; }
    double mean_estimate() const {
        return observations() > 0.0 ? (p - 1.0) / observations() : 0.5;
    }
};

struct GenCtsRound {
    ActionVector action;
    std::vector<double> theta;
    double realized_loss = 0.0;
};

// Combinatorial Thompson sampling over multi-play action sets: sample one
// Beta draw per arm, let the linear oracle pick the action, then binarize
// each observed loss into a Bernoulli update of that arm's posterior.
class GenCts {
  public:
    GenCts(InstanceSpec spec, std::uint64_t seed);

    std::pair<ActionVector, std::vector<double>> select_action();
    void update(const Observation& obs);

    GenCtsRound play_round(const RoundLosses& losses, int t);
    GenCtsRound run_round(Environment& env, int t);

    const InstanceSpec& spec() const { return spec_; }
    const std::vector<BetaPosterior>& posteriors() const { return posteriors_; }
    void set_posterior(int arm, BetaPosterior p);  // test/diagnostic hook

  private:
    InstanceSpec spec_;
    std::vector<BetaPosterior> posteriors_;
    Rng rng_;
};

}  // namespace mpcsb
