#include "mpcsb/gencts.hpp"

#include <stdexcept>

#include "mpcsb/oracles.hpp"

namespace mpcsb {

GenCts::GenCts(InstanceSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)),
      posteriors_(static_cast<std::size_t>(spec_.num_arms())),
      rng_(seed, /*stream=*/0xc75ULL) {}

std::pair<ActionVector, std::vector<double>> GenCts::select_action() {
    std::vector<double> theta(posteriors_.size());
    for (std::size_t i = 0; i < posteriors_.size(); ++i)
        theta[i] = rng_.beta(posteriors_[i].p, posteriors_[i].q);
    ActionVector a = argmin_action(spec_, theta);
    return {std::move(a), std::move(theta)};
}

void GenCts::update(const Observation& obs) {
    for (const Observation::Entry& e : obs.entries) {
        if (e.loss < 0.0 || e.loss > 1.0)
            throw std::domain_error("gencts update: loss outside [0,1]");
        BetaPosterior& post = posteriors_[static_cast<std::size_t>(e.arm)];
        if (rng_.bernoulli(e.loss))
            post.p += 1.0;
        else
            post.q += 1.0;
    }
}

GenCtsRound GenCts::play_round(const RoundLosses& losses, int t) {
    auto [action, theta] = select_action();
    const Observation obs = observe(losses.corrupted, action, t);
    GenCtsRound rec;
    rec.realized_loss = linear_loss(action, losses.corrupted);
    update(obs);
    rec.action = std::move(action);
    rec.theta = std::move(theta);
    return rec;
}

GenCtsRound GenCts::run_round(Environment& env, int t) {
    const RoundLosses losses = env.draw_round(t);
    return play_round(losses, t);
}

void GenCts::set_posterior(int arm, BetaPosterior p) {
    if (p.p < 1.0 || p.q < 1.0)
        throw std::invalid_argument("set_posterior: p and q must be >= 1");
    posteriors_[static_cast<std::size_t>(arm)] = p;
}

}  // namespace mpcsb
