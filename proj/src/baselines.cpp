#include "mpcsb/baselines.hpp"

#include <stdexcept>

#include "mpcsb/oracles.hpp"

namespace mpcsb {

DuplicatedInstance duplicate_instance(const InstanceSpec& spec) {
    const TransportKind* t = spec.as_transport();
    if (t == nullptr)
        throw std::invalid_argument("duplicate_instance: only transport instances expand");

    int total_trucks = 0;
    for (int u : t->supplies) total_trucks += u;
    const int n_dem = static_cast<int>(t->demands.size());

    std::vector<int> edge_map(static_cast<std::size_t>(total_trucks) *
                              static_cast<std::size_t>(n_dem));
    int truck = 0;
    for (int x = 0; x < static_cast<int>(t->supplies.size()); ++x) {
        for (int unit = 0; unit < t->supplies[static_cast<std::size_t>(x)]; ++unit, ++truck) {
            for (int y = 0; y < n_dem; ++y)
                edge_map[static_cast<std::size_t>(truck * n_dem + y)] = x * n_dem + y;
        }
    }
    return DuplicatedInstance(
        spec,
        InstanceSpec::transport(std::vector<int>(static_cast<std::size_t>(total_trucks), 1),
                                t->demands),
        std::move(edge_map));
}

ActionVector pull_back(const DuplicatedInstance& dup, const ActionVector& expanded_action) {
    if (expanded_action.size() != dup.expanded.num_arms())
        throw std::invalid_argument("pull_back: expanded action length mismatch");
    ActionVector original;
    original.counts.assign(static_cast<std::size_t>(dup.original.num_arms()), 0);
    for (int e = 0; e < expanded_action.size(); ++e)
        original[dup.edge_map[static_cast<std::size_t>(e)]] += expanded_action[e];
    return original;
}

Observation expand_observation(const DuplicatedInstance& dup, const LossTable& original_table,
                               const ActionVector& expanded_action, int round) {
    if (expanded_action.size() != dup.expanded.num_arms())
        throw std::invalid_argument("expand_observation: expanded action length mismatch");
    Observation obs;
    obs.round = round;
    // ascending expanded index = truck-index order, so same-supplier trucks
    // picking one edge consume that edge's slots 0, 1, 2, ...
    std::vector<int> next_slot(static_cast<std::size_t>(dup.original.num_arms()), 0);
    for (int e = 0; e < expanded_action.size(); ++e) {
        if (expanded_action[e] < 1) continue;
        if (expanded_action[e] > 1)
            throw std::invalid_argument("expand_observation: expanded caps are 1");
        const int orig = dup.edge_map[static_cast<std::size_t>(e)];
        const int slot = next_slot[static_cast<std::size_t>(orig)]++;
        const auto& row = original_table.rows[static_cast<std::size_t>(orig)];
        if (slot >= static_cast<int>(row.size()))
            throw std::logic_error("expand_observation: slot demand exceeds edge capacity");
        obs.entries.push_back({e, 0, row[static_cast<std::size_t>(slot)]});
    }
    return obs;
}

DupCts::DupCts(DuplicatedInstance dup, std::uint64_t seed)
    : dup_(std::move(dup)), inner_(dup_.expanded, seed) {}

BaselineRound DupCts::play_round(const RoundLosses& original_losses, int t) {
    auto [expanded_action, theta] = inner_.select_action();
    (void)theta;
    const Observation obs =
        expand_observation(dup_, original_losses.corrupted, expanded_action, t);
    inner_.update(obs);

    BaselineRound rec;
    rec.action = pull_back(dup_, expanded_action);
    rec.realized_loss = linear_loss(rec.action, original_losses.corrupted);
    return rec;
}

BaselineRound DupCts::run_round(Environment& env, int t) {
    const RoundLosses losses = env.draw_round(t);
    return play_round(losses, t);
}

DupLbinfv::DupLbinfv(DuplicatedInstance dup, int horizon, Predictor::Mode mode,
                     std::uint64_t seed, double eta, double epsilon_frac)
    : dup_(std::move(dup)), inner_(dup_.expanded, horizon, mode, seed, eta, epsilon_frac) {}

BaselineRound DupLbinfv::play_round(const RoundLosses& original_losses, int t) {
    const GenLbinfvDecision decision = inner_.decide();
    const Observation obs =
        expand_observation(dup_, original_losses.corrupted, decision.action, t);
    inner_.learn(decision, obs);

    BaselineRound rec;
    rec.action = pull_back(dup_, decision.action);
    rec.realized_loss = linear_loss(rec.action, original_losses.corrupted);
    return rec;
}

BaselineRound DupLbinfv::run_round(Environment& env, int t) {
    const RoundLosses losses = env.draw_round(t);
    return play_round(losses, t);
}

namespace {

double mean_loss(const ActionVector& a, const std::vector<double>& means) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * means[static_cast<std::size_t>(i)];
    return s;
}

template <typename Learner>
std::vector<double> drive(Learner& learner, Environment& env, int T) {
    const std::vector<double> means = env.clean_means();
    const ActionVector astar = argmin_action(env.spec(), means);
    const double astar_loss = mean_loss(astar, means);
    std::vector<double> curve(static_cast<std::size_t>(T), 0.0);
    double cum = 0.0;
    for (int t = 1; t <= T; ++t) {
        const BaselineRound rec = learner.run_round(env, t);
        cum += mean_loss(rec.action, means) - astar_loss;
        curve[static_cast<std::size_t>(t - 1)] = cum;
    }
    return curve;
}

}  // namespace

std::vector<double> run_duplicated_cts(const DuplicatedInstance& dup, Environment& env, int T,
                                       std::uint64_t seed) {
    DupCts learner(dup, seed);
    return drive(learner, env, T);
}

std::vector<double> run_duplicated_lbinfv(const DuplicatedInstance& dup, Environment& env, int T,
                                          Predictor::Mode mode, std::uint64_t seed) {
    DupLbinfv learner(dup, T, mode, seed);
    return drive(learner, env, T);
}

}  // namespace mpcsb
