#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mpcsb/baselines.hpp"
#include "mpcsb/oracles.hpp"
#include "mpcsb/rng.hpp"

using namespace mpcsb;

namespace {

ActionVector act(std::vector<int> counts) { return ActionVector(std::move(counts)); }

}  // namespace

TEST_CASE("duplication sizes: one unit supplier per truck") {
    const DuplicatedInstance big =
        duplicate_instance(InstanceSpec::transport({1, 3, 4}, {1, 1, 2, 4}));
    CHECK(big.expanded_arms() == 32);  // (1 + 3 + 4) * 4
    for (const ArmSpec& arm : big.expanded.arms()) CHECK(arm.cap == 1);

    const DuplicatedInstance tiny = duplicate_instance(InstanceSpec::transport({1}, {1}));
    CHECK(tiny.expanded_arms() == 1);
    CHECK(tiny.edge_map == std::vector<int>{0});

    const DuplicatedInstance exp55 =
        duplicate_instance(InstanceSpec::transport({1, 4, 5}, {4, 6}));
    CHECK(exp55.expanded_arms() == 20);  // 10 trucks x 2 demanders

    CHECK_THROWS_AS(duplicate_instance(InstanceSpec::knapsack({2, 3}, 5)),
                    std::invalid_argument);
}

TEST_CASE("edge map groups trucks by their source supplier") {
    const DuplicatedInstance dup = duplicate_instance(InstanceSpec::transport({2, 1}, {1, 2}));
    // trucks 0,1 come from supplier 0; truck 2 from supplier 1
    CHECK(dup.edge_map == std::vector<int>{0, 1, 0, 1, 2, 3});
}

TEST_CASE("pullback keeps validity and the slot rule keeps losses equal") {
    const InstanceSpec original = InstanceSpec::transport({2, 1}, {1, 2});
    const DuplicatedInstance dup = duplicate_instance(original);
    Rng rng(3);
    LossTable table;
    table.rows.resize(4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < original.cap(i); ++j)
            table.rows[static_cast<std::size_t>(i)].push_back(rng.uniform(0.0, 1.0));

    for (const ActionVector& expanded : enumerate_actions(dup.expanded, 1000)) {
        const ActionVector pulled = pull_back(dup, expanded);
        CHECK(validate_action(original, pulled));
        const Observation obs = expand_observation(dup, table, expanded, 1);
        double observed = 0.0;
        for (const auto& e : obs.entries) observed += e.loss;
        CHECK(observed == doctest::Approx(linear_loss(pulled, table)).epsilon(1e-12));
        CHECK(static_cast<long long>(obs.entries.size()) == expanded.l1());
    }
}

TEST_CASE("duplicated copies never share posterior state") {
    const InstanceSpec original = InstanceSpec::transport({1, 4, 5}, {4, 6});
    const DuplicatedInstance dup = duplicate_instance(original);
    std::vector<ArmDistribution> dists;
    for (int i = 0; i < original.num_arms(); ++i)
        dists.push_back(ArmDistribution::uniform(0.1, 0.6));
    Environment env(original, dists, CorruptionSchedule::identity(), 7);
    DupCts learner(dup, 7);

    std::vector<long long> pulls(static_cast<std::size_t>(dup.expanded_arms()), 0);
    for (int t = 1; t <= 100; ++t) {
        const RoundLosses losses = env.draw_round(t);
        // re-derive the expanded action from posterior counts after the round
        std::vector<double> before(pulls.size());
        for (std::size_t i = 0; i < pulls.size(); ++i)
            before[i] = learner.inner().posteriors()[i].observations();
        const BaselineRound rec = learner.play_round(losses, t);
        CHECK(validate_action(original, rec.action));
        long long gained = 0;
        for (std::size_t i = 0; i < pulls.size(); ++i) {
            const double now = learner.inner().posteriors()[i].observations();
            const double delta = now - before[i];
            CHECK(delta >= 0.0);
            CHECK(delta <= 1.0);  // cap 1: each copy gains at most its own pull
            gained += static_cast<long long>(delta);
            pulls[i] += static_cast<long long>(delta);
        }
        CHECK(gained == rec.action.l1());
    }
    for (std::size_t i = 0; i < pulls.size(); ++i)
        CHECK(learner.inner().posteriors()[i].observations() == double(pulls[i]));
}

TEST_CASE("singleton duplication behaves like the original learner") {
    const InstanceSpec original = InstanceSpec::transport({1}, {1});
    const DuplicatedInstance dup = duplicate_instance(original);
    std::vector<ArmDistribution> dists = {ArmDistribution::uniform(0.2, 0.8)};

    Environment env_dup(original, dists, CorruptionSchedule::identity(), 11);
    Environment env_gen(original, dists, CorruptionSchedule::identity(), 11);
    DupCts dup_learner(dup, 11);
    GenCts gen_learner(original, 11);
    for (int t = 1; t <= 50; ++t) {
        const BaselineRound a = dup_learner.run_round(env_dup, t);
        const GenCtsRound b = gen_learner.run_round(env_gen, t);
        CHECK(a.action == b.action);  // single feasible action
        CHECK(a.realized_loss == b.realized_loss);
    }

    Environment env_dup2(original, dists, CorruptionSchedule::identity(), 13);
    Environment env_gen2(original, dists, CorruptionSchedule::identity(), 13);
    DupLbinfv dup_lb(dup, 50, Predictor::Mode::LeastSquares, 13);
    GenLbinfv gen_lb(original, 50, Predictor::Mode::LeastSquares, 13);
    for (int t = 1; t <= 50; ++t) {
        const BaselineRound a = dup_lb.run_round(env_dup2, t);
        const GenLbinfvRound b = gen_lb.run_round(env_gen2, t);
        CHECK(a.action == b.action);
        CHECK(a.realized_loss == b.realized_loss);
    }
}

TEST_CASE("cap-one phi matches the binary regularizer shape") {
    // at z = 1 = n the value is gamma, via the 0 log 0 convention
    const double gamma = std::log(10000.0);
    CHECK(phi_value(1.0, 1.0, gamma) == doctest::Approx(gamma).epsilon(1e-15));
}

TEST_CASE("duplicated drivers produce nondecreasing pseudo-regret") {
    const InstanceSpec original = InstanceSpec::transport({1, 4, 5}, {4, 6});
    const DuplicatedInstance dup = duplicate_instance(original);
    std::vector<ArmDistribution> dists;
    for (int i = 0; i < original.num_arms(); ++i)
        dists.push_back(ArmDistribution::uniform(0.0, 0.1 + 0.08 * i));

    Environment env1(original, dists, CorruptionSchedule::identity(), 19);
    const std::vector<double> cts = run_duplicated_cts(dup, env1, 200, 19);
    REQUIRE(cts.size() == 200);
    for (std::size_t t = 1; t < cts.size(); ++t) CHECK(cts[t] >= cts[t - 1] - 1e-12);

    Environment env2(original, dists, CorruptionSchedule::identity(), 19);
    const std::vector<double> lb =
        run_duplicated_lbinfv(dup, env2, 200, Predictor::Mode::LeastSquares, 19);
    REQUIRE(lb.size() == 200);
    for (std::size_t t = 1; t < lb.size(); ++t) CHECK(lb[t] >= lb[t - 1] - 1e-12);
}
