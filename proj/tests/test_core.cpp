#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "mpcsb/core.hpp"
#include "mpcsb/oracles.hpp"

using namespace mpcsb;

namespace {

ActionVector act(std::vector<int> counts) { return ActionVector(std::move(counts)); }

}  // namespace

TEST_CASE("transport construction derives row-major arms with min-marginal caps") {
    const InstanceSpec spec = InstanceSpec::transport({1, 4, 5}, {4, 6});
    REQUIRE(spec.num_arms() == 6);
    // edge (x, y) -> arm x * |v| + y, cap = min(u_x, v_y)
    CHECK(spec.cap(0) == 1);
    CHECK(spec.cap(1) == 1);
    CHECK(spec.cap(2) == 4);
    CHECK(spec.cap(3) == 4);
    CHECK(spec.cap(4) == 4);
    CHECK(spec.cap(5) == 5);
    for (int i = 0; i < spec.num_arms(); ++i) CHECK(spec.arms()[i].id == i);
}

TEST_CASE("instance construction rejects bad input") {
    CHECK_THROWS_AS(InstanceSpec::transport({1, 2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(InstanceSpec::transport({0, 2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(InstanceSpec::knapsack({2, 7}, 5), std::invalid_argument);  // item 1 unplayable
    CHECK_THROWS_AS(InstanceSpec::knapsack({}, 5), std::invalid_argument);
    CHECK_THROWS_AS(InstanceSpec::explicit_set({}), std::invalid_argument);
    // arm 1 never playable
    CHECK_THROWS_AS(InstanceSpec::explicit_set({act({1, 0}), act({2, 0})}), std::invalid_argument);
}

TEST_CASE("knapsack caps are floor(W / w_i)") {
    const InstanceSpec spec = InstanceSpec::knapsack({2, 3}, 5);
    CHECK(spec.cap(0) == 2);
    CHECK(spec.cap(1) == 1);
}

TEST_CASE("validate_action on the three kinds") {
    const InstanceSpec perm = InstanceSpec::transport({1, 1}, {1, 1});
    CHECK(validate_action(perm, act({1, 0, 0, 1})));
    CHECK(validate_action(perm, act({0, 1, 1, 0})));
    CHECK_FALSE(validate_action(perm, act({1, 1, 0, 0})));

    const InstanceSpec ks = InstanceSpec::knapsack({2, 3}, 5);
    CHECK(validate_action(ks, act({1, 1})));        // weight 5 <= 5
    CHECK_FALSE(validate_action(ks, act({2, 1})));  // weight 7 > 5

    const InstanceSpec ex = InstanceSpec::explicit_set({act({1, 0}), act({0, 1})});
    CHECK(validate_action(ex, act({1, 0})));
    CHECK_FALSE(validate_action(ex, act({1, 1})));

    CHECK_THROWS_AS(validate_action(ks, act({1, 1, 1})), std::invalid_argument);
}

TEST_CASE("any action matching the experiment marginals validates") {
    const InstanceSpec spec = InstanceSpec::transport({1, 4, 5}, {4, 6});
    // row sums (1, 4, 5), column sums (4, 6)
    CHECK(validate_action(spec, act({1, 0, 3, 1, 0, 5})));
    CHECK(validate_action(spec, act({0, 1, 4, 0, 0, 5})));
    CHECK_FALSE(validate_action(spec, act({1, 0, 4, 1, 0, 5})));
}

TEST_CASE("linear_loss sums the first a_i slots per arm") {
    LossTable table;
    table.rows = {{0.3, 0.5, 0.9}, {0.4}};
    CHECK(linear_loss(act({0, 0}), table) == 0.0);
    CHECK(linear_loss(act({2, 0}), table) == doctest::Approx(0.8).epsilon(1e-12));
    LossTable two;
    two.rows = {{0.1}, {0.4}};
    CHECK(linear_loss(act({1, 1}), two) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(linear_loss(act({4, 0}), table), std::invalid_argument);
}

TEST_CASE("support lists played arms in order") {
    CHECK(support(act({0, 0, 0})).empty());
    CHECK(support(act({2, 0, 1})) == std::vector<int>{0, 2});
}

TEST_CASE("every transport action carries total mass sum(u)") {
    const InstanceSpec spec = InstanceSpec::transport({2, 1}, {1, 2});
    for (const ActionVector& a : enumerate_actions(spec, 1000)) CHECK(a.l1() == 3);
}

TEST_CASE("caps equal the per-coordinate maximum over the action set") {
    const auto check_caps = [](const InstanceSpec& spec) {
        const auto actions = enumerate_actions(spec, 100000);
        for (int i = 0; i < spec.num_arms(); ++i) {
            int best = 0;
            for (const ActionVector& a : actions) best = std::max(best, a[i]);
            CHECK(best == spec.cap(i));
        }
    };
    check_caps(InstanceSpec::transport({2, 1}, {1, 2}));
    check_caps(InstanceSpec::transport({1, 4, 5}, {4, 6}));
    check_caps(InstanceSpec::knapsack({2, 3}, 5));
    check_caps(InstanceSpec::explicit_set({act({1, 0}), act({0, 3})}));
}

TEST_CASE("linear_loss is additive over disjoint supports and monotone") {
    LossTable table;
    table.rows = {{0.3, 0.5}, {0.2}, {0.7, 0.1, 0.4}};
    const ActionVector left = act({2, 0, 0});
    const ActionVector right = act({0, 1, 2});
    const ActionVector both = act({2, 1, 2});
    CHECK(linear_loss(both, table) ==
          doctest::Approx(linear_loss(left, table) + linear_loss(right, table)).epsilon(1e-12));

    LossTable bigger = table;
    bigger.rows[1][0] = 0.9;
    CHECK(linear_loss(both, bigger) >= linear_loss(both, table));
}

TEST_CASE("lexicographic comparison") {
    CHECK(lex_less(act({0, 1}), act({1, 0})));
    CHECK_FALSE(lex_less(act({1, 0}), act({0, 1})));
    CHECK_FALSE(lex_less(act({1, 0}), act({1, 0})));
}
