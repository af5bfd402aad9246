#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mpcsb/environment.hpp"
#include "mpcsb/genlbinfv.hpp"
#include "mpcsb/oracles.hpp"
#include "mpcsb/rng.hpp"

using namespace mpcsb;

namespace {

ActionVector act(std::vector<int> counts) { return ActionVector(std::move(counts)); }

const double kGammaT4 = std::log(10000.0);

InstanceSpec experiment_instance() { return InstanceSpec::transport({1, 4, 5}, {4, 6}); }

InstanceSpec segment() { return InstanceSpec::explicit_set({act({1, 0}), act({0, 1})}); }

FractionalPoint random_hull_point(const std::vector<ActionVector>& vertices, Rng& rng, int d) {
    std::vector<double> w(vertices.size());
    double total = 0.0;
    for (double& v : w) {
        v = rng.uniform(0.01, 1.0);
        total += v;
    }
    FractionalPoint x;
    x.x.assign(static_cast<std::size_t>(d), 0.0);
    for (std::size_t k = 0; k < vertices.size(); ++k)
        for (int i = 0; i < d; ++i)
            x.x[static_cast<std::size_t>(i)] += (w[k] / total) * vertices[k][i];
    return x;
}

}  // namespace

TEST_CASE("phi at the cap equals n * gamma under the 0 log 0 convention") {
    CHECK(phi_value(1.0, 1.0, kGammaT4) == doctest::Approx(kGammaT4).epsilon(1e-15));
    CHECK(phi_value(5.0, 5.0, kGammaT4) == doctest::Approx(5.0 * kGammaT4).epsilon(1e-15));
    CHECK_THROWS_AS(phi_value(0.0, 1.0, kGammaT4), std::domain_error);
    CHECK_THROWS_AS(phi_value(1.1, 1.0, kGammaT4), std::domain_error);
    CHECK_THROWS_AS(phi_grad(1.0, 1.0, kGammaT4), std::domain_error);
}

TEST_CASE("phi is convex on a grid of the open interval") {
    const double n = 4.0;
    const double h = 1e-4;
    for (double z = 0.05 * n; z < 0.95 * n; z += 0.01 * n) {
        const double second =
            phi_value(z + h, n, kGammaT4) - 2.0 * phi_value(z, n, kGammaT4) +
            phi_value(z - h, n, kGammaT4);
        CHECK(second >= 0.0);
    }
}

TEST_CASE("phi gradient and hessian match central differences") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const double n = 1.0 + std::floor(rng.uniform(0.0, 5.0));
        const double z = rng.uniform(0.05, 0.95) * n;
        const double h = 1e-6 * n;
        const double fd_grad =
            (phi_value(z + h, n, kGammaT4) - phi_value(z - h, n, kGammaT4)) / (2.0 * h);
        CHECK(std::abs(phi_grad(z, n, kGammaT4) - fd_grad) <= 1e-6);
        const double fd_hess =
            (phi_grad(z + h, n, kGammaT4) - phi_grad(z - h, n, kGammaT4)) / (2.0 * h);
        CHECK(std::abs(phi_hess(z, n, kGammaT4) - fd_hess) <= 1e-4 * std::abs(fd_hess) + 1e-6);
    }
}

TEST_CASE("regularizer_value_grad sums beta-weighted phi terms") {
    const InstanceSpec spec = experiment_instance();
    RegState reg(spec, kGammaT4);
    FractionalPoint x;
    x.x = {0.5, 0.5, 2.0, 2.0, 2.0, 3.0};
    const auto [value, grad] = regularizer_value_grad(x, reg);
    double expect = 0.0;
    for (int i = 0; i < 6; ++i)
        expect += reg.beta(i) * phi_value(x.x[static_cast<std::size_t>(i)], spec.cap(i), kGammaT4);
    CHECK(value == doctest::Approx(expect).epsilon(1e-14));
    for (int i = 0; i < 6; ++i)
        CHECK(grad[static_cast<std::size_t>(i)] ==
              doctest::Approx(reg.beta(i) *
                              phi_grad(x.x[static_cast<std::size_t>(i)], spec.cap(i), kGammaT4))
                  .epsilon(1e-14));

    FractionalPoint boundary;
    boundary.x = {0.0, 0.5, 2.0, 2.0, 2.0, 3.0};
    CHECK_THROWS_AS(regularizer_value_grad(boundary, reg), std::domain_error);
}

TEST_CASE("default epsilon = n/2 puts beta(1) at 1.5 for every arm") {
    RegState reg(experiment_instance(), kGammaT4);
    for (int i = 0; i < 6; ++i) {
        CHECK(reg.beta(i) == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(reg.epsilon(i) == doctest::Approx(0.5 * reg.cap(i)));
    }
    CHECK_THROWS_AS(RegState(experiment_instance(), kGammaT4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(RegState(experiment_instance(), kGammaT4, 0.6), std::invalid_argument);
}

TEST_CASE("alpha accumulation: skipped arms, the extremal case, monotone beta") {
    const InstanceSpec spec = segment();  // caps (1, 1)
    RegState reg(spec, kGammaT4);
    FractionalPoint x;
    x.x = {0.1, 0.9};

    // arm 1 unplayed: alpha stays 0, beta unchanged
    const auto alpha =
        reg.update(act({1, 0}), x, /*k=*/{1.0, 0.0}, /*q=*/{0.0, 0.0});
    CHECK(alpha[1] == 0.0);
    CHECK(reg.beta(1) == doctest::Approx(1.5));
    // arm 0: full cap play, |k - q| = 1, damping saturates at 1
    CHECK(alpha[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(reg.beta(0) == doctest::Approx(std::sqrt(2.25 + 1.0 / kGammaT4)).epsilon(1e-12));

    double prev = reg.beta(0);
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        const double k = rng.uniform(0.0, 1.0);
        const auto a = reg.update(act({1, 0}), x, {k, 0.0}, {0.5, 0.5});
        CHECK(a[0] >= 0.0);
        CHECK(a[0] <= 1.0);
        CHECK(reg.beta(0) >= prev);
        prev = reg.beta(0);
    }
}

TEST_CASE("least-squares prediction: prior 1/2 and the weighted running mean") {
    Predictor pred = Predictor::least_squares(2);
    CHECK(pred.q()[0] == 0.5);
    // one round, two plays of arm 0 with losses (0.4, 0.6): k = 0.5
    pred.update(act({2, 0}), {0.5, 0.0});
    CHECK(pred.q()[0] == doctest::Approx((0.5 + 1.0) / 3.0).epsilon(1e-15));
    CHECK(pred.q()[1] == 0.5);
}

TEST_CASE("gradient-descent prediction blends only played arms") {
    Predictor pred = Predictor::gradient_descent(2, 0.25);
    pred.update(act({1, 0}), {1.0, 0.3});
    CHECK(pred.q()[0] == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(pred.q()[1] == 0.5);
    CHECK_THROWS_AS(Predictor::gradient_descent(2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Predictor::gradient_descent(2, 0.0), std::invalid_argument);
}

TEST_CASE("predictions stay inside [0,1] under random feedback") {
    Rng rng(8);
    Predictor ls = Predictor::least_squares(3);
    Predictor gd = Predictor::gradient_descent(3, 0.49);
    for (int t = 0; t < 500; ++t) {
        ActionVector a = act({static_cast<int>(rng.uniform(0.0, 2.999)),
                              static_cast<int>(rng.uniform(0.0, 1.999)), 0});
        std::vector<double> k = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.0};
        ls.update(a, k);
        gd.update(a, k);
        for (int i = 0; i < 3; ++i) {
            CHECK(ls.q()[static_cast<std::size_t>(i)] >= 0.0);
            CHECK(ls.q()[static_cast<std::size_t>(i)] <= 1.0);
            CHECK(gd.q()[static_cast<std::size_t>(i)] >= 0.0);
            CHECK(gd.q()[static_cast<std::size_t>(i)] <= 1.0);
        }
    }
}

TEST_CASE("loss estimate formula and the unplayed-arm fallback") {
    FractionalPoint x;
    x.x = {1.0, 0.5};
    Observation obs;
    obs.round = 1;
    obs.entries.push_back({0, 0, 0.7});
    obs.entries.push_back({0, 1, 0.9});
    const LossEstimate est = estimate_loss(x, act({2, 0}), obs, {0.5, 0.25});
    CHECK(est.k[0] == doctest::Approx(0.8));
    CHECK(est.ell_hat[0] == doctest::Approx(0.5 + 2.0 * (0.8 - 0.5)).epsilon(1e-15));  // 1.1
    CHECK(est.ell_hat[1] == 0.25);

    Observation bad;
    bad.round = 1;
    bad.entries.push_back({0, 0, 0.7});
    CHECK_THROWS_AS(estimate_loss(x, act({2, 0}), bad, {0.5, 0.25}), std::invalid_argument);
}

TEST_CASE("oftrl on a single-point polytope returns the point, clamped interior") {
    const InstanceSpec spec = InstanceSpec::transport({1}, {1});
    RegState reg(spec, kGammaT4);
    OftrlSolver solver(spec);
    const FractionalPoint x = solver.solve({0.3}, reg);
    CHECK(x.x[0] > 0.0);
    CHECK(x.x[0] < 1.0);
    CHECK(x.x[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("oftrl on a symmetric segment sits at the midpoint") {
    const InstanceSpec spec = segment();
    RegState reg(spec, kGammaT4);
    OftrlSolver solver(spec);
    const FractionalPoint x = solver.solve({0.5, 0.5}, reg);
    CHECK(x.x[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(x.x[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(solver.reduced_gradient_norm(x, {0.5, 0.5}, reg) <= 1e-8);
}

TEST_CASE("oftrl matches a dense grid search on a one-dimensional transport polytope") {
    const InstanceSpec spec = InstanceSpec::transport({2, 1}, {1, 2});
    RegState reg(spec, kGammaT4);
    OftrlSolver solver(spec);
    Rng rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> linear(4);
        for (double& g : linear) g = rng.uniform(-2.0, 2.0);
        const FractionalPoint got = solver.solve(linear, reg);
        CHECK(solver.reduced_gradient_norm(got, linear, reg) <= 1e-8);

        // the feasible set is { (s, 2-s, 1-s, s) : s in [0, 1] }
        double best_s = -1.0, best_val = std::numeric_limits<double>::infinity();
        FractionalPoint p;
        p.x.assign(4, 0.0);
        for (double s = 1e-5; s < 1.0; s += 1e-5) {
            p.x = {s, 2.0 - s, 1.0 - s, s};
            const double val = solver.objective(p, linear, reg);
            if (val < best_val) {
                best_val = val;
                best_s = s;
            }
        }
        CHECK(std::abs(got.x[0] - best_s) <= 1e-4);
    }
}

TEST_CASE("oftrl solutions beat every vertex and random hull points") {
    const InstanceSpec spec = experiment_instance();
    RegState reg(spec, kGammaT4);
    OftrlSolver solver(spec);
    const auto vertices = enumerate_actions(spec, 100);
    Rng rng(44);
    std::vector<double> linear(6);
    for (double& g : linear) g = rng.uniform(-1.0, 1.0);
    const FractionalPoint x = solver.solve(linear, reg);
    CHECK(solver.reduced_gradient_norm(x, linear, reg) <= 1e-8);
    CHECK(solver.equality_residual(x) <= 1e-9 * 6.0);
    const double fx = solver.objective(x, linear, reg);
    for (const ActionVector& v : vertices) {
        FractionalPoint p;
        p.x.assign(6, 0.0);
        for (int i = 0; i < 6; ++i) p.x[static_cast<std::size_t>(i)] = v[i];
        CHECK(fx <= solver.objective(p, linear, reg));  // vertices hit the barrier
    }
    for (int k = 0; k < 100; ++k) {
        const FractionalPoint p = random_hull_point(vertices, rng, 6);
        CHECK(fx <= solver.objective(p, linear, reg) + 1e-9);
    }
}

TEST_CASE("oftrl rejects knapsack hulls and non-hull explicit sets") {
    CHECK_THROWS_AS(OftrlSolver(InstanceSpec::knapsack({2, 3}, 5)), std::invalid_argument);
    // three affinely independent points whose hull misses (1, 1)
    CHECK_THROWS_AS(
        OftrlSolver(InstanceSpec::explicit_set({act({0, 1}), act({1, 0}), act({2, 1})})),
        std::invalid_argument);
}

TEST_CASE("decomposing an integral point yields that single atom") {
    const InstanceSpec spec = experiment_instance();
    ConvexDecomposer dec(spec);
    const auto vertices = enumerate_actions(spec, 100);
    FractionalPoint x;
    x.x.assign(6, 0.0);
    for (int i = 0; i < 6; ++i) x.x[static_cast<std::size_t>(i)] = vertices[3][i];
    const Decomposition d = dec.decompose(x);
    REQUIRE(d.atoms.size() == 1);
    CHECK(d.atoms[0].action == vertices[3]);
    CHECK(d.atoms[0].weight == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("the doubly stochastic center splits into the two permutations") {
    const InstanceSpec spec = InstanceSpec::transport({1, 1}, {1, 1});
    ConvexDecomposer dec(spec);
    FractionalPoint x;
    x.x = {0.5, 0.5, 0.5, 0.5};
    const Decomposition d = dec.decompose(x);
    REQUIRE(d.atoms.size() == 2);
    for (const auto& atom : d.atoms) {
        CHECK(atom.weight == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(validate_action(spec, atom.action));
    }
    CHECK_FALSE(d.atoms[0].action == d.atoms[1].action);
}

TEST_CASE("random hull points of the experiment polytope decompose exactly") {
    const InstanceSpec spec = experiment_instance();
    ConvexDecomposer dec(spec);
    const auto vertices = enumerate_actions(spec, 100);
    Rng rng(2025);
    for (int trial = 0; trial < 300; ++trial) {
        const FractionalPoint x = random_hull_point(vertices, rng, 6);
        const Decomposition d = dec.decompose(x);
        CHECK(d.atoms.size() <= 7);  // d + 1
        double wsum = 0.0;
        std::vector<double> recon(6, 0.0);
        for (const auto& atom : d.atoms) {
            CHECK(atom.weight > 0.0);
            CHECK(validate_action(spec, atom.action));
            wsum += atom.weight;
            for (int i = 0; i < 6; ++i)
                recon[static_cast<std::size_t>(i)] += atom.weight * atom.action[i];
        }
        CHECK(std::abs(wsum - 1.0) <= 1e-12);
        for (int i = 0; i < 6; ++i)
            CHECK(std::abs(recon[static_cast<std::size_t>(i)] - x.x[static_cast<std::size_t>(i)]) <=
                  1e-9);
    }
}

TEST_CASE("explicit segment points decompose into endpoint mixtures") {
    ConvexDecomposer dec(segment());
    FractionalPoint x;
    x.x = {0.3, 0.7};
    const Decomposition d = dec.decompose(x);
    REQUIRE(d.atoms.size() == 2);
    double w10 = 0.0, w01 = 0.0;
    for (const auto& atom : d.atoms) {
        if (atom.action == act({1, 0})) w10 = atom.weight;
        if (atom.action == act({0, 1})) w01 = atom.weight;
    }
    CHECK(w10 == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(w01 == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("decompose rejects points off the hull equalities") {
    ConvexDecomposer dec(InstanceSpec::transport({1, 1}, {1, 1}));
    FractionalPoint bad;
    bad.x = {0.9, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(dec.decompose(bad), std::invalid_argument);
}

TEST_CASE("sample_action follows the atom weights") {
    Decomposition dec;
    dec.atoms.push_back({act({1, 0}), 0.5});
    dec.atoms.push_back({act({0, 1}), 0.5});
    Rng rng(123);
    const int N = 100000;
    int first = 0;
    std::vector<double> mean(2, 0.0);
    for (int i = 0; i < N; ++i) {
        const ActionVector a = sample_action(dec, rng);
        if (a == dec.atoms[0].action) ++first;
        for (int j = 0; j < 2; ++j) mean[static_cast<std::size_t>(j)] += a[j];
    }
    CHECK(std::abs(double(first) / N - 0.5) <= 0.005);
    // per-coordinate: mean of a_i should be x_i = 0.5, sd 0.5
    for (int j = 0; j < 2; ++j)
        CHECK(std::abs(mean[static_cast<std::size_t>(j)] / N - 0.5) <=
              3.0 * 0.5 / std::sqrt(double(N)));

    Decomposition single;
    single.atoms.push_back({act({2, 0}), 1.0});
    for (int i = 0; i < 10; ++i) CHECK(sample_action(single, rng) == act({2, 0}));
}

TEST_CASE("loss estimates are unbiased for the conditional mean given x") {
    const InstanceSpec spec = InstanceSpec::transport({1, 1}, {1, 1});
    ConvexDecomposer decomposer(spec);
    FractionalPoint x;
    x.x = {0.5, 0.5, 0.5, 0.5};
    const Decomposition dec = decomposer.decompose(x);
    const std::vector<double> means = {0.3, 0.7, 0.6, 0.4};
    std::vector<ArmDistribution> dists;
    for (double m : means) dists.push_back(ArmDistribution::uniform(m - 0.1, m + 0.1));
    const std::vector<double> q = {0.5, 0.5, 0.5, 0.5};

    Rng rng(314);
    const int N = 20000;
    std::vector<double> sum(4, 0.0), sumsq(4, 0.0);
    for (int n = 0; n < N; ++n) {
        const ActionVector a = sample_action(dec, rng);
        LossTable table;
        table.rows.resize(4);
        for (int i = 0; i < 4; ++i)
            table.rows[static_cast<std::size_t>(i)].push_back(
                dists[static_cast<std::size_t>(i)].sample(rng));
        const Observation obs = observe(table, a, 1);
        const LossEstimate est = estimate_loss(x, a, obs, q);
        for (int i = 0; i < 4; ++i) {
            sum[static_cast<std::size_t>(i)] += est.ell_hat[static_cast<std::size_t>(i)];
            sumsq[static_cast<std::size_t>(i)] +=
                est.ell_hat[static_cast<std::size_t>(i)] * est.ell_hat[static_cast<std::size_t>(i)];
        }
    }
    for (int i = 0; i < 4; ++i) {
        const double mean = sum[static_cast<std::size_t>(i)] / N;
        const double var =
            std::max(0.0, sumsq[static_cast<std::size_t>(i)] / N - mean * mean);
        const double bound = 4.0 * std::sqrt(var / N);
        CHECK(std::abs(mean - means[static_cast<std::size_t>(i)]) <= bound);
    }
}

TEST_CASE("round one of a symmetric explicit instance plays the midpoint") {
    GenLbinfv learner(segment(), 100, Predictor::Mode::LeastSquares, 5);
    LossTable table;
    table.rows = {{0.2}, {0.8}};
    const GenLbinfvRound rec = learner.play_round({table, table}, 1);
    CHECK(rec.x.x[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(rec.x.x[1] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("invariants hold every round of a short experiment run") {
    const InstanceSpec spec = experiment_instance();
    for (const auto mode : {Predictor::Mode::LeastSquares, Predictor::Mode::GradientDescent}) {
        std::vector<ArmDistribution> dists;
        for (int i = 0; i < 6; ++i) dists.push_back(ArmDistribution::uniform(0.05, 0.15 + 0.1 * i));
        Environment env(spec, dists, CorruptionSchedule::identity(), 21);
        GenLbinfv learner(spec, 300, mode, 21);
        std::vector<double> prev_beta(6, 0.0);
        for (int i = 0; i < 6; ++i) {
            prev_beta[static_cast<std::size_t>(i)] = learner.reg().beta(i);
            CHECK(prev_beta[static_cast<std::size_t>(i)] ==
                  doctest::Approx(1.5).epsilon(1e-12));  // 1 + eps/n at t = 1
        }
        for (int t = 1; t <= 300; ++t) {
            const GenLbinfvRound rec = learner.run_round(env, t);
            CHECK(validate_action(spec, rec.action));
            for (int i = 0; i < 6; ++i) {
                CHECK(rec.alpha[static_cast<std::size_t>(i)] >= 0.0);
                CHECK(rec.alpha[static_cast<std::size_t>(i)] <= 1.0);
                CHECK(rec.x.x[static_cast<std::size_t>(i)] > 0.0);
                CHECK(rec.x.x[static_cast<std::size_t>(i)] < spec.cap(i));
                const double b = learner.reg().beta(i);
                CHECK(b >= prev_beta[static_cast<std::size_t>(i)]);
                prev_beta[static_cast<std::size_t>(i)] = b;
                CHECK(learner.predictor().q()[static_cast<std::size_t>(i)] >= 0.0);
                CHECK(learner.predictor().q()[static_cast<std::size_t>(i)] <= 1.0);
            }
        }
    }
}

TEST_CASE("knapsack instances are rejected up front") {
    CHECK_THROWS_AS(GenLbinfv(InstanceSpec::knapsack({2, 3}, 5), 100,
                              Predictor::Mode::LeastSquares, 1),
                    std::invalid_argument);
}

TEST_CASE("horizon one degenerates gracefully (gamma = 0)") {
    GenLbinfv learner(segment(), 1, Predictor::Mode::LeastSquares, 2);
    LossTable table;
    table.rows = {{0.4}, {0.6}};
    const GenLbinfvRound rec = learner.play_round({table, table}, 1);
    CHECK(validate_action(segment(), rec.action));
}

TEST_CASE("free-function wrappers agree with the class route") {
    const InstanceSpec spec = segment();
    RegState reg(spec, kGammaT4);
    const FractionalPoint x = solve_oftrl(spec, {0.0, 0.0}, {0.5, 0.5}, reg);
    CHECK(x.x[0] == doctest::Approx(0.5).epsilon(1e-9));
    const Decomposition d = decompose(spec, x);
    CHECK(d.atoms.size() == 2);
}
