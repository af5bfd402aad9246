#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpcsb/harness.hpp"
#include "mpcsb/oracles.hpp"
#include "mpcsb/rng.hpp"

namespace {

int cmd_run(const std::string& config_path, long long seed_override, int trials_override,
            const std::string& out_override) {
    mpcsb::ExperimentConfig cfg = mpcsb::parse_config_file(config_path);
    if (seed_override >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed_override);
    if (trials_override > 0) cfg.trials = trials_override;
    if (!out_override.empty()) cfg.out_dir = out_override;

    const mpcsb::ExperimentResult result = mpcsb::run_experiment(cfg);
    mpcsb::emit(result, cfg, cfg.out_dir);

    double mean_final = 0.0;
    for (const auto& d : result.trials) mean_final += d.final_pseudo_regret;
    mean_final /= static_cast<double>(result.trials.size());
    std::printf("%s: %d trials, T=%d, mean final pseudo-regret %.4f (%.2fs)\n",
                mpcsb::algorithm_name(cfg.algorithm.name).c_str(), cfg.trials, cfg.horizon,
                mean_final, result.seconds);
    std::printf("wrote %s/regret.csv and %s/summary.json\n", cfg.out_dir.c_str(),
                cfg.out_dir.c_str());
    return 0;
}

int cmd_enumerate(const std::string& config_path, std::size_t limit) {
    const mpcsb::ExperimentConfig cfg = mpcsb::parse_config_file(config_path);
    const auto actions = mpcsb::enumerate_actions(cfg.instance, limit);
    for (const auto& a : actions) std::cout << mpcsb::to_string(a) << '\n';
    std::cout << actions.size() << " actions\n";
    return 0;
}

int cmd_oracle_check(const std::string& config_path, int count, long long seed) {
    const mpcsb::ExperimentConfig cfg = mpcsb::parse_config_file(config_path);
    const auto actions = mpcsb::enumerate_actions(cfg.instance, 200000);
    mpcsb::Rng rng(seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.base_seed, 0xacceULL);
    const int d = cfg.instance.num_arms();

    int failures = 0;
    for (int trial = 0; trial < count; ++trial) {
        std::vector<double> rho(static_cast<std::size_t>(d));
        for (double& r : rho) r = rng.uniform(-1.0, 1.0);
        const mpcsb::ActionVector choice = mpcsb::argmin_action(cfg.instance, rho);
        const auto cost = [&](const mpcsb::ActionVector& a) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += a[i] * rho[static_cast<std::size_t>(i)];
            return s;
        };
        double best = cost(actions.front());
        for (const auto& a : actions) best = std::min(best, cost(a));
        if (cost(choice) != best) {
            ++failures;
            std::printf("MISMATCH on draw %d: oracle %.17g vs enumeration %.17g\n", trial,
                        cost(choice), best);
        }
    }
    std::printf("oracle-check: %d/%d random cost vectors matched enumeration\n",
                count - failures, count);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-play combinatorial semi-bandit experiments"};
    app.require_subcommand(1);

    std::string config_path;
    long long seed_override = -1;
    int trials_override = 0;
    std::string out_override;

    CLI::App* run = app.add_subcommand("run", "run an experiment config and write CSV/JSON");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--seed", seed_override, "override the base seed");
    run->add_option("--trials", trials_override, "override the trial count");
    run->add_option("--out", out_override, "override the output directory");

    std::size_t enum_limit = 100000;
    CLI::App* enumerate = app.add_subcommand("enumerate", "list the instance's action set");
    enumerate->add_option("config", config_path, "config file")->required();
    enumerate->add_option("--limit", enum_limit, "refuse to enumerate more than this");

    int check_count = 1000;
    long long check_seed = -1;
    CLI::App* check = app.add_subcommand("oracle-check",
                                         "audit argmin oracle against brute-force enumeration");
    check->add_option("config", config_path, "config file")->required();
    check->add_option("--count", check_count, "number of random cost vectors");
    check->add_option("--seed", check_seed, "seed for the random cost vectors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed_override, trials_override, out_override);
        if (enumerate->parsed()) return cmd_enumerate(config_path, enum_limit);
        if (check->parsed()) return cmd_oracle_check(config_path, check_count, check_seed);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
