#include "mpcsb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mpcsb/baselines.hpp"
#include "mpcsb/gencts.hpp"
#include "mpcsb/oracles.hpp"

namespace mpcsb {

namespace {

constexpr std::uint64_t kCostStream = 0xc057ULL;
constexpr std::size_t kEnumerationLimit = 100000;

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

struct RawEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

[[noreturn]] void config_error(int line, const std::string& msg) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

std::vector<RawEntry> tokenize(const std::string& text) {
    std::vector<RawEntry> entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) config_error(line_no, "expected 'key = value'");
        RawEntry e;
        e.section = section;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        e.line = line_no;
        if (e.key.empty()) config_error(line_no, "empty key");
        entries.push_back(std::move(e));
    }
    return entries;
}

long long to_int(const RawEntry& e) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        config_error(e.line, "'" + e.key + "' expects an integer, got '" + e.value + "'");
    }
}

double to_double(const RawEntry& e) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        config_error(e.line, "'" + e.key + "' expects a number, got '" + e.value + "'");
    }
}

std::vector<int> to_int_list(const RawEntry& e) {
    std::istringstream in(e.value);
    std::vector<int> out;
    long long v;
    while (in >> v) out.push_back(static_cast<int>(v));
    if (out.empty() || !in.eof())
        config_error(e.line, "'" + e.key + "' expects a space-separated integer list");
    return out;
}

ArmDistribution to_distribution(const RawEntry& e) {
    std::istringstream in(e.value);
    std::string family;
    in >> family;
    try {
        if (family == "uniform") {
            double lo, hi;
            if (!(in >> lo >> hi)) throw std::invalid_argument("uniform needs two bounds");
            return ArmDistribution::uniform(lo, hi);
        }
        if (family == "bernoulli") {
            double p;
            if (!(in >> p)) throw std::invalid_argument("bernoulli needs a probability");
            return ArmDistribution::bernoulli(p);
        }
        if (family == "constant") {
            double c;
            if (!(in >> c)) throw std::invalid_argument("constant needs a value");
            return ArmDistribution::constant(c);
        }
        throw std::invalid_argument("unknown family '" + family + "'");
    } catch (const std::exception& ex) {
        config_error(e.line, std::string("bad distribution: ") + ex.what());
    }
}

InstanceSpec parse_instance(const std::vector<RawEntry>& entries) {
    std::string kind;
    std::vector<int> supplies, demands, weights;
    int capacity = -1;
    std::vector<ActionVector> actions;
    int kind_line = 0;
    for (const RawEntry& e : entries) {
        if (e.section != "instance") continue;
        if (e.key == "kind") {
            kind = e.value;
            kind_line = e.line;
        } else if (e.key == "supplies") {
            supplies = to_int_list(e);
        } else if (e.key == "demands") {
            demands = to_int_list(e);
        } else if (e.key == "weights") {
            weights = to_int_list(e);
        } else if (e.key == "capacity") {
            capacity = static_cast<int>(to_int(e));
        } else if (e.key == "action") {
            actions.emplace_back(to_int_list(e));
        } else {
            config_error(e.line, "unknown instance key '" + e.key + "'");
        }
    }
    if (kind == "transport") {
        if (supplies.empty() || demands.empty())
            config_error(kind_line, "transport needs 'supplies' and 'demands'");
        return InstanceSpec::transport(supplies, demands);
    }
    if (kind == "knapsack") {
        if (weights.empty() || capacity < 0)
            config_error(kind_line, "knapsack needs 'weights' and 'capacity'");
        return InstanceSpec::knapsack(weights, capacity);
    }
    if (kind == "explicit") {
        if (actions.empty()) config_error(kind_line, "explicit needs at least one 'action'");
        return InstanceSpec::explicit_set(actions);
    }
    throw std::runtime_error("config: missing or unknown [instance] kind '" + kind + "'");
}

EnvironmentConfig parse_environment(const std::vector<RawEntry>& entries, int num_arms) {
    EnvironmentConfig env;
    bool mode_set = false;
    std::vector<std::optional<ArmDistribution>> arm_dists(
        static_cast<std::size_t>(num_arms));
    env.corrupt_dists.assign(static_cast<std::size_t>(num_arms), std::nullopt);
    for (const RawEntry& e : entries) {
        if (e.section != "environment") continue;
        if (e.key == "losses") {
            mode_set = true;
            if (e.value == "explicit")
                env.mode = EnvironmentConfig::Mode::Explicit;
            else if (e.value == "cost_scaled")
                env.mode = EnvironmentConfig::Mode::CostScaled;
            else
                config_error(e.line, "losses must be 'explicit' or 'cost_scaled'");
        } else if (e.key == "cost_low") {
            env.cost_low = to_double(e);
        } else if (e.key == "cost_high") {
            env.cost_high = to_double(e);
        } else if (e.key == "cost_draw") {
            if (e.value == "shared")
                env.cost_draw = EnvironmentConfig::CostDraw::Shared;
            else if (e.value == "per_trial")
                env.cost_draw = EnvironmentConfig::CostDraw::PerTrial;
            else
                config_error(e.line, "cost_draw must be 'shared' or 'per_trial'");
        } else if (e.key == "corrupt_after") {
            env.corrupt_after = static_cast<int>(to_int(e));
            if (env.corrupt_after < 0) config_error(e.line, "corrupt_after must be >= 0");
        } else if (e.key.rfind("corrupt arm ", 0) == 0) {
            const int arm = std::stoi(e.key.substr(12));
            if (arm < 0 || arm >= num_arms) config_error(e.line, "corrupt arm index out of range");
            env.corrupt_dists[static_cast<std::size_t>(arm)] = to_distribution(e);
        } else if (e.key.rfind("arm ", 0) == 0) {
            const int arm = std::stoi(e.key.substr(4));
            if (arm < 0 || arm >= num_arms) config_error(e.line, "arm index out of range");
            arm_dists[static_cast<std::size_t>(arm)] = to_distribution(e);
        } else {
            config_error(e.line, "unknown environment key '" + e.key + "'");
        }
    }
    if (!mode_set) throw std::runtime_error("config: [environment] must set 'losses'");
    bool any_arm = false, any_corrupt = false;
    for (const auto& a : arm_dists) any_arm = any_arm || a.has_value();
    for (const auto& c : env.corrupt_dists) any_corrupt = any_corrupt || c.has_value();
    if (env.mode == EnvironmentConfig::Mode::Explicit) {
        for (int i = 0; i < num_arms; ++i)
            if (!arm_dists[static_cast<std::size_t>(i)])
                throw std::runtime_error("config: [environment] missing 'arm " +
                                         std::to_string(i) + "'");
        for (int i = 0; i < num_arms; ++i)
            env.arm_dists.push_back(*arm_dists[static_cast<std::size_t>(i)]);
        if (any_corrupt && env.corrupt_after == 0)
            throw std::runtime_error("config: 'corrupt arm' entries need 'corrupt_after'");
        if (env.corrupt_after > 0 && !any_corrupt)
            throw std::runtime_error("config: 'corrupt_after' needs 'corrupt arm' entries");
    } else {
        if (any_arm || any_corrupt)
            throw std::runtime_error(
                "config: 'arm'/'corrupt arm' entries belong to losses = explicit");
        if (!(0.0 <= env.cost_low && env.cost_low <= env.cost_high && env.cost_high <= 0.5))
            throw std::runtime_error(
                "config: cost_scaled needs 0 <= cost_low <= cost_high <= 0.5");
    }
    return env;
}

AlgorithmConfig parse_algorithm(const std::vector<RawEntry>& entries) {
    AlgorithmConfig alg;
    bool name_set = false;
    for (const RawEntry& e : entries) {
        if (e.section != "algorithm") continue;
        if (e.key == "name") {
            name_set = true;
            if (e.value == "gencts")
                alg.name = AlgorithmConfig::Name::GenCts;
            else if (e.value == "genlbinfv")
                alg.name = AlgorithmConfig::Name::GenLbinfv;
            else if (e.value == "dupcts")
                alg.name = AlgorithmConfig::Name::DupCts;
            else if (e.value == "duplbinfv")
                alg.name = AlgorithmConfig::Name::DupLbinfv;
            else
                config_error(e.line, "unknown algorithm '" + e.value + "'");
        } else if (e.key == "predictor") {
            if (e.value == "ls")
                alg.predictor = Predictor::Mode::LeastSquares;
            else if (e.value == "gd")
                alg.predictor = Predictor::Mode::GradientDescent;
            else
                config_error(e.line, "predictor must be 'ls' or 'gd'");
        } else if (e.key == "eta") {
            alg.eta = to_double(e);
        } else if (e.key == "epsilon") {
            alg.epsilon_frac = to_double(e);
        } else {
            config_error(e.line, "unknown algorithm key '" + e.key + "'");
        }
    }
    if (!name_set) throw std::runtime_error("config: [algorithm] must set 'name'");
    return alg;
}

}  // namespace

std::string algorithm_name(AlgorithmConfig::Name name) {
    switch (name) {
        case AlgorithmConfig::Name::GenCts: return "gencts";
        case AlgorithmConfig::Name::GenLbinfv: return "genlbinfv";
        case AlgorithmConfig::Name::DupCts: return "dupcts";
        case AlgorithmConfig::Name::DupLbinfv: return "duplbinfv";
    }
    return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
    const std::vector<RawEntry> entries = tokenize(text);
    ExperimentConfig cfg;
    for (const RawEntry& e : entries) {
        if (!e.section.empty()) continue;
        if (e.key == "horizon")
            cfg.horizon = static_cast<int>(to_int(e));
        else if (e.key == "trials")
            cfg.trials = static_cast<int>(to_int(e));
        else if (e.key == "seed")
            cfg.base_seed = static_cast<std::uint64_t>(to_int(e));
        else if (e.key == "out")
            cfg.out_dir = e.value;
        else if (e.key == "threads")
            cfg.threads = static_cast<int>(to_int(e));
        else
            config_error(e.line, "unknown top-level key '" + e.key + "'");
    }
    if (cfg.horizon < 1) throw std::runtime_error("config: horizon must be >= 1");
    if (cfg.trials < 1) throw std::runtime_error("config: trials must be >= 1");
    cfg.instance = parse_instance(entries);
    cfg.environment = parse_environment(entries, cfg.instance.num_arms());
    cfg.algorithm = parse_algorithm(entries);
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string instance_to_config(const InstanceSpec& spec) {
    std::ostringstream out;
    out << "[instance]\n";
    if (const TransportKind* t = spec.as_transport()) {
        out << "kind = transport\nsupplies =";
        for (int u : t->supplies) out << ' ' << u;
        out << "\ndemands =";
        for (int v : t->demands) out << ' ' << v;
        out << '\n';
    } else if (const KnapsackKind* k = spec.as_knapsack()) {
        out << "kind = knapsack\nweights =";
        for (int w : k->weights) out << ' ' << w;
        out << "\ncapacity = " << k->capacity << '\n';
    } else {
        out << "kind = explicit\n";
        for (const ActionVector& a : spec.as_explicit()->actions) {
            out << "action =";
            for (int c : a.counts) out << ' ' << c;
            out << '\n';
        }
    }
    return out.str();
}

Environment make_trial_environment(const ExperimentConfig& cfg, int trial_index) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(trial_index);
    const int d = cfg.instance.num_arms();
    std::vector<ArmDistribution> dists;
    CorruptionSchedule schedule = CorruptionSchedule::identity();

    if (cfg.environment.mode == EnvironmentConfig::Mode::CostScaled) {
        const std::uint64_t cost_seed =
            cfg.environment.cost_draw == EnvironmentConfig::CostDraw::Shared ? cfg.base_seed
                                                                             : seed;
        Rng cost_rng(cost_seed, kCostStream);
        std::vector<double> costs(static_cast<std::size_t>(d));
        for (double& c : costs) c = cost_rng.uniform(cfg.environment.cost_low,
                                                     cfg.environment.cost_high);
        for (int i = 0; i < d; ++i)
            dists.push_back(ArmDistribution::uniform(0.0, 2.0 * costs[static_cast<std::size_t>(i)]));
        if (cfg.environment.corrupt_after > 0) {
            std::vector<ArmDistribution> repl;
            for (int i = 0; i < d; ++i)
                repl.push_back(ArmDistribution::uniform(
                    1.0 - 2.0 * costs[static_cast<std::size_t>(i)], 1.0));
            schedule = CorruptionSchedule::switch_after(cfg.environment.corrupt_after,
                                                        std::move(repl));
        }
    } else {
        dists = cfg.environment.arm_dists;
        if (cfg.environment.corrupt_after > 0) {
            std::vector<ArmDistribution> repl;
            for (int i = 0; i < d; ++i) {
                const auto& c = cfg.environment.corrupt_dists[static_cast<std::size_t>(i)];
                repl.push_back(c ? *c : dists[static_cast<std::size_t>(i)]);
            }
            schedule = CorruptionSchedule::switch_after(cfg.environment.corrupt_after,
                                                        std::move(repl));
        }
    }
    return Environment(cfg.instance, std::move(dists), std::move(schedule), seed);
}

ActionVector compute_optimal_action(const InstanceSpec& spec, const std::vector<double>& means) {
    ActionVector best = argmin_action(spec, means);
    const auto mean_cost = [&](const ActionVector& a) {
        double s = 0.0;
        for (std::size_t i = 0; i < means.size(); ++i) s += a.counts[i] * means[i];
        return s;
    };
    try {
        const auto all = enumerate_actions(spec, kEnumerationLimit);
        double enum_best = std::numeric_limits<double>::infinity();
        for (const ActionVector& a : all) enum_best = std::min(enum_best, mean_cost(a));
        if (mean_cost(best) != enum_best)
            throw std::logic_error("compute_optimal_action: oracle disagrees with enumeration");
    } catch (const std::runtime_error&) {
        // action set too large to enumerate; trust the oracle
    }
    return best;
}

double pseudo_regret_increment(const std::vector<double>& means, const ActionVector& a,
                               const ActionVector& astar) {
    if (a.counts.size() != means.size() || astar.counts.size() != means.size())
        throw std::invalid_argument("pseudo_regret_increment: length mismatch");
    double inc = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) inc += (a.counts[i] - astar.counts[i]) * means[i];
    return inc;
}

namespace {

struct LearnerHandle {
    std::function<ActionVector(const RoundLosses&, int)> play;
};

LearnerHandle make_learner(const ExperimentConfig& cfg, std::uint64_t seed) {
    const AlgorithmConfig& alg = cfg.algorithm;
    switch (alg.name) {
        case AlgorithmConfig::Name::GenCts: {
            auto learner = std::make_shared<GenCts>(cfg.instance, seed);
            return {[learner](const RoundLosses& losses, int t) {
                return learner->play_round(losses, t).action;
            }};
        }
        case AlgorithmConfig::Name::GenLbinfv: {
            auto learner = std::make_shared<GenLbinfv>(cfg.instance, cfg.horizon, alg.predictor,
                                                       seed, alg.eta, alg.epsilon_frac);
            return {[learner](const RoundLosses& losses, int t) {
                return learner->play_round(losses, t).action;
            }};
        }
        case AlgorithmConfig::Name::DupCts: {
            auto learner = std::make_shared<DupCts>(duplicate_instance(cfg.instance), seed);
            return {[learner](const RoundLosses& losses, int t) {
                return learner->play_round(losses, t).action;
            }};
        }
        case AlgorithmConfig::Name::DupLbinfv: {
            auto learner = std::make_shared<DupLbinfv>(duplicate_instance(cfg.instance),
                                                       cfg.horizon, alg.predictor, seed, alg.eta,
                                                       alg.epsilon_frac);
            return {[learner](const RoundLosses& losses, int t) {
                return learner->play_round(losses, t).action;
            }};
        }
    }
    throw std::logic_error("make_learner: unreachable");
}

void run_one_trial(const ExperimentConfig& cfg, int trial, std::vector<double>& pseudo_row,
                   std::vector<double>* realized_row, TrialDiagnostics& diag) {
    const int T = cfg.horizon;
    Environment env = make_trial_environment(cfg, trial);
    const InstanceSpec& spec = cfg.instance;
    const int d = spec.num_arms();

    diag.seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
    diag.variances = env.clean_variances();
    diag.horizon_means.assign(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int t = 1; t <= T; ++t) acc += env.mean_at(t, i);
        diag.horizon_means[static_cast<std::size_t>(i)] = acc / T;
    }
    diag.optimal_action = compute_optimal_action(spec, diag.horizon_means);

    // stationary per-arm gaps exist only under the identity schedule, and
    // only when the action set is small enough to enumerate
    diag.gaps_available = false;
    if (env.schedule().is_identity()) {
        try {
            const auto all = enumerate_actions(spec, kEnumerationLimit);
            diag.gaps.assign(static_cast<std::size_t>(d),
                             std::numeric_limits<double>::infinity());
            for (const ActionVector& a : all) {
                const double gap =
                    pseudo_regret_increment(diag.horizon_means, a, diag.optimal_action);
                for (int i = 0; i < d; ++i)
                    if (a[i] >= 1)
                        diag.gaps[static_cast<std::size_t>(i)] =
                            std::min(diag.gaps[static_cast<std::size_t>(i)], gap);
            }
            diag.gaps_available = true;
        } catch (const std::runtime_error&) {
            diag.gaps.clear();
        }
    }

    LearnerHandle learner = make_learner(cfg, diag.seed);
    int round = 0;
    try {
        double cum_pseudo = 0.0;
        double cum_realized = 0.0;
        for (int t = 1; t <= T; ++t) {
            round = t;
            const RoundLosses losses = env.draw_round(t);
            const ActionVector action = learner.play(losses, t);
            double inc = 0.0;
            for (int i = 0; i < d; ++i)
                inc += (action[i] - diag.optimal_action[i]) * env.mean_at(t, i);
            cum_pseudo += inc;
            pseudo_row[static_cast<std::size_t>(t - 1)] = cum_pseudo;
            if (realized_row != nullptr) {
                cum_realized += linear_loss(action, losses.corrupted) -
                                linear_loss(diag.optimal_action, losses.corrupted);
                (*realized_row)[static_cast<std::size_t>(t - 1)] = cum_realized;
            }
        }
        diag.final_pseudo_regret = cum_pseudo;
        diag.final_realized_regret = realized_row ? cum_realized : 0.0;
    } catch (const std::exception& ex) {
        throw std::runtime_error("trial " + std::to_string(trial) + " failed at round " +
                                 std::to_string(round) + ": " + ex.what());
    }
    diag.corruption_level = env.corruption_level();
}

std::vector<double> column_mean(const std::vector<std::vector<double>>& rows, int T) {
    std::vector<double> mean(static_cast<std::size_t>(T), 0.0);
    for (const auto& row : rows)
        for (int t = 0; t < T; ++t) mean[static_cast<std::size_t>(t)] += row[static_cast<std::size_t>(t)];
    for (double& v : mean) v /= static_cast<double>(rows.size());
    return mean;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.horizon < 1) throw std::invalid_argument("run_experiment: horizon must be >= 1");
    if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
    const auto t_begin = std::chrono::steady_clock::now();

    const int T = cfg.horizon;
    const bool corrupted = cfg.environment.corrupt_after > 0;

    ExperimentResult result;
    result.pseudo.per_trial.assign(static_cast<std::size_t>(cfg.trials),
                                   std::vector<double>(static_cast<std::size_t>(T), 0.0));
    if (corrupted)
        result.realized = RegretCurve{
            std::vector<std::vector<double>>(static_cast<std::size_t>(cfg.trials),
                                             std::vector<double>(static_cast<std::size_t>(T), 0.0)),
            {}};
    result.trials.resize(static_cast<std::size_t>(cfg.trials));

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.trials));
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int k = next.fetch_add(1);
            if (k >= cfg.trials) return;
            try {
                run_one_trial(cfg, k, result.pseudo.per_trial[static_cast<std::size_t>(k)],
                              corrupted ? &result.realized->per_trial[static_cast<std::size_t>(k)]
                                        : nullptr,
                              result.trials[static_cast<std::size_t>(k)]);
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        }
    };

    int workers = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, cfg.trials));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    result.pseudo.mean = column_mean(result.pseudo.per_trial, T);
    if (corrupted) result.realized->mean = column_mean(result.realized->per_trial, T);
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return result;
}

namespace {

void write_curve_csv(const std::filesystem::path& path, const RegretCurve& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "round";
    for (std::size_t k = 0; k < curve.per_trial.size(); ++k) out << ",trial_" << k;
    out << ",mean\n";
    const std::size_t T = curve.mean.size();
    for (std::size_t t = 0; t < T; ++t) {
        out << (t + 1);
        for (const auto& row : curve.per_trial) out << ',' << fmt_double(row[t]);
        out << ',' << fmt_double(curve.mean[t]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json instance_json(const InstanceSpec& spec) {
    nlohmann::json j;
    j["kind"] = spec.kind_name();
    if (const TransportKind* t = spec.as_transport()) {
        j["supplies"] = t->supplies;
        j["demands"] = t->demands;
    } else if (const KnapsackKind* k = spec.as_knapsack()) {
        j["weights"] = k->weights;
        j["capacity"] = k->capacity;
    } else {
        nlohmann::json acts = nlohmann::json::array();
        for (const ActionVector& a : spec.as_explicit()->actions) acts.push_back(a.counts);
        j["actions"] = acts;
    }
    nlohmann::json caps = nlohmann::json::array();
    for (const ArmSpec& arm : spec.arms()) caps.push_back(arm.cap);
    j["caps"] = caps;
    return j;
}

}  // namespace

void emit(const ExperimentResult& result, const ExperimentConfig& cfg,
          const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " +
                                     ec.message());

    write_curve_csv(fs::path(out_dir) / "regret.csv", result.pseudo);
    if (result.realized)
        write_curve_csv(fs::path(out_dir) / "regret_realized.csv", *result.realized);

    nlohmann::json j;
    j["config"]["horizon"] = cfg.horizon;
    j["config"]["trials"] = cfg.trials;
    j["config"]["seed"] = cfg.base_seed;
    j["config"]["instance"] = instance_json(cfg.instance);
    j["config"]["algorithm"]["name"] = algorithm_name(cfg.algorithm.name);
    j["config"]["algorithm"]["predictor"] =
        cfg.algorithm.predictor == Predictor::Mode::LeastSquares ? "ls" : "gd";
    j["config"]["algorithm"]["eta"] = cfg.algorithm.eta;
    j["config"]["algorithm"]["epsilon"] = cfg.algorithm.epsilon_frac;
    j["config"]["environment"]["mode"] =
        cfg.environment.mode == EnvironmentConfig::Mode::Explicit ? "explicit" : "cost_scaled";
    j["config"]["environment"]["corrupt_after"] = cfg.environment.corrupt_after;
    if (cfg.environment.mode == EnvironmentConfig::Mode::CostScaled) {
        j["config"]["environment"]["cost_low"] = cfg.environment.cost_low;
        j["config"]["environment"]["cost_high"] = cfg.environment.cost_high;
        j["config"]["environment"]["cost_draw"] =
            cfg.environment.cost_draw == EnvironmentConfig::CostDraw::Shared ? "shared"
                                                                             : "per_trial";
    } else {
        nlohmann::json arms = nlohmann::json::array();
        for (const ArmDistribution& d : cfg.environment.arm_dists) arms.push_back(d.describe());
        j["config"]["environment"]["arms"] = arms;
    }

    nlohmann::json trials = nlohmann::json::array();
    for (std::size_t k = 0; k < result.trials.size(); ++k) {
        const TrialDiagnostics& d = result.trials[k];
        nlohmann::json tj;
        tj["trial"] = k;
        tj["seed"] = d.seed;
        tj["optimal_action"] = d.optimal_action.counts;
        tj["horizon_means"] = d.horizon_means;
        tj["variances"] = d.variances;
        if (d.gaps_available)
            tj["gaps"] = d.gaps;
        else
            tj["gaps"] = nullptr;  // enumeration infeasible or no stationary gaps
        tj["corruption_level"] = d.corruption_level;
        tj["final_pseudo_regret"] = d.final_pseudo_regret;
        if (result.realized) tj["final_realized_regret"] = d.final_realized_regret;
        trials.push_back(std::move(tj));
    }
    j["trials"] = std::move(trials);

    double mean_final = 0.0;
    for (const TrialDiagnostics& d : result.trials) mean_final += d.final_pseudo_regret;
    mean_final /= static_cast<double>(result.trials.size());
    j["aggregate"]["mean_final_pseudo_regret"] = mean_final;
    j["aggregate"]["seconds"] = result.seconds;

    std::ofstream out(fs::path(out_dir) / "summary.json");
    if (!out) throw std::runtime_error("cannot write summary.json in " + out_dir);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for summary.json in " + out_dir);
}

}  // namespace mpcsb
