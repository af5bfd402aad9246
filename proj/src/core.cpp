#include "mpcsb/core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mpcsb {

long long ActionVector::l1() const {
    long long total = 0;
    for (int c : counts) total += c;
    return total;
}

bool lex_less(const ActionVector& a, const ActionVector& b) {
    return std::lexicographical_compare(a.counts.begin(), a.counts.end(),
                                        b.counts.begin(), b.counts.end());
}

std::string to_string(const ActionVector& a) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        if (i) out << ',';
        out << a.counts[i];
    }
    out << ')';
    return out.str();
}

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

InstanceSpec InstanceSpec::transport(std::vector<int> supplies, std::vector<int> demands) {
    require(!supplies.empty() && !demands.empty(), "transport: empty marginals");
    long long total_u = 0, total_v = 0;
    for (int u : supplies) {
        require(u >= 1, "transport: supplies must be positive integers");
        total_u += u;
    }
    for (int v : demands) {
        require(v >= 1, "transport: demands must be positive integers");
        total_v += v;
    }
    require(total_u == total_v, "transport: unbalanced marginals (sum u != sum v)");

    InstanceSpec spec;
    const int n_dem = static_cast<int>(demands.size());
    for (int x = 0; x < static_cast<int>(supplies.size()); ++x) {
        for (int y = 0; y < n_dem; ++y) {
            ArmSpec arm;
            arm.id = x * n_dem + y;
            arm.cap = std::min(supplies[static_cast<std::size_t>(x)],
                               demands[static_cast<std::size_t>(y)]);
            spec.arms_.push_back(arm);
        }
    }
    spec.kind_ = TransportKind{std::move(supplies), std::move(demands)};
    return spec;
}

InstanceSpec InstanceSpec::knapsack(std::vector<int> weights, int capacity) {
    require(!weights.empty(), "knapsack: no items");
    require(capacity >= 1, "knapsack: capacity must be positive");
    InstanceSpec spec;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
        const int w = weights[static_cast<std::size_t>(i)];
        require(w >= 1, "knapsack: weights must be positive integers");
        require(w <= capacity, "knapsack: item heavier than capacity (arm never playable)");
        spec.arms_.push_back(ArmSpec{i, capacity / w});
    }
    spec.kind_ = KnapsackKind{std::move(weights), capacity};
    return spec;
}

InstanceSpec InstanceSpec::explicit_set(std::vector<ActionVector> actions) {
    require(!actions.empty(), "explicit: action list is empty");
    const std::size_t d = actions.front().counts.size();
    require(d > 0, "explicit: zero-dimensional actions");
    std::vector<int> caps(d, 0);
    for (const ActionVector& a : actions) {
        require(a.counts.size() == d, "explicit: inconsistent action lengths");
        for (std::size_t i = 0; i < d; ++i) {
            require(a.counts[i] >= 0, "explicit: negative count");
            caps[i] = std::max(caps[i], a.counts[i]);
        }
    }
    for (std::size_t i = 0; i < d; ++i)
        require(caps[i] >= 1, "explicit: some arm is never playable");

    InstanceSpec spec;
    for (int i = 0; i < static_cast<int>(d); ++i)
        spec.arms_.push_back(ArmSpec{i, caps[static_cast<std::size_t>(i)]});
    spec.kind_ = ExplicitKind{std::move(actions)};
    return spec;
}

std::string InstanceSpec::kind_name() const {
    if (as_transport()) return "transport";
    if (as_knapsack()) return "knapsack";
    return "explicit";
}

bool validate_action(const InstanceSpec& spec, const ActionVector& a) {
    if (a.size() != spec.num_arms())
        throw std::invalid_argument("validate_action: action length does not match arm count");
    for (int i = 0; i < a.size(); ++i)
        if (a[i] < 0) return false;

    if (const TransportKind* t = spec.as_transport()) {
        const int n_dem = static_cast<int>(t->demands.size());
        for (int x = 0; x < static_cast<int>(t->supplies.size()); ++x) {
            long long row = 0;
            for (int y = 0; y < n_dem; ++y) row += a[x * n_dem + y];
            if (row != t->supplies[static_cast<std::size_t>(x)]) return false;
        }
        for (int y = 0; y < n_dem; ++y) {
            long long col = 0;
            for (int x = 0; x < static_cast<int>(t->supplies.size()); ++x)
                col += a[x * n_dem + y];
            if (col != t->demands[static_cast<std::size_t>(y)]) return false;
        }
        return true;
    }
    if (const KnapsackKind* k = spec.as_knapsack()) {
        long long weight = 0;
        for (int i = 0; i < a.size(); ++i)
            weight += static_cast<long long>(a[i]) * k->weights[static_cast<std::size_t>(i)];
        return weight <= k->capacity;
    }
    const ExplicitKind* e = spec.as_explicit();
    return std::find(e->actions.begin(), e->actions.end(), a) != e->actions.end();
}

double linear_loss(const ActionVector& a, const LossTable& table) {
    if (a.counts.size() != table.rows.size())
        throw std::invalid_argument("linear_loss: action/table arm counts differ");
    double total = 0.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const int plays = a.counts[i];
        if (plays > static_cast<int>(table.rows[i].size()))
            throw std::invalid_argument("linear_loss: action exceeds available loss slots");
        for (int j = 0; j < plays; ++j) total += table.rows[i][static_cast<std::size_t>(j)];
    }
    return total;
}

std::vector<int> support(const ActionVector& a) {
    std::vector<int> out;
    for (int i = 0; i < a.size(); ++i)
        if (a[i] >= 1) out.push_back(i);
    return out;
}

}  // namespace mpcsb
