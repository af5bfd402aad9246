#pragma once

#include <string>
#include <variant>
#include <vector>

namespace mpcsb {

// One base arm: index in [0, d) and per-round sampling cap n_i >= 1.
struct ArmSpec {
    int id = 0;
    int cap = 1;
};

// Nonnegative integer play counts per base arm. Membership in a concrete
// action set is checked by validate_action, not here.
struct ActionVector {
    std::vector<int> counts;

    ActionVector() = default;
    explicit ActionVector(std::vector<int> c) : counts(std::move(c)) {}

    int size() const { return static_cast<int>(counts.size()); }
    int operator[](int i) const { return counts[static_cast<std::size_t>(i)]; }
    int& operator[](int i) { return counts[static_cast<std::size_t>(i)]; }

    // total number of plays, ||a||_1
    long long l1() const;

    bool operator==(const ActionVector&) const = default;
};

bool lex_less(const ActionVector& a, const ActionVector& b);
std::string to_string(const ActionVector& a);

// Action set over a complete bipartite supplier/demander graph: integer
// plans with row sums `supplies` and column sums `demands`. Edge (x, y) is
// arm x * demands.size() + y, cap min(u_x, v_y).
struct TransportKind {
    std::vector<int> supplies;
    std::vector<int> demands;
};

// Unbounded knapsack action set: counts a with a . weights <= capacity.
// Item i caps at floor(capacity / w_i).
struct KnapsackKind {
    std::vector<int> weights;
    int capacity = 0;
};

// Explicitly listed action set, mainly for brute-forceable test instances.
struct ExplicitKind {
    std::vector<ActionVector> actions;
};

// Declarative description of the action set plus the derived arm list.
class InstanceSpec {
  public:
    static InstanceSpec transport(std::vector<int> supplies, std::vector<int> demands);
    static InstanceSpec knapsack(std::vector<int> weights, int capacity);
    static InstanceSpec explicit_set(std::vector<ActionVector> actions);

    int num_arms() const { return static_cast<int>(arms_.size()); }
    const std::vector<ArmSpec>& arms() const { return arms_; }
    int cap(int arm) const { return arms_[static_cast<std::size_t>(arm)].cap; }

    const TransportKind* as_transport() const { return std::get_if<TransportKind>(&kind_); }
    const KnapsackKind* as_knapsack() const { return std::get_if<KnapsackKind>(&kind_); }
    const ExplicitKind* as_explicit() const { return std::get_if<ExplicitKind>(&kind_); }
    std::string kind_name() const;

  private:
    InstanceSpec() = default;
    std::variant<TransportKind, KnapsackKind, ExplicitKind> kind_;
    std::vector<ArmSpec> arms_;
};

// Per-round losses: row i holds exactly n_i entries, each in [0, 1].
struct LossTable {
    std::vector<std::vector<double>> rows;

    bool operator==(const LossTable&) const = default;
};

// Semi-bandit feedback for one round: one (arm, slot, loss) triple per play,
// slots being the first a_i entries of the arm's loss row.
struct Observation {
    struct Entry {
        int arm = 0;
        int slot = 0;
        double loss = 0.0;
    };
    int round = 0;
    std::vector<Entry> entries;
};

// True iff `a` belongs to the instance's action set. Throws on length
// mismatch; a constraint violation just returns false.
bool validate_action(const InstanceSpec& spec, const ActionVector& a);

// sum_i sum_{j < a_i} L_{i,j}; the linear loss of playing `a` against `table`.
double linear_loss(const ActionVector& a, const LossTable& table);

// Indices of arms played at least once, ascending.
std::vector<int> support(const ActionVector& a);

}  // namespace mpcsb
