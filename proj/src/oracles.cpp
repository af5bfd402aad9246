#include "mpcsb/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

namespace mpcsb {

namespace {

// Transportation simplex on the complete bipartite graph. Basis is a
// spanning tree over m row nodes and n column nodes; starts from the
// northwest-corner plan and pivots on the first (row-major) arc with
// negative reduced cost, which is Bland's anti-cycling rule.
class TransportSimplex {
  public:
    TransportSimplex(const std::vector<int>& u, const std::vector<int>& v,
                     const std::vector<double>& c)
        : m_(static_cast<int>(u.size())),
          n_(static_cast<int>(v.size())),
          u_(u),
          v_(v),
          cost_(c),
          flow_(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_), 0),
          basic_(flow_.size(), 0) {
        double scale = 0.0;
        for (double x : c) {
            if (!std::isfinite(x)) throw std::invalid_argument("ot_oracle: non-finite cost");
            scale = std::max(scale, std::abs(x));
        }
        tol_ = 1e-12 * std::max(scale, 1e-300);
    }

    ActionVector solve() {
        northwest_corner();
        const long long cap = 10000 + 500LL * m_ * n_;
        for (long long iter = 0; iter < cap; ++iter) {
            compute_duals();
            const int entering = entering_arc();
            if (entering < 0) {
                ActionVector a;
                a.counts.assign(flow_.size(), 0);
                for (std::size_t k = 0; k < flow_.size(); ++k)
                    a.counts[k] = static_cast<int>(flow_[k]);
                return a;
            }
            pivot(entering);
        }
        throw std::runtime_error("ot_oracle: pivot cap exceeded");
    }

  private:
    int node_row(int x) const { return x; }
    int node_col(int y) const { return m_ + y; }

    void northwest_corner() {
        std::vector<long long> ru(u_.begin(), u_.end());
        std::vector<long long> rv(v_.begin(), v_.end());
        int i = 0, j = 0;
        while (true) {
            const long long q = std::min(ru[static_cast<std::size_t>(i)],
                                         rv[static_cast<std::size_t>(j)]);
            flow_[idx(i, j)] = q;
            basic_[idx(i, j)] = 1;
            ru[static_cast<std::size_t>(i)] -= q;
            rv[static_cast<std::size_t>(j)] -= q;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (ru[static_cast<std::size_t>(i)] == 0 && i < m_ - 1)
                ++i;  // on simultaneous exhaustion this leaves a degenerate basic zero
            else
                ++j;
        }
    }

    void compute_duals() {
        duals_.assign(static_cast<std::size_t>(m_ + n_), 0.0);
        std::vector<char> seen(static_cast<std::size_t>(m_ + n_), 0);
        std::queue<int> bfs;
        bfs.push(node_row(0));
        seen[0] = 1;
        while (!bfs.empty()) {
            const int node = bfs.front();
            bfs.pop();
            if (node < m_) {
                const int x = node;
                for (int y = 0; y < n_; ++y) {
                    if (!basic_[idx(x, y)] || seen[static_cast<std::size_t>(node_col(y))]) continue;
                    duals_[static_cast<std::size_t>(node_col(y))] =
                        cost_[idx(x, y)] - duals_[static_cast<std::size_t>(x)];
                    seen[static_cast<std::size_t>(node_col(y))] = 1;
                    bfs.push(node_col(y));
                }
            } else {
                const int y = node - m_;
                for (int x = 0; x < m_; ++x) {
                    if (!basic_[idx(x, y)] || seen[static_cast<std::size_t>(x)]) continue;
                    duals_[static_cast<std::size_t>(x)] =
                        cost_[idx(x, y)] - duals_[static_cast<std::size_t>(node_col(y))];
                    seen[static_cast<std::size_t>(x)] = 1;
                    bfs.push(x);
                }
            }
        }
        for (char s : seen)
            if (!s) throw std::runtime_error("ot_oracle: basis tree disconnected");
    }

    int entering_arc() const {
        for (int x = 0; x < m_; ++x) {
            for (int y = 0; y < n_; ++y) {
                if (basic_[idx(x, y)]) continue;
                const double rc = cost_[idx(x, y)] - duals_[static_cast<std::size_t>(x)] -
                                  duals_[static_cast<std::size_t>(node_col(y))];
                if (rc < -tol_) return static_cast<int>(idx(x, y));
            }
        }
        return -1;
    }

    void pivot(int entering) {
        const int ex = entering / n_;
        const int ey = entering % n_;

        // unique tree path from the entering arc's column node to its row node
        const int nodes = m_ + n_;
        std::vector<int> parent(static_cast<std::size_t>(nodes), -1);
        std::vector<char> seen(static_cast<std::size_t>(nodes), 0);
        std::queue<int> bfs;
        bfs.push(node_row(ex));
        seen[static_cast<std::size_t>(node_row(ex))] = 1;
        while (!bfs.empty()) {
            const int node = bfs.front();
            bfs.pop();
            if (node == node_col(ey)) break;
            if (node < m_) {
                for (int y = 0; y < n_; ++y) {
                    const int next = node_col(y);
                    if (!basic_[idx(node, y)] || seen[static_cast<std::size_t>(next)]) continue;
                    seen[static_cast<std::size_t>(next)] = 1;
                    parent[static_cast<std::size_t>(next)] = node;
                    bfs.push(next);
                }
            } else {
                const int y = node - m_;
                for (int x = 0; x < m_; ++x) {
                    if (!basic_[idx(x, y)] || seen[static_cast<std::size_t>(x)]) continue;
                    seen[static_cast<std::size_t>(x)] = 1;
                    parent[static_cast<std::size_t>(x)] = node;
                    bfs.push(x);
                }
            }
        }
        if (!seen[static_cast<std::size_t>(node_col(ey))])
            throw std::runtime_error("ot_oracle: entering arc closes no cycle");

        // cycle cells alternate +/- starting with + on the entering arc
        std::vector<std::size_t> minus_cells, plus_cells;
        plus_cells.push_back(idx(ex, ey));
        int node = node_col(ey);
        bool minus = true;
        while (node != node_row(ex)) {
            const int up = parent[static_cast<std::size_t>(node)];
            // bipartite: of the two endpoints, the smaller id is the row node
            const std::size_t cell = idx(std::min(node, up), std::max(node, up) - m_);
            (minus ? minus_cells : plus_cells).push_back(cell);
            minus = !minus;
            node = up;
        }

        long long theta = std::numeric_limits<long long>::max();
        std::size_t leaving = 0;
        for (std::size_t cell : minus_cells) {
            if (flow_[cell] < theta || (flow_[cell] == theta && cell < leaving)) {
                theta = flow_[cell];
                leaving = cell;
            }
        }
        for (std::size_t cell : plus_cells) flow_[cell] += theta;
        for (std::size_t cell : minus_cells) flow_[cell] -= theta;
        basic_[leaving] = 0;
        basic_[idx(ex, ey)] = 1;
    }

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(x) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(y);
    }

    int m_, n_;
    const std::vector<int>& u_;
    const std::vector<int>& v_;
    const std::vector<double>& cost_;
    std::vector<long long> flow_;
    std::vector<char> basic_;
    std::vector<double> duals_;
    double tol_ = 0.0;
};

double dot(const ActionVector& a, const std::vector<double>& rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += a.counts[i] * rho[i];
    return s;
}

void enumerate_transport_rec(const TransportKind& kind, int x, int y, long long row_rem,
                             std::vector<long long>& col_rem, std::vector<long long>& col_suffix,
                             ActionVector& work, std::vector<ActionVector>& out,
                             std::size_t limit) {
    const int m = static_cast<int>(kind.supplies.size());
    const int n = static_cast<int>(kind.demands.size());
    if (x == m) {
        if (out.size() >= limit) throw std::runtime_error("enumerate_actions: limit exceeded");
        out.push_back(work);
        return;
    }
    if (y == n - 1) {
        if (row_rem > col_rem[static_cast<std::size_t>(y)]) return;
        work[x * n + y] = static_cast<int>(row_rem);
        col_rem[static_cast<std::size_t>(y)] -= row_rem;
        const long long next_row =
            (x + 1 < m) ? kind.supplies[static_cast<std::size_t>(x + 1)] : 0;
        enumerate_transport_rec(kind, x + 1, 0, next_row, col_rem, col_suffix, work, out, limit);
        col_rem[static_cast<std::size_t>(y)] += row_rem;
        work[x * n + y] = 0;
        return;
    }
    // remaining demand strictly after column y bounds how little this cell may take
    const long long later = col_suffix[static_cast<std::size_t>(y) + 1];
    const long long lo = std::max<long long>(0, row_rem - later);
    const long long hi = std::min<long long>(row_rem, col_rem[static_cast<std::size_t>(y)]);
    for (long long q = lo; q <= hi; ++q) {
        work[x * n + y] = static_cast<int>(q);
        col_rem[static_cast<std::size_t>(y)] -= q;
        col_suffix[static_cast<std::size_t>(y)] -= q;
        enumerate_transport_rec(kind, x, y + 1, row_rem - q, col_rem, col_suffix, work, out,
                                limit);
        col_suffix[static_cast<std::size_t>(y)] += q;
        col_rem[static_cast<std::size_t>(y)] += q;
        work[x * n + y] = 0;
    }
}

void enumerate_knapsack_rec(const KnapsackKind& kind, int item, long long rem,
                            ActionVector& work, std::vector<ActionVector>& out,
                            std::size_t limit) {
    const int d = static_cast<int>(kind.weights.size());
    if (item == d) {
        if (out.size() >= limit) throw std::runtime_error("enumerate_actions: limit exceeded");
        out.push_back(work);
        return;
    }
    const long long w = kind.weights[static_cast<std::size_t>(item)];
    for (long long q = 0; q * w <= rem; ++q) {
        work[item] = static_cast<int>(q);
        enumerate_knapsack_rec(kind, item + 1, rem - q * w, work, out, limit);
    }
    work[item] = 0;
}

}  // namespace

ActionVector ot_oracle(const std::vector<int>& supplies, const std::vector<int>& demands,
                       const std::vector<double>& costs) {
    if (supplies.empty() || demands.empty())
        throw std::invalid_argument("ot_oracle: empty marginals");
    long long total_u = 0, total_v = 0;
    for (int x : supplies) {
        if (x < 0) throw std::invalid_argument("ot_oracle: negative supply");
        total_u += x;
    }
    for (int x : demands) {
        if (x < 0) throw std::invalid_argument("ot_oracle: negative demand");
        total_v += x;
    }
    if (total_u != total_v) throw std::invalid_argument("ot_oracle: unbalanced marginals");
    if (costs.size() != supplies.size() * demands.size())
        throw std::invalid_argument("ot_oracle: cost matrix shape mismatch");
    return TransportSimplex(supplies, demands, costs).solve();
}

ActionVector knapsack_oracle(const std::vector<int>& weights, int capacity,
                             const std::vector<double>& values) {
    if (weights.size() != values.size())
        throw std::invalid_argument("knapsack_oracle: weights/values length mismatch");
    if (capacity < 0) throw std::invalid_argument("knapsack_oracle: negative capacity");
    for (int w : weights)
        if (w < 1) throw std::invalid_argument("knapsack_oracle: weights must be >= 1");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("knapsack_oracle: non-finite value");

    const int d = static_cast<int>(weights.size());
    // Per capacity budget: best value plus the lexicographically smallest
    // count vector among its maximizers. Keeping the full count vector as the
    // tie key makes lexicographic minimality exact rather than heuristic.
    struct Cell {
        double value = 0.0;
        std::vector<int> counts;
    };
    std::vector<Cell> best(static_cast<std::size_t>(capacity) + 1);
    best[0].counts.assign(static_cast<std::size_t>(d), 0);
    for (int c = 1; c <= capacity; ++c) {
        Cell& cur = best[static_cast<std::size_t>(c)];
        cur = best[static_cast<std::size_t>(c - 1)];
        for (int i = 0; i < d; ++i) {
            const int w = weights[static_cast<std::size_t>(i)];
            if (w > c) continue;
            const Cell& sub = best[static_cast<std::size_t>(c - w)];
            const double cand = values[static_cast<std::size_t>(i)] + sub.value;
            if (cand < cur.value) continue;
            std::vector<int> cand_counts = sub.counts;
            ++cand_counts[static_cast<std::size_t>(i)];
            if (cand > cur.value ||
                std::lexicographical_compare(cand_counts.begin(), cand_counts.end(),
                                             cur.counts.begin(), cur.counts.end())) {
                cur.value = cand;
                cur.counts = std::move(cand_counts);
            }
        }
    }
    return ActionVector(best[static_cast<std::size_t>(capacity)].counts);
}

ActionVector argmin_action(const InstanceSpec& spec, const std::vector<double>& rho) {
    if (static_cast<int>(rho.size()) != spec.num_arms())
        throw std::invalid_argument("argmin_action: rho length mismatch");

    if (const TransportKind* t = spec.as_transport())
        return ot_oracle(t->supplies, t->demands, rho);
    if (const KnapsackKind* k = spec.as_knapsack()) {
        std::vector<double> values(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i) values[i] = -rho[i];
        return knapsack_oracle(k->weights, k->capacity, values);
    }
    const ExplicitKind* e = spec.as_explicit();
    const ActionVector* arg = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const ActionVector& a : e->actions) {
        const double obj = dot(a, rho);
        if (obj < best || (obj == best && (arg == nullptr || lex_less(a, *arg)))) {
            best = obj;
            arg = &a;
        }
    }
    return *arg;
}

std::vector<ActionVector> enumerate_actions(const InstanceSpec& spec, std::size_t limit) {
    std::vector<ActionVector> out;
    if (const TransportKind* t = spec.as_transport()) {
        const int n = static_cast<int>(t->demands.size());
        ActionVector work;
        work.counts.assign(static_cast<std::size_t>(spec.num_arms()), 0);
        std::vector<long long> col_rem(t->demands.begin(), t->demands.end());
        std::vector<long long> col_suffix(static_cast<std::size_t>(n) + 1, 0);
        for (int y = n - 1; y >= 0; --y)
            col_suffix[static_cast<std::size_t>(y)] =
                col_suffix[static_cast<std::size_t>(y) + 1] + t->demands[static_cast<std::size_t>(y)];
        enumerate_transport_rec(*t, 0, 0, t->supplies[0], col_rem, col_suffix, work, out, limit);
    } else if (const KnapsackKind* k = spec.as_knapsack()) {
        ActionVector work;
        work.counts.assign(static_cast<std::size_t>(spec.num_arms()), 0);
        enumerate_knapsack_rec(*k, 0, k->capacity, work, out, limit);
    } else {
        out = spec.as_explicit()->actions;
        std::sort(out.begin(), out.end(), lex_less);
        out.erase(std::unique(out.begin(), out.end()), out.end());
        if (out.size() > limit) throw std::runtime_error("enumerate_actions: limit exceeded");
    }
    for (const ActionVector& a : out)
        if (!validate_action(spec, a))
            throw std::logic_error("enumerate_actions: produced an invalid action");
    return out;
}

}  // namespace mpcsb
