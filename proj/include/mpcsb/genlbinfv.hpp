#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "mpcsb/core.hpp"
#include "mpcsb/environment.hpp"
#include "mpcsb/rng.hpp"

namespace mpcsb {

// Point in the convex hull of the action set, kept strictly inside the open
// box (0, n_i) per coordinate so the barrier stays finite.
struct FractionalPoint {
    std::vector<double> x;
};

// Hybrid per-coordinate regularizer: log barrier at 0 plus gamma-scaled
// entropy at the cap,
//   phi(z) = n * (s - 1 - log s + gamma * (s + (1 - s) log(1 - s))),  s = z/n.
// phi_value accepts z in (0, n] with the 0*log 0 = 0 convention at z = n;
// phi_grad/phi_hess require the open interval.
double phi_value(double z, double n, double gamma);
double phi_grad(double z, double n, double gamma);
double phi_hess(double z, double n, double gamma);

// Regularization strengths beta_i(t) driven by the accumulated per-round
// summand alpha_i(s) in [0, 1]; beta is nondecreasing in t by construction.
class RegState {
  public:
    RegState(const InstanceSpec& spec, double gamma, double epsilon_frac = 0.5);

    double gamma() const { return gamma_; }
    double epsilon(int arm) const { return eps_[static_cast<std::size_t>(arm)]; }
    double cap(int arm) const { return caps_[static_cast<std::size_t>(arm)]; }
    int num_arms() const { return static_cast<int>(caps_.size()); }

    double beta(int arm) const;
    std::vector<double> betas() const;

    // Accumulates this round's alpha_i and returns it. k_i is read only where
    // a_i >= 1.
    std::vector<double> update(const ActionVector& a, const FractionalPoint& x,
                               const std::vector<double>& k, const std::vector<double>& q);

  private:
    std::vector<double> caps_;
    std::vector<double> eps_;
    std::vector<double> alpha_sum_;
    double gamma_;
};

// psi_t(x) = sum_i beta_i * phi_i(x_i); returns value and per-coordinate
// gradient. Throws std::domain_error on boundary input.
std::pair<double, std::vector<double>> regularizer_value_grad(const FractionalPoint& x,
                                                              const RegState& reg);

// Optimistic prediction q(t) of the coming round's mean losses.
class Predictor {
  public:
    enum class Mode { LeastSquares, GradientDescent };

    static Predictor least_squares(int num_arms);
    static Predictor gradient_descent(int num_arms, double eta);

    Mode mode() const { return mode_; }
    double eta() const { return eta_; }
    const std::vector<double>& q() const { return q_; }

    void update(const ActionVector& a, const std::vector<double>& k);

  private:
    Predictor(Mode mode, int num_arms, double eta);
    Mode mode_;
    double eta_;
    std::vector<double> q_;
    std::vector<double> weighted_loss_sum_;  // LS: sum_s a_i(s) k_i(s)
    std::vector<double> pull_sum_;           // LS: sum_s a_i(s)
};

struct LossEstimate {
    std::vector<double> ell_hat;  // length d
    std::vector<double> k;        // mean observed loss per arm; meaningful where a_i >= 1
};

// ell_hat_i = q_i + (a_i / x_i)(k_i - q_i), the importance-weighted unbiased
// estimate of arm i's mean loss; arms with a_i = 0 keep q_i.
LossEstimate estimate_loss(const FractionalPoint& x, const ActionVector& a,
                           const Observation& obs, const std::vector<double>& q);

struct Decomposition {
    struct Atom {
        ActionVector action;
        double weight = 0.0;
    };
    std::vector<Atom> atoms;
};

ActionVector sample_action(const Decomposition& dec, Rng& rng);

namespace detail {
struct PolytopeModel;
}

// Damped Newton solver for
//   min <linear, x> + sum_i beta_i phi_i(x_i)  over  conv(action set),
// with the hull expressed as affine equalities plus the coordinate box.
// Supports Transport instances and Explicit instances whose hull is verified
// at construction; Knapsack is rejected.
class OftrlSolver {
  public:
    explicit OftrlSolver(const InstanceSpec& spec);
    ~OftrlSolver();
    OftrlSolver(OftrlSolver&&) noexcept;
    OftrlSolver& operator=(OftrlSolver&&) noexcept;

    FractionalPoint solve(const std::vector<double>& linear, const RegState& reg);

    // Euclidean norm of the objective gradient projected onto the null space
    // of the equality constraints; the solver's convergence measure.
    double reduced_gradient_norm(const FractionalPoint& x, const std::vector<double>& linear,
                                 const RegState& reg) const;
    double objective(const FractionalPoint& x, const std::vector<double>& linear,
                     const RegState& reg) const;
    double equality_residual(const FractionalPoint& x) const;

    int last_iterations() const { return last_iterations_; }
    double last_residual() const { return last_residual_; }

  private:
    std::unique_ptr<detail::PolytopeModel> model_;
    std::vector<double> warm_;
    int last_iterations_ = 0;
    double last_residual_ = 0.0;
};

// Carathéodory decomposition by greedy vertex peeling: walk the residual to
// an integral vertex of its face, peel off the largest feasible weight,
// recurse. At most d + 1 atoms.
class ConvexDecomposer {
  public:
    explicit ConvexDecomposer(const InstanceSpec& spec);
    ~ConvexDecomposer();
    ConvexDecomposer(ConvexDecomposer&&) noexcept;
    ConvexDecomposer& operator=(ConvexDecomposer&&) noexcept;

    Decomposition decompose(const FractionalPoint& x) const;

  private:
    std::unique_ptr<detail::PolytopeModel> model_;
};

// One-shot conveniences over the classes above.
FractionalPoint solve_oftrl(const InstanceSpec& spec, const std::vector<double>& cumulative,
                            const std::vector<double>& q, const RegState& reg);
Decomposition decompose(const InstanceSpec& spec, const FractionalPoint& x);

struct GenLbinfvRound {
    FractionalPoint x;
    ActionVector action;
    double realized_loss = 0.0;
    int solver_iterations = 0;
    double solver_residual = 0.0;
    std::vector<double> alpha;
};

struct GenLbinfvDecision {
    FractionalPoint x;
    ActionVector action;
    int solver_iterations = 0;
    double solver_residual = 0.0;
};

// Optimistic FTRL over conv(A) with the hybrid regularizer, adaptive
// beta_i(t), LS/GD predictions, importance-weighted loss estimates and
// vertex sampling.
class GenLbinfv {
  public:
    GenLbinfv(InstanceSpec spec, int horizon, Predictor::Mode mode, std::uint64_t seed,
              double eta = 0.25, double epsilon_frac = 0.5);

    // solve + decompose + sample; `learn` must follow with the matching
    // observation before the next decide
    GenLbinfvDecision decide();
    std::vector<double> learn(const GenLbinfvDecision& decision, const Observation& obs);

    GenLbinfvRound play_round(const RoundLosses& losses, int t);
    GenLbinfvRound run_round(Environment& env, int t);

    const InstanceSpec& spec() const { return spec_; }
    const RegState& reg() const { return reg_; }
    const Predictor& predictor() const { return pred_; }
    const std::vector<double>& cumulative_estimates() const { return cumulative_; }
    int horizon() const { return horizon_; }

  private:
    InstanceSpec spec_;
    int horizon_;
    RegState reg_;
    Predictor pred_;
    OftrlSolver solver_;
    ConvexDecomposer decomposer_;
    std::vector<double> cumulative_;
    Rng rng_;
};

}  // namespace mpcsb
