#include "mpcsb/genlbinfv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "linalg.hpp"
#include "mpcsb/oracles.hpp"

namespace mpcsb {

namespace {

constexpr double kInteriorFloor = 1e-12;  // clamp fraction of each cap

double vdot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double phi_value(double z, double n, double gamma) {
    if (!(z > 0.0) || !(z <= n)) throw std::domain_error("phi_value: z outside (0, n]");
    const double s = z / n;
    const double entropy = s < 1.0 ? (1.0 - s) * std::log1p(-s) : 0.0;
    return n * (s - 1.0 - std::log(s) + gamma * (s + entropy));
}

double phi_grad(double z, double n, double gamma) {
    if (!(z > 0.0) || !(z < n)) throw std::domain_error("phi_grad: z outside (0, n)");
    return 1.0 - n / z - gamma * std::log1p(-z / n);
}

double phi_hess(double z, double n, double gamma) {
    if (!(z > 0.0) || !(z < n)) throw std::domain_error("phi_hess: z outside (0, n)");
    return n / (z * z) + gamma / (n - z);
}

RegState::RegState(const InstanceSpec& spec, double gamma, double epsilon_frac) : gamma_(gamma) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("reg: gamma must be >= 0");
    if (!(epsilon_frac > 0.0 && epsilon_frac <= 0.5))
        throw std::invalid_argument("reg: epsilon fraction outside (0, 1/2]");
    const int d = spec.num_arms();
    caps_.resize(static_cast<std::size_t>(d));
    eps_.resize(static_cast<std::size_t>(d));
    alpha_sum_.assign(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        caps_[static_cast<std::size_t>(i)] = static_cast<double>(spec.cap(i));
        eps_[static_cast<std::size_t>(i)] = epsilon_frac * caps_[static_cast<std::size_t>(i)];
    }
}

double RegState::beta(int arm) const {
    const std::size_t i = static_cast<std::size_t>(arm);
    const double base = 1.0 + eps_[i] / caps_[i];
    const double extra = gamma_ > 0.0 ? alpha_sum_[i] / gamma_ : 0.0;
    return std::sqrt(base * base + extra);
}

std::vector<double> RegState::betas() const {
    std::vector<double> out(caps_.size());
    for (int i = 0; i < num_arms(); ++i) out[static_cast<std::size_t>(i)] = beta(i);
    return out;
}

std::vector<double> RegState::update(const ActionVector& a, const FractionalPoint& x,
                                     const std::vector<double>& k,
                                     const std::vector<double>& q) {
    const std::size_t d = caps_.size();
    if (a.counts.size() != d || x.x.size() != d || k.size() != d || q.size() != d)
        throw std::invalid_argument("reg update: length mismatch");
    std::vector<double> alpha(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        if (a.counts[i] == 0) continue;
        const double s = x.x[i] / caps_[i];
        if (!(s > 0.0 && s < 1.0))
            throw std::domain_error("reg update: fractional point on the boundary");
        const double damp_den = s * s * gamma_;
        const double damp = damp_den > 0.0 ? std::min(1.0, 2.0 * (1.0 - s) / damp_den) : 1.0;
        const double diff = k[i] - q[i];
        const double play_frac = a.counts[i] / caps_[i];
        double val = play_frac * play_frac * diff * diff * damp;
        if (val < -1e-12 || val > 1.0 + 1e-9)
            throw std::logic_error("reg update: alpha outside [0, 1]");
        val = std::clamp(val, 0.0, 1.0);
        alpha[i] = val;
        alpha_sum_[i] += val;
    }
    return alpha;
}

std::pair<double, std::vector<double>> regularizer_value_grad(const FractionalPoint& x,
                                                              const RegState& reg) {
    const int d = reg.num_arms();
    if (static_cast<int>(x.x.size()) != d)
        throw std::invalid_argument("regularizer: point length mismatch");
    double value = 0.0;
    std::vector<double> grad(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double z = x.x[static_cast<std::size_t>(i)];
        const double n = reg.cap(i);
        if (!(z > 0.0 && z < n))
            throw std::domain_error("regularizer: point on the domain boundary");
        const double b = reg.beta(i);
        value += b * phi_value(z, n, reg.gamma());
        grad[static_cast<std::size_t>(i)] = b * phi_grad(z, n, reg.gamma());
    }
    return {value, std::move(grad)};
}

Predictor::Predictor(Mode mode, int num_arms, double eta)
    : mode_(mode), eta_(eta), q_(static_cast<std::size_t>(num_arms), 0.5) {
    if (num_arms < 1) throw std::invalid_argument("predictor: need at least one arm");
    if (mode_ == Mode::GradientDescent && !(eta_ > 0.0 && eta_ < 0.5))
        throw std::invalid_argument("predictor: gd step size outside (0, 1/2)");
    if (mode_ == Mode::LeastSquares) {
        weighted_loss_sum_.assign(static_cast<std::size_t>(num_arms), 0.0);
        pull_sum_.assign(static_cast<std::size_t>(num_arms), 0.0);
    }
}

Predictor Predictor::least_squares(int num_arms) {
    return Predictor(Mode::LeastSquares, num_arms, 0.0);
}

Predictor Predictor::gradient_descent(int num_arms, double eta) {
    return Predictor(Mode::GradientDescent, num_arms, eta);
}

void Predictor::update(const ActionVector& a, const std::vector<double>& k) {
    if (a.counts.size() != q_.size() || k.size() != q_.size())
        throw std::invalid_argument("predictor update: length mismatch");
    for (std::size_t i = 0; i < q_.size(); ++i) {
        if (a.counts[i] < 1) continue;
        if (mode_ == Mode::LeastSquares) {
            weighted_loss_sum_[i] += a.counts[i] * k[i];
            pull_sum_[i] += a.counts[i];
            q_[i] = (0.5 + weighted_loss_sum_[i]) / (1.0 + pull_sum_[i]);
        } else {
            q_[i] = (1.0 - eta_) * q_[i] + eta_ * k[i];
        }
        q_[i] = std::clamp(q_[i], 0.0, 1.0);
    }
}

LossEstimate estimate_loss(const FractionalPoint& x, const ActionVector& a,
                           const Observation& obs, const std::vector<double>& q) {
    const std::size_t d = q.size();
    if (x.x.size() != d || a.counts.size() != d)
        throw std::invalid_argument("estimate_loss: length mismatch");
    LossEstimate est;
    est.k.assign(d, 0.0);
    est.ell_hat = q;
    std::vector<double> sums(d, 0.0);
    std::vector<int> counts(d, 0);
    for (const Observation::Entry& e : obs.entries) {
        sums[static_cast<std::size_t>(e.arm)] += e.loss;
        ++counts[static_cast<std::size_t>(e.arm)];
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (counts[i] != a.counts[i])
            throw std::invalid_argument("estimate_loss: observation inconsistent with action");
        if (a.counts[i] == 0) continue;
        if (!(x.x[i] > 0.0)) throw std::domain_error("estimate_loss: nonpositive x");
        est.k[i] = sums[i] / a.counts[i];
        est.ell_hat[i] = q[i] + (a.counts[i] / x.x[i]) * (est.k[i] - q[i]);
    }
    return est;
}

ActionVector sample_action(const Decomposition& dec, Rng& rng) {
    if (dec.atoms.empty()) throw std::invalid_argument("sample_action: empty decomposition");
    if (dec.atoms.size() == 1) return dec.atoms.front().action;
    std::vector<double> weights(dec.atoms.size());
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = dec.atoms[i].weight;
    return dec.atoms[static_cast<std::size_t>(rng.categorical(weights))].action;
}

// ---------------------------------------------------------------------------
// Polytope model: conv(A) expressed as { x in [0, caps] : eq x = rhs }.
// ---------------------------------------------------------------------------

namespace detail {

struct PolytopeModel {
    InstanceSpec spec = InstanceSpec::knapsack({1}, 1);  // placeholder, reassigned
    int d = 0;
    std::vector<double> caps;
    Matrix eq;                // full row rank, possibly 0 rows
    std::vector<double> rhs;
    std::vector<double> start;                     // feasible, interior where possible
    std::vector<std::vector<double>> null_basis;   // orthonormal for explicit kind
    bool transport = false;
    int rows_m = 0, cols_n = 0;

    double rhs_scale() const {
        double s = 1.0;
        for (double b : rhs) s = std::max(s, std::abs(b));
        return s;
    }
};

namespace {

void subtract_projection(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (const auto& b : basis) {
        const double dp = vdot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dp * b[i];
    }
}

double norm2(const std::vector<double>& v) { return std::sqrt(vdot(v, v)); }

void verify_explicit_hull(const InstanceSpec& spec, const Matrix& eq,
                          const std::vector<double>& rhs) {
    const int d = spec.num_arms();
    long long combos = 1;
    for (int i = 0; i < d; ++i) {
        combos *= spec.cap(i) + 1;
        if (combos > 2'000'000)
            throw std::invalid_argument(
                "explicit hull too large to verify for OFTRL; use transport or a smaller set");
    }
    std::vector<ActionVector> members = spec.as_explicit()->actions;
    std::sort(members.begin(), members.end(), lex_less);
    members.erase(std::unique(members.begin(), members.end()), members.end());

    std::vector<int> point(static_cast<std::size_t>(d), 0);
    long long hull_points = 0;
    while (true) {
        double worst = 0.0;
        for (int r = 0; r < eq.rows; ++r) {
            double s = -rhs[static_cast<std::size_t>(r)];
            for (int c = 0; c < d; ++c) s += eq.at(r, c) * point[static_cast<std::size_t>(c)];
            worst = std::max(worst, std::abs(s));
        }
        if (worst <= 1e-7) {
            ++hull_points;
            ActionVector candidate{point};
            if (!std::binary_search(members.begin(), members.end(), candidate, lex_less))
                throw std::invalid_argument(
                    "explicit action set is not the full integer hull of its affine span");
        }
        int pos = 0;
        while (pos < d) {
            if (++point[static_cast<std::size_t>(pos)] <= spec.cap(pos)) break;
            point[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == d) break;
    }
    if (hull_points != static_cast<long long>(members.size()))
        throw std::invalid_argument(
            "explicit action set is not the full integer hull of its affine span");
}

}  // namespace

PolytopeModel build_model(const InstanceSpec& spec) {
    if (spec.as_knapsack())
        throw std::invalid_argument(
            "knapsack action sets are not supported: their hull has no tractable exact "
            "description for OFTRL");

    PolytopeModel m;
    m.spec = spec;
    m.d = spec.num_arms();
    m.caps.resize(static_cast<std::size_t>(m.d));
    for (int i = 0; i < m.d; ++i)
        m.caps[static_cast<std::size_t>(i)] = static_cast<double>(spec.cap(i));

    if (const TransportKind* t = spec.as_transport()) {
        m.transport = true;
        m.rows_m = static_cast<int>(t->supplies.size());
        m.cols_n = static_cast<int>(t->demands.size());
        const int rows = m.rows_m + m.cols_n - 1;
        m.eq = Matrix(rows, m.d);
        m.rhs.assign(static_cast<std::size_t>(rows), 0.0);
        for (int x = 0; x < m.rows_m; ++x) {
            for (int y = 0; y < m.cols_n; ++y) m.eq.at(x, x * m.cols_n + y) = 1.0;
            m.rhs[static_cast<std::size_t>(x)] = t->supplies[static_cast<std::size_t>(x)];
        }
        for (int y = 0; y + 1 < m.cols_n; ++y) {
            const int r = m.rows_m + y;
            for (int x = 0; x < m.rows_m; ++x) m.eq.at(r, x * m.cols_n + y) = 1.0;
            m.rhs[static_cast<std::size_t>(r)] = t->demands[static_cast<std::size_t>(y)];
        }
        double total = 0.0;
        for (int u : t->supplies) total += u;
        m.start.resize(static_cast<std::size_t>(m.d));
        for (int x = 0; x < m.rows_m; ++x)
            for (int y = 0; y < m.cols_n; ++y)
                m.start[static_cast<std::size_t>(x * m.cols_n + y)] =
                    t->supplies[static_cast<std::size_t>(x)] *
                    t->demands[static_cast<std::size_t>(y)] / total;
        return m;
    }

    const ExplicitKind* e = spec.as_explicit();
    const std::size_t d = static_cast<std::size_t>(m.d);
    std::vector<double> base(d);
    for (std::size_t i = 0; i < d; ++i) base[i] = e->actions.front().counts[i];

    // orthonormal basis of the directions spanned by the action list
    std::vector<std::vector<double>> span;
    for (std::size_t k = 1; k < e->actions.size(); ++k) {
        std::vector<double> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = e->actions[k].counts[i] - base[i];
        subtract_projection(v, span);
        subtract_projection(v, span);
        const double nrm = norm2(v);
        if (nrm > 1e-7) {
            for (double& x : v) x /= nrm;
            span.push_back(std::move(v));
        }
    }
    // orthonormal complement: the affine-hull equality rows
    std::vector<std::vector<double>> comp;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> w(d, 0.0);
        w[i] = 1.0;
        subtract_projection(w, span);
        subtract_projection(w, comp);
        subtract_projection(w, span);
        subtract_projection(w, comp);
        const double nrm = norm2(w);
        if (nrm > 1e-7) {
            for (double& x : w) x /= nrm;
            comp.push_back(std::move(w));
        }
    }
    m.eq = Matrix(static_cast<int>(comp.size()), m.d);
    m.rhs.assign(comp.size(), 0.0);
    for (std::size_t r = 0; r < comp.size(); ++r) {
        for (int c = 0; c < m.d; ++c) m.eq.at(static_cast<int>(r), c) = comp[r][static_cast<std::size_t>(c)];
        m.rhs[r] = vdot(comp[r], base);
    }
    m.null_basis = std::move(span);
    verify_explicit_hull(spec, m.eq, m.rhs);

    m.start.assign(d, 0.0);
    for (const ActionVector& a : e->actions)
        for (std::size_t i = 0; i < d; ++i) m.start[i] += a.counts[i];
    for (double& x : m.start) x /= static_cast<double>(e->actions.size());
    return m;
}

namespace {

void clamp_to_box(std::vector<double>& x, const std::vector<double>& caps) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lo = kInteriorFloor * caps[i];
        const double hi = (1.0 - kInteriorFloor) * caps[i];
        x[i] = std::clamp(x[i], lo, hi);
    }
}

std::vector<double> equality_violation(const PolytopeModel& m, const std::vector<double>& x) {
    std::vector<double> out(static_cast<std::size_t>(m.eq.rows), 0.0);
    for (int r = 0; r < m.eq.rows; ++r) {
        double s = -m.rhs[static_cast<std::size_t>(r)];
        for (int c = 0; c < m.d; ++c) s += m.eq.at(r, c) * x[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
    }
    return out;
}

// g - A^T lambda with lambda the least-squares multiplier; the gradient
// component tangent to the equality constraints.
std::vector<double> project_to_null(const PolytopeModel& m, std::vector<double> g) {
    const int r = m.eq.rows;
    if (r == 0) return g;
    Matrix aat(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            double s = 0.0;
            for (int c = 0; c < m.d; ++c) s += m.eq.at(i, c) * m.eq.at(j, c);
            aat.at(i, j) = s;
        }
    std::vector<double> ag(static_cast<std::size_t>(r), 0.0);
    for (int i = 0; i < r; ++i) {
        double s = 0.0;
        for (int c = 0; c < m.d; ++c) s += m.eq.at(i, c) * g[static_cast<std::size_t>(c)];
        ag[static_cast<std::size_t>(i)] = s;
    }
    const std::vector<double> lambda = solve_dense(std::move(aat), std::move(ag));
    for (int c = 0; c < m.d; ++c) {
        double s = 0.0;
        for (int i = 0; i < r; ++i) s += m.eq.at(i, c) * lambda[static_cast<std::size_t>(i)];
        g[static_cast<std::size_t>(c)] -= s;
    }
    return g;
}

// Projection of x onto { eq z = scale * rhs } (minimum-norm correction).
std::vector<double> project_to_affine(const PolytopeModel& m, std::vector<double> x,
                                      double scale = 1.0) {
    const int r = m.eq.rows;
    if (r == 0) return x;
    Matrix aat(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            double s = 0.0;
            for (int c = 0; c < m.d; ++c) s += m.eq.at(i, c) * m.eq.at(j, c);
            aat.at(i, j) = s;
        }
    std::vector<double> viol(static_cast<std::size_t>(r), 0.0);
    for (int i = 0; i < r; ++i) {
        double s = -scale * m.rhs[static_cast<std::size_t>(i)];
        for (int c = 0; c < m.d; ++c) s += m.eq.at(i, c) * x[static_cast<std::size_t>(c)];
        viol[static_cast<std::size_t>(i)] = s;
    }
    const std::vector<double> lambda = solve_dense(std::move(aat), std::move(viol));
    for (int c = 0; c < m.d; ++c) {
        double s = 0.0;
        for (int i = 0; i < r; ++i) s += m.eq.at(i, c) * lambda[static_cast<std::size_t>(i)];
        x[static_cast<std::size_t>(c)] -= s;
    }
    return x;
}

}  // namespace

}  // namespace detail

// ---------------------------------------------------------------------------
// OFTRL solver
// ---------------------------------------------------------------------------

OftrlSolver::OftrlSolver(const InstanceSpec& spec)
    : model_(std::make_unique<detail::PolytopeModel>(detail::build_model(spec))) {}

OftrlSolver::~OftrlSolver() = default;
OftrlSolver::OftrlSolver(OftrlSolver&&) noexcept = default;
OftrlSolver& OftrlSolver::operator=(OftrlSolver&&) noexcept = default;

double OftrlSolver::objective(const FractionalPoint& x, const std::vector<double>& linear,
                              const RegState& reg) const {
    const detail::PolytopeModel& m = *model_;
    double v = 0.0;
    for (int i = 0; i < m.d; ++i) {
        const double z = x.x[static_cast<std::size_t>(i)];
        if (z <= 0.0) return std::numeric_limits<double>::infinity();
        v += linear[static_cast<std::size_t>(i)] * z +
             reg.beta(i) * phi_value(z, m.caps[static_cast<std::size_t>(i)], reg.gamma());
    }
    return v;
}

double OftrlSolver::reduced_gradient_norm(const FractionalPoint& x,
                                          const std::vector<double>& linear,
                                          const RegState& reg) const {
    const detail::PolytopeModel& m = *model_;
    std::vector<double> g(static_cast<std::size_t>(m.d));
    for (int i = 0; i < m.d; ++i)
        g[static_cast<std::size_t>(i)] =
            linear[static_cast<std::size_t>(i)] +
            reg.beta(i) * phi_grad(x.x[static_cast<std::size_t>(i)],
                                   m.caps[static_cast<std::size_t>(i)], reg.gamma());
    const std::vector<double> rg = detail::project_to_null(m, std::move(g));
    return std::sqrt(vdot(rg, rg));
}

double OftrlSolver::equality_residual(const FractionalPoint& x) const {
    double worst = 0.0;
    for (double v : detail::equality_violation(*model_, x.x)) worst = std::max(worst, std::abs(v));
    return worst;
}

FractionalPoint OftrlSolver::solve(const std::vector<double>& linear, const RegState& reg) {
    const detail::PolytopeModel& m = *model_;
    const int d = m.d;
    const int r = m.eq.rows;
    if (static_cast<int>(linear.size()) != d)
        throw std::invalid_argument("oftrl solve: linear term length mismatch");
    if (reg.num_arms() != d) throw std::invalid_argument("oftrl solve: reg state mismatch");
    for (int i = 0; i < d; ++i)
        if (reg.cap(i) != m.caps[static_cast<std::size_t>(i)])
            throw std::invalid_argument("oftrl solve: reg caps differ from instance caps");

    const double gamma = reg.gamma();
    const std::vector<double> beta = reg.betas();
    const double feas_tol = 1e-9 * m.rhs_scale();
    constexpr double kGradTol = 1e-8;
    constexpr int kMaxIter = 200;

    std::vector<double> x = warm_.size() == static_cast<std::size_t>(d) ? warm_ : m.start;
    detail::clamp_to_box(x, m.caps);

    auto objective_at = [&](const std::vector<double>& z) {
        double v = 0.0;
        for (int i = 0; i < d; ++i)
            v += linear[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)] +
                 beta[static_cast<std::size_t>(i)] *
                     phi_value(z[static_cast<std::size_t>(i)], m.caps[static_cast<std::size_t>(i)],
                               gamma);
        return v;
    };

    double fcur = objective_at(x);
    double rg_norm = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter <= kMaxIter; ++iter) {
        std::vector<double> grad(static_cast<std::size_t>(d));
        std::vector<double> hess(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            const double z = x[static_cast<std::size_t>(i)];
            const double n = m.caps[static_cast<std::size_t>(i)];
            grad[static_cast<std::size_t>(i)] =
                linear[static_cast<std::size_t>(i)] +
                beta[static_cast<std::size_t>(i)] * phi_grad(z, n, gamma);
            hess[static_cast<std::size_t>(i)] =
                beta[static_cast<std::size_t>(i)] * phi_hess(z, n, gamma);
        }
        const std::vector<double> viol = detail::equality_violation(m, x);
        double viol_norm = 0.0;
        for (double v : viol) viol_norm = std::max(viol_norm, std::abs(v));
        {
            const std::vector<double> rg = detail::project_to_null(m, grad);
            rg_norm = std::sqrt(vdot(rg, rg));
        }
        if (rg_norm <= kGradTol && viol_norm <= feas_tol) {
            last_iterations_ = iter;
            last_residual_ = rg_norm;
            warm_ = x;
            return FractionalPoint{std::move(x)};
        }
        if (iter == kMaxIter) break;

        // KKT step: (A H^-1 A^T) nu = viol - A H^-1 grad; dx = -H^-1 (grad + A^T nu)
        std::vector<double> dx(static_cast<std::size_t>(d));
        if (r > 0) {
            detail::Matrix s(r, r);
            for (int i = 0; i < r; ++i)
                for (int j = i; j < r; ++j) {
                    double acc = 0.0;
                    for (int c = 0; c < d; ++c)
                        acc += m.eq.at(i, c) * m.eq.at(j, c) / hess[static_cast<std::size_t>(c)];
                    s.at(i, j) = acc;
                    s.at(j, i) = acc;
                }
            std::vector<double> rhs(static_cast<std::size_t>(r));
            for (int i = 0; i < r; ++i) {
                double acc = 0.0;
                for (int c = 0; c < d; ++c)
                    acc += m.eq.at(i, c) * grad[static_cast<std::size_t>(c)] /
                           hess[static_cast<std::size_t>(c)];
                rhs[static_cast<std::size_t>(i)] = viol[static_cast<std::size_t>(i)] - acc;
            }
            const std::vector<double> nu = detail::solve_dense(std::move(s), std::move(rhs));
            for (int c = 0; c < d; ++c) {
                double aeff = grad[static_cast<std::size_t>(c)];
                for (int i = 0; i < r; ++i)
                    aeff += m.eq.at(i, c) * nu[static_cast<std::size_t>(i)];
                dx[static_cast<std::size_t>(c)] = -aeff / hess[static_cast<std::size_t>(c)];
            }
        } else {
            for (int c = 0; c < d; ++c)
                dx[static_cast<std::size_t>(c)] =
                    -grad[static_cast<std::size_t>(c)] / hess[static_cast<std::size_t>(c)];
        }

        // largest step keeping every coordinate inside the clamp box
        double t_max = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i) {
            const double lo = kInteriorFloor * m.caps[static_cast<std::size_t>(i)];
            const double hi = (1.0 - kInteriorFloor) * m.caps[static_cast<std::size_t>(i)];
            const double di = dx[static_cast<std::size_t>(i)];
            const double zi = x[static_cast<std::size_t>(i)];
            if (di > 0.0) t_max = std::min(t_max, (hi - zi) / di);
            if (di < 0.0) t_max = std::min(t_max, (zi - lo) / -di);
        }
        double t = std::min(1.0, 0.9999 * t_max);
        bool moved = false;
        std::vector<double> trial(static_cast<std::size_t>(d));
        while (t > 1e-16) {
            for (int i = 0; i < d; ++i)
                trial[static_cast<std::size_t>(i)] =
                    x[static_cast<std::size_t>(i)] + t * dx[static_cast<std::size_t>(i)];
            detail::clamp_to_box(trial, m.caps);
            const double ftrial = objective_at(trial);
            if (ftrial <= fcur + 1e-12 * (1.0 + std::abs(fcur))) {
                x.swap(trial);
                fcur = ftrial;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;  // stalled; final convergence check below fails loudly
    }
    throw std::runtime_error("oftrl solve: no convergence, reduced-gradient norm " +
                             std::to_string(rg_norm));
}

// ---------------------------------------------------------------------------
// Carathéodory decomposition
// ---------------------------------------------------------------------------

namespace {

// Cancels cycles in the support of `probe` (marginal-preserving pushes) until
// the support is a forest, at which point integer marginals force integer
// values: a vertex of the transportation polytope inside the original support.
void cancel_to_forest(std::vector<double>& probe, int rows_m, int cols_n, double zero_tol) {
    const int nodes = rows_m + cols_n;
    auto arc = [&](int x, int y) { return static_cast<std::size_t>(x * cols_n + y); };

    for (int guard = 0; guard <= rows_m * cols_n; ++guard) {
        // DFS for a cycle in the bipartite support graph
        std::vector<int> par_node(static_cast<std::size_t>(nodes), -1);
        std::vector<int> par_arc(static_cast<std::size_t>(nodes), -1);
        std::vector<char> visited(static_cast<std::size_t>(nodes), 0);
        int cyc_a = -1, cyc_b = -1, cyc_arc = -1;

        auto neighbors = [&](int node, auto&& visit) {
            if (node < rows_m) {
                for (int y = 0; y < cols_n; ++y)
                    if (probe[arc(node, y)] > zero_tol) visit(rows_m + y, static_cast<int>(arc(node, y)));
            } else {
                const int y = node - rows_m;
                for (int x = 0; x < rows_m; ++x)
                    if (probe[arc(x, y)] > zero_tol) visit(x, static_cast<int>(arc(x, y)));
            }
        };

        std::vector<int> stack;
        for (int root = 0; root < nodes && cyc_arc < 0; ++root) {
            if (visited[static_cast<std::size_t>(root)]) continue;
            visited[static_cast<std::size_t>(root)] = 1;
            stack.assign(1, root);
            while (!stack.empty() && cyc_arc < 0) {
                const int node = stack.back();
                stack.pop_back();
                neighbors(node, [&](int next, int via) {
                    if (cyc_arc >= 0) return;
                    if (via == par_arc[static_cast<std::size_t>(node)]) return;
                    if (visited[static_cast<std::size_t>(next)]) {
                        cyc_a = node;
                        cyc_b = next;
                        cyc_arc = via;
                        return;
                    }
                    visited[static_cast<std::size_t>(next)] = 1;
                    par_node[static_cast<std::size_t>(next)] = node;
                    par_arc[static_cast<std::size_t>(next)] = via;
                    stack.push_back(next);
                });
            }
        }
        if (cyc_arc < 0) return;  // forest

        // Path from cyc_a up to cyc_b plus the closing arc forms the cycle.
        // With stack-based DFS cyc_b may not be an ancestor of cyc_a, so walk
        // both ancestries to the root and splice at the lowest common node.
        auto ancestry = [&](int node) {
            std::vector<int> chain_nodes{node};
            while (par_node[static_cast<std::size_t>(node)] >= 0) {
                node = par_node[static_cast<std::size_t>(node)];
                chain_nodes.push_back(node);
            }
            return chain_nodes;
        };
        const std::vector<int> chain_a = ancestry(cyc_a);
        const std::vector<int> chain_b = ancestry(cyc_b);
        std::vector<char> in_a(static_cast<std::size_t>(nodes), 0);
        for (int v : chain_a) in_a[static_cast<std::size_t>(v)] = 1;
        int meet = -1;
        for (int v : chain_b) {
            if (in_a[static_cast<std::size_t>(v)]) {
                meet = v;
                break;
            }
        }
        if (meet < 0) throw std::logic_error("decompose: disconnected cycle detection");

        std::vector<int> cycle_arcs;
        for (int v = cyc_a; v != meet; v = par_node[static_cast<std::size_t>(v)])
            cycle_arcs.push_back(par_arc[static_cast<std::size_t>(v)]);
        std::vector<int> tail;
        for (int v = cyc_b; v != meet; v = par_node[static_cast<std::size_t>(v)])
            tail.push_back(par_arc[static_cast<std::size_t>(v)]);
        std::reverse(tail.begin(), tail.end());
        cycle_arcs.insert(cycle_arcs.end(), tail.begin(), tail.end());
        cycle_arcs.push_back(cyc_arc);  // closes the cycle: cyc_b -> cyc_a

        // alternate signs around the cycle; bipartiteness makes it even
        double min_plus = std::numeric_limits<double>::infinity();
        double min_minus = std::numeric_limits<double>::infinity();
        for (std::size_t idx = 0; idx < cycle_arcs.size(); ++idx) {
            const double v = probe[static_cast<std::size_t>(cycle_arcs[idx])];
            if (idx % 2 == 0)
                min_plus = std::min(min_plus, v);
            else
                min_minus = std::min(min_minus, v);
        }
        const bool push_down_even = min_plus <= min_minus;
        const double delta = push_down_even ? min_plus : min_minus;
        for (std::size_t idx = 0; idx < cycle_arcs.size(); ++idx) {
            const bool down = (idx % 2 == 0) == push_down_even;
            double& v = probe[static_cast<std::size_t>(cycle_arcs[idx])];
            v += down ? -delta : delta;
            if (down && std::abs(v) <= zero_tol) v = 0.0;
        }
    }
    throw std::logic_error("decompose: cycle cancellation did not terminate");
}

ActionVector round_vertex(const std::vector<double>& probe, const detail::PolytopeModel& m) {
    ActionVector a;
    a.counts.resize(probe.size());
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double r = std::nearbyint(probe[i]);
        if (std::abs(probe[i] - r) > 1e-6)
            throw std::runtime_error("decompose: extracted vertex is not integral");
        a.counts[i] = static_cast<int>(r);
    }
    if (!validate_action(m.spec, a))
        throw std::runtime_error("decompose: extracted vertex is not a member action");
    return a;
}

// Walks `probe` to a vertex of { x in [0, caps] : eq x = rhs } by moving
// along null-space directions that vanish on already-tight coordinates.
void walk_to_vertex(std::vector<double>& probe, const detail::PolytopeModel& m) {
    const int d = m.d;
    const double snap = 1e-9;
    auto snap_bounds = [&](std::vector<double>& p) {
        for (int i = 0; i < d; ++i) {
            const double cap = m.caps[static_cast<std::size_t>(i)];
            if (std::abs(p[static_cast<std::size_t>(i)]) <= snap * std::max(1.0, cap))
                p[static_cast<std::size_t>(i)] = 0.0;
            if (std::abs(p[static_cast<std::size_t>(i)] - cap) <= snap * std::max(1.0, cap))
                p[static_cast<std::size_t>(i)] = cap;
        }
    };
    snap_bounds(probe);
    const std::size_t k = m.null_basis.size();
    if (k == 0) return;

    for (int guard = 0; guard <= d; ++guard) {
        std::vector<int> tight;
        for (int i = 0; i < d; ++i) {
            const double v = probe[static_cast<std::size_t>(i)];
            if (v == 0.0 || v == m.caps[static_cast<std::size_t>(i)]) tight.push_back(i);
        }
        detail::Matrix t(static_cast<int>(tight.size()), static_cast<int>(k));
        for (std::size_t r = 0; r < tight.size(); ++r)
            for (std::size_t c = 0; c < k; ++c)
                t.at(static_cast<int>(r), static_cast<int>(c)) =
                    m.null_basis[c][static_cast<std::size_t>(tight[r])];
        const auto combos = detail::null_space(std::move(t), 1e-9);
        if (combos.empty()) return;  // vertex

        std::vector<double> w(static_cast<std::size_t>(d), 0.0);
        for (std::size_t c = 0; c < k; ++c)
            for (int i = 0; i < d; ++i)
                w[static_cast<std::size_t>(i)] +=
                    combos.front()[c] * m.null_basis[c][static_cast<std::size_t>(i)];
        double wmax = 0.0;
        for (double v : w) wmax = std::max(wmax, std::abs(v));
        if (wmax < 1e-9) return;
        for (double& v : w) {
            v /= wmax;
            if (std::abs(v) < 1e-11) v = 0.0;
        }
        for (int i : tight) w[static_cast<std::size_t>(i)] = 0.0;

        auto max_step = [&](double sign) {
            double s = std::numeric_limits<double>::infinity();
            for (int i = 0; i < d; ++i) {
                const double wi = sign * w[static_cast<std::size_t>(i)];
                const double pi = probe[static_cast<std::size_t>(i)];
                if (wi > 0.0) s = std::min(s, (m.caps[static_cast<std::size_t>(i)] - pi) / wi);
                if (wi < 0.0) s = std::min(s, pi / -wi);
            }
            return s;
        };
        const double sp = max_step(1.0), sm = max_step(-1.0);
        if (!std::isfinite(sp) && !std::isfinite(sm))
            throw std::logic_error("decompose: unbounded direction in a box");
        const double sign = sp <= sm ? 1.0 : -1.0;
        const double step = std::min(sp, sm);
        for (int i = 0; i < d; ++i)
            probe[static_cast<std::size_t>(i)] += sign * step * w[static_cast<std::size_t>(i)];
        snap_bounds(probe);
    }
    throw std::logic_error("decompose: vertex walk did not terminate");
}

}  // namespace

ConvexDecomposer::ConvexDecomposer(const InstanceSpec& spec)
    : model_(std::make_unique<detail::PolytopeModel>(detail::build_model(spec))) {}

ConvexDecomposer::~ConvexDecomposer() = default;
ConvexDecomposer::ConvexDecomposer(ConvexDecomposer&&) noexcept = default;
ConvexDecomposer& ConvexDecomposer::operator=(ConvexDecomposer&&) noexcept = default;

Decomposition ConvexDecomposer::decompose(const FractionalPoint& input) const {
    const detail::PolytopeModel& m = *model_;
    const int d = m.d;
    if (static_cast<int>(input.x.size()) != d)
        throw std::invalid_argument("decompose: point length mismatch");

    double resid = 0.0;
    for (double v : detail::equality_violation(m, input.x)) resid = std::max(resid, std::abs(v));
    if (resid > 1e-9 * m.rhs_scale())
        throw std::invalid_argument("decompose: point violates the hull equalities");

    // peel on the exact affine projection, not the interior-clamped point
    std::vector<double> z = detail::project_to_affine(m, input.x);

    // integral points are their own one-atom decomposition
    {
        bool integral = true;
        ActionVector as_action;
        as_action.counts.assign(static_cast<std::size_t>(d), 0);
        for (int i = 0; i < d && integral; ++i) {
            const double r = std::nearbyint(z[static_cast<std::size_t>(i)]);
            integral = std::abs(z[static_cast<std::size_t>(i)] - r) <= 1e-10;
            as_action.counts[static_cast<std::size_t>(i)] = static_cast<int>(r);
        }
        if (integral && validate_action(m.spec, as_action)) {
            Decomposition whole;
            whole.atoms.push_back({std::move(as_action), 1.0});
            return whole;
        }
    }

    double cap_scale = 1.0;
    for (double c : m.caps) cap_scale = std::max(cap_scale, c);
    const double zero_tol = 1e-11 * cap_scale;

    Decomposition dec;
    double mu = 1.0;
    for (int guard = 0; guard <= d + 1; ++guard) {
        if (mu <= 1e-12) break;
        // restore the residual's equality constraints at its current mass;
        // vertex values are equality-determined, so this keeps them integral
        // even when mu is tiny and z carries accumulated rounding noise
        z = detail::project_to_affine(m, std::move(z), mu);
        std::vector<double> probe(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            probe[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] / mu;
            if (probe[static_cast<std::size_t>(i)] < zero_tol)
                probe[static_cast<std::size_t>(i)] = 0.0;
        }
        if (m.transport)
            cancel_to_forest(probe, m.rows_m, m.cols_n, zero_tol);
        else
            walk_to_vertex(probe, m);
        const ActionVector atom = round_vertex(probe, m);

        double lam = mu;
        int zeroed = -1;
        for (int i = 0; i < d; ++i) {
            const int ai = atom.counts[static_cast<std::size_t>(i)];
            const double zi = z[static_cast<std::size_t>(i)];
            if (ai > 0 && zi / ai < lam) {
                lam = zi / ai;
                zeroed = i;
            }
            const double cap = m.caps[static_cast<std::size_t>(i)];
            if (ai < cap) {
                const double room = (mu * cap - zi) / (cap - ai);
                if (room < lam) {
                    lam = room;
                    zeroed = -1;  // an upper bound became tight instead
                }
            }
        }
        lam = std::max(lam, 0.0);
        const bool final_atom = lam >= mu * (1.0 - 1e-9);
        if (final_atom) lam = mu;
        if (!final_atom && lam <= mu * 1e-12)
            throw std::runtime_error("decompose: peeling stalled");

        dec.atoms.push_back({atom, lam});
        for (int i = 0; i < d; ++i) {
            double& zi = z[static_cast<std::size_t>(i)];
            zi -= lam * atom.counts[static_cast<std::size_t>(i)];
            if (zi < 0.0) zi = 0.0;
        }
        if (zeroed >= 0) z[static_cast<std::size_t>(zeroed)] = 0.0;
        mu -= lam;
        if (final_atom) {
            mu = 0.0;
            break;
        }
    }
    if (mu > 1e-9) throw std::runtime_error("decompose: residual mass not exhausted");
    if (static_cast<int>(dec.atoms.size()) > d + 1)
        throw std::logic_error("decompose: more than d + 1 atoms");

    double weight_sum = 0.0;
    for (const auto& atom : dec.atoms) weight_sum += atom.weight;
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw std::runtime_error("decompose: weights do not sum to one");
    // absorb float drift into the heaviest atom so the sum is exact
    std::size_t heaviest = 0;
    for (std::size_t i = 1; i < dec.atoms.size(); ++i)
        if (dec.atoms[i].weight > dec.atoms[heaviest].weight) heaviest = i;
    dec.atoms[heaviest].weight += 1.0 - weight_sum;

    double recon_err = 0.0;
    for (int i = 0; i < d; ++i) {
        double s = -input.x[static_cast<std::size_t>(i)];
        for (const auto& atom : dec.atoms)
            s += atom.weight * atom.action.counts[static_cast<std::size_t>(i)];
        recon_err = std::max(recon_err, std::abs(s));
    }
    if (recon_err > 1e-9)
        throw std::runtime_error("decompose: reconstruction residual " +
                                 std::to_string(recon_err));
    return dec;
}

FractionalPoint solve_oftrl(const InstanceSpec& spec, const std::vector<double>& cumulative,
                            const std::vector<double>& q, const RegState& reg) {
    if (cumulative.size() != q.size())
        throw std::invalid_argument("solve_oftrl: cumulative/q length mismatch");
    std::vector<double> linear(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) linear[i] = q[i] + cumulative[i];
    OftrlSolver solver(spec);
    return solver.solve(linear, reg);
}

Decomposition decompose(const InstanceSpec& spec, const FractionalPoint& x) {
    return ConvexDecomposer(spec).decompose(x);
}

// ---------------------------------------------------------------------------
// GenLBINFV
// ---------------------------------------------------------------------------

GenLbinfv::GenLbinfv(InstanceSpec spec, int horizon, Predictor::Mode mode, std::uint64_t seed,
                     double eta, double epsilon_frac)
    : spec_(std::move(spec)),
      horizon_((horizon >= 1) ? horizon
                              : throw std::invalid_argument("genlbinfv: horizon must be >= 1")),
      reg_(spec_, std::log(static_cast<double>(horizon)), epsilon_frac),
      pred_(mode == Predictor::Mode::LeastSquares
                ? Predictor::least_squares(spec_.num_arms())
                : Predictor::gradient_descent(spec_.num_arms(), eta)),
      solver_(spec_),
      decomposer_(spec_),
      cumulative_(static_cast<std::size_t>(spec_.num_arms()), 0.0),
      rng_(seed, /*stream=*/0x1b1fULL) {}

GenLbinfvDecision GenLbinfv::decide() {
    const std::vector<double>& q = pred_.q();
    std::vector<double> linear(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) linear[i] = q[i] + cumulative_[i];

    GenLbinfvDecision decision;
    decision.x = solver_.solve(linear, reg_);
    decision.solver_iterations = solver_.last_iterations();
    decision.solver_residual = solver_.last_residual();
    const Decomposition dec = decomposer_.decompose(decision.x);
    decision.action = sample_action(dec, rng_);
    return decision;
}

std::vector<double> GenLbinfv::learn(const GenLbinfvDecision& decision, const Observation& obs) {
    const std::vector<double> q = pred_.q();
    const LossEstimate est = estimate_loss(decision.x, decision.action, obs, q);
    for (std::size_t i = 0; i < cumulative_.size(); ++i) cumulative_[i] += est.ell_hat[i];
    std::vector<double> alpha = reg_.update(decision.action, decision.x, est.k, q);
    pred_.update(decision.action, est.k);
    return alpha;
}

GenLbinfvRound GenLbinfv::play_round(const RoundLosses& losses, int t) {
    GenLbinfvDecision decision = decide();
    const Observation obs = observe(losses.corrupted, decision.action, t);

    GenLbinfvRound rec;
    rec.realized_loss = linear_loss(decision.action, losses.corrupted);
    rec.alpha = learn(decision, obs);
    rec.x = std::move(decision.x);
    rec.action = std::move(decision.action);
    rec.solver_iterations = decision.solver_iterations;
    rec.solver_residual = decision.solver_residual;
    return rec;
}

GenLbinfvRound GenLbinfv::run_round(Environment& env, int t) {
    const RoundLosses losses = env.draw_round(t);
    return play_round(losses, t);
}

}  // namespace mpcsb
