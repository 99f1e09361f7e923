#pragma once

// Backward-Euler realization of the subgradient flow u' + dW_B(u) ∋ 0 in the
// discrete L^2_mu, the Robin Poisson solver and boundary normal derivatives.
//
// Each implicit step minimizes
//   W_B(v) + |v - u|^2_mu / (2 tau),
// whose smooth part is the quadratic 1/2 v^T A v - b^T v with
//   A = 2 r_m L + M / tau,   b = M u / tau.
// Interior coordinates enter only linearly, so they are eliminated exactly
// (Schur complement onto the N boundary vertices) and the remaining
// N-dimensional nonsmooth problem is solved by cyclic proximal coordinate
// descent.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gasketflow/energy.hpp"
#include "gasketflow/measure.hpp"
#include "gasketflow/robin.hpp"

namespace gasketflow {

struct SolveStats {
    int iterations = 0;
    // Euclidean norm over boundary coordinates of dist(-grad, dB_i) plus the
    // Euclidean norm of the interior linear residual.
    double residual = 0.0;
};

// min 1/2 v^T A v - b^T v + sum_i B_i(v(p_i)) with A positive definite on the
// interior block and the boundary part solved coordinate-wise.
class BoundaryReducedSolver {
public:
    BoundaryReducedSolver(const GasketGraph& g, const Eigen::SparseMatrix<double>& A) : n_(g.vertex_count()) {
        const std::size_t N = g.boundary().size();
        boundary_ = g.boundary();
        position_.assign(n_, 0);
        std::vector<bool> on_boundary(n_, false);
        for (std::size_t i = 0; i < N; ++i) {
            on_boundary[boundary_[i]] = true;
            position_[boundary_[i]] = i;
        }
        for (std::size_t v = 0; v < n_; ++v) {
            if (!on_boundary[v]) {
                position_[v] = interior_.size();
                interior_.push_back(v);
            }
        }
        const auto nI = static_cast<Eigen::Index>(interior_.size());
        const auto nB = static_cast<Eigen::Index>(N);

        std::vector<Eigen::Triplet<double>> ii;
        A_IB_ = Eigen::MatrixXd::Zero(nI, nB);
        A_BB_ = Eigen::MatrixXd::Zero(nB, nB);
        for (int k = 0; k < A.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
                const auto r = static_cast<std::size_t>(it.row());
                const auto c = static_cast<std::size_t>(it.col());
                const auto pr = static_cast<Eigen::Index>(position_[r]);
                const auto pc = static_cast<Eigen::Index>(position_[c]);
                if (!on_boundary[r] && !on_boundary[c]) {
                    ii.emplace_back(pr, pc, it.value());
                } else if (!on_boundary[r] && on_boundary[c]) {
                    A_IB_(pr, pc) = it.value();
                } else if (on_boundary[r] && on_boundary[c]) {
                    A_BB_(pr, pc) = it.value();
                }
            }
        }
        A_II_.resize(nI, nI);
        A_II_.setFromTriplets(ii.begin(), ii.end());

        schur_ = A_BB_;
        if (nI > 0) {
            cholesky_.compute(A_II_);
            if (cholesky_.info() != Eigen::Success) throw DomainError("interior block is not positive definite");
            coupling_ = cholesky_.solve(A_IB_);
            schur_ -= A_IB_.transpose() * coupling_;
        }
        schur_ = 0.5 * (schur_ + schur_.transpose());
    }

    // Symmetric N x N reduced matrix acting on the boundary values.
    const Eigen::MatrixXd& schur() const { return schur_; }

    struct Result {
        std::vector<double> values;
        SolveStats stats;
        bool converged = false;
    };

    // `start` supplies the initial boundary values. If `project_constants`,
    // the reduced linear term is projected onto sum-zero vectors (pure
    // Neumann, where constants span the kernel). A nonempty `offset` (one
    // value per boundary point) shifts the boundary terms to B_i(offset_i + .),
    // so the unknown is an increment over a reference state.
    Result solve(const std::vector<double>& b, const RobinSpec& spec, std::vector<double> start, double tol,
                 int max_iters, bool project_constants = false, std::vector<double> offset = {}) const {
        const std::size_t N = boundary_.size();
        const auto nI = static_cast<Eigen::Index>(interior_.size());
        Eigen::VectorXd b_I(nI);
        Eigen::VectorXd c(static_cast<Eigen::Index>(N));
        for (Eigen::Index k = 0; k < nI; ++k) b_I[k] = b[interior_[static_cast<std::size_t>(k)]];
        for (std::size_t i = 0; i < N; ++i) c[static_cast<Eigen::Index>(i)] = b[boundary_[i]];
        Eigen::VectorXd y;
        if (nI > 0) {
            y = cholesky_.solve(b_I);
            c -= A_IB_.transpose() * y;
        }
        if (project_constants) c.array() -= c.mean();

        if (offset.empty()) offset.assign(N, 0.0);
        Eigen::VectorXd v(static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i < N; ++i) {
            const double s = start[i];
            v[static_cast<Eigen::Index>(i)] =
                spec[i](offset[i] + s).is_finite() ? s : spec[i].prox(1.0, offset[i] + s) - offset[i];
        }

        Result result;
        double boundary_residual = kInfinity;
        int sweep = 0;
        while (sweep < max_iters) {
            ++sweep;
            for (std::size_t i = 0; i < N; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double diag = schur_(ii, ii);
                const double off = schur_.row(ii).dot(v) - diag * v[ii];
                v[ii] = spec[i].prox(1.0 / diag, offset[i] + (c[ii] - off) / diag) - offset[i];
            }
            boundary_residual = boundary_kkt(spec, v, c, offset);
            if (boundary_residual <= tol) break;
        }

        result.values.assign(n_, 0.0);
        for (std::size_t i = 0; i < N; ++i) result.values[boundary_[i]] = v[static_cast<Eigen::Index>(i)];
        double interior_residual = 0.0;
        if (nI > 0) {
            const Eigen::VectorXd v_I = y - coupling_ * v;
            for (Eigen::Index k = 0; k < nI; ++k) result.values[interior_[static_cast<std::size_t>(k)]] = v_I[k];
            interior_residual = (A_II_ * v_I + A_IB_ * v - b_I).norm();
        }
        result.stats.iterations = sweep;
        result.stats.residual = boundary_residual + interior_residual;
        result.converged = boundary_residual <= tol;
        return result;
    }

private:
    double boundary_kkt(const RobinSpec& spec, const Eigen::VectorXd& v, const Eigen::VectorXd& c,
                        const std::vector<double>& offset) const {
        const Eigen::VectorXd neg_grad = c - schur_ * v;
        double sq = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double d = spec[k].subdifferential(offset[k] + v[i]).distance(neg_grad[i]);
            sq += d * d;
        }
        return std::sqrt(sq);
    }

    std::size_t n_;
    std::vector<std::size_t> boundary_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> position_;
    Eigen::SparseMatrix<double> A_II_;
    Eigen::MatrixXd A_IB_;
    Eigen::MatrixXd A_BB_;
    Eigen::MatrixXd coupling_;  // A_II^{-1} A_IB
    Eigen::MatrixXd schur_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> cholesky_;
};

struct FlowConfig {
    double tau = 0.05;
    double t_end = 1.0;
    double tol = 1e-9;
    int max_inner_iters = 100000;

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("tau must be positive");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive");
        if (tau > t_end) throw DomainError("tau must not exceed t_end");
        if (!(tol > 0.0)) throw DomainError("tol must be positive");
        if (max_inner_iters < 1) throw DomainError("max_inner_iters must be at least 1");
    }

    // Number of implicit steps needed to reach t_end.
    std::size_t steps() const { return static_cast<std::size_t>(std::ceil(t_end / tau - 1e-9)); }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<VertexFunction> states;
    std::vector<SolveStats> diagnostics;  // diagnostics[k] produced states[k + 1]

    std::size_t size() const { return states.size(); }
    const VertexFunction& back() const { return states.back(); }
};

class EvolveError : public ConvergenceError {
public:
    EvolveError(const ConvergenceError& cause, Trajectory partial)
        : ConvergenceError(cause.what(), cause.residual(), cause.iterations()), partial_(std::move(partial)) {}

    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

inline void require_convex(const RobinSpec& spec) {
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (!spec[i].is_convex()) {
            throw UnsupportedError("boundary functional B_" + std::to_string(i + 1) +
                                   " is not convex; the flow needs a convex W_B");
        }
    }
}

// Implicit Euler stepper for a fixed (form, measure, spec, tau); the interior
// factorization is shared by all steps.
class BackwardEuler {
public:
    BackwardEuler(const EnergyForm& form, const VertexMeasure& measure, RobinSpec spec, double tau)
        : form_(form), graph_(form.graph_ptr()), measure_(measure), spec_(std::move(spec)), tau_(tau),
          solver_(*graph_, system_matrix(form, measure, tau)) {
        require_matches(*graph_, spec_);
        require_convex(spec_);
        if (measure.tag() != graph_->tag()) throw DomainError("measure lives on a different graph");
    }

    double tau() const { return tau_; }

    VertexFunction step(const VertexFunction& u, double tol, int max_iters, SolveStats* stats = nullptr) const {
        require_on(*graph_, u);
        // increment d = v - u solves (2 r L + M / tau) d = -2 r L u, with the
        // boundary terms evaluated at u(p_i) + d(p_i)
        std::vector<double> b = form_.gradient(u);
        for (auto& x : b) x = -x;
        std::vector<double> offset;
        for (std::size_t p : graph_->boundary()) offset.push_back(u[p]);
        std::vector<double> start(offset.size(), 0.0);
        auto result = solver_.solve(b, spec_, std::move(start), tol, max_iters, false, std::move(offset));
        for (std::size_t x = 0; x < u.size(); ++x) result.values[x] += u[x];
        if (stats) *stats = result.stats;
        if (!result.converged) {
            throw ConvergenceError("backward Euler step did not reach tol " + std::to_string(tol) + " in " +
                                       std::to_string(max_iters) + " sweeps (residual " +
                                       std::to_string(result.stats.residual) + ")",
                                   result.stats.residual, result.stats.iterations);
        }
        return {u.tag, std::move(result.values)};
    }

private:
    static Eigen::SparseMatrix<double> system_matrix(const EnergyForm& form, const VertexMeasure& measure,
                                                     double tau) {
        if (!(tau > 0.0)) throw DomainError("tau must be positive");
        Eigen::SparseMatrix<double> A = 2.0 * form.renormalization() * graph_laplacian(form.graph());
        for (std::size_t x = 0; x < measure.size(); ++x) {
            A.coeffRef(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) += measure[x] / tau;
        }
        return A;
    }

    EnergyForm form_;
    GraphPtr graph_;
    VertexMeasure measure_;
    RobinSpec spec_;
    double tau_;
    BoundaryReducedSolver solver_;
};

// Unique minimizer of W_B(v) + |v - u|^2_mu / (2 tau).
inline VertexFunction backward_euler_step(const EnergyForm& form, const VertexMeasure& measure,
                                          const RobinSpec& spec, const VertexFunction& u, double tau, double tol,
                                          int max_iters = 100000, SolveStats* stats = nullptr) {
    return BackwardEuler(form, measure, spec, tau).step(u, tol, max_iters, stats);
}

// states[0] is u0 as given (it may lie outside dom W_B for indicator kinds);
// every later state is feasible because each implicit step minimizes over
// dom W_B.
inline Trajectory evolve(const EnergyForm& form, const VertexMeasure& measure, const RobinSpec& spec,
                         const VertexFunction& u0, const FlowConfig& config) {
    config.validate();
    require_on(form.graph(), u0, "initial value");
    for (double x : u0.values) {
        if (!std::isfinite(x)) throw DomainError("initial value must be finite");
    }
    const BackwardEuler stepper(form, measure, spec, config.tau);
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);
    const std::size_t steps = config.steps();
    for (std::size_t k = 1; k <= steps; ++k) {
        SolveStats stats;
        try {
            VertexFunction next = stepper.step(traj.states.back(), config.tol, config.max_inner_iters, &stats);
            traj.states.push_back(std::move(next));
        } catch (const ConvergenceError& e) {
            throw EvolveError(e, std::move(traj));
        }
        traj.times.push_back(static_cast<double>(k) * config.tau);
        traj.diagnostics.push_back(stats);
    }
    return traj;
}

// <u, 1_{p_i}>_m: the boundary flux of u at p_i in the Gauss-Green identity
//   <u, v>_m = <f, v>_mu + sum_i (du/dnu)(p_i) v(p_i)
// satisfied by the solutions of the Robin problem. Outward positive.
inline double normal_derivative(const EnergyForm& form, const VertexFunction& u, std::size_t i) {
    const GasketGraph& g = form.graph();
    require_on(g, u);
    if (i >= g.boundary().size()) throw DomainError("boundary index " + std::to_string(i) + " out of range");
    const std::size_t p = g.boundary()[i];
    CompensatedSum acc;
    for (std::size_t y : g.neighbors(p)) acc.add(u[p] - u[y]);
    return 2.0 * form.renormalization() * acc.value();
}

// ((N+2)/N)^m sum_{y ~ p_i} (u(p_i) - u(y)), the level-m renormalized
// boundary difference sum. Equals half of normal_derivative().
inline double boundary_difference_sum(const EnergyForm& form, const VertexFunction& u, std::size_t i) {
    return 0.5 * normal_derivative(form, u, i);
}

struct PoissonResult {
    VertexFunction u;
    SolveStats stats;
    // max over test functions 1_x of |<u, 1_x>_m + g(x) - <f, 1_x>_mu| with
    // g(p_i) the closest element of dB_i(u(p_i)) and g = 0 in the interior
    double weak_residual = 0.0;
    std::vector<double> boundary_selection;  // chosen element of dB_i(u(p_i))
};

inline bool is_pure_neumann(const RobinSpec& spec) {
    return std::all_of(spec.B.begin(), spec.B.end(),
                       [](const BoundaryFunctional& b) { return b.kind() == BoundaryKind::Zero; });
}

// Weak residual of a candidate Robin-Poisson solution.
inline PoissonResult poisson_residual(const EnergyForm& form, const VertexMeasure& measure, const RobinSpec& spec,
                                      const VertexFunction& f, VertexFunction u) {
    const GasketGraph& g = form.graph();
    const std::vector<double> grad = form.gradient(u);
    PoissonResult out;
    double worst = 0.0;
    for (std::size_t x = 0; x < g.vertex_count(); ++x) {
        if (g.is_boundary(x)) continue;
        worst = std::max(worst, std::abs(grad[x] - measure[x] * f[x]));
    }
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const std::size_t p = g.boundary()[i];
        const double target = measure[p] * f[p] - grad[p];  // g must equal this
        const Interval sub = spec[i].subdifferential(u[p]);
        const double selection = sub.empty() ? kInfinity : std::clamp(target, sub.lo, sub.hi);
        out.boundary_selection.push_back(selection);
        worst = std::max(worst, sub.distance(target));
    }
    out.u = std::move(u);
    out.weak_residual = worst;
    return out;
}

// Minimizer of W_B(u) - <f, u>_mu. For pure Neumann data f must have zero
// mu-mean and the solution is normalised to zero mu-mean.
inline PoissonResult poisson_solve(const EnergyForm& form, const VertexMeasure& measure, const RobinSpec& spec,
                                   const VertexFunction& f, double tol = 1e-12, int max_iters = 100000) {
    const GasketGraph& g = form.graph();
    require_on(g, f, "right-hand side");
    require_matches(g, spec);
    require_convex(spec);
    const bool neumann = is_pure_neumann(spec);
    if (neumann) {
        double scale = 0.0;
        for (std::size_t x = 0; x < f.size(); ++x) scale += measure[x] * std::abs(f[x]);
        if (std::abs(mean(measure, f)) > 1e-10 * std::max(1.0, scale)) {
            throw DomainError("Neumann problem needs a right-hand side with zero mu-mean");
        }
    }
    const Eigen::SparseMatrix<double> A = 2.0 * form.renormalization() * graph_laplacian(g);
    const BoundaryReducedSolver solver(g, A);
    std::vector<double> b(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) b[x] = measure[x] * f[x];
    auto result = solver.solve(b, spec, std::vector<double>(spec.size(), 0.0), tol, max_iters, neumann);
    if (!result.converged) {
        throw ConvergenceError("Poisson solve did not converge (residual " + std::to_string(result.stats.residual) +
                                   "); the problem may be unbounded below",
                               result.stats.residual, result.stats.iterations);
    }
    VertexFunction u{g.tag(), std::move(result.values)};
    if (neumann) {
        const double shift = mean(measure, u);
        for (auto& x : u.values) x -= shift;
    }
    PoissonResult out = poisson_residual(form, measure, spec, f, std::move(u));
    out.stats = result.stats;
    return out;
}

}  // namespace gasketflow
