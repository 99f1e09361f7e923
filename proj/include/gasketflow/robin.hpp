#pragma once

// Boundary functionals B_i : R -> [0, inf] and the perturbed energy
//   W_B(u) = W_m(u) + sum_i B_i(u(p_i)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gasketflow/energy.hpp"
#include "gasketflow/numeric.hpp"

namespace gasketflow {

enum class BoundaryKind {
    Zero,                // Neumann
    DirichletIndicator,  // 0 at 0, inf elsewhere
    Quadratic,           // beta s^2 / 2
    AbsoluteValue,       // beta |s|
    Power,               // beta |s|^p / p, p >= 1
    BoxIndicator,        // 0 on [a, b], inf elsewhere, a <= 0 <= b
    PiecewiseQuadratic,  // piecewise linear-quadratic, continuous, given by breakpoints
};

// Closed interval [lo, hi] of the extended real line; empty when lo > hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return lo > hi; }
    static Interval point(double x) { return {x, x}; }
    static Interval none() { return {kInfinity, -kInfinity}; }

    double distance(double z) const {
        if (empty()) return kInfinity;
        if (z < lo) return lo - z;
        if (z > hi) return z - hi;
        return 0.0;
    }
};

class BoundaryFunctional {
public:
    // One piece of a piecewise linear-quadratic functional: a + b s + c s^2.
    using Piece = std::array<double, 3>;

    static BoundaryFunctional zero() { return BoundaryFunctional(BoundaryKind::Zero); }
    static BoundaryFunctional dirichlet() { return BoundaryFunctional(BoundaryKind::DirichletIndicator); }

    static BoundaryFunctional quadratic(double beta) {
        require_positive(beta, "quadratic beta");
        BoundaryFunctional b(BoundaryKind::Quadratic);
        b.beta_ = beta;
        return b;
    }

    static BoundaryFunctional absolute_value(double beta) {
        require_positive(beta, "absolute-value beta");
        BoundaryFunctional b(BoundaryKind::AbsoluteValue);
        b.beta_ = beta;
        return b;
    }

    static BoundaryFunctional power(double beta, double p) {
        require_positive(beta, "power beta");
        if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("power exponent must be >= 1");
        BoundaryFunctional b(BoundaryKind::Power);
        b.beta_ = beta;
        b.exponent_ = p;
        return b;
    }

    static BoundaryFunctional box(double lower, double upper) {
        if (!(lower <= 0.0 && 0.0 <= upper)) throw DomainError("box indicator needs lower <= 0 <= upper");
        BoundaryFunctional b(BoundaryKind::BoxIndicator);
        b.lower_ = lower;
        b.upper_ = upper;
        return b;
    }

    // pieces[0] lives on (-inf, breakpoints[0]], pieces[k] on
    // [breakpoints[k-1], breakpoints[k]], the last on [breakpoints.back(), inf).
    static BoundaryFunctional piecewise(std::vector<double> breakpoints, std::vector<Piece> pieces) {
        if (pieces.size() != breakpoints.size() + 1) {
            throw DomainError("piecewise functional needs exactly one more piece than breakpoints");
        }
        for (std::size_t k = 0; k < breakpoints.size(); ++k) {
            if (!std::isfinite(breakpoints[k]) || (k > 0 && !(breakpoints[k - 1] < breakpoints[k]))) {
                throw DomainError("piecewise breakpoints must be finite and strictly increasing");
            }
        }
        BoundaryFunctional b(BoundaryKind::PiecewiseQuadratic);
        b.breakpoints_ = std::move(breakpoints);
        b.pieces_ = std::move(pieces);
        b.validate_piecewise();
        return b;
    }

    BoundaryKind kind() const { return kind_; }
    double beta() const { return beta_; }
    double exponent() const { return exponent_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    bool is_convex() const {
        if (kind_ != BoundaryKind::PiecewiseQuadratic) return true;
        return piecewise_convex_;
    }

    Extended operator()(double s) const {
        switch (kind_) {
            case BoundaryKind::Zero: return Extended(0.0);
            case BoundaryKind::DirichletIndicator: return s == 0.0 ? Extended(0.0) : Extended::infinity();
            case BoundaryKind::Quadratic: return Extended(0.5 * beta_ * s * s);
            case BoundaryKind::AbsoluteValue: return Extended(beta_ * std::abs(s));
            case BoundaryKind::Power: return Extended(beta_ * std::pow(std::abs(s), exponent_) / exponent_);
            case BoundaryKind::BoxIndicator:
                return (lower_ <= s && s <= upper_) ? Extended(0.0) : Extended::infinity();
            case BoundaryKind::PiecewiseQuadratic: {
                const Piece& q = pieces_[piece_of(s)];
                return Extended(std::max(0.0, q[0] + q[1] * s + q[2] * s * s));
            }
        }
        return Extended::infinity();
    }

    // argmin_t B(t) + (t - s)^2 / (2 lambda)
    double prox(double lambda, double s) const {
        if (!(lambda > 0.0)) throw DomainError("prox step must be positive");
        if (!is_convex()) throw UnsupportedError("prox of a nonconvex boundary functional");
        switch (kind_) {
            case BoundaryKind::Zero: return s;
            case BoundaryKind::DirichletIndicator: return 0.0;
            case BoundaryKind::Quadratic: return s / (1.0 + lambda * beta_);
            case BoundaryKind::AbsoluteValue: return soft_threshold(s, lambda * beta_);
            case BoundaryKind::Power: return prox_power(lambda, s);
            case BoundaryKind::BoxIndicator: return std::clamp(s, lower_, upper_);
            case BoundaryKind::PiecewiseQuadratic: return prox_piecewise(lambda, s);
        }
        return s;
    }

    // Convex subdifferential at s (empty outside the effective domain).
    Interval subdifferential(double s) const {
        if (!is_convex()) throw UnsupportedError("subdifferential of a nonconvex boundary functional");
        switch (kind_) {
            case BoundaryKind::Zero: return Interval::point(0.0);
            case BoundaryKind::DirichletIndicator: return s == 0.0 ? Interval{-kInfinity, kInfinity} : Interval::none();
            case BoundaryKind::Quadratic: return Interval::point(beta_ * s);
            case BoundaryKind::AbsoluteValue: return s == 0.0 ? Interval{-beta_, beta_} : Interval::point(beta_ * sgn(s));
            case BoundaryKind::Power:
                if (exponent_ == 1.0) return s == 0.0 ? Interval{-beta_, beta_} : Interval::point(beta_ * sgn(s));
                return Interval::point(beta_ * sgn(s) * std::pow(std::abs(s), exponent_ - 1.0));
            case BoundaryKind::BoxIndicator: {
                if (s < lower_ || s > upper_) return Interval::none();
                const double lo = (s == lower_) ? -kInfinity : 0.0;
                const double hi = (s == upper_) ? kInfinity : 0.0;
                return {lo, hi};
            }
            case BoundaryKind::PiecewiseQuadratic: {
                auto it = std::find(breakpoints_.begin(), breakpoints_.end(), s);
                if (it == breakpoints_.end()) return Interval::point(slope(pieces_[piece_of(s)], s));
                const auto k = static_cast<std::size_t>(it - breakpoints_.begin());
                return {slope(pieces_[k], s), slope(pieces_[k + 1], s)};
            }
        }
        return Interval::none();
    }

    friend bool operator==(const BoundaryFunctional&, const BoundaryFunctional&) = default;

private:
    explicit BoundaryFunctional(BoundaryKind kind) : kind_(kind) {}

    static void require_positive(double x, const char* what) {
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
    }

    static double soft_threshold(double s, double t) {
        if (s > t) return s - t;
        if (s < -t) return s + t;
        return 0.0;
    }

    static double slope(const Piece& q, double s) { return q[1] + 2.0 * q[2] * s; }

    std::size_t piece_of(double s) const {
        return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), s) -
                                        breakpoints_.begin());
    }

    double prox_power(double lambda, double s) const {
        const double t = lambda * beta_;
        if (exponent_ == 1.0) return soft_threshold(s, t);
        if (exponent_ == 2.0) return s / (1.0 + t);
        // x + t x^(p-1) = |s| has a unique root in [0, |s|]
        const double target = std::abs(s);
        double lo = 0.0;
        double hi = target;
        for (int it = 0; it < 200 && lo < hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (mid + t * std::pow(mid, exponent_ - 1.0) < target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return sgn(s) * 0.5 * (lo + hi);
    }

    double prox_piecewise(double lambda, double s) const {
        double best_t = 0.0;
        double best_value = kInfinity;
        for (std::size_t k = 0; k < pieces_.size(); ++k) {
            const double lo = k == 0 ? -kInfinity : breakpoints_[k - 1];
            const double hi = k == breakpoints_.size() ? kInfinity : breakpoints_[k];
            const Piece& q = pieces_[k];
            const double t = std::clamp((s - lambda * q[1]) / (1.0 + 2.0 * lambda * q[2]), lo, hi);
            const double value = q[0] + q[1] * t + q[2] * t * t + (t - s) * (t - s) / (2.0 * lambda);
            if (value < best_value) {
                best_value = value;
                best_t = t;
            }
        }
        return best_t;
    }

    void validate_piecewise() {
        constexpr double tol = 1e-12;
        auto value = [](const Piece& q, double s) { return q[0] + q[1] * s + q[2] * s * s; };
        for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
            const double s = breakpoints_[k];
            const double left = value(pieces_[k], s);
            const double right = value(pieces_[k + 1], s);
            if (std::abs(left - right) > tol * (1.0 + std::abs(left))) {
                throw DomainError("piecewise functional is discontinuous at breakpoint " + std::to_string(s));
            }
        }
        if (std::abs(value(pieces_[piece_of(0.0)], 0.0)) > tol) {
            throw DomainError("boundary functional must be normalised, B(0) = 0");
        }
        // bi-monotone: slope <= 0 left of 0 and >= 0 right of 0 on every piece
        for (std::size_t k = 0; k < pieces_.size(); ++k) {
            const Piece& q = pieces_[k];
            const double lo = k == 0 ? -kInfinity : breakpoints_[k - 1];
            const double hi = k == breakpoints_.size() ? kInfinity : breakpoints_[k];
            auto check = [&](double a, double b, bool want_nonnegative) {
                if (!(a < b)) return;
                for (double s : {a, b}) {
                    double d;
                    if (std::isinf(s)) {
                        d = q[2] != 0.0 ? std::copysign(kInfinity, q[2] * s) : q[1];
                    } else {
                        d = slope(q, s);
                    }
                    if (want_nonnegative ? d < -tol : d > tol) {
                        throw DomainError("piecewise functional is not bi-monotone");
                    }
                }
            };
            check(lo, std::min(hi, 0.0), false);
            check(std::max(lo, 0.0), hi, true);
        }
        piecewise_convex_ = std::all_of(pieces_.begin(), pieces_.end(), [](const Piece& q) { return q[2] >= 0.0; });
        for (std::size_t k = 0; k < breakpoints_.size() && piecewise_convex_; ++k) {
            const double s = breakpoints_[k];
            if (slope(pieces_[k], s) > slope(pieces_[k + 1], s) + tol) piecewise_convex_ = false;
        }
    }

    BoundaryKind kind_ = BoundaryKind::Zero;
    double beta_ = 0.0;
    double exponent_ = 1.0;
    double lower_ = 0.0;
    double upper_ = 0.0;
    std::vector<double> breakpoints_;
    std::vector<Piece> pieces_;
    bool piecewise_convex_ = true;
};

// B = (B_1, ..., B_N), one functional per point of V_0.
struct RobinSpec {
    std::vector<BoundaryFunctional> B;

    static RobinSpec uniform(int n_points, const BoundaryFunctional& b) {
        return {std::vector<BoundaryFunctional>(static_cast<std::size_t>(n_points), b)};
    }
    static RobinSpec neumann(int n_points) { return uniform(n_points, BoundaryFunctional::zero()); }
    static RobinSpec dirichlet(int n_points) { return uniform(n_points, BoundaryFunctional::dirichlet()); }

    std::size_t size() const { return B.size(); }
    const BoundaryFunctional& operator[](std::size_t i) const { return B[i]; }

    bool is_convex() const {
        return std::all_of(B.begin(), B.end(), [](const BoundaryFunctional& b) { return b.is_convex(); });
    }
};

inline void require_matches(const GasketGraph& g, const RobinSpec& spec) {
    if (spec.size() != static_cast<std::size_t>(g.n_points())) {
        throw DomainError("Robin spec has " + std::to_string(spec.size()) + " functionals but N=" +
                          std::to_string(g.n_points()));
    }
}

inline Extended eval_B(const BoundaryFunctional& b, double s) { return b(s); }

inline double prox_B(const BoundaryFunctional& b, double lambda, double s) { return b.prox(lambda, s); }

inline Extended boundary_part(const GasketGraph& g, const RobinSpec& spec, const VertexFunction& u) {
    require_matches(g, spec);
    Extended total(0.0);
    for (std::size_t i = 0; i < spec.size(); ++i) total += spec[i](u[g.boundary()[i]]);
    return total;
}

// W_B(u) = W_m(u) + sum_i B_i(u(p_i)), infinite when any term is.
inline Extended eval_WB(const EnergyForm& form, const RobinSpec& spec, const VertexFunction& u) {
    const Extended boundary = boundary_part(form.graph(), spec, u);
    if (boundary.is_infinite()) return boundary;
    return Extended(form.energy(u)) + boundary;
}

// Symmetric sample grid used by the sampled bi-monotonicity checks.
inline std::vector<double> default_grid() {
    std::vector<double> grid;
    for (int k = -1600; k <= 1600; ++k) grid.push_back(k / 200.0);
    for (double s : {1e-9, 1e-6, 1e-3, 12.5, 20.0, 50.0, 100.0, 1e3}) {
        grid.push_back(s);
        grid.push_back(-s);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

// Decreasing on the nonpositive part of the grid, increasing on the
// nonnegative part. Values may be +-inf.
inline bool bimonotone_on_grid(const std::function<double(double)>& f, const std::vector<double>& grid,
                               double tol = 1e-12) {
    std::optional<double> prev_s;
    double prev = 0.0;
    for (double s : grid) {
        const double value = f(s);
        if (prev_s) {
            auto leq = [tol](double a, double b) {
                return a <= b || (std::isfinite(b) && a - b <= tol * (1.0 + std::abs(b)));
            };
            if (s <= 0.0 && !leq(value, prev)) return false;
            if (*prev_s >= 0.0 && !leq(prev, value)) return false;
        }
        prev_s = s;
        prev = value;
    }
    return true;
}

inline bool is_bimonotone(const BoundaryFunctional& b, const std::vector<double>& grid = default_grid()) {
    return bimonotone_on_grid([&](double s) { return b(s).value(); }, grid);
}

// Sampled check that s -> hat(s) - base(|s|) is bi-monotone, with inf - inf = inf.
inline bool dominance_condition(const BoundaryFunctional& hat, const BoundaryFunctional& base,
                                const std::vector<double>& grid = default_grid()) {
    return bimonotone_on_grid([&](double s) { return extended_diff(hat(s), base(std::abs(s))); }, grid);
}

inline bool dominance_condition(const RobinSpec& hat, const RobinSpec& base,
                                const std::vector<double>& grid = default_grid()) {
    if (hat.size() != base.size()) throw DomainError("specs of different length");
    for (std::size_t i = 0; i < hat.size(); ++i) {
        if (!dominance_condition(hat[i], base[i], grid)) return false;
    }
    return true;
}

}  // namespace gasketflow
