#pragma once

// Renormalized graph energies on V_m,
//   W_m(u)      = ((N+2)/N)^m * sum over unordered edges {x,y} of (u(x)-u(y))^2,
//   <u, v>_m    = ((N+2)/N)^m * sum over ordered pairs x~y of (u(x)-u(y))(v(x)-v(y)),
// so that W_m(u) = <u,u>_m / 2, and the harmonic extension between levels.

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gasketflow/gasket.hpp"
#include "gasketflow/numeric.hpp"

namespace gasketflow {

using GraphPtr = std::shared_ptr<const GasketGraph>;

inline GraphPtr make_level(int n_points, int level) {
    return std::make_shared<const GasketGraph>(build_level(n_points, level));
}

// ((N+2)/N)^m, evaluated as a power rather than accumulated across levels.
inline double renormalization(int n_points, int level) {
    return std::pow(static_cast<double>(n_points + 2) / static_cast<double>(n_points), level);
}

// Unit-weight graph Laplacian L, with sum_edges (u_x - u_y)^2 = u^T L u.
inline Eigen::SparseMatrix<double> graph_laplacian(const GasketGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(4 * g.edge_count());
    for (auto [a, b] : g.edges()) {
        const auto i = static_cast<Eigen::Index>(a);
        const auto j = static_cast<Eigen::Index>(b);
        entries.emplace_back(i, i, 1.0);
        entries.emplace_back(j, j, 1.0);
        entries.emplace_back(i, j, -1.0);
        entries.emplace_back(j, i, -1.0);
    }
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(entries.begin(), entries.end());
    return L;
}

class EnergyForm {
public:
    explicit EnergyForm(GraphPtr graph)
        : graph_(std::move(graph)), scale_(gasketflow::renormalization(graph_->n_points(), graph_->level())) {}

    const GasketGraph& graph() const { return *graph_; }
    const GraphPtr& graph_ptr() const { return graph_; }
    double renormalization() const { return scale_; }

    double energy(const VertexFunction& u) const {
        require_on(*graph_, u);
        CompensatedSum acc;
        for (auto [a, b] : graph_->edges()) {
            const double d = u[a] - u[b];
            acc.add(d * d);
        }
        return scale_ * acc.value();
    }

    double inner(const VertexFunction& u, const VertexFunction& v) const {
        require_on(*graph_, u);
        require_on(*graph_, v);
        CompensatedSum acc;
        for (auto [a, b] : graph_->edges()) acc.add((u[a] - u[b]) * (v[a] - v[b]));
        // each unordered edge appears twice among ordered pairs
        return 2.0 * scale_ * acc.value();
    }

    // Gradient of W_m in the Euclidean coordinates: <u, e_x>_m for every x.
    std::vector<double> gradient(const VertexFunction& u) const {
        require_on(*graph_, u);
        std::vector<double> grad(u.size(), 0.0);
        for (std::size_t x = 0; x < u.size(); ++x) {
            CompensatedSum acc;
            for (std::size_t y : graph_->neighbors(x)) acc.add(u[x] - u[y]);
            grad[x] = 2.0 * scale_ * acc.value();
        }
        return grad;
    }

private:
    GraphPtr graph_;
    double scale_;
};

namespace detail {

// Local harmonic extension rule for one cell: new vertex q_{ij} (i < j, in
// row-major pair order) takes the value row_{ij} . (corner values). Obtained
// by minimizing the level-1 energy of a single cell over its midpoints.
class ExtensionRule {
public:
    explicit ExtensionRule(int n_points) : n_(static_cast<std::size_t>(n_points)) {
        const std::size_t P = n_ * (n_ - 1) / 2;
        const std::size_t total = n_ + P;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
        auto node = [&](std::size_t i, std::size_t j) {  // vertex F_i(p_j) of the level-1 cell
            return i == j ? i : n_ + pair_index(std::min(i, j), std::max(i, j));
        };
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t a = 0; a < n_; ++a) {
                for (std::size_t b = a + 1; b < n_; ++b) {
                    const auto x = static_cast<Eigen::Index>(node(i, a));
                    const auto y = static_cast<Eigen::Index>(node(i, b));
                    K(x, x) += 1.0;
                    K(y, y) += 1.0;
                    K(x, y) -= 1.0;
                    K(y, x) -= 1.0;
                }
            }
        }
        const auto c = static_cast<Eigen::Index>(n_);
        const auto p = static_cast<Eigen::Index>(P);
        rule_ = -K.bottomRightCorner(p, p).llt().solve(K.bottomLeftCorner(p, c));
    }

    std::size_t pair_index(std::size_t i, std::size_t j) const {
        // position of (i, j), i < j, in the row-major list of pairs
        return i * n_ - i * (i + 1) / 2 + (j - i - 1);
    }

    // rows: midpoints in pair order, columns: corners
    const Eigen::MatrixXd& matrix() const { return rule_; }

private:
    std::size_t n_;
    Eigen::MatrixXd rule_;
};

}  // namespace detail

// Minimal-energy extension of u from `coarse` (level m) to `fine` (level m+1).
inline VertexFunction harmonic_extend(const GasketGraph& coarse, const VertexFunction& u, const GasketGraph& fine) {
    require_on(coarse, u);
    if (fine.n_points() != coarse.n_points() || fine.level() != coarse.level() + 1) {
        throw DomainError("harmonic_extend needs the next finer level of the same gasket");
    }
    const auto N = static_cast<std::size_t>(coarse.n_points());
    const detail::ExtensionRule rule(coarse.n_points());
    VertexFunction out = VertexFunction::zero(fine);
    std::vector<std::uint64_t> label(N);

    for (std::size_t v = 0; v < coarse.vertex_count(); ++v) {
        auto w = coarse.weights(v);
        for (std::size_t j = 0; j < N; ++j) label[j] = w[j] << 1;
        out[fine.find(label)] = u[v];
    }

    Eigen::VectorXd corner_values(static_cast<Eigen::Index>(N));
    for (std::size_t c = 0; c < coarse.cell_count(); ++c) {
        auto corners = coarse.cell(c);
        for (std::size_t j = 0; j < N; ++j) corner_values[static_cast<Eigen::Index>(j)] = u[corners[j]];
        const Eigen::VectorXd mid = rule.matrix() * corner_values;
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = i + 1; j < N; ++j) {
                // midpoint label at level m+1 is the sum of the two level-m corner labels
                auto wi = coarse.weights(corners[i]);
                auto wj = coarse.weights(corners[j]);
                for (std::size_t k = 0; k < N; ++k) label[k] = wi[k] + wj[k];
                out[fine.find(label)] = mid[static_cast<Eigen::Index>(rule.pair_index(i, j))];
            }
        }
    }
    return out;
}

inline VertexFunction harmonic_extend(const GasketGraph& coarse, const VertexFunction& u) {
    return harmonic_extend(coarse, u, build_level(coarse.n_points(), coarse.level() + 1));
}

// Harmonic function on `target` with the given values at p_1, ..., p_N.
inline VertexFunction harmonic_function(const GasketGraph& target, std::span<const double> boundary_values) {
    if (boundary_values.size() != static_cast<std::size_t>(target.n_points())) {
        throw DomainError("harmonic_function needs one boundary value per point p_i");
    }
    GasketGraph current = build_level(target.n_points(), 0);
    VertexFunction u = VertexFunction::zero(current);
    for (std::size_t i = 0; i < boundary_values.size(); ++i) u[current.boundary()[i]] = boundary_values[i];
    while (current.level() < target.level()) {
        GasketGraph next = build_level(target.n_points(), current.level() + 1);
        u = harmonic_extend(current, u, next);
        current = std::move(next);
    }
    return u;
}

// W_m of the restrictions of u to V_0, ..., V_M.
inline std::vector<double> energy_profile(const GasketGraph& g, const VertexFunction& u) {
    require_on(g, u);
    std::vector<double> profile;
    for (int m = 0; m <= g.level(); ++m) {
        auto coarse = make_level(g.n_points(), m);
        profile.push_back(EnergyForm(coarse).energy(restrict(g, u, *coarse)));
    }
    return profile;
}

// Entrywise helpers used by the lattice identities.
inline VertexFunction pointwise_max(const VertexFunction& u, const VertexFunction& v) {
    if (u.tag != v.tag) throw DomainError("lattice operation on functions of different graphs");
    VertexFunction out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(u[i], v[i]);
    return out;
}

inline VertexFunction pointwise_min(const VertexFunction& u, const VertexFunction& v) {
    if (u.tag != v.tag) throw DomainError("lattice operation on functions of different graphs");
    VertexFunction out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(u[i], v[i]);
    return out;
}

template <class F>
VertexFunction apply(const VertexFunction& u, F&& h) {
    VertexFunction out = u;
    for (auto& x : out.values) x = h(x);
    return out;
}

}  // namespace gasketflow
