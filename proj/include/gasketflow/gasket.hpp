#pragma once

// Level-m combinatorial approximation V_m of the N-point Sierpinski gasket.
//
// A vertex F_w(p_i), w = (w_1, ..., w_m), is labelled by the integer vector
//   a = sum_k 2^(m-k) e_{w_k} + e_i,      sum_j a_j = 2^m,
// i.e. its barycentric coordinates scaled by 2^m. Two corners denote the same
// point exactly when their labels agree, so vertex identification never goes
// through floating point.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gasketflow/error.hpp"

namespace gasketflow {

inline constexpr int kMaxLevel = 40;
inline constexpr std::size_t kMaxCells = std::size_t{1} << 24;

struct VertexAddress {
    int level = 0;
    std::vector<std::uint64_t> weights;

    std::size_t n_points() const { return weights.size(); }

    // Same label expressed at a finer level.
    VertexAddress rescaled(int finer_level) const {
        if (finer_level < level) throw DomainError("cannot rescale an address to a coarser level");
        VertexAddress out{finer_level, weights};
        for (auto& a : out.weights) a <<= (finer_level - level);
        return out;
    }

    friend bool operator==(const VertexAddress&, const VertexAddress&) = default;
};

// Whether two addresses (possibly at different levels) denote the same point.
inline bool same_point(const VertexAddress& a, const VertexAddress& b) {
    if (a.weights.size() != b.weights.size()) return false;
    const int common = std::max(a.level, b.level);
    return a.rescaled(common).weights == b.rescaled(common).weights;
}

// (N, m) determines the canonical graph, so it doubles as graph identity.
struct GraphTag {
    int n_points = 0;
    int level = 0;
    friend bool operator==(const GraphTag&, const GraphTag&) = default;
};

class GasketGraph {
public:
    GasketGraph() = default;

    int n_points() const { return n_points_; }
    int level() const { return level_; }
    GraphTag tag() const { return {n_points_, level_}; }

    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t cell_count() const { return cell_count_; }
    std::size_t edge_count() const { return edges_.size(); }

    // Barycentric label of vertex `v`, scaled by 2^level.
    std::span<const std::uint64_t> weights(std::size_t v) const {
        return {weights_.data() + v * static_cast<std::size_t>(n_points_), static_cast<std::size_t>(n_points_)};
    }
    VertexAddress address(std::size_t v) const {
        auto w = weights(v);
        return {level_, {w.begin(), w.end()}};
    }

    // Corner indices of cell `c`; corner j is F_w(p_j).
    std::span<const std::size_t> cell(std::size_t c) const {
        return {cells_.data() + c * static_cast<std::size_t>(n_points_), static_cast<std::size_t>(n_points_)};
    }
    // Word (w_1, ..., w_m) of cell `c`, letters in [0, N).
    std::vector<int> cell_word(std::size_t c) const {
        std::vector<int> word(static_cast<std::size_t>(level_));
        for (int k = level_ - 1; k >= 0; --k) {
            word[static_cast<std::size_t>(k)] = static_cast<int>(c % static_cast<std::size_t>(n_points_));
            c /= static_cast<std::size_t>(n_points_);
        }
        return word;
    }

    // Unordered edges, each stored once with first < second, sorted.
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
    const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_[v]; }
    // boundary()[i] is the index of p_i.
    const std::vector<std::size_t>& boundary() const { return boundary_; }

    bool is_boundary(std::size_t v) const {
        return std::find(boundary_.begin(), boundary_.end(), v) != boundary_.end();
    }

    // Index of the vertex with the given label at this graph's level, or
    // vertex_count() if absent.
    std::size_t find(std::span<const std::uint64_t> label) const {
        std::size_t lo = 0;
        std::size_t hi = vertex_count_;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            auto w = weights(mid);
            if (std::lexicographical_compare(w.begin(), w.end(), label.begin(), label.end())) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if (lo < vertex_count_) {
            auto w = weights(lo);
            if (std::equal(w.begin(), w.end(), label.begin(), label.end())) return lo;
        }
        return vertex_count_;
    }

    // Locates an address of this or any coarser level.
    std::size_t find(const VertexAddress& addr) const {
        if (addr.weights.size() != static_cast<std::size_t>(n_points_)) {
            throw DomainError("address has " + std::to_string(addr.weights.size()) + " weights, graph has N=" +
                              std::to_string(n_points_));
        }
        if (addr.level > level_) return vertex_count_;
        return find(addr.rescaled(level_).weights);
    }

    friend GasketGraph build_level(int n_points, int level);

private:
    int n_points_ = 0;
    int level_ = 0;
    std::size_t vertex_count_ = 0;
    std::size_t cell_count_ = 0;
    std::vector<std::uint64_t> weights_;  // vertex_count x N, lexicographically sorted rows
    std::vector<std::size_t> cells_;      // cell_count x N
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::size_t> boundary_;
};

// Builds V_m with cells enumerated in lexicographic word order and vertices
// in lexicographic label order.
inline GasketGraph build_level(int n_points, int level) {
    if (n_points < 2) throw DomainError("N must be at least 2, got " + std::to_string(n_points));
    if (level < 0) throw DomainError("level must be nonnegative, got " + std::to_string(level));
    if (level > kMaxLevel) throw ResourceError("level " + std::to_string(level) + " exceeds the label range");

    const auto N = static_cast<std::size_t>(n_points);
    std::size_t n_cells = 1;
    for (int k = 0; k < level; ++k) {
        if (n_cells > kMaxCells / N) {
            throw ResourceError("N^m = " + std::to_string(n_points) + "^" + std::to_string(level) +
                                " cells exceeds the supported limit of " + std::to_string(kMaxCells));
        }
        n_cells *= N;
    }

    GasketGraph g;
    g.n_points_ = n_points;
    g.level_ = level;
    g.cell_count_ = n_cells;

    // Corner labels of every cell, row (c * N + j) holds F_{w(c)}(p_j).
    std::vector<std::uint64_t> corners(n_cells * N * N, 0);
    std::vector<std::uint64_t> base(N);
    for (std::size_t c = 0; c < n_cells; ++c) {
        std::fill(base.begin(), base.end(), 0);
        std::size_t rest = c;
        for (int k = level; k >= 1; --k) {
            const std::size_t letter = rest % N;
            rest /= N;
            base[letter] += std::uint64_t{1} << (level - k);
        }
        for (std::size_t j = 0; j < N; ++j) {
            std::uint64_t* row = corners.data() + (c * N + j) * N;
            std::copy(base.begin(), base.end(), row);
            row[j] += 1;
        }
    }

    const std::size_t n_corners = n_cells * N;
    auto row_less = [&](std::size_t a, std::size_t b) {
        const auto* ra = corners.data() + a * N;
        const auto* rb = corners.data() + b * N;
        return std::lexicographical_compare(ra, ra + N, rb, rb + N);
    };
    auto row_equal = [&](std::size_t a, std::size_t b) {
        const auto* ra = corners.data() + a * N;
        const auto* rb = corners.data() + b * N;
        return std::equal(ra, ra + N, rb);
    };
    std::vector<std::size_t> order(n_corners);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), row_less);

    g.cells_.assign(n_corners, 0);
    for (std::size_t k = 0; k < n_corners; ++k) {
        if (k == 0 || !row_equal(order[k - 1], order[k])) {
            const auto* r = corners.data() + order[k] * N;
            g.weights_.insert(g.weights_.end(), r, r + N);
            ++g.vertex_count_;
        }
        g.cells_[order[k]] = g.vertex_count_ - 1;
    }

    for (std::size_t c = 0; c < n_cells; ++c) {
        auto cell = g.cell(c);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = i + 1; j < N; ++j) {
                g.edges_.emplace_back(std::min(cell[i], cell[j]), std::max(cell[i], cell[j]));
            }
        }
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

    g.adjacency_.assign(g.vertex_count_, {});
    for (auto [a, b] : g.edges_) {
        g.adjacency_[a].push_back(b);
        g.adjacency_[b].push_back(a);
    }
    for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());

    std::vector<std::uint64_t> pole(N, 0);
    for (std::size_t i = 0; i < N; ++i) {
        std::fill(pole.begin(), pole.end(), 0);
        pole[i] = std::uint64_t{1} << level;
        g.boundary_.push_back(g.find(pole));
    }
    return g;
}

// Real value per vertex of a particular graph, in canonical vertex order.
struct VertexFunction {
    GraphTag tag;
    std::vector<double> values;

    VertexFunction() = default;
    VertexFunction(GraphTag t, std::vector<double> v) : tag(t), values(std::move(v)) {}

    static VertexFunction constant(const GasketGraph& g, double c) {
        return {g.tag(), std::vector<double>(g.vertex_count(), c)};
    }
    static VertexFunction zero(const GasketGraph& g) { return constant(g, 0.0); }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

inline void require_on(const GasketGraph& g, const VertexFunction& u, const char* what = "function") {
    if (u.tag != g.tag() || u.values.size() != g.vertex_count()) {
        throw DomainError(std::string(what) + " is not defined on the level-" + std::to_string(g.level()) +
                          " graph with N=" + std::to_string(g.n_points()));
    }
}

// Values of each level-m vertex of `coarse`, read from `u_fine` on the finer
// graph through label rescaling.
inline std::vector<double> restrict_values(const GasketGraph& fine, std::span<const double> u_fine,
                                           const GasketGraph& coarse) {
    if (fine.n_points() != coarse.n_points()) throw DomainError("restriction between gaskets with different N");
    if (coarse.level() > fine.level()) throw DomainError("restriction target level exceeds source level");
    if (u_fine.size() != fine.vertex_count()) throw DomainError("function length does not match the graph");
    std::vector<double> out(coarse.vertex_count());
    const int shift = fine.level() - coarse.level();
    std::vector<std::uint64_t> label(static_cast<std::size_t>(fine.n_points()));
    for (std::size_t v = 0; v < coarse.vertex_count(); ++v) {
        auto w = coarse.weights(v);
        for (std::size_t j = 0; j < label.size(); ++j) label[j] = w[j] << shift;
        const std::size_t idx = fine.find(label);
        if (idx == fine.vertex_count()) throw DomainError("coarse vertex missing from fine graph");
        out[v] = u_fine[idx];
    }
    return out;
}

// Restriction of u (on `fine`) to the coarser vertex set of `coarse`.
inline VertexFunction restrict(const GasketGraph& fine, const VertexFunction& u, const GasketGraph& coarse) {
    require_on(fine, u);
    return {coarse.tag(), restrict_values(fine, u.values, coarse)};
}

// Vertices of a regular unit-edge simplex in R^(N-1): p_1 at the origin, each
// next point above the centroid of the previous ones along a new axis.
inline std::vector<std::vector<double>> simplex_vertices(int n_points) {
    if (n_points < 2) throw DomainError("N must be at least 2");
    const auto N = static_cast<std::size_t>(n_points);
    std::vector<std::vector<double>> p(N, std::vector<double>(N - 1, 0.0));
    for (std::size_t k = 1; k < N; ++k) {
        std::vector<double> centroid(N - 1, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t d = 0; d < N - 1; ++d) centroid[d] += p[j][d] / static_cast<double>(k);
        }
        // circumradius^2 of the unit simplex on k points
        const double r2 = static_cast<double>(k - 1) / (2.0 * static_cast<double>(k));
        p[k] = centroid;
        p[k][k - 1] = std::sqrt(1.0 - r2);
    }
    return p;
}

// Euclidean position of a vertex, for export only.
inline std::vector<double> embed(const VertexAddress& addr) {
    const auto p = simplex_vertices(static_cast<int>(addr.weights.size()));
    const double scale = std::ldexp(1.0, -addr.level);
    std::vector<double> x(p.front().size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double t = static_cast<double>(addr.weights[i]) * scale;
        for (std::size_t d = 0; d < x.size(); ++d) x[d] += t * p[i][d];
    }
    return x;
}

}  // namespace gasketflow
