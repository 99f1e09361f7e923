#pragma once

// Self-similar vertex measures on V_m and the induced discrete L^2 product.
// Cell F_w(V) carries mass prod_k mu_{w_k}, shared equally by its N corners.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gasketflow/energy.hpp"
#include "gasketflow/numeric.hpp"

namespace gasketflow {

class MeasureWeights {
public:
    explicit MeasureWeights(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.size() < 2) throw DomainError("measure weights need N >= 2 entries");
        CompensatedSum total;
        for (double w : weights_) {
            if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("measure weights must be positive and finite");
            total.add(w);
        }
        if (std::abs(total.value() - 1.0) > 1e-12 * static_cast<double>(weights_.size())) {
            throw DomainError("measure weights must sum to 1, got " + std::to_string(total.value()));
        }
    }

    // Normalised Hausdorff measure: mu_i = 1/N.
    static MeasureWeights uniform(int n_points) {
        return MeasureWeights(std::vector<double>(static_cast<std::size_t>(n_points), 1.0 / n_points));
    }

    std::size_t size() const { return weights_.size(); }
    const std::vector<double>& values() const { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }

private:
    std::vector<double> weights_;
};

class VertexMeasure {
public:
    VertexMeasure(const GasketGraph& g, const MeasureWeights& w) : tag_(g.tag()), masses_(g.vertex_count(), 0.0) {
        if (w.size() != static_cast<std::size_t>(g.n_points())) {
            throw DomainError("measure has " + std::to_string(w.size()) + " weights but the gasket has N=" +
                              std::to_string(g.n_points()));
        }
        const auto N = static_cast<double>(g.n_points());
        std::vector<CompensatedSum> acc(g.vertex_count());
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            double cell_mass = 1.0;
            for (int letter : g.cell_word(c)) cell_mass *= w[static_cast<std::size_t>(letter)];
            for (std::size_t v : g.cell(c)) acc[v].add(cell_mass / N);
        }
        for (std::size_t v = 0; v < masses_.size(); ++v) masses_[v] = acc[v].value();
    }

    GraphTag tag() const { return tag_; }
    const std::vector<double>& masses() const { return masses_; }
    double operator[](std::size_t v) const { return masses_[v]; }
    std::size_t size() const { return masses_.size(); }

    double total() const { return compensated_sum(masses_); }

private:
    GraphTag tag_;
    std::vector<double> masses_;
};

inline VertexMeasure vertex_measure(const GasketGraph& g, const MeasureWeights& w) { return {g, w}; }

inline double l2_inner(const VertexMeasure& mu, const VertexFunction& u, const VertexFunction& v) {
    if (u.tag != mu.tag() || v.tag != mu.tag() || u.size() != mu.size() || v.size() != mu.size()) {
        throw DomainError("l2_inner on functions of a different graph than the measure");
    }
    CompensatedSum acc;
    for (std::size_t x = 0; x < mu.size(); ++x) acc.add(mu[x] * (u[x] * v[x]));
    return acc.value();
}

inline double l2_norm(const VertexMeasure& mu, const VertexFunction& u) { return std::sqrt(l2_inner(mu, u, u)); }

inline double l2_distance(const VertexMeasure& mu, const VertexFunction& u, const VertexFunction& v) {
    if (u.tag != v.tag) throw DomainError("l2_distance on functions of different graphs");
    VertexFunction d = u;
    for (std::size_t x = 0; x < d.size(); ++x) d[x] -= v[x];
    return l2_norm(mu, d);
}

// mu-mean, i.e. <u, 1> since the total mass is one.
inline double mean(const VertexMeasure& mu, const VertexFunction& u) {
    VertexFunction one{u.tag, std::vector<double>(u.size(), 1.0)};
    return l2_inner(mu, u, one);
}

}  // namespace gasketflow
