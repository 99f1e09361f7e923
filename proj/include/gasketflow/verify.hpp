#pragma once

// Sampled checks of the finite-dimensional inequalities behind the order,
// positivity, L^inf-contraction and domination properties, evaluated directly
// on energies and, separately, on computed trajectories.
//
// Every check is a pure function of its configuration; samples draw from
// independent seeded streams, so reports are identical for any thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gasketflow/energy.hpp"
#include "gasketflow/flow.hpp"
#include "gasketflow/measure.hpp"
#include "gasketflow/numeric.hpp"
#include "gasketflow/parallel.hpp"
#include "gasketflow/robin.hpp"

namespace gasketflow {

struct SampleConfig {
    std::uint64_t seed = 20140519;
    std::size_t sample_count = 1000;
    double value_range = 2.0;
    std::vector<int> levels{1, 2, 3};
    std::vector<int> n_points{3};

    void validate() const {
        if (sample_count < 1) throw DomainError("sample_count must be at least 1");
        if (!(value_range > 0.0)) throw DomainError("value_range must be positive");
        if (levels.empty() || n_points.empty()) throw DomainError("levels and n_points must be nonempty");
    }
};

// One property's tally. max_slack is the largest lhs - rhs seen over finite
// comparisons (-inf when there were none).
struct Report {
    std::string property;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double max_slack = -kInfinity;
    std::uint64_t seed = 0;

    bool passed() const { return violations == 0; }

    // lhs <= rhs + tol
    void record(double lhs, double rhs, double tol) {
        ++samples;
        const double slack = lhs - rhs;
        max_slack = std::max(max_slack, slack);
        if (!(slack <= tol)) ++violations;
    }

    // lhs <= rhs in [0, inf] with relative slack on finite values.
    void record(Extended lhs, Extended rhs, double rel_tol) {
        if (lhs.is_finite() && rhs.is_finite()) {
            record(lhs.value(), rhs.value(), rel_tol * std::max(1.0, std::abs(rhs.value())));
            return;
        }
        ++samples;
        if (!extended_leq(lhs, rhs, 0.0)) ++violations;
    }

    void merge(const Report& other) {
        samples += other.samples;
        violations += other.violations;
        max_slack = std::max(max_slack, other.max_slack);
    }
};

inline bool all_passed(const std::vector<Report>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const Report& r) { return r.passed(); });
}

// Combines reports sharing a property name, keeping first-appearance order.
inline std::vector<Report> merge_by_property(const std::vector<Report>& reports) {
    std::vector<Report> merged;
    for (const auto& r : reports) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const Report& m) { return m.property == r.property; });
        if (it == merged.end()) {
            merged.push_back(r);
        } else {
            it->merge(r);
        }
    }
    return merged;
}

namespace detail {

// Per-sample reports merged in index order.
template <class F>
std::vector<Report> run_samples(std::vector<std::string> names, std::uint64_t seed, std::size_t count, F sample) {
    auto parts = parallel_map<std::vector<Report>>(count, [&](std::size_t k) {
        std::vector<Report> local(names.size());
        Rng rng = Rng::stream(seed, k);
        sample(rng, local);
        return local;
    });
    std::vector<Report> total(names.size());
    for (std::size_t p = 0; p < names.size(); ++p) {
        total[p].property = names[p];
        total[p].seed = seed;
    }
    for (const auto& part : parts) {
        for (std::size_t p = 0; p < names.size(); ++p) total[p].merge(part[p]);
    }
    return total;
}

// Uniform in [-range, range], or half the time a coarse lattice value so that
// ties and zeros occur.
inline double sample_value(Rng& rng, double range, bool lattice) {
    if (lattice) return range * static_cast<double>(static_cast<int>(rng.below(9)) - 4) / 4.0;
    return rng.uniform(-range, range);
}

inline VertexFunction random_function(const GasketGraph& g, Rng& rng, double range) {
    const bool lattice = rng.coin();
    VertexFunction u = VertexFunction::zero(g);
    for (auto& x : u.values) x = sample_value(rng, range, lattice);
    return u;
}

// With probability 1/2 per boundary point, move u(p_i) into dom B_i.
inline void maybe_make_feasible(const GasketGraph& g, const RobinSpec& spec, VertexFunction& u, Rng& rng) {
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const std::size_t p = g.boundary()[i];
        if (!rng.coin()) continue;
        const auto& b = spec[i];
        if (b.kind() == BoundaryKind::DirichletIndicator) u[p] = 0.0;
        if (b.kind() == BoundaryKind::BoxIndicator) u[p] = std::clamp(u[p], b.lower(), b.upper());
    }
}

// Zeroes every positive value of w that has a strictly negative neighbour.
inline void remove_sign_changes(const GasketGraph& g, VertexFunction& w) {
    std::vector<std::size_t> hit;
    for (std::size_t x = 0; x < w.size(); ++x) {
        if (w[x] <= 0.0) continue;
        for (std::size_t y : g.neighbors(x)) {
            if (w[y] < 0.0) {
                hit.push_back(x);
                break;
            }
        }
    }
    for (std::size_t x : hit) w[x] = 0.0;
}

}  // namespace detail

// (u v f) ^ g and (v ^ g) v f with f = (u+v-alpha)/2, g = (u+v+alpha)/2.
inline std::pair<double, double> contraction_pair(double a, double b, double alpha) {
    const double f = 0.5 * (a + b - alpha);
    const double g = 0.5 * (a + b + alpha);
    return {std::min(std::max(a, f), g), std::max(std::min(b, g), f)};
}

// ((|a| ^ b) sgn a, |a| v b), used with b >= 0.
inline std::pair<double, double> domination_pair(double a, double b) {
    return {std::min(std::abs(a), b) * sgn(a), std::max(std::abs(a), b)};
}

inline std::pair<VertexFunction, VertexFunction> contraction_pair(const VertexFunction& u, const VertexFunction& v,
                                                                  double alpha) {
    VertexFunction U = u;
    VertexFunction V = v;
    for (std::size_t x = 0; x < u.size(); ++x) std::tie(U[x], V[x]) = contraction_pair(u[x], v[x], alpha);
    return {std::move(U), std::move(V)};
}

inline std::pair<VertexFunction, VertexFunction> domination_pair(const VertexFunction& u, const VertexFunction& v) {
    VertexFunction C = u;
    VertexFunction D = v;
    for (std::size_t x = 0; x < u.size(); ++x) std::tie(C[x], D[x]) = domination_pair(u[x], v[x]);
    return {std::move(C), std::move(D)};
}

inline constexpr double kIdentityTolerance = 1e-12;

// Scalar inequalities for random (a1, a2, b1, b2, alpha):
//   (A1-A2)^2 + (B1-B2)^2 <= (a1-a2)^2 + (b1-b2)^2,
//   (C1-C2)^2 + (D1-D2)^2 <= (a1-a2)^2 + (b1-b2)^2  when b1, b2 >= 0.
inline std::vector<Report> check_scalar_inequalities(const SampleConfig& cfg) {
    cfg.validate();
    const double R = cfg.value_range;
    return detail::run_samples({"scalar.contraction", "scalar.domination"}, cfg.seed, cfg.sample_count,
                               [R](Rng& rng, std::vector<Report>& out) {
                                   const bool lattice = rng.coin();
                                   const double a1 = detail::sample_value(rng, R, lattice);
                                   const double a2 = detail::sample_value(rng, R, lattice);
                                   const double b1 = detail::sample_value(rng, R, lattice);
                                   const double b2 = detail::sample_value(rng, R, lattice);
                                   double alpha = rng.uniform(0.0, R);
                                   if (alpha == 0.0) alpha = R;
                                   const double rhs = (a1 - a2) * (a1 - a2) + (b1 - b2) * (b1 - b2);
                                   const double tol = kIdentityTolerance * std::max(1.0, rhs);

                                   auto [A1, B1] = contraction_pair(a1, b1, alpha);
                                   auto [A2, B2] = contraction_pair(a2, b2, alpha);
                                   out[0].record((A1 - A2) * (A1 - A2) + (B1 - B2) * (B1 - B2), rhs, tol);

                                   const double c1 = std::abs(b1);
                                   const double c2 = std::abs(b2);
                                   const double rhs_pos = (a1 - a2) * (a1 - a2) + (c1 - c2) * (c1 - c2);
                                   auto [C1, D1] = domination_pair(a1, c1);
                                   auto [C2, D2] = domination_pair(a2, c2);
                                   out[1].record((C1 - C2) * (C1 - C2) + (D1 - D2) * (D1 - D2), rhs_pos,
                                                 kIdentityTolerance * std::max(1.0, rhs_pos));
                               });
}

// Level-m energy identities over every (N, m) in cfg:
//   W(u v v) + W(u ^ v) = W(u) + W(v)           (lattice_identity, arbitrary pairs)
//   W(u v v) + W(u ^ v) <= W(u) + W(v)          (lattice_submodular)
//   equality when u - v has no strict sign change along an edge (lattice_sign_consistent),
//   W((u v f) ^ g) + W((v ^ g) v f) <= W(u) + W(v),
//   W((|u| ^ v) sgn u) + W(|u| v v) <= W(u) + W(v)  for v >= 0.
inline std::vector<Report> check_energy_inequalities(const SampleConfig& cfg) {
    cfg.validate();
    std::vector<Report> total;
    std::uint64_t block = 0;
    for (int N : cfg.n_points) {
        for (int m : cfg.levels) {
            const EnergyForm form(make_level(N, m));
            const double R = cfg.value_range;
            auto part = detail::run_samples(
                {"energy.lattice_identity", "energy.contraction", "energy.domination", "energy.lattice_submodular",
                 "energy.lattice_sign_consistent"}, cfg.seed + block++,
                cfg.sample_count, [&](Rng& rng, std::vector<Report>& out) {
                    const GasketGraph& g = form.graph();
                    const VertexFunction u = detail::random_function(g, rng, R);
                    VertexFunction v = rng.below(8) == 0 ? u : detail::random_function(g, rng, R);
                    double alpha = rng.uniform(0.0, R);
                    if (alpha == 0.0) alpha = R;
                    const double Wu = form.energy(u);
                    const double Wv = form.energy(v);
                    const double rhs = Wu + Wv;
                    const double tol = kIdentityTolerance * std::max(1.0, rhs);

                    const double lattice = form.energy(pointwise_max(u, v)) + form.energy(pointwise_min(u, v));
                    out[0].record(std::abs(lattice - rhs), 0.0, tol);

                    auto [U, V] = contraction_pair(u, v, alpha);
                    out[1].record(form.energy(U) + form.energy(V), rhs, tol);

                    const VertexFunction vp = apply(v, [](double x) { return std::abs(x); });
                    const double rhs_pos = Wu + form.energy(vp);
                    auto [C, D] = domination_pair(u, vp);
                    out[2].record(form.energy(C) + form.energy(D), rhs_pos,
                                  kIdentityTolerance * std::max(1.0, rhs_pos));

                    out[3].record(lattice, rhs, tol);

                    VertexFunction w = detail::random_function(g, rng, R);
                    detail::remove_sign_changes(g, w);
                    VertexFunction z = u;
                    for (std::size_t x = 0; x < z.size(); ++x) z[x] += w[x];
                    const double rhs_sc = Wu + form.energy(z);
                    const double lattice_sc = form.energy(pointwise_max(u, z)) + form.energy(pointwise_min(u, z));
                    out[4].record(std::abs(lattice_sc - rhs_sc), 0.0, kIdentityTolerance * std::max(1.0, rhs_sc));
                });
            if (total.empty()) {
                total = part;
            } else {
                for (std::size_t p = 0; p < part.size(); ++p) total[p].merge(part[p]);
            }
        }
    }
    for (auto& r : total) r.seed = cfg.seed;
    return total;
}

// The integrated criteria on W_B itself, with inf-aware comparisons:
//   order:       W_B(u ^ v) + W_B(u v v) <= W_B(u) + W_B(v)
//   positive:    W_B(u+) <= W_B(u)
//   contractive: W_B((u v f) ^ g) + W_B((v ^ g) v f) <= W_B(u) + W_B(v)   (convex B)
//   domination:  W_hat((|u| ^ v) sgn u) + W_B(|u| v v) <= W_hat(u) + W_B(v) (v >= 0)
// The domination row is produced only when hat - B(|.|) is bi-monotone on the
// sample grid.
inline std::vector<Report> check_WB_criteria(const EnergyForm& form, const RobinSpec& hat, const RobinSpec& base,
                                             const SampleConfig& cfg) {
    cfg.validate();
    require_matches(form.graph(), hat);
    require_matches(form.graph(), base);
    const bool convex = base.is_convex();
    const bool dominated = dominance_condition(hat, base);
    const double R = cfg.value_range;
    auto reports = detail::run_samples(
        {"wb.order", "wb.positive", "wb.contractive", "wb.domination"}, cfg.seed, cfg.sample_count,
        [&](Rng& rng, std::vector<Report>& out) {
            const GasketGraph& g = form.graph();
            VertexFunction u = detail::random_function(g, rng, R);
            VertexFunction v = detail::random_function(g, rng, R);
            detail::maybe_make_feasible(g, base, u, rng);
            detail::maybe_make_feasible(g, base, v, rng);
            const Extended rhs = eval_WB(form, base, u) + eval_WB(form, base, v);

            out[0].record(eval_WB(form, base, pointwise_min(u, v)) + eval_WB(form, base, pointwise_max(u, v)), rhs,
                          kIdentityTolerance);
            out[1].record(eval_WB(form, base, apply(u, [](double x) { return std::max(x, 0.0); })),
                          eval_WB(form, base, u), kIdentityTolerance);
            if (convex) {
                double alpha = rng.uniform(0.0, R);
                if (alpha == 0.0) alpha = R;
                auto [U, V] = contraction_pair(u, v, alpha);
                out[2].record(eval_WB(form, base, U) + eval_WB(form, base, V), rhs, kIdentityTolerance);
            }
            if (dominated) {
                VertexFunction a = detail::random_function(g, rng, R);
                VertexFunction b = apply(detail::random_function(g, rng, R), [](double x) { return std::abs(x); });
                detail::maybe_make_feasible(g, hat, a, rng);
                detail::maybe_make_feasible(g, base, b, rng);
                auto [C, D] = domination_pair(a, b);
                out[3].record(eval_WB(form, hat, C) + eval_WB(form, base, D),
                              eval_WB(form, hat, a) + eval_WB(form, base, b), kIdentityTolerance);
            }
        });
    std::vector<Report> kept;
    for (std::size_t p = 0; p < reports.size(); ++p) {
        if ((p == 2 && !convex) || (p == 3 && !dominated)) continue;
        kept.push_back(reports[p]);
    }
    return kept;
}

inline constexpr double kLocalityTolerance = 1e-13;

// Pairs with |u| ^ |v| = 0 and no edge between their supports, built from a
// random split of the cells into two disjoint families: u lives on vertices
// all of whose cells belong to the first family, v likewise on the second.
inline std::pair<VertexFunction, VertexFunction> disjoint_support_pair(const GasketGraph& g, Rng& rng, double range) {
    std::vector<int> family(g.cell_count());
    for (auto& f : family) f = static_cast<int>(rng.below(3));
    std::vector<int> owner(g.vertex_count(), -1);  // -1 unset, 0/1 family, 2 mixed
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        for (std::size_t x : g.cell(c)) {
            if (owner[x] == -1) {
                owner[x] = family[c];
            } else if (owner[x] != family[c]) {
                owner[x] = 2;
            }
        }
    }
    VertexFunction u = VertexFunction::zero(g);
    VertexFunction v = VertexFunction::zero(g);
    const bool v_empty = rng.below(10) == 0;
    for (std::size_t x = 0; x < g.vertex_count(); ++x) {
        const double value = rng.uniform(-range, range);
        if (owner[x] == 0) u[x] = value;
        if (owner[x] == 1 && !v_empty) v[x] = value;
    }
    return {std::move(u), std::move(v)};
}

// W_B(u + v) = W_B(u) + W_B(v) for disjointly supported pairs, inf included.
inline Report check_locality(const EnergyForm& form, const RobinSpec& spec, const SampleConfig& cfg) {
    cfg.validate();
    require_matches(form.graph(), spec);
    const double R = cfg.value_range;
    auto reports = detail::run_samples({"locality"}, cfg.seed, cfg.sample_count, [&](Rng& rng, std::vector<Report>& out) {
        const GasketGraph& g = form.graph();
        auto [u, v] = disjoint_support_pair(g, rng, R);
        detail::maybe_make_feasible(g, spec, u, rng);
        detail::maybe_make_feasible(g, spec, v, rng);
        VertexFunction sum = u;
        for (std::size_t x = 0; x < sum.size(); ++x) sum[x] += v[x];
        const Extended lhs = eval_WB(form, spec, sum);
        const Extended rhs = eval_WB(form, spec, u) + eval_WB(form, spec, v);
        Report& r = out[0];
        if (lhs.is_infinite() || rhs.is_infinite()) {
            ++r.samples;
            if (lhs.is_infinite() != rhs.is_infinite()) ++r.violations;
            return;
        }
        r.record(std::abs(lhs.value() - rhs.value()), 0.0,
                 kLocalityTolerance * std::max(1.0, std::abs(rhs.value())));
    });
    return reports.front();
}

struct NamedSpec {
    std::string name;
    RobinSpec spec;
};

// Huber-type convex piecewise functional: s^2/2 on [-1, 1], |s| - 1/2 outside.
inline BoundaryFunctional huber() {
    return BoundaryFunctional::piecewise({-1.0, 1.0}, {{{-0.5, -1.0, 0.0}}, {{0.0, 0.0, 0.5}}, {{-0.5, 1.0, 0.0}}});
}

// Bi-monotone but not convex: |s| on [-1, 1], then slope 1/2.
inline BoundaryFunctional capped_slope() {
    return BoundaryFunctional::piecewise({-1.0, 0.0, 1.0},
                                         {{{0.5, -0.5, 0.0}}, {{0.0, -1.0, 0.0}}, {{0.0, 1.0, 0.0}}, {{0.5, 0.5, 0.0}}});
}

// Mixed spec (Quadratic(1), Zero, Dirichlet, AbsoluteValue(1), Quadratic(1), ...)
// truncated to N entries.
inline RobinSpec mixed_spec(int n_points) {
    const std::vector<BoundaryFunctional> cycle{BoundaryFunctional::quadratic(1.0), BoundaryFunctional::zero(),
                                                BoundaryFunctional::dirichlet(), BoundaryFunctional::absolute_value(1.0)};
    RobinSpec spec;
    for (int i = 0; i < n_points; ++i) spec.B.push_back(cycle[static_cast<std::size_t>(i) % cycle.size()]);
    return spec;
}

// One representative of each built-in convex kind, applied at every p_i, plus
// the mixed spec.
inline std::vector<NamedSpec> builtin_convex_specs(int n_points) {
    return {
        {"neumann", RobinSpec::neumann(n_points)},
        {"dirichlet", RobinSpec::dirichlet(n_points)},
        {"quadratic", RobinSpec::uniform(n_points, BoundaryFunctional::quadratic(1.0))},
        {"absolute", RobinSpec::uniform(n_points, BoundaryFunctional::absolute_value(1.0))},
        {"power", RobinSpec::uniform(n_points, BoundaryFunctional::power(1.0, 1.5))},
        {"box", RobinSpec::uniform(n_points, BoundaryFunctional::box(-0.5, 0.5))},
        {"huber", RobinSpec::uniform(n_points, huber())},
        {"mixed", mixed_spec(n_points)},
    };
}

struct FlowCheckConfig {
    SampleConfig sampling;
    FlowConfig flow;
    double violation_tol = 1e-7;
};

namespace detail {

inline Trajectory run(const BackwardEuler& stepper, const VertexFunction& u0, const FlowConfig& cfg) {
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);
    for (std::size_t k = 1; k <= cfg.steps(); ++k) {
        traj.states.push_back(stepper.step(traj.states.back(), cfg.tol, cfg.max_inner_iters));
        traj.times.push_back(static_cast<double>(k) * cfg.tau);
    }
    return traj;
}

inline double sup_distance(const VertexFunction& a, const VertexFunction& b) {
    double d = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x) d = std::max(d, std::abs(a[x] - b[x]));
    return d;
}

// max over x of |a(x)| - b(x): the excess in |a| <= b.
inline double envelope_excess(const VertexFunction& a, const VertexFunction& b) {
    double d = -kInfinity;
    for (std::size_t x = 0; x < a.size(); ++x) d = std::max(d, std::abs(a[x]) - b[x]);
    return d;
}

inline double order_excess(const VertexFunction& a, const VertexFunction& b) {
    double d = -kInfinity;
    for (std::size_t x = 0; x < a.size(); ++x) d = std::max(d, a[x] - b[x]);
    return d;
}

}  // namespace detail

// Trajectory-level properties for each spec over random initial pairs:
// positivity, order preservation, L^inf and L^2_mu contraction, energy decay,
// the sandwich |S_inf u0| <= S_B v0 and |S_B u0| <= S v0 for |u0| <= v0, and
// zero boundary values of the Dirichlet flow. Property names carry the RobinSpec
// name after a slash.
inline std::vector<Report> check_flow_properties(const FlowCheckConfig& cfg, const std::vector<NamedSpec>& specs) {
    cfg.sampling.validate();
    cfg.flow.validate();
    const double tol = cfg.violation_tol;
    const double solver_slack = 10.0 * cfg.flow.tol;
    const double R = cfg.sampling.value_range;
    const std::vector<std::string> props{"positivity", "order", "linf_contraction", "l2_contraction",
                                         "energy_decay", "sandwich_lower", "sandwich_upper"};
    std::vector<Report> total;
    std::uint64_t block = 0;
    for (int N : cfg.sampling.n_points) {
        for (int m : cfg.sampling.levels) {
            const EnergyForm form(make_level(N, m));
            const VertexMeasure mu(form.graph(), MeasureWeights::uniform(N));
            const BackwardEuler neumann(form, mu, RobinSpec::neumann(N), cfg.flow.tau);
            const BackwardEuler dirichlet(form, mu, RobinSpec::dirichlet(N), cfg.flow.tau);
            for (const auto& named : specs) {
                const RobinSpec& spec = named.spec;
                const BackwardEuler flow(form, mu, spec, cfg.flow.tau);
                std::vector<std::string> names;
                for (const auto& p : props) names.push_back(p + "/" + named.name);
                auto part = detail::run_samples(
                    names, cfg.sampling.seed + block++, cfg.sampling.sample_count,
                    [&](Rng& rng, std::vector<Report>& out) {
                        const GasketGraph& g = form.graph();
                        const VertexFunction u0 = detail::random_function(g, rng, R);
                        const VertexFunction v0 = detail::random_function(g, rng, R);
                        const VertexFunction abs_u0 = apply(u0, [](double x) { return std::abs(x); });
                        const VertexFunction top = pointwise_max(u0, v0);
                        VertexFunction w0 = abs_u0;  // |u0| <= w0
                        for (auto& x : w0.values) x += rng.uniform(0.0, R) * static_cast<double>(rng.coin());

                        const Trajectory su = detail::run(flow, u0, cfg.flow);
                        const Trajectory sv = detail::run(flow, v0, cfg.flow);
                        const Trajectory s_abs = detail::run(flow, abs_u0, cfg.flow);
                        const Trajectory s_top = detail::run(flow, top, cfg.flow);
                        const Trajectory s_w = detail::run(flow, w0, cfg.flow);
                        const Trajectory dir_u = detail::run(dirichlet, u0, cfg.flow);
                        const Trajectory neu_w = detail::run(neumann, w0, cfg.flow);

                        const double sup0 = detail::sup_distance(u0, v0);
                        double prev_l2 = l2_distance(mu, u0, v0);
                        double pos = -kInfinity;
                        double ord = -kInfinity;
                        double linf = -kInfinity;
                        double l2 = -kInfinity;
                        double lower = -kInfinity;
                        double upper = -kInfinity;
                        for (std::size_t k = 0; k < su.size(); ++k) {
                            for (double x : s_abs.states[k].values) pos = std::max(pos, -x);
                            ord = std::max(ord, detail::order_excess(su.states[k], s_top.states[k]));
                            linf = std::max(linf, detail::sup_distance(su.states[k], sv.states[k]) - sup0);
                            const double d = l2_distance(mu, su.states[k], sv.states[k]);
                            if (k > 0) l2 = std::max(l2, d - prev_l2);
                            prev_l2 = d;
                            lower = std::max(lower, detail::envelope_excess(dir_u.states[k], s_w.states[k]));
                            upper = std::max(upper, detail::envelope_excess(su.states[k], neu_w.states[k]));
                        }
                        out[0].record(pos, 0.0, tol);
                        out[1].record(ord, 0.0, tol);
                        out[2].record(linf, 0.0, tol);
                        out[3].record(l2, 0.0, solver_slack);
                        for (const Trajectory* t : {&su, &sv}) {
                            double decay = -kInfinity;
                            for (std::size_t k = 1; k < t->size(); ++k) {
                                const Extended before = eval_WB(form, spec, t->states[k - 1]);
                                const Extended after = eval_WB(form, spec, t->states[k]);
                                if (before.is_infinite()) continue;
                                if (after.is_infinite()) {
                                    decay = kInfinity;
                                    break;
                                }
                                decay = std::max(decay, after.value() - before.value() -
                                                            1e-12 * std::abs(before.value()));
                            }
                            if (decay > -kInfinity) out[4].record(decay, 0.0, solver_slack);
                        }
                        out[5].record(lower, 0.0, tol);
                        out[6].record(upper, 0.0, tol);
                    });
                total.insert(total.end(), part.begin(), part.end());
            }
            // S_inf keeps zero boundary values after the first step
            Report boundary{"dirichlet_boundary", 0, 0, -kInfinity, cfg.sampling.seed};
            for (std::size_t k = 0; k < cfg.sampling.sample_count; ++k) {
                Rng rng = Rng::stream(cfg.sampling.seed ^ 0xD1EULL, k);
                const Trajectory t = detail::run(dirichlet, detail::random_function(form.graph(), rng, R), cfg.flow);
                double worst = 0.0;
                for (std::size_t s = 1; s < t.size(); ++s) {
                    for (std::size_t p : form.graph().boundary()) worst = std::max(worst, std::abs(t.states[s][p]));
                }
                boundary.record(worst, 0.0, 0.0);
            }
            total.push_back(boundary);
        }
    }
    for (auto& r : total) r.seed = cfg.sampling.seed;
    return merge_by_property(total);
}

// |S_hat(t) u0| <= S_B(t) v0 for |u0| <= v0, for a pair with hat - B(|.|)
// bi-monotone on the sample grid.
inline Report check_flow_domination(const FlowCheckConfig& cfg, const NamedSpec& hat, const NamedSpec& base) {
    cfg.sampling.validate();
    cfg.flow.validate();
    if (!dominance_condition(hat.spec, base.spec)) {
        throw DomainError("s -> " + hat.name + "(s) - " + base.name + "(|s|) is not bi-monotone");
    }
    const double R = cfg.sampling.value_range;
    std::vector<Report> total;
    std::uint64_t block = 0;
    for (int N : cfg.sampling.n_points) {
        for (int m : cfg.sampling.levels) {
            const EnergyForm form(make_level(N, m));
            const VertexMeasure mu(form.graph(), MeasureWeights::uniform(N));
            const BackwardEuler hat_flow(form, mu, hat.spec, cfg.flow.tau);
            const BackwardEuler base_flow(form, mu, base.spec, cfg.flow.tau);
            auto part = detail::run_samples(
                {"domination/" + hat.name + "<" + base.name}, cfg.sampling.seed + 7919 * ++block,
                cfg.sampling.sample_count, [&](Rng& rng, std::vector<Report>& out) {
                    const VertexFunction u0 = detail::random_function(form.graph(), rng, R);
                    VertexFunction v0 = apply(u0, [](double x) { return std::abs(x); });
                    for (auto& x : v0.values) x += rng.uniform(0.0, R) * static_cast<double>(rng.coin());
                    const Trajectory a = detail::run(hat_flow, u0, cfg.flow);
                    const Trajectory b = detail::run(base_flow, v0, cfg.flow);
                    double excess = -kInfinity;
                    for (std::size_t k = 0; k < a.size(); ++k) {
                        excess = std::max(excess, detail::envelope_excess(a.states[k], b.states[k]));
                    }
                    out[0].record(excess, 0.0, cfg.violation_tol);
                });
            total.insert(total.end(), part.begin(), part.end());
        }
    }
    auto merged = merge_by_property(total);
    merged.front().seed = cfg.sampling.seed;
    return merged.front();
}

}  // namespace gasketflow
