#include <gtest/gtest.h>

#include <cmath>

#include "gasketflow/robin.hpp"
#include "gasketflow/verify.hpp"

namespace gf = gasketflow;
using BF = gf::BoundaryFunctional;

namespace {

std::vector<std::pair<std::string, BF>> convex_kinds() {
    return {
        {"zero", BF::zero()},
        {"dirichlet", BF::dirichlet()},
        {"quadratic", BF::quadratic(1.7)},
        {"absolute", BF::absolute_value(0.6)},
        {"power1", BF::power(0.8, 1.0)},
        {"power1.5", BF::power(1.3, 1.5)},
        {"power3", BF::power(0.5, 3.0)},
        {"box", BF::box(-0.4, 0.9)},
        {"huber", gf::huber()},
    };
}

// Minimizes t -> B(t) + (t - s)^2 / (2 lambda) by golden-section search on a
// bracket holding 0 and s; the objective is convex and finite there.
double prox_oracle(const BF& b, double lambda, double s) {
    double lo = std::min(0.0, s) - 1.0;
    double hi = std::max(0.0, s) + 1.0;
    auto f = [&](double t) { return b(t).value() + (t - s) * (t - s) / (2.0 * lambda); };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 300; ++it) {
        const double a = hi - phi * (hi - lo);
        const double c = lo + phi * (hi - lo);
        if (f(a) <= f(c)) {
            hi = c;
        } else {
            lo = a;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(EvalB, Examples) {
    EXPECT_EQ(gf::eval_B(BF::zero(), 12.0), gf::Extended(0.0));
    EXPECT_EQ(gf::eval_B(BF::dirichlet(), 0.0), gf::Extended(0.0));
    EXPECT_TRUE(gf::eval_B(BF::dirichlet(), 1.0).is_infinite());
    EXPECT_EQ(gf::eval_B(BF::quadratic(2.0), 3.0).value(), 9.0);
    EXPECT_EQ(gf::eval_B(BF::absolute_value(2.0), -1.5).value(), 3.0);
    EXPECT_DOUBLE_EQ(gf::eval_B(BF::power(3.0, 3.0), -2.0).value(), 8.0);
    EXPECT_TRUE(gf::eval_B(BF::box(-1.0, 1.0), 1.5).is_infinite());
    EXPECT_EQ(gf::eval_B(BF::box(-1.0, 1.0), -1.0).value(), 0.0);
    EXPECT_DOUBLE_EQ(gf::eval_B(gf::huber(), 0.5).value(), 0.125);
    EXPECT_DOUBLE_EQ(gf::eval_B(gf::huber(), -3.0).value(), 2.5);
    EXPECT_DOUBLE_EQ(gf::eval_B(gf::capped_slope(), 3.0).value(), 2.0);
}

TEST(EvalB, NormalisedAndBimonotone) {
    auto kinds = convex_kinds();
    kinds.emplace_back("capped", gf::capped_slope());
    for (const auto& [name, b] : kinds) {
        EXPECT_EQ(b(0.0), gf::Extended(0.0)) << name;
        EXPECT_TRUE(gf::is_bimonotone(b)) << name;
    }
    EXPECT_FALSE(gf::capped_slope().is_convex());
}

TEST(Prox, Examples) {
    EXPECT_EQ(gf::prox_B(BF::zero(), 0.3, 4.5), 4.5);
    EXPECT_EQ(gf::prox_B(BF::dirichlet(), 0.3, 5.0), 0.0);
    EXPECT_EQ(gf::prox_B(BF::quadratic(1.0), 1.0, 4.0), 2.0);
    EXPECT_EQ(gf::prox_B(BF::absolute_value(1.0), 0.5, 2.0), 1.5);
    EXPECT_EQ(gf::prox_B(BF::absolute_value(1.0), 0.5, -0.2), 0.0);
    EXPECT_EQ(gf::prox_B(BF::box(-0.5, 0.5), 2.0, -3.0), -0.5);
    EXPECT_THROW(gf::prox_B(gf::capped_slope(), 1.0, 0.5), gf::UnsupportedError);
    EXPECT_THROW(gf::prox_B(BF::zero(), 0.0, 0.5), gf::DomainError);
}

TEST(Prox, MatchesNumericalMinimizer) {
    gf::Rng rng(77);
    for (const auto& [name, b] : convex_kinds()) {
        if (b.kind() == gf::BoundaryKind::DirichletIndicator || b.kind() == gf::BoundaryKind::BoxIndicator) continue;
        for (int k = 0; k < 200; ++k) {
            const double s = rng.uniform(-4.0, 4.0);
            const double lambda = rng.uniform(0.01, 3.0);
            EXPECT_NEAR(b.prox(lambda, s), prox_oracle(b, lambda, s), 1e-7) << name << " s=" << s << " l=" << lambda;
        }
    }
}

TEST(Prox, OptimalityAndNonexpansiveness) {
    gf::Rng rng(78);
    for (const auto& [name, b] : convex_kinds()) {
        for (int k = 0; k < 500; ++k) {
            const double s = rng.uniform(-4.0, 4.0);
            const double r = rng.uniform(-4.0, 4.0);
            const double lambda = rng.uniform(0.01, 3.0);
            const double t = b.prox(lambda, s);
            EXPECT_TRUE(b(t).is_finite()) << name;
            EXPECT_LE(b.subdifferential(t).distance((s - t) / lambda), 1e-9 * (1.0 + std::abs(s))) << name;
            EXPECT_LE(std::abs(t - b.prox(lambda, r)), std::abs(s - r) + 1e-12) << name;
        }
    }
}

TEST(Subdifferential, KinksAndDomain) {
    const auto abs = BF::absolute_value(2.0).subdifferential(0.0);
    EXPECT_EQ(abs.lo, -2.0);
    EXPECT_EQ(abs.hi, 2.0);
    EXPECT_TRUE(BF::dirichlet().subdifferential(0.5).empty());
    const auto box_edge = BF::box(-1.0, 1.0).subdifferential(1.0);
    EXPECT_EQ(box_edge.lo, 0.0);
    EXPECT_TRUE(std::isinf(box_edge.hi));
    const auto kink = gf::huber().subdifferential(1.0);
    EXPECT_EQ(kink.lo, 1.0);
    EXPECT_EQ(kink.hi, 1.0);
    EXPECT_EQ(BF::quadratic(3.0).subdifferential(-2.0).lo, -6.0);
}

TEST(Construction, RejectsInvalidParameters) {
    EXPECT_THROW(BF::quadratic(0.0), gf::DomainError);
    EXPECT_THROW(BF::absolute_value(-1.0), gf::DomainError);
    EXPECT_THROW(BF::power(1.0, 0.5), gf::DomainError);
    EXPECT_THROW(BF::box(0.5, 1.0), gf::DomainError);
    EXPECT_THROW(BF::piecewise({0.0}, {{{0.0, 0.0, 0.0}}}), gf::DomainError);
    // jump at 1
    EXPECT_THROW(BF::piecewise({1.0}, {{{0.0, 0.0, 1.0}}, {{5.0, 0.0, 0.0}}}), gf::DomainError);
    // B(0) != 0
    EXPECT_THROW(BF::piecewise({1.0}, {{{1.0, 0.0, 1.0}}, {{2.0, 0.0, 0.0}}}), gf::DomainError);
    // decreasing on the right
    EXPECT_THROW(BF::piecewise({1.0}, {{{0.0, 0.0, 1.0}}, {{2.0, -1.0, 0.0}}}), gf::DomainError);
}

TEST(EvalWB, NeumannDirichletAndOrdering) {
    const gf::EnergyForm form(gf::make_level(3, 2));
    const auto& g = form.graph();
    gf::Rng rng(9);
    for (int k = 0; k < 100; ++k) {
        gf::VertexFunction u = gf::VertexFunction::zero(g);
        for (auto& x : u.values) x = rng.uniform(-1.0, 1.0);
        const double w = form.energy(u);
        EXPECT_EQ(gf::eval_WB(form, gf::RobinSpec::neumann(3), u).value(), w);
        EXPECT_TRUE(gf::eval_WB(form, gf::RobinSpec::dirichlet(3), u).is_infinite());
        for (const auto& [name, b] : convex_kinds()) {
            const auto wb = gf::eval_WB(form, gf::RobinSpec::uniform(3, b), u);
            EXPECT_TRUE(gf::extended_leq(gf::Extended(w), wb, 0.0)) << name;
        }
        for (auto p : g.boundary()) u[p] = 0.0;
        EXPECT_EQ(gf::eval_WB(form, gf::RobinSpec::dirichlet(3), u).value(), form.energy(u));
        for (const auto& [name, b] : convex_kinds()) {
            EXPECT_EQ(gf::eval_WB(form, gf::RobinSpec::uniform(3, b), u).value(), form.energy(u)) << name;
        }
    }
    EXPECT_TRUE(gf::eval_WB(form, gf::RobinSpec::dirichlet(3), gf::VertexFunction::constant(g, 1.0)).is_infinite());
    EXPECT_THROW(gf::eval_WB(form, gf::RobinSpec::neumann(4), gf::VertexFunction::zero(g)), gf::DomainError);
}

TEST(EvalWB, LatticeBoundaryPartIsModular) {
    const auto g = gf::build_level(3, 2);
    const gf::RobinSpec spec{{BF::quadratic(1.0), BF::absolute_value(2.0), gf::capped_slope()}};
    gf::Rng rng(10);
    for (int k = 0; k < 200; ++k) {
        gf::VertexFunction u = gf::VertexFunction::zero(g);
        gf::VertexFunction v = u;
        for (auto& x : u.values) x = rng.uniform(-2.0, 2.0);
        for (auto& x : v.values) x = rng.uniform(-2.0, 2.0);
        const double lhs = gf::boundary_part(g, spec, gf::pointwise_max(u, v)).value() +
                           gf::boundary_part(g, spec, gf::pointwise_min(u, v)).value();
        const double rhs = gf::boundary_part(g, spec, u).value() + gf::boundary_part(g, spec, v).value();
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, rhs));
    }
}

TEST(Dominance, GridCheck) {
    EXPECT_TRUE(gf::dominance_condition(BF::quadratic(2.0), BF::quadratic(1.0)));
    EXPECT_FALSE(gf::dominance_condition(BF::quadratic(1.0), BF::quadratic(2.0)));
    EXPECT_TRUE(gf::dominance_condition(BF::dirichlet(), BF::absolute_value(3.0)));
    EXPECT_TRUE(gf::dominance_condition(BF::dirichlet(), BF::dirichlet()));
    EXPECT_TRUE(gf::dominance_condition(BF::absolute_value(1.0), BF::zero()));
    EXPECT_FALSE(gf::dominance_condition(BF::zero(), BF::absolute_value(1.0)));
    EXPECT_TRUE(gf::dominance_condition(gf::RobinSpec::dirichlet(3), gf::mixed_spec(3)));
    EXPECT_TRUE(gf::dominance_condition(gf::mixed_spec(3), gf::RobinSpec::neumann(3)));
}
