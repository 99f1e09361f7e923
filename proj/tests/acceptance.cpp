// Acceptance gate: one line per criterion, tolerances pinned below.
//
// Exit status is 0 when every criterion passes, except those listed in
// kKnownRed; those still print FAIL together with the reason.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gasketflow/gasketflow.hpp"

namespace gf = gasketflow;
namespace fs = std::filesystem;

namespace {

constexpr double kScalarSlack = 1e-12;
constexpr double kEnergySlack = 1e-12;
constexpr double kExtensionTol = 1e-12;
constexpr double kMonotoneSlack = -1e-12;
constexpr double kFlowSolverTol = 1e-9;
constexpr double kFlowViolation = 1e-7;
constexpr double kRobinTol = 1e-6;
constexpr double kNormalDerivativeTol = 1e-10;
constexpr double kConservationTol = 1e-9;
constexpr double kConservationSolverTol = 1e-12;

constexpr double kScalarSeconds = 5.0;
constexpr double kEnergySeconds = 10.0;
constexpr double kFlowSeconds = 120.0;

constexpr std::uint64_t kSeed = 20140519;

// The exact lattice identity does not hold for the level-m graph energy:
// on a single edge with u = (1, 0), v = (0, 1) the left side is 0 and the
// right side is 2. Only the inequality <= holds at finite level.
const std::set<int> kKnownRed{2};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(3);
    s << x;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string summarize(const std::vector<gf::Report>& reports) {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double slack = -gf::kInfinity;
    for (const auto& r : reports) {
        samples += r.samples;
        violations += r.violations;
        slack = std::max(slack, r.max_slack);
    }
    return std::to_string(samples) + " checks, " + std::to_string(violations) + " violations, max slack " +
           fmt(slack);
}

const gf::Report& find(const std::vector<gf::Report>& reports, const std::string& name) {
    for (const auto& r : reports) {
        if (r.property == name) return r;
    }
    throw std::runtime_error("missing report " + name);
}

Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    gf::SampleConfig cfg;
    cfg.seed = kSeed;
    cfg.sample_count = 100000;
    const auto reports = gf::check_scalar_inequalities(cfg);
    const double secs = seconds_since(t0);
    bool tol_ok = gf::kIdentityTolerance <= kScalarSlack;
    return {gf::all_passed(reports) && secs < kScalarSeconds && tol_ok,
            summarize(reports) + ", " + fmt(secs) + " s"};
}

Outcome criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    gf::SampleConfig cfg;
    cfg.seed = kSeed;
    cfg.sample_count = 1000;
    cfg.levels = {1, 2, 3};
    cfg.n_points = {3};
    const auto reports = gf::check_energy_inequalities(cfg);
    const double secs = seconds_since(t0);
    const auto& lattice = find(reports, "energy.lattice_identity");
    const auto& contraction = find(reports, "energy.contraction");
    const auto& domination = find(reports, "energy.domination");
    const auto& submodular = find(reports, "energy.lattice_submodular");
    const auto& sign_consistent = find(reports, "energy.lattice_sign_consistent");
    const bool pass = lattice.passed() && contraction.passed() && domination.passed() && secs < kEnergySeconds &&
                      gf::kIdentityTolerance <= kEnergySlack;
    std::string detail = "lattice identity " + std::to_string(lattice.violations) + "/" +
                         std::to_string(lattice.samples) + " violations (max gap " + fmt(lattice.max_slack) +
                         "), contraction " + std::to_string(contraction.violations) + "/" +
                         std::to_string(contraction.samples) + ", domination " +
                         std::to_string(domination.violations) + "/" + std::to_string(domination.samples) +
                         "; lattice <= holds " + std::to_string(submodular.violations) + "/" +
                         std::to_string(submodular.samples) + ", equality without edge sign changes " +
                         std::to_string(sign_consistent.violations) + "/" + std::to_string(sign_consistent.samples) +
                         ", " + fmt(secs) + " s";
    return {pass, detail};
}

Outcome criterion3() {
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst = 0.0;
    for (int N : {3, 4}) {
        for (int m = 0; m <= 3; ++m) {
            const gf::GasketGraph coarse = gf::build_level(N, m);
            const gf::GasketGraph fine = gf::build_level(N, m + 1);
            const gf::EnergyForm coarse_form(std::make_shared<const gf::GasketGraph>(coarse));
            const gf::EnergyForm fine_form(std::make_shared<const gf::GasketGraph>(fine));
            for (std::size_t k = 0; k < 100; ++k) {
                gf::Rng rng = gf::Rng::stream(kSeed + static_cast<std::uint64_t>(10 * N + m), k);
                gf::VertexFunction u = gf::VertexFunction::zero(coarse);
                for (auto& x : u.values) x = rng.uniform(-1.0, 1.0);
                const double before = coarse_form.energy(u);
                const double after = fine_form.energy(gf::harmonic_extend(coarse, u, fine));
                const double gap = std::abs(after - before) / std::max(1.0, before);
                worst = std::max(worst, gap);
                ++checks;
                if (!(gap <= kExtensionTol)) ++violations;
            }
        }
    }
    // midpoint rule for corner data (1, 0, 0) on the 3-point gasket
    const gf::GasketGraph g0 = gf::build_level(3, 0);
    const gf::GasketGraph g1 = gf::build_level(3, 1);
    gf::VertexFunction e1 = gf::VertexFunction::zero(g0);
    e1[g0.boundary()[0]] = 1.0;
    const gf::VertexFunction ext = gf::harmonic_extend(g0, e1, g1);
    auto at = [&](std::uint64_t a, std::uint64_t b, std::uint64_t c) {
        const std::vector<std::uint64_t> label{a, b, c};
        return ext[g1.find(label)];
    };
    const double m12 = at(1, 1, 0);
    const double m13 = at(1, 0, 1);
    const double m23 = at(0, 1, 1);
    const double rule_err = std::max({std::abs(m12 - 0.4), std::abs(m13 - 0.4), std::abs(m23 - 0.2)});
    const bool rule_ok = rule_err <= kExtensionTol;
    return {violations == 0 && rule_ok,
            std::to_string(checks) + " extensions, " + std::to_string(violations) + " violations, max rel gap " +
                fmt(worst) + "; midpoints (" + fmt(m12) + ", " + fmt(m13) + ", " + fmt(m23) + ")"};
}

Outcome criterion4() {
    const int top = 4;
    std::vector<gf::GasketGraph> levels;
    std::vector<gf::EnergyForm> forms;
    for (int m = 0; m <= top; ++m) {
        levels.push_back(gf::build_level(3, m));
        forms.emplace_back(std::make_shared<const gf::GasketGraph>(levels.back()));
    }
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst = gf::kInfinity;
    for (std::size_t k = 0; k < 100; ++k) {
        gf::Rng rng = gf::Rng::stream(kSeed ^ 0x4444, k);
        gf::VertexFunction u = gf::VertexFunction::zero(levels.back());
        for (auto& x : u.values) x = rng.uniform(-1.0, 1.0);
        double prev = 0.0;
        for (int m = 0; m <= top; ++m) {
            const auto idx = static_cast<std::size_t>(m);
            const double w = forms[idx].energy(gf::restrict(levels.back(), u, levels[idx]));
            if (m > 0) {
                const double step = (w - prev) / std::max(1.0, prev);
                worst = std::min(worst, step);
                ++checks;
                if (!(step >= kMonotoneSlack)) ++violations;
            }
            prev = w;
        }
    }
    return {violations == 0,
            std::to_string(checks) + " level steps, " + std::to_string(violations) + " decreases, min rel step " +
                fmt(worst)};
}

gf::FlowCheckConfig flow_ensemble(std::size_t pairs) {
    gf::FlowCheckConfig cfg;
    cfg.sampling.seed = kSeed;
    cfg.sampling.sample_count = pairs;
    cfg.sampling.levels = {3};
    cfg.sampling.n_points = {3};
    cfg.flow.tau = 0.05;
    cfg.flow.t_end = 1.0;
    cfg.flow.tol = kFlowSolverTol;
    cfg.violation_tol = kFlowViolation;
    return cfg;
}

std::vector<gf::Report> g_ensemble;
double g_ensemble_seconds = 0.0;

const std::vector<gf::Report>& ensemble() {
    if (g_ensemble.empty()) {
        const auto t0 = std::chrono::steady_clock::now();
        g_ensemble = gf::check_flow_properties(flow_ensemble(20), gf::builtin_convex_specs(3));
        g_ensemble_seconds = seconds_since(t0);
    }
    return g_ensemble;
}

std::vector<gf::Report> with_prefix(const std::vector<gf::Report>& reports, const std::string& prefix) {
    std::vector<gf::Report> out;
    for (const auto& r : reports) {
        if (r.property.rfind(prefix, 0) == 0) out.push_back(r);
    }
    return out;
}

Outcome criterion5() {
    const auto rows = with_prefix(ensemble(), "l2_contraction/");
    const bool pass = !rows.empty() && gf::all_passed(rows) && g_ensemble_seconds < kFlowSeconds;
    return {pass, std::to_string(rows.size()) + " specs, " + summarize(rows) + ", ensemble " +
                      fmt(g_ensemble_seconds) + " s"};
}

Outcome criterion6() {
    std::vector<gf::Report> rows;
    for (const char* p : {"positivity/", "order/", "linf_contraction/"}) {
        auto part = with_prefix(ensemble(), p);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return {rows.size() == 3 * gf::builtin_convex_specs(3).size() && gf::all_passed(rows), summarize(rows)};
}

Outcome criterion7() {
    const std::vector<gf::NamedSpec> specs{
        {"quadratic", gf::RobinSpec::uniform(3, gf::BoundaryFunctional::quadratic(1.0))},
        {"absolute", gf::RobinSpec::uniform(3, gf::BoundaryFunctional::absolute_value(1.0))},
        {"mixed", gf::mixed_spec(3)},
    };
    const auto reports = gf::check_flow_properties(flow_ensemble(10), specs);
    std::vector<gf::Report> rows;
    for (const char* p : {"sandwich_lower/", "sandwich_upper/"}) {
        auto part = with_prefix(reports, p);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return {rows.size() == 6 && gf::all_passed(rows), summarize(rows)};
}

Outcome criterion8() {
    const auto graph = gf::make_level(3, 3);
    const gf::EnergyForm form(graph);
    const gf::VertexMeasure mu(*graph, gf::MeasureWeights::uniform(3));
    // smooth load vanishing on the boundary, in barycentric coordinates
    gf::VertexFunction f = gf::VertexFunction::zero(*graph);
    const double scale = std::ldexp(1.0, graph->level());
    for (std::size_t x = 0; x < graph->vertex_count(); ++x) {
        const auto w = graph->weights(x);
        const double b1 = static_cast<double>(w[0]) / scale;
        const double b2 = static_cast<double>(w[1]) / scale;
        const double b3 = static_cast<double>(w[2]) / scale;
        f[x] = b1 * b2 + 2.0 * b2 * b3 - b1 * b3;
    }
    double worst = 0.0;
    for (double beta : {0.5, 1.0, 2.0}) {
        const gf::RobinSpec spec = gf::RobinSpec::uniform(3, gf::BoundaryFunctional::quadratic(beta));
        const gf::PoissonResult res = gf::poisson_solve(form, mu, spec, f);
        for (std::size_t i = 0; i < 3; ++i) {
            const double u_p = res.u[graph->boundary()[i]];
            worst = std::max(worst, std::abs(gf::normal_derivative(form, res.u, i) + beta * u_p));
        }
    }
    return {worst <= kRobinTol, "beta in {0.5, 1, 2}, max |du/dnu + beta u| = " + fmt(worst)};
}

Outcome criterion9() {
    double worst = 0.0;
    const std::vector<double> corner{1.0, 0.0, 0.0};
    for (int m = 0; m <= 4; ++m) {
        const auto graph = gf::make_level(3, m);
        const gf::EnergyForm form(graph);
        const gf::VertexFunction h = gf::harmonic_function(*graph, corner);
        worst = std::max(worst, std::abs(gf::boundary_difference_sum(form, h, 0) - 2.0));
    }
    return {worst <= kNormalDerivativeTol, "m = 0..4, max deviation from 2: " + fmt(worst)};
}

Outcome criterion10() {
    const auto graph = gf::make_level(3, 3);
    const gf::EnergyForm form(graph);
    const gf::VertexMeasure mu(*graph, gf::MeasureWeights::uniform(3));
    gf::FlowConfig cfg;
    cfg.tau = 0.05;
    cfg.t_end = 1.0;
    cfg.tol = kConservationSolverTol;
    double worst = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
        gf::Rng rng = gf::Rng::stream(kSeed ^ 0x1010, k);
        gf::VertexFunction u0 = gf::VertexFunction::zero(*graph);
        for (auto& x : u0.values) x = rng.uniform(-1.0, 1.0);
        const gf::Trajectory t = gf::evolve(form, mu, gf::RobinSpec::neumann(3), u0, cfg);
        const double m0 = gf::mean(mu, t.states.front());
        for (const auto& s : t.states) worst = std::max(worst, std::abs(gf::mean(mu, s) - m0));
    }
    return {worst <= kConservationTol, "10 trajectories, max mean drift " + fmt(worst)};
}

Outcome criterion11() {
    gf::SampleConfig cfg;
    cfg.seed = kSeed;
    cfg.sample_count = 100;
    auto specs = gf::builtin_convex_specs(3);
    specs.push_back({"capped", gf::RobinSpec::uniform(3, gf::capped_slope())});
    std::vector<gf::Report> rows;
    for (int m : {1, 2, 3}) {
        const gf::EnergyForm form(gf::make_level(3, m));
        for (const auto& s : specs) rows.push_back(gf::check_locality(form, s.spec, cfg));
    }
    return {gf::all_passed(rows), std::to_string(specs.size()) + " specs x 3 levels, " + summarize(rows)};
}

bool same_bytes(const fs::path& a, const fs::path& b) { return gf::read_file(a.string()) == gf::read_file(b.string()); }

gf::Json without_run_specifics(gf::Json manifest) {
    manifest.erase("timings");
    manifest.erase("outputs");
    return manifest;
}

Outcome criterion12() {
    const fs::path root(GASKETFLOW_SOURCE_DIR);
    const fs::path scratch = fs::temp_directory_path() / "gasketflow_acceptance";
    fs::remove_all(scratch);
    std::vector<std::string> mismatches;

    const std::string evolve_cfg = gf::read_file((root / "configs" / "mixed_robin.json").string());
    gf::cmd_evolve(evolve_cfg, (scratch / "a").string());
    gf::cmd_evolve(evolve_cfg, (scratch / "b").string());
    for (const char* f : {"trajectory.csv", "summary.csv"}) {
        if (!same_bytes(scratch / "a" / f, scratch / "b" / f)) mismatches.push_back(std::string("evolve ") + f);
    }
    const auto ma = gf::parse_json_text(gf::read_file((scratch / "a" / "manifest.json").string()), "a");
    const auto mb = gf::parse_json_text(gf::read_file((scratch / "b" / "manifest.json").string()), "b");
    if (without_run_specifics(ma) != without_run_specifics(mb)) mismatches.push_back("evolve manifest");
    if (!same_bytes(scratch / "a" / "trajectory.csv", root / "tests" / "data" / "mixed_robin_trajectory.csv")) {
        mismatches.push_back("golden trajectory");
    }
    if (!same_bytes(scratch / "a" / "summary.csv", root / "tests" / "data" / "mixed_robin_summary.csv")) {
        mismatches.push_back("golden summary");
    }
    // re-run from the echoed configuration
    gf::cmd_evolve(ma.at("config").dump(), (scratch / "c").string());
    if (!same_bytes(scratch / "a" / "trajectory.csv", scratch / "c" / "trajectory.csv")) {
        mismatches.push_back("evolve from manifest");
    }

    const std::string poisson_cfg = gf::read_file((root / "configs" / "poisson_quadratic.json").string());
    gf::cmd_poisson(poisson_cfg, (scratch / "p1").string());
    gf::cmd_poisson(poisson_cfg, (scratch / "p2").string());
    for (const char* f : {"solution.csv", "report.json"}) {
        if (!same_bytes(scratch / "p1" / f, scratch / "p2" / f)) mismatches.push_back(std::string("poisson ") + f);
    }

    // verification reports do not depend on the worker count
    ::setenv("GASKETFLOW_THREADS", "1", 1);
    gf::cmd_verify("locality", kSeed, (scratch / "v1.json").string());
    ::setenv("GASKETFLOW_THREADS", "3", 1);
    gf::cmd_verify("locality", kSeed, (scratch / "v3.json").string());
    ::unsetenv("GASKETFLOW_THREADS");
    if (!same_bytes(scratch / "v1.json", scratch / "v3.json")) mismatches.push_back("verify across thread counts");

    fs::remove_all(scratch);
    std::string detail = mismatches.empty() ? "evolve, poisson, verify outputs identical; golden files match"
                                            : "mismatch:";
    for (const auto& m : mismatches) detail += " [" + m + "]";
    return {mismatches.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"scalar inequalities", criterion1},
        {"energy identities", criterion2},
        {"harmonic extension", criterion3},
        {"energy monotone in m", criterion4},
        {"flow L2 contraction", criterion5},
        {"positivity, order, Linf", criterion6},
        {"sandwich", criterion7},
        {"Robin optimality", criterion8},
        {"harmonic normal derivative", criterion9},
        {"Neumann conservation", criterion10},
        {"locality", criterion11},
        {"determinism", criterion12},
    };
    int unexpected = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        Outcome out;
        try {
            out = criteria[k].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const bool known = kKnownRed.count(id) > 0;
        std::cout << "criterion " << id << " [" << (out.pass ? "PASS" : "FAIL") << "] " << criteria[k].first << ": "
                  << out.detail;
        if (!out.pass && known) std::cout << " (known red: exact identity fails for the level-m graph energy)";
        std::cout << std::endl;
        if (!out.pass && !known) ++unexpected;
    }
    return unexpected == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
