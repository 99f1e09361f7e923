#pragma once

// Implementations behind the gasketflow command-line tool. Each command is a
// function of (configuration, seed) that writes files into an output
// directory; the manifest is the only output carrying wall-clock data.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gasketflow/energy.hpp"
#include "gasketflow/flow.hpp"
#include "gasketflow/gasket.hpp"
#include "gasketflow/io.hpp"
#include "gasketflow/measure.hpp"
#include "gasketflow/robin.hpp"
#include "gasketflow/verify.hpp"

namespace gasketflow {

inline constexpr const char* kVersion = "1.0.0";

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::filesystem::path prepare_dir(const std::string& out) {
    std::filesystem::path dir(out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + out + ": " + ec.message());
    return dir;
}

inline Json manifest(const std::string& command, const Json& config, std::optional<std::uint64_t> seed,
                     const std::vector<std::string>& outputs, double seconds) {
    Json j;
    j["command"] = command;
    j["versions"] = {{"gasketflow", kVersion}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                             std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                             std::to_string(EIGEN_MINOR_VERSION)}};
    j["config"] = config;
    if (seed) {
        j["seed"] = *seed;
    } else {
        j["seed"] = nullptr;
    }
    j["outputs"] = outputs;
    j["timings"] = {{"wall_seconds", seconds}};
    return j;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

// graph.json and coordinates.csv for V_m of the N-point gasket.
inline std::vector<std::string> cmd_gasket(int n_points, int level, const std::string& out) {
    const auto dir = detail::prepare_dir(out);
    const GasketGraph g = build_level(n_points, level);
    const std::string graph_path = (dir / "graph.json").string();
    const std::string coords_path = (dir / "coordinates.csv").string();
    write_file(graph_path, graph_to_json(g).dump() + "\n");
    write_file(coords_path, coordinates_csv(g));
    return {graph_path, coords_path};
}

// Trajectory of the backward-Euler flow described by `config_text`.
// Writes trajectory.csv (time, vertex_0, ...), summary.csv (per-step W_B,
// sup norm, L^2_mu norm, mu-mean) and manifest.json.
inline std::vector<std::string> cmd_evolve(const std::string& config_text, const std::string& out,
                                           const Overrides& overrides = {}) {
    const detail::Stopwatch clock;
    Json config = parse_json_text(config_text, "config");
    if (overrides.tol) config["tol"] = *overrides.tol;
    if (overrides.seed && config.contains("u0") && config["u0"].value("kind", "") == "random") {
        config["u0"]["seed"] = *overrides.seed;
    }
    const ProblemConfig problem = parse_problem(config, true);
    const FlowConfig flow = parse_flow_config(config);
    const auto graph = make_level(problem.n_points, problem.level);
    const EnergyForm form(graph);
    const VertexMeasure mu(*graph, problem.measure_weights());
    const VertexFunction u0 = parse_vertex_data(detail::require_key(config, "u0", ""), *graph, mu, "/u0");
    const Trajectory traj = detail::rethrow_at("/spec", [&] { return evolve(form, mu, problem.spec, u0, flow); });

    const auto dir = detail::prepare_dir(out);
    const std::string traj_path = (dir / "trajectory.csv").string();
    const std::string summary_path = (dir / "summary.csv").string();
    const std::string manifest_path = (dir / "manifest.json").string();
    write_file(traj_path, trajectory_csv(traj));

    std::ostringstream summary;
    summary << "time,energy,sup_norm,l2_norm,mean,inner_iterations,residual\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& u = traj.states[k];
        double sup = 0.0;
        for (double x : u.values) sup = std::max(sup, std::abs(x));
        const Extended wb = eval_WB(form, problem.spec, u);
        summary << format_double(traj.times[k]) << ',' << format_double(wb.value()) << ',' << format_double(sup)
                << ',' << format_double(l2_norm(mu, u)) << ',' << format_double(mean(mu, u)) << ','
                << (k == 0 ? 0 : traj.diagnostics[k - 1].iterations) << ','
                << format_double(k == 0 ? 0.0 : traj.diagnostics[k - 1].residual) << '\n';
    }
    write_file(summary_path, summary.str());

    std::vector<std::string> outputs{traj_path, summary_path, manifest_path};
    write_file(manifest_path,
               detail::dump(detail::manifest("evolve", config, random_seed_of(config["u0"]), outputs, clock.seconds())));
    return outputs;
}

// Robin-Poisson solve: solution.csv, report.json (weak residual and, per
// boundary point, normal derivative, subgradient selection, boundary load
// and Robin residual) and manifest.json.
inline std::vector<std::string> cmd_poisson(const std::string& config_text, const std::string& out,
                                            const Overrides& overrides = {}) {
    const detail::Stopwatch clock;
    Json config = parse_json_text(config_text, "config");
    if (overrides.tol) config["tol"] = *overrides.tol;
    if (overrides.seed && config.contains("f") && config["f"].value("kind", "") == "random") {
        config["f"]["seed"] = *overrides.seed;
    }
    const ProblemConfig problem = parse_problem(config, true);
    const double tol = config.contains("tol") ? detail::number_at(config, "tol", "") : 1e-12;
    const auto graph = make_level(problem.n_points, problem.level);
    const EnergyForm form(graph);
    const VertexMeasure mu(*graph, problem.measure_weights());
    const VertexFunction f = parse_vertex_data(detail::require_key(config, "f", ""), *graph, mu, "/f");
    const PoissonResult result = detail::rethrow_at("/", [&] { return poisson_solve(form, mu, problem.spec, f, tol); });

    Json report;
    report["weak_residual"] = result.weak_residual;
    report["iterations"] = result.stats.iterations;
    report["kkt_residual"] = result.stats.residual;
    Json boundary = Json::array();
    for (std::size_t i = 0; i < problem.spec.size(); ++i) {
        const std::size_t p = graph->boundary()[i];
        const double nd = normal_derivative(form, result.u, i);
        const double load = mu[p] * f[p];
        const double g = result.boundary_selection[i];
        Json row;
        row["boundary_index"] = i;
        row["vertex"] = p;
        row["value"] = result.u[p];
        row["normal_derivative"] = nd;
        row["subgradient"] = g;
        row["boundary_load"] = load;
        row["robin_residual"] = std::abs(nd + g - load);
        boundary.push_back(std::move(row));
    }
    report["boundary"] = std::move(boundary);

    const auto dir = detail::prepare_dir(out);
    const std::string solution_path = (dir / "solution.csv").string();
    const std::string report_path = (dir / "report.json").string();
    const std::string manifest_path = (dir / "manifest.json").string();
    write_file(solution_path, values_csv(result.u));
    write_file(report_path, detail::dump(report));
    std::vector<std::string> outputs{solution_path, report_path, manifest_path};
    write_file(manifest_path,
               detail::dump(detail::manifest("poisson", config, random_seed_of(config["f"]), outputs, clock.seconds())));
    return outputs;
}

// Harmonic extension dump. Config: {"N":3,"m":4,"boundary":[...]} extends
// from V_0, or {"N":3,"m":4,"base_level":k,"values":[...]} extends level-k
// data. Writes extension.csv (values on V_m), energy_profile.csv and
// manifest.json.
inline std::vector<std::string> cmd_extend(const std::string& config_text, const std::string& out) {
    const detail::Stopwatch clock;
    const Json config = parse_json_text(config_text, "config");
    const ProblemConfig problem = parse_problem(config, false);
    int base_level = 0;
    std::vector<double> values;
    if (config.contains("values")) {
        base_level = config.contains("base_level") ? detail::integer_at(config, "base_level", "") : 0;
        values = detail::numbers(config.at("values"), "/values");
    } else {
        values = detail::numbers(detail::require_key(config, "boundary", ""), "/boundary");
    }
    if (base_level < 0 || base_level > problem.level) throw ConfigError("/base_level: must lie in [0, m]");
    GasketGraph current = build_level(problem.n_points, base_level);
    if (values.size() != current.vertex_count()) {
        throw ConfigError("expected " + std::to_string(current.vertex_count()) + " values on level " +
                          std::to_string(base_level));
    }
    VertexFunction u{current.tag(), values};
    while (current.level() < problem.level) {
        GasketGraph next = build_level(problem.n_points, current.level() + 1);
        u = harmonic_extend(current, u, next);
        current = std::move(next);
    }
    const auto dir = detail::prepare_dir(out);
    const std::string ext_path = (dir / "extension.csv").string();
    const std::string profile_path = (dir / "energy_profile.csv").string();
    const std::string manifest_path = (dir / "manifest.json").string();
    write_file(ext_path, values_csv(u));
    write_file(profile_path, energy_profile_csv(energy_profile(current, u)));
    std::vector<std::string> outputs{ext_path, profile_path, manifest_path};
    write_file(manifest_path, detail::dump(detail::manifest("extend", config, std::nullopt, outputs, clock.seconds())));
    return outputs;
}

inline const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> suites{"scalar", "energy", "wb", "locality", "flow", "all"};
    return suites;
}

inline constexpr std::uint64_t kDefaultSeed = 20140519;

// Runs one verification suite and returns its reports.
inline std::vector<Report> run_suite(const std::string& suite, std::uint64_t seed, double solver_tol = 1e-9) {
    std::vector<Report> out;
    auto append = [&](std::vector<Report> r) { out.insert(out.end(), r.begin(), r.end()); };
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "scalar") {
        known = true;
        SampleConfig cfg;
        cfg.seed = seed;
        cfg.sample_count = 100000;
        append(check_scalar_inequalities(cfg));
    }
    if (all || suite == "energy") {
        known = true;
        SampleConfig cfg;
        cfg.seed = seed;
        cfg.sample_count = 1000;
        cfg.levels = {1, 2, 3};
        cfg.n_points = {3};
        append(check_energy_inequalities(cfg));
    }
    if (all || suite == "wb") {
        known = true;
        SampleConfig cfg;
        cfg.seed = seed;
        cfg.sample_count = 1000;
        const EnergyForm form(make_level(3, 2));
        const RobinSpec mixed = mixed_spec(3);
        std::vector<std::pair<std::string, std::pair<RobinSpec, RobinSpec>>> cases{
            {"dirichlet<mixed", {RobinSpec::dirichlet(3), mixed}},
            {"mixed<neumann", {mixed, RobinSpec::neumann(3)}},
            {"capped<neumann", {RobinSpec::uniform(3, capped_slope()), RobinSpec::neumann(3)}},
            {"dirichlet<capped", {RobinSpec::dirichlet(3), RobinSpec::uniform(3, capped_slope())}},
        };
        for (auto& [name, pair] : cases) {
            auto reports = check_WB_criteria(form, pair.first, pair.second, cfg);
            for (auto& r : reports) r.property += "/" + name;
            append(reports);
        }
    }
    if (all || suite == "locality") {
        known = true;
        SampleConfig cfg;
        cfg.seed = seed;
        cfg.sample_count = 100;
        for (int m : {1, 2, 3}) {
            const EnergyForm form(make_level(3, m));
            auto specs = builtin_convex_specs(3);
            specs.push_back({"capped", RobinSpec::uniform(3, capped_slope())});
            for (const auto& named : specs) {
                Report r = check_locality(form, named.spec, cfg);
                r.property += "/" + named.name + "/m" + std::to_string(m);
                out.push_back(r);
            }
        }
    }
    if (all || suite == "flow") {
        known = true;
        FlowCheckConfig cfg;
        cfg.sampling.seed = seed;
        cfg.sampling.sample_count = 20;
        cfg.sampling.levels = {3};
        cfg.sampling.n_points = {3};
        cfg.flow.tau = 0.05;
        cfg.flow.t_end = 1.0;
        cfg.flow.tol = solver_tol;
        append(check_flow_properties(cfg, builtin_convex_specs(3)));
        out.push_back(check_flow_domination(
            cfg, {"quadratic2", RobinSpec::uniform(3, BoundaryFunctional::quadratic(2.0))},
            {"quadratic1", RobinSpec::uniform(3, BoundaryFunctional::quadratic(1.0))}));
    }
    if (!known) throw DomainError("unknown verification suite \"" + suite + "\"");
    return out;
}

// Writes the JSON report to `out` (a file path) and returns 0 iff every
// property has zero violations.
inline int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out, double solver_tol = 1e-9) {
    const std::vector<Report> reports = run_suite(suite, seed, solver_tol);
    const std::filesystem::path path(out);
    if (path.has_parent_path()) detail::prepare_dir(path.parent_path().string());
    write_file(out, detail::dump(reports_to_json(reports)));
    return all_passed(reports) ? 0 : 1;
}

}  // namespace gasketflow
