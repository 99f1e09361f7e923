#pragma once

// File formats: graph JSON, coordinate / mass / trajectory CSV, Robin spec
// and run configuration JSON, verification reports.
//
// Floating-point numbers are written in the shortest decimal form that reads
// back to the same double, so CSV output is byte-stable.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "gasketflow/energy.hpp"
#include "gasketflow/flow.hpp"
#include "gasketflow/gasket.hpp"
#include "gasketflow/measure.hpp"
#include "gasketflow/robin.hpp"
#include "gasketflow/verify.hpp"

namespace gasketflow {

using Json = nlohmann::ordered_json;

// Configuration problems, reported with the JSON pointer of the offending
// entry (or the parser's line and column for malformed text).
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw Error("failed to format a double");
    return std::string(buf.data(), end);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("failed writing " + path);
}

inline Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

// ---------------------------------------------------------------- graph export

inline Json graph_to_json(const GasketGraph& g) {
    Json j;
    j["N"] = g.n_points();
    j["m"] = g.level();
    Json vertices = Json::array();
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        auto w = g.weights(v);
        vertices.push_back(std::vector<std::uint64_t>(w.begin(), w.end()));
    }
    j["vertices"] = std::move(vertices);
    Json cells = Json::array();
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        auto cell = g.cell(c);
        cells.push_back(std::vector<std::size_t>(cell.begin(), cell.end()));
    }
    j["cells"] = std::move(cells);
    Json edges = Json::array();
    for (auto [a, b] : g.edges()) edges.push_back({a, b});
    j["edges"] = std::move(edges);
    j["boundary"] = g.boundary();
    return j;
}

inline std::string coordinates_csv(const GasketGraph& g) {
    std::ostringstream out;
    out << "index";
    for (int d = 1; d < g.n_points(); ++d) out << ",x_" << d;
    out << '\n';
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        out << v;
        for (double x : embed(g.address(v))) out << ',' << format_double(x);
        out << '\n';
    }
    return out.str();
}

inline std::string masses_csv(const VertexMeasure& mu) {
    std::ostringstream out;
    out << "index,mass\n";
    for (std::size_t v = 0; v < mu.size(); ++v) out << v << ',' << format_double(mu[v]) << '\n';
    return out.str();
}

inline std::string values_csv(const VertexFunction& u, const char* column = "value") {
    std::ostringstream out;
    out << "index," << column << '\n';
    for (std::size_t v = 0; v < u.size(); ++v) out << v << ',' << format_double(u[v]) << '\n';
    return out.str();
}

inline std::string energy_profile_csv(const std::vector<double>& profile) {
    std::ostringstream out;
    out << "m,W_m\n";
    for (std::size_t m = 0; m < profile.size(); ++m) out << m << ',' << format_double(profile[m]) << '\n';
    return out.str();
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "time";
    const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
    for (std::size_t v = 0; v < n; ++v) out << ",vertex_" << v;
    out << '\n';
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        out << format_double(traj.times[k]);
        for (double x : traj.states[k].values) out << ',' << format_double(x);
        out << '\n';
    }
    return out.str();
}

// ------------------------------------------------------------------ Robin spec

namespace detail {

inline const Json& require_key(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(path + ": missing required key \"" + key + "\"");
    return j.at(key);
}

inline double number_at(const Json& j, const char* key, const std::string& path) {
    const Json& v = require_key(j, key, path);
    if (!v.is_number()) throw ConfigError(path + "/" + key + ": expected a number");
    return v.get<double>();
}

inline int integer_at(const Json& j, const char* key, const std::string& path) {
    const Json& v = require_key(j, key, path);
    if (!v.is_number_integer()) throw ConfigError(path + "/" + key + ": expected an integer");
    return v.get<int>();
}

inline std::vector<double> numbers(const Json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number()) throw ConfigError(path + "/" + std::to_string(k) + ": expected a number");
        out.push_back(v[k].get<double>());
    }
    return out;
}

template <class F>
auto rethrow_at(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace detail

inline BoundaryFunctional parse_boundary(const Json& j, const std::string& path) {
    std::string kind;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else if (j.is_object()) {
        const Json& k = detail::require_key(j, "kind", path);
        if (!k.is_string()) throw ConfigError(path + "/kind: expected a string");
        kind = k.get<std::string>();
    } else {
        throw ConfigError(path + ": expected a string or an object");
    }
    return detail::rethrow_at(path, [&]() -> BoundaryFunctional {
        if (kind == "zero" || kind == "neumann") return BoundaryFunctional::zero();
        if (kind == "dirichlet") return BoundaryFunctional::dirichlet();
        if (kind == "quadratic") return BoundaryFunctional::quadratic(detail::number_at(j, "beta", path));
        if (kind == "absolute" || kind == "absolute_value") {
            return BoundaryFunctional::absolute_value(detail::number_at(j, "beta", path));
        }
        if (kind == "power") {
            return BoundaryFunctional::power(detail::number_at(j, "beta", path), detail::number_at(j, "p", path));
        }
        if (kind == "box") {
            return BoundaryFunctional::box(detail::number_at(j, "lower", path), detail::number_at(j, "upper", path));
        }
        if (kind == "piecewise") {
            auto bps = detail::numbers(detail::require_key(j, "breakpoints", path), path + "/breakpoints");
            const Json& raw = detail::require_key(j, "pieces", path);
            if (!raw.is_array()) throw ConfigError(path + "/pieces: expected an array of [a, b, c] triples");
            std::vector<BoundaryFunctional::Piece> pieces;
            for (std::size_t k = 0; k < raw.size(); ++k) {
                auto abc = detail::numbers(raw[k], path + "/pieces/" + std::to_string(k));
                if (abc.size() != 3) throw ConfigError(path + "/pieces/" + std::to_string(k) + ": expected [a, b, c]");
                pieces.push_back({abc[0], abc[1], abc[2]});
            }
            return BoundaryFunctional::piecewise(std::move(bps), std::move(pieces));
        }
        throw ConfigError(path + "/kind: unknown boundary kind \"" + kind + "\"");
    });
}

inline Json boundary_to_json(const BoundaryFunctional& b) {
    switch (b.kind()) {
        case BoundaryKind::Zero: return {{"kind", "neumann"}};
        case BoundaryKind::DirichletIndicator: return {{"kind", "dirichlet"}};
        case BoundaryKind::Quadratic: return {{"kind", "quadratic"}, {"beta", b.beta()}};
        case BoundaryKind::AbsoluteValue: return {{"kind", "absolute"}, {"beta", b.beta()}};
        case BoundaryKind::Power: return {{"kind", "power"}, {"beta", b.beta()}, {"p", b.exponent()}};
        case BoundaryKind::BoxIndicator: return {{"kind", "box"}, {"lower", b.lower()}, {"upper", b.upper()}};
        case BoundaryKind::PiecewiseQuadratic: {
            Json pieces = Json::array();
            for (const auto& q : b.pieces()) pieces.push_back({q[0], q[1], q[2]});
            return {{"kind", "piecewise"}, {"breakpoints", b.breakpoints()}, {"pieces", pieces}};
        }
    }
    return {};
}

// An array of N entries, or a single entry applied at every p_i.
inline RobinSpec parse_spec(const Json& j, int n_points, const std::string& path = "/spec") {
    RobinSpec spec;
    if (j.is_array()) {
        if (j.size() != static_cast<std::size_t>(n_points)) {
            throw ConfigError(path + ": expected " + std::to_string(n_points) + " boundary functionals, got " +
                              std::to_string(j.size()));
        }
        for (std::size_t i = 0; i < j.size(); ++i) spec.B.push_back(parse_boundary(j[i], path + "/" + std::to_string(i)));
    } else {
        spec = RobinSpec::uniform(n_points, parse_boundary(j, path));
    }
    return spec;
}

inline Json spec_to_json(const RobinSpec& spec) {
    Json out = Json::array();
    for (const auto& b : spec.B) out.push_back(boundary_to_json(b));
    return out;
}

// --------------------------------------------------------------- run configs

// Common header of evolve / poisson / extend configurations.
struct ProblemConfig {
    int n_points = 3;
    int level = 0;
    std::vector<double> weights;  // empty: uniform
    RobinSpec spec;

    MeasureWeights measure_weights() const {
        return weights.empty() ? MeasureWeights::uniform(n_points) : MeasureWeights(weights);
    }
};

inline ProblemConfig parse_problem(const Json& j, bool needs_spec) {
    if (!j.is_object()) throw ConfigError("/: expected a JSON object");
    ProblemConfig p;
    p.n_points = detail::integer_at(j, "N", "");
    p.level = detail::integer_at(j, "m", "");
    if (p.n_points < 2) throw ConfigError("/N: must be at least 2");
    if (p.level < 0) throw ConfigError("/m: must be nonnegative");
    if (j.contains("weights")) {
        p.weights = detail::numbers(j.at("weights"), "/weights");
        if (p.weights.size() != static_cast<std::size_t>(p.n_points)) {
            throw ConfigError("/weights: expected " + std::to_string(p.n_points) + " entries");
        }
        detail::rethrow_at("/weights", [&] { return MeasureWeights(p.weights); });
    }
    if (needs_spec) p.spec = parse_spec(detail::require_key(j, "spec", ""), p.n_points);
    return p;
}

// Vertex data described as {"kind":"harmonic","boundary":[...]},
// {"kind":"values","data":[...]}, {"kind":"constant","value":c} or
// {"kind":"random","seed":s[,"range":r][,"zero_mean":true]}. Random values are
// uniform on [-range, range] from the SplitMix64 stream of `seed`.
inline VertexFunction parse_vertex_data(const Json& j, const GasketGraph& g, const VertexMeasure& mu,
                                        const std::string& path, std::optional<std::uint64_t> seed_override = {}) {
    const Json& kind_json = detail::require_key(j, "kind", path);
    if (!kind_json.is_string()) throw ConfigError(path + "/kind: expected a string");
    const std::string kind = kind_json.get<std::string>();
    if (kind == "harmonic") {
        auto bv = detail::numbers(detail::require_key(j, "boundary", path), path + "/boundary");
        if (bv.size() != static_cast<std::size_t>(g.n_points())) {
            throw ConfigError(path + "/boundary: expected " + std::to_string(g.n_points()) + " values");
        }
        return harmonic_function(g, bv);
    }
    if (kind == "values") {
        auto data = detail::numbers(detail::require_key(j, "data", path), path + "/data");
        if (data.size() != g.vertex_count()) {
            throw ConfigError(path + "/data: expected " + std::to_string(g.vertex_count()) + " values, got " +
                              std::to_string(data.size()));
        }
        return {g.tag(), std::move(data)};
    }
    if (kind == "constant") return VertexFunction::constant(g, detail::number_at(j, "value", path));
    if (kind == "random") {
        std::uint64_t seed = 0;
        if (seed_override) {
            seed = *seed_override;
        } else {
            const Json& s = detail::require_key(j, "seed", path);
            if (!s.is_number_unsigned()) throw ConfigError(path + "/seed: expected a nonnegative integer");
            seed = s.get<std::uint64_t>();
        }
        const double range = j.contains("range") ? detail::number_at(j, "range", path) : 1.0;
        Rng rng(seed);
        VertexFunction u = VertexFunction::zero(g);
        for (auto& x : u.values) x = rng.uniform(-range, range);
        if (j.contains("zero_mean") && j.at("zero_mean").get<bool>()) {
            const double shift = mean(mu, u);
            for (auto& x : u.values) x -= shift;
        }
        return u;
    }
    throw ConfigError(path + "/kind: unknown vertex data kind \"" + kind + "\"");
}

inline std::optional<std::uint64_t> random_seed_of(const Json& data) {
    if (data.is_object() && data.value("kind", "") == "random" && data.contains("seed") &&
        data.at("seed").is_number_unsigned()) {
        return data.at("seed").get<std::uint64_t>();
    }
    return std::nullopt;
}

inline FlowConfig parse_flow_config(const Json& j) {
    FlowConfig c;
    c.tau = detail::number_at(j, "tau", "");
    c.t_end = detail::number_at(j, "t_end", "");
    if (j.contains("tol")) c.tol = detail::number_at(j, "tol", "");
    if (j.contains("max_inner_iters")) c.max_inner_iters = detail::integer_at(j, "max_inner_iters", "");
    detail::rethrow_at("/", [&] {
        c.validate();
        return 0;
    });
    return c;
}

// ------------------------------------------------------------------- reports

inline Json report_to_json(const Report& r) {
    Json j;
    j["property"] = r.property;
    j["samples"] = r.samples;
    j["violations"] = r.violations;
    if (std::isfinite(r.max_slack)) {
        j["max_slack"] = r.max_slack;
    } else {
        j["max_slack"] = nullptr;
    }
    j["seed"] = r.seed;
    return j;
}

inline Json reports_to_json(const std::vector<Report>& reports) {
    Json out = Json::array();
    for (const auto& r : reports) out.push_back(report_to_json(r));
    return out;
}

}  // namespace gasketflow
