// gasketflow command-line front end.
//
// Exit codes: 0 success, 1 verification violations, 2 usage or configuration
// error, 3 solver or I/O failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gasketflow/commands.hpp"

namespace {

constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

void print_paths(const std::vector<std::string>& paths) {
    for (const auto& p : paths) std::cout << p << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energies, boundary functionals and backward-Euler flows on level-m gasket graphs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", gasketflow::kVersion);

    int n_points = 3;
    int level = 0;
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::string suite;

    auto* gasket = app.add_subcommand("gasket", "write the level-m graph (JSON) and vertex coordinates (CSV)");
    gasket->add_option("-N,--points", n_points, "number of contractions N")->required();
    gasket->add_option("-m,--level", level, "approximation level m")->required();
    gasket->add_option("--out", out, "output directory")->required();

    auto* evolve = app.add_subcommand("evolve", "run a backward-Euler flow and write the trajectory");
    auto* poisson = app.add_subcommand("poisson", "solve the Robin-Poisson problem");
    auto* extend = app.add_subcommand("extend", "dump a harmonic extension and its energy profile");
    for (auto* sub : {evolve, poisson, extend}) {
        sub->add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->required();
    }
    for (auto* sub : {evolve, poisson}) {
        sub->add_option("--seed", seed, "seed for random vertex data (overrides the config)");
        sub->add_option("--tol", tol, "solver KKT tolerance (overrides the config)");
    }

    auto* verify = app.add_subcommand("verify", "run a property suite; exit 0 iff zero violations");
    verify->add_option("suite", suite, "scalar, energy, wb, locality, flow or all")
        ->required()
        ->check(CLI::IsMember(gasketflow::verify_suites()));
    verify->add_option("--seed", seed, "sampling seed");
    verify->add_option("--tol", tol, "solver tolerance for the flow suite");
    verify->add_option("--out", out, "JSON report path")->default_val("verify_report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        const gasketflow::Overrides overrides{seed, tol};
        if (*gasket) {
            print_paths(gasketflow::cmd_gasket(n_points, level, out));
        } else if (*evolve) {
            print_paths(gasketflow::cmd_evolve(gasketflow::read_file(config_path), out, overrides));
        } else if (*poisson) {
            print_paths(gasketflow::cmd_poisson(gasketflow::read_file(config_path), out, overrides));
        } else if (*extend) {
            print_paths(gasketflow::cmd_extend(gasketflow::read_file(config_path), out));
        } else if (*verify) {
            const auto reports =
                gasketflow::run_suite(suite, seed.value_or(gasketflow::kDefaultSeed), tol.value_or(1e-9));
            gasketflow::write_file(out, gasketflow::reports_to_json(reports).dump(2) + "\n");
            for (const auto& r : reports) {
                std::cout << (r.passed() ? "ok   " : "FAIL ") << r.property << "  samples=" << r.samples
                          << " violations=" << r.violations << '\n';
            }
            return gasketflow::all_passed(reports) ? 0 : kExitViolations;
        }
    } catch (const gasketflow::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
