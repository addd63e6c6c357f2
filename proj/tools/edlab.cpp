// edlab command-line driver.
//
//   edlab run <config> [--out-dir D] [--seed N] [--scenario NAME]
//   edlab validate <config>
//
// Exit codes: 0 all tolerances pass, 1 a tolerance failed, 2 configuration
// error, 3 runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "edlab/config.hpp"
#include "edlab/csv.hpp"
#include "edlab/errors.hpp"
#include "edlab/scenario.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_tolerance = 1;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

void print_report(edlab::ComparisonReport const& r, std::ostream& os)
{
    os << "scenario " << r.scenario << " (seed " << r.seed << ", edlab " << r.version << ")\n";
    for (auto const& c : r.checks)
        os << (c.passed ? "  PASS " : "  FAIL ") << c.name << " = " << edlab::format_number(c.value)
           << (c.lower_bound ? " > " : " < ") << edlab::format_number(c.tolerance) << '\n';
    os << (r.passed() ? "all checks passed\n" : "some checks failed\n");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"edlab: entropic dynamics numerical lab"};
    app.set_version_flag("--version", std::string(edlab::version_string));
    app.require_subcommand(1);

    std::string run_config;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scenario;
    auto* run = app.add_subcommand("run", "run a scenario and write its outputs");
    run->add_option("config", run_config, "scenario config file")->required();
    run->add_option("--out-dir", out_dir, "output directory (overrides outputs.dir)");
    run->add_option("--seed", seed, "RNG seed (overrides ensemble.seed and EDLAB_SEED)");
    run->add_option("--scenario", scenario, "scenario name (overrides the file)");

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "parse and validate a config file");
    validate->add_option("config", validate_config, "scenario config file")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? exit_pass : exit_config;
    }

    try
    {
        if (*validate)
        {
            auto const cfg = edlab::parse_config(validate_config);
            std::cout << cfg.resolved_text();
            return exit_pass;
        }

        edlab::ConfigOverrides overrides;
        if (scenario)
            overrides.scenario = edlab::scenario_from_string(*scenario);
        overrides.seed = seed;
        if (out_dir)
            overrides.out_dir = *out_dir;
        auto const cfg = edlab::resolve_config(edlab::read_config(run_config), overrides);
        auto const report = edlab::run_scenario(cfg);
        edlab::emit_plots(report, cfg.outputs.dir / "plots");
        print_report(report, std::cout);
        return report.passed() ? exit_pass : exit_tolerance;
    }
    catch (edlab::ConfigurationError const& e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    }
    catch (std::exception const& e)
    {
        std::cerr << "runtime error: " << e.what() << '\n';
        return exit_runtime;
    }
}
