#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "edlab/constants.hpp"
#include "edlab/ensemble.hpp"
#include "edlab/grid.hpp"
#include "edlab/hydro.hpp"

namespace edlab {

enum class Scenario
{
    free_packet,
    harmonic_oscillator,
    arrow_of_time,
    classical_limit,
    custom
};

std::string_view to_string(Scenario s) noexcept;
/// Throws ConfigurationError naming the accepted values.
Scenario scenario_from_string(std::string_view name);

/// One `key = value` line as read, before defaults.
struct RawEntry
{
    std::string value;
    int line = 0;
};

/// Keys are fully dotted (`section.key`).
struct RawConfig
{
    std::map<std::string, RawEntry> entries;
    std::filesystem::path source;  ///< directory used to resolve relative paths
};

/// Reads `key = value` lines. `[section]` headers prefix the keys that follow
/// with `section.`; `#` starts a comment. Throws ParseError (with line number)
/// on malformed lines or duplicate keys, ConfigurationError if the file cannot
/// be read.
RawConfig read_config(std::filesystem::path const& path);
RawConfig read_config_text(std::string_view text, std::filesystem::path source_dir = {});

struct GridSpec
{
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t n = 1024;
    Boundary boundary = Boundary::periodic;

    SpatialGrid grid() const { return SpatialGrid(x_min, x_max, n, boundary); }
};

struct InitialSpec
{
    double s0 = 0.5;          ///< packet width
    double k0 = 0.0;          ///< carrier wavenumber
    double x0 = 0.0;          ///< packet centre / walker start
    double v0 = 1.0;          ///< classical_limit drift velocity
    double mass_scale = 100;  ///< classical_limit heavy/light mass ratio
    double rho_amplitude = 0.5;  ///< arrow_of_time: rho ~ 1 + a cos(2 pi x / L)
    double s_amplitude = 1.0;    ///< arrow_of_time: S = b sin(2 pi x / L)
    std::filesystem::path table;  ///< custom: CSV with columns x, rho, S
};

struct EnsembleSpec
{
    std::size_t walkers = 0;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

struct OutputSpec
{
    std::filesystem::path dir = "edlab_out";
    std::size_t snapshots = 10;
    std::size_t trajectory_walkers = 100;
};

/// Every tolerance a scenario can check; each scenario uses a subset.
struct Tolerances
{
    double l2_field_cn = 1e-3;
    double variance = 5e-3;
    double energy_drift = 1e-6;
    double rho_stationary = 1e-6;
    double energy_value = 1e-4;
    double ens_ck_factor = 5.0;
    double ck_field_l1 = 2e-2;
    double reverse_identity = 1e-10;
    double asymmetry_min = 1e-3;
    double asymmetry_control = 1e-12;
    double variance_ratio = 0.05;
    double track = 0.01;
    double hj_residual = 1e-8;
};

struct ScenarioConfig
{
    Scenario scenario = Scenario::free_packet;
    PhysicalConstants constants;
    GridSpec grid;
    InitialSpec initial;
    double omega = 0.0;  ///< V = m omega^2 x^2 / 2
    TimeStepConfig time{1e-3, 2000};
    std::size_t substeps = 1;  ///< coupled-field steps per time step
    CoupledIntegrator integrator = CoupledIntegrator::strang;
    EnsembleSpec ensemble;
    OutputSpec outputs;
    Tolerances tolerances;

    /// Every resolved key as `section.key = value` lines; parses back to an
    /// identical config.
    std::string resolved_text() const;
};

/// Command-line overrides applied on top of the file.
struct ConfigOverrides
{
    std::optional<Scenario> scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
};

/// Applies per-scenario defaults, then the file's values, then overrides, and
/// validates the result. The seed falls back to EDLAB_SEED when neither the
/// file nor the overrides set it. Throws ParseError naming the key and line
/// for unknown keys, malformed values, or invalid enums; ConfigurationError
/// for inconsistent constants or an invalid grid.
ScenarioConfig resolve_config(RawConfig const& raw, ConfigOverrides const& overrides = {});

/// read_config followed by resolve_config with no overrides.
ScenarioConfig parse_config(std::filesystem::path const& path);

}  // namespace edlab
