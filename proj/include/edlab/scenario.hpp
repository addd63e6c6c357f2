#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edlab/config.hpp"

namespace edlab {

inline constexpr char const* version_string = EDLAB_VERSION_STRING;

/// One named scalar measured at a snapshot.
struct Metric
{
    std::string name;
    double value = 0.0;
};

struct SnapshotMetrics
{
    std::uint64_t step = 0;
    double t = 0.0;
    std::vector<Metric> metrics;
};

/// Densities of every representation at one snapshot, on the scenario grid.
/// Representations a scenario does not run are left empty.
struct DensityOverlay
{
    std::uint64_t step = 0;
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> ensemble;
    std::vector<double> ck;
    std::vector<double> field;
    std::vector<double> psi;
};

struct EnergyPoint
{
    std::uint64_t step = 0;
    double t = 0.0;
    double total = 0.0;
    double drift = 0.0;  ///< relative to the initial total
};

/// Packet variance against the closed-form law.
struct VariancePoint
{
    double t = 0.0;
    double measured = 0.0;
    double expected = 0.0;
};

/// A tolerance check: passes when value < tolerance (upper bound) or
/// value > tolerance (lower bound).
struct Check
{
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool lower_bound = false;
    bool passed = false;
};

struct ComparisonReport
{
    std::string scenario;
    std::string version;
    std::uint64_t seed = 0;
    std::vector<SnapshotMetrics> snapshots;
    std::vector<DensityOverlay> overlays;
    std::vector<EnergyPoint> energy;
    std::vector<VariancePoint> variance;
    std::vector<Check> checks;

    bool passed() const noexcept;
    /// Machine-readable form (checks, snapshots, energy and variance series).
    std::string to_json() const;
};

/// Runs the representations the scenario needs and writes into
/// cfg.outputs.dir: resolved.cfg, provenance.txt, energy.csv, snapshots/,
/// trajectories.csv (ensemble scenarios) and report.json. Module errors
/// propagate after an error manifest (error.json) is written next to the
/// partial outputs.
ComparisonReport run_scenario(ScenarioConfig const& cfg);

/// Gnuplot data files and one script per figure (density overlays, energy
/// series, variance growth) under out_dir. Byte-stable for identical reports.
/// Throws IoError if the directory cannot be written.
void emit_plots(ComparisonReport const& report, std::filesystem::path const& out_dir);

}  // namespace edlab
