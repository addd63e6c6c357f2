#include "edlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "edlab/csv.hpp"
#include "edlab/ensemble.hpp"
#include "edlab/errors.hpp"
#include "edlab/hydro.hpp"
#include "edlab/kernel.hpp"
#include "edlab/schrodinger.hpp"

namespace edlab {

namespace fs = std::filesystem;

namespace {

class OutputDir
{
  public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) { make(root_); }

    fs::path const& root() const noexcept { return root_; }

    std::ofstream open(fs::path const& rel) const
    {
        auto const path = root_ / rel;
        make(path.parent_path());
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw IoError("cannot write " + path.string());
        return os;
    }

    void write(fs::path const& rel, std::string const& text) const
    {
        auto os = open(rel);
        os << text;
        if (!os)
            throw IoError("failed writing " + (root_ / rel).string());
    }

  private:
    static void make(fs::path const& dir)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
            throw IoError("cannot create directory " + dir.string());
    }

    fs::path root_;
};

std::string step_tag(std::uint64_t step)
{
    auto s = std::to_string(step);
    if (s.size() < 6)
        s.insert(0, 6 - s.size(), '0');
    return s;
}

// Step numbers at which snapshots are taken: 0 and `count` evenly spaced steps.
std::vector<std::uint64_t> snapshot_steps(std::size_t n_steps, std::size_t count)
{
    std::vector<std::uint64_t> out{0};
    count = std::min(count, n_steps);
    for (std::size_t k = 1; k <= count; ++k)
    {
        auto const s = static_cast<std::uint64_t>(k * n_steps / count);
        if (s != out.back())
            out.push_back(s);
    }
    return out;
}

void add_check(ComparisonReport& r, std::string name, double value, double tol,
               bool lower_bound = false)
{
    bool const passed = std::isfinite(value) && (lower_bound ? value > tol : value < tol);
    r.checks.push_back({std::move(name), value, tol, lower_bound, passed});
}

ScalarField harmonic_potential(SpatialGrid const& g, double omega, PhysicalConstants const& c)
{
    double const k = c.mass() * omega * omega / 2;
    return ScalarField::sample(g, [k](double x) { return k * x * x; });
}

void write_provenance(OutputDir const& out, ScenarioConfig const& cfg)
{
    out.write("resolved.cfg", cfg.resolved_text());
    std::ostringstream os;
    os << "version = " << version_string << '\n'
       << "seed = " << cfg.ensemble.seed << '\n'
       << "workers = " << cfg.ensemble.workers << '\n';
    out.write("provenance.txt", os.str());
}

double max_metric(ComparisonReport const& r, std::string const& name)
{
    double m = 0;
    for (auto const& s : r.snapshots)
        for (auto const& metric : s.metrics)
            if (metric.name == name)
                m = std::isnan(metric.value) ? metric.value : std::max(m, metric.value);
    return m;
}

// First walkers' positions, for trajectory dumps.
TrajectorySnapshot trajectory_point(Ensemble const& e, std::size_t walkers)
{
    std::size_t const k = std::min(walkers, e.size());
    return {e.steps_taken, e.t,
            std::vector<double>(e.positions.begin(),
                                e.positions.begin() + static_cast<std::ptrdiff_t>(k * e.dim))};
}

// Tabulated initial state: CSV with header and columns x, rho, S, one row per node.
HydrodynamicState read_table(fs::path const& path, SpatialGrid const& g)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read initial table " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<double> rho, s;
    std::size_t row = 0;
    while (std::getline(in, line))
    {
        if (line.empty() || line == "\r")
            continue;
        std::array<double, 3> v{};
        std::istringstream is(line);
        for (std::size_t col = 0; col < 3; ++col)
        {
            std::string cell;
            if (!std::getline(is, cell, ','))
                throw ConfigurationError(path.string() + ": row " + std::to_string(row + 1)
                                         + " needs 3 columns (x, rho, S)");
            try
            {
                std::size_t used = 0;
                v[col] = std::stod(cell, &used);
            }
            catch (std::exception const&)
            {
                throw ConfigurationError(path.string() + ": row " + std::to_string(row + 1)
                                         + " has a non-numeric cell '" + cell + "'");
            }
        }
        if (row >= g.n())
            throw ConfigurationError(path.string() + ": more rows than grid nodes");
        if (std::abs(v[0] - g.x(row)) > 1e-9 * g.length())
            throw ConfigurationError(path.string() + ": row " + std::to_string(row + 1)
                                     + " x does not match grid node " + format_number(g.x(row)));
        rho.push_back(v[1]);
        s.push_back(v[2]);
        ++row;
    }
    if (row != g.n())
        throw ConfigurationError(path.string() + ": expected " + std::to_string(g.n())
                                 + " rows, found " + std::to_string(row));
    auto const density = normalize_density(ScalarField(g, std::move(rho), FieldRole::density));
    require_nodeless(density);
    auto const phase = phase_from_entropy(ScalarField(g, std::move(s)), density);
    return HydrodynamicState(density, phase.phi);
}

void run_field_scenario(ScenarioConfig const& cfg, OutputDir const& out, ComparisonReport& report)
{
    auto const g = cfg.grid.grid();
    auto const& c = cfg.constants;
    auto const potential = cfg.omega > 0 ? harmonic_potential(g, cfg.omega, c)
                                         : ScalarField::constant(g, 0.0);
    bool const free = cfg.scenario == Scenario::free_packet;
    bool const harmonic = cfg.scenario == Scenario::harmonic_oscillator;
    FreeGaussian const packet{cfg.initial.s0, cfg.initial.k0, cfg.initial.x0};

    HydrodynamicState state = [&] {
        if (free)
        {
            auto const psi = analytic_oracle(packet, 0.0, g, c);
            auto phi = ScalarField::sample(
                g, [&](double x) { return cfg.initial.k0 * (x - cfg.initial.x0); });
            return HydrodynamicState(psi.density(), std::move(phi));
        }
        if (harmonic)
            return HydrodynamicState(ground_state(potential, c).density(),
                                     ScalarField::constant(g, 0.0));
        return read_table(cfg.initial.table, g);
    }();
    auto psi = to_wavefunction(state);
    auto const rho0 = state.rho;
    double const e0 = energy(state, potential, c).total;

    bool const with_ensemble = cfg.ensemble.walkers > 0;
    ScalarField ck = state.rho;
    Ensemble ens;
    EvolveOptions opts;
    opts.workers = cfg.ensemble.workers;
    if (!g.periodic())
        opts.bounds = WalkerBounds{g.axis(0)};
    std::vector<TrajectorySnapshot> trajectories;
    if (with_ensemble)
    {
        double const mean = free ? cfg.initial.x0 : 0.0;
        double const sd = free ? cfg.initial.s0
                               : std::sqrt(c.eta() / (2 * c.mass() * cfg.omega));
        ens = Ensemble::gaussian_1d(cfg.ensemble.walkers, mean, sd, cfg.ensemble.seed);
    }

    auto energy_os = out.open("energy.csv");
    write_energy_csv_header(energy_os);
    write_energy_csv_row(energy_os, 0.0, energy(state, potential, c));
    report.energy.push_back({0, 0.0, e0, 0.0});

    double clipped = 0;
    auto const snaps = snapshot_steps(cfg.time.n_steps, cfg.outputs.snapshots);
    std::size_t next_snap = 0;
    double const dt = cfg.time.dt;
    TimeStepConfig const one_step{dt, 1};

    auto snapshot = [&](std::uint64_t step) {
        double const t = state.t;
        auto const psi_rho = psi.density();
        SnapshotMetrics m{step, t, {}};
        m.metrics.push_back({"l1_field_cn", l1_distance(state.rho, psi_rho)});
        m.metrics.push_back({"l2_field_cn", l2_distance(state.rho, psi_rho)});
        auto const var = density_moments(state.rho).variance;
        m.metrics.push_back({"variance_field", var});
        if (free)
        {
            double const expected = analytic_variance(packet, t, c);
            m.metrics.push_back({"variance_exact", expected});
            m.metrics.push_back({"variance_rel_error", std::abs(var / expected - 1)});
            report.variance.push_back({t, var, expected});
        }
        if (harmonic)
            m.metrics.push_back({"rho_linf_dev", linf_distance(state.rho, rho0)});
        m.metrics.push_back({"clipped_mass", clipped});

        DensityOverlay overlay{step, t, {}, {}, {}, {}, {}};
        for (std::size_t i = 0; i < g.n(); ++i)
            overlay.x.push_back(g.x(i));
        overlay.field.assign(state.rho.values().begin(), state.rho.values().end());
        overlay.psi.assign(psi_rho.values().begin(), psi_rho.values().end());

        auto const tag = step_tag(step);
        {
            auto os = out.open("snapshots/field_" + tag + ".csv");
            write_wavefunction_csv(to_wavefunction(state), os);
        }
        {
            auto os = out.open("snapshots/cn_" + tag + ".csv");
            write_wavefunction_csv(psi, os);
        }
        if (with_ensemble)
        {
            auto const hist = ensemble_density(ens, g);
            m.metrics.push_back({"l1_ens_ck", l1_distance(hist, ck)});
            m.metrics.push_back({"l1_ck_field", l1_distance(ck, state.rho)});
            m.metrics.push_back({"l1_ens_field", l1_distance(hist, state.rho)});
            overlay.ensemble.assign(hist.values().begin(), hist.values().end());
            overlay.ck.assign(ck.values().begin(), ck.values().end());
            auto os = out.open("snapshots/ensemble_" + tag + ".csv");
            write_density_csv(hist, os);
            auto os2 = out.open("snapshots/ck_" + tag + ".csv");
            write_density_csv(ck, os2);
            trajectories.push_back(trajectory_point(ens, cfg.outputs.trajectory_walkers));
        }
        report.snapshots.push_back(std::move(m));
        report.overlays.push_back(std::move(overlay));
    };

    snapshot(0);
    ++next_snap;
    for (std::uint64_t step = 1; step <= cfg.time.n_steps; ++step)
    {
        if (with_ensemble)
        {
            auto const s = entropy_from_phase(state.phi, state.rho);
            ck = ck_propagate(ck, build_exact_kernel(s, one_step.alpha(c), c));
            FieldGradient const grad(s);
            ens = evolve_ensemble(
                      ens,
                      [&grad](double, std::span<double const> x, std::span<double> out_grad) {
                          out_grad[0] = grad(x[0]);
                      },
                      one_step, c, opts)
                      .ensemble;
        }
        for (std::size_t k = 0; k < cfg.substeps; ++k)
        {
            auto r = coupled_step(state, potential, dt / double(cfg.substeps), c,
                                  cfg.integrator);
            clipped += r.clipped_mass;
            state = std::move(r.state);
        }
        // Keep the accumulated time exact in step units.
        state = HydrodynamicState(state.rho, state.phi, double(step) * dt);
        psi = cn_step(psi, potential, dt, c);
        psi = WaveFunction(psi.grid(), {psi.amplitudes().begin(), psi.amplitudes().end()},
                           double(step) * dt);

        auto const e = energy(state, potential, c);
        write_energy_csv_row(energy_os, state.t, e);
        double const drift = e0 != 0 ? std::abs(e.total / e0 - 1) : std::abs(e.total);
        report.energy.push_back({step, state.t, e.total, drift});

        if (next_snap < snaps.size() && snaps[next_snap] == step)
        {
            snapshot(step);
            ++next_snap;
        }
    }
    energy_os.flush();

    if (with_ensemble)
    {
        auto os = out.open("trajectories.csv");
        write_trajectory_csv(trajectories, 1, os);
    }

    auto const& tol = cfg.tolerances;
    add_check(report, "max_l2_field_cn", max_metric(report, "l2_field_cn"), tol.l2_field_cn);
    if (free)
        add_check(report, "max_variance_rel_error", max_metric(report, "variance_rel_error"),
                  tol.variance);
    double max_drift = 0;
    for (auto const& p : report.energy)
        max_drift = std::max(max_drift, p.drift);
    add_check(report, "max_energy_drift", max_drift, tol.energy_drift);
    if (harmonic)
    {
        add_check(report, "max_rho_linf_dev", max_metric(report, "rho_linf_dev"),
                  tol.rho_stationary);
        add_check(report, "energy_value_error", std::abs(e0 - c.eta() * cfg.omega / 2),
                  tol.energy_value);
    }
    if (with_ensemble)
    {
        double const bound =
            tol.ens_ck_factor * std::sqrt(double(g.n()) / double(cfg.ensemble.walkers));
        add_check(report, "max_l1_ens_ck", max_metric(report, "l1_ens_ck"), bound);
        add_check(report, "max_l1_ck_field", max_metric(report, "l1_ck_field"), tol.ck_field_l1);
    }
}

void run_arrow_of_time(ScenarioConfig const& cfg, OutputDir const& out, ComparisonReport& report)
{
    auto const g = cfg.grid.grid();
    auto const& c = cfg.constants;
    double const two_pi_over_l = 2 * std::numbers::pi / g.length();
    double const x_min = cfg.grid.x_min;
    auto rho = normalize_density(ScalarField::sample(
        g,
        [&](double x) {
            return 1 + cfg.initial.rho_amplitude * std::cos(two_pi_over_l * (x - x_min));
        },
        FieldRole::density));
    auto const s = ScalarField::sample(
        g, [&](double x) { return cfg.initial.s_amplitude * std::sin(two_pi_over_l * (x - x_min)); });
    double const alpha = cfg.time.alpha(c);
    auto const forward = build_exact_kernel(s, alpha, c);

    double max_residual = 0;
    double min_asymmetry = std::numeric_limits<double>::infinity();
    auto const snaps = snapshot_steps(cfg.time.n_steps, cfg.outputs.snapshots);
    std::size_t next_snap = 0;

    auto record = [&](std::uint64_t step, double residual, double asym) {
        auto const tag = step_tag(step);
        SnapshotMetrics m{step, double(step) * cfg.time.dt, {}};
        if (step > 0)
        {
            m.metrics.push_back({"reverse_identity_residual", residual});
            m.metrics.push_back({"kernel_asymmetry", asym});
        }
        DensityOverlay overlay{step, m.t, {}, {}, {}, {}, {}};
        for (std::size_t i = 0; i < g.n(); ++i)
            overlay.x.push_back(g.x(i));
        overlay.ck.assign(rho.values().begin(), rho.values().end());
        auto os = out.open("snapshots/ck_" + tag + ".csv");
        write_density_csv(rho, os);
        report.snapshots.push_back(std::move(m));
        report.overlays.push_back(std::move(overlay));
    };

    record(0, 0, 0);
    ++next_snap;
    for (std::uint64_t step = 1; step <= cfg.time.n_steps; ++step)
    {
        auto const posterior = ck_propagate(rho, forward);
        auto const reverse = bayes_reverse_kernel(forward, rho, posterior);
        double const residual = linf_distance(ck_propagate(posterior, reverse), rho);
        double const asym = kernel_asymmetry(forward, reverse);
        max_residual = std::max(max_residual, residual);
        min_asymmetry = std::min(min_asymmetry, asym);
        if (step == 1)
        {
            auto os = out.open("kernel_forward.csv");
            write_kernel_csv(forward, os);
            auto os2 = out.open("kernel_reverse.csv");
            write_kernel_csv(reverse, os2);
        }
        rho = posterior;
        if (next_snap < snaps.size() && snaps[next_snap] == step)
        {
            record(step, residual, asym);
            ++next_snap;
        }
    }

    // Control: uniform density under a constant entropy has a symmetric
    // forward kernel and Bayes leaves it unchanged.
    auto const flat = normalize_density(ScalarField::constant(g, 1.0, FieldRole::density));
    auto const flat_kernel = build_exact_kernel(ScalarField::constant(g, 0.0), alpha, c);
    auto const flat_post = ck_propagate(flat, flat_kernel);
    double const control =
        kernel_asymmetry(flat_kernel, bayes_reverse_kernel(flat_kernel, flat, flat_post));

    auto const& tol = cfg.tolerances;
    add_check(report, "max_reverse_identity_residual", max_residual, tol.reverse_identity);
    add_check(report, "min_kernel_asymmetry", min_asymmetry, tol.asymmetry_min, true);
    add_check(report, "control_kernel_asymmetry", control, tol.asymmetry_control);
}

void run_classical_limit(ScenarioConfig const& cfg, OutputDir const& out, ComparisonReport& report)
{
    auto const g = cfg.grid.grid();
    auto const light = cfg.constants;
    auto const heavy = light.with_mass_scaled(cfg.initial.mass_scale);
    double const x0 = cfg.initial.x0;
    double const v0 = cfg.initial.v0;
    double const dt = cfg.time.dt;

    EvolveOptions opts;
    opts.workers = cfg.ensemble.workers;
    if (!g.periodic())
        opts.bounds = WalkerBounds{g.axis(0)};

    struct Run
    {
        PhysicalConstants consts;
        Ensemble ens;
        EntropyGradient grad;
        std::vector<TrajectorySnapshot> trajectories;
    };
    // Same S_HJ / m in both: grad S = m v0 / eta gives drift v0.
    // Independent streams, so the variance ratio is a measurement rather than
    // an identity of one rescaled noise sample.
    auto make_run = [&](PhysicalConstants const& k, std::uint64_t seed) {
        return Run{k, Ensemble::at_point(cfg.ensemble.walkers, {x0, 0, 0}, 1, seed),
                   constant_gradient({k.mass() * v0 / k.eta(), 0, 0}),
                   {}};
    };
    std::array<Run, 2> runs{make_run(light, cfg.ensemble.seed),
                            make_run(heavy, cfg.ensemble.seed + 1)};

    auto moments = [](Ensemble const& e) {
        double mean = 0;
        for (double x : e.positions)
            mean += x;
        mean /= double(e.size());
        double var = 0;
        for (double x : e.positions)
            var += (x - mean) * (x - mean);
        return std::pair{mean, var / double(e.size() - 1)};
    };

    double max_track = 0;
    double final_ratio = std::numeric_limits<double>::quiet_NaN();
    auto snapshot = [&](std::uint64_t step) {
        double const t = double(step) * dt;
        SnapshotMetrics m{step, t, {}};
        auto const [mean_l, var_l] = moments(runs[0].ens);
        auto const [mean_h, var_h] = moments(runs[1].ens);
        double const classical = x0 + v0 * t;
        m.metrics.push_back({"mean_light", mean_l});
        m.metrics.push_back({"var_light", var_l});
        m.metrics.push_back({"mean_heavy", mean_h});
        m.metrics.push_back({"var_heavy", var_h});
        if (step > 0)
        {
            double const travel = std::abs(v0 * t);
            double const track_h = travel > 0 ? std::abs(mean_h - classical) / travel
                                              : std::abs(mean_h - classical);
            double const track_l = travel > 0 ? std::abs(mean_l - classical) / travel
                                              : std::abs(mean_l - classical);
            m.metrics.push_back({"track_error_light", track_l});
            m.metrics.push_back({"track_error_heavy", track_h});
            max_track = std::max(max_track, track_h);
            final_ratio = (var_l / var_h) / cfg.initial.mass_scale;
            m.metrics.push_back({"variance_rate_ratio", final_ratio});
            report.variance.push_back({t, var_h, heavy.diffusion() * t});
        }
        DensityOverlay overlay{step, t, {}, {}, {}, {}, {}};
        for (std::size_t i = 0; i < g.n(); ++i)
            overlay.x.push_back(g.x(i));
        auto const tag = step_tag(step);
        for (std::size_t r = 0; r < runs.size(); ++r)
        {
            auto const hist = ensemble_density(runs[r].ens, g);
            if (r == 1)
                overlay.ensemble.assign(hist.values().begin(), hist.values().end());
            auto os = out.open(std::string("snapshots/ensemble_") + (r ? "heavy_" : "light_") + tag
                               + ".csv");
            write_density_csv(hist, os);
            runs[r].trajectories.push_back(
                trajectory_point(runs[r].ens, cfg.outputs.trajectory_walkers));
        }
        report.snapshots.push_back(std::move(m));
        report.overlays.push_back(std::move(overlay));
    };

    auto const snaps = snapshot_steps(cfg.time.n_steps, cfg.outputs.snapshots);
    snapshot(0);
    std::uint64_t done = 0;
    for (std::size_t k = 1; k < snaps.size(); ++k)
    {
        TimeStepConfig const segment{dt, static_cast<std::size_t>(snaps[k] - done)};
        for (auto& r : runs)
            r.ens = evolve_ensemble(r.ens, r.grad, segment, r.consts, opts).ensemble;
        done = snaps[k];
        snapshot(done);
    }
    {
        auto os = out.open("trajectories.csv");
        write_trajectory_csv(runs[1].trajectories, 1, os);
        auto os2 = out.open("trajectories_light.csv");
        write_trajectory_csv(runs[0].trajectories, 1, os2);
    }

    // Classical action of the heavy particle at the final time.
    double const t_end = double(cfg.time.n_steps) * dt;
    double const m = heavy.mass();
    double const eta = heavy.eta();
    auto const phi = ScalarField::sample(
        g, [&](double x) { return m * v0 * (x - x0) / eta - m * v0 * v0 * t_end / (2 * eta); });
    auto const phi_dot = ScalarField::constant(g, -m * v0 * v0 / (2 * eta));
    auto const residual = hj_residual(phi, ScalarField::constant(g, 0.0), phi_dot, heavy);
    double max_res = 0;
    for (double r : residual.values())
        max_res = std::max(max_res, std::abs(r));

    auto const& tol = cfg.tolerances;
    add_check(report, "variance_rate_ratio_error", std::abs(final_ratio - 1), tol.variance_ratio);
    add_check(report, "max_track_error_heavy", max_track, tol.track);
    add_check(report, "max_hj_residual", max_res, tol.hj_residual);
}

void write_error_manifest(fs::path const& dir, std::string_view kind, std::string_view message)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream os(dir / "error.json", std::ios::binary | std::ios::trunc);
    if (!os)
        return;
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    j["version"] = version_string;
    os << j.dump(2) << '\n';
}

}  // namespace

bool ComparisonReport::passed() const noexcept
{
    return std::all_of(checks.begin(), checks.end(), [](Check const& c) { return c.passed; });
}

std::string ComparisonReport::to_json() const
{
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["version"] = version;
    j["seed"] = seed;
    j["passed"] = passed();
    auto& checks_j = j["checks"] = nlohmann::ordered_json::array();
    for (auto const& c : checks)
        checks_j.push_back({{"name", c.name},
                            {"value", c.value},
                            {"tolerance", c.tolerance},
                            {"bound", c.lower_bound ? "lower" : "upper"},
                            {"passed", c.passed}});
    auto& snaps_j = j["snapshots"] = nlohmann::ordered_json::array();
    for (auto const& s : snapshots)
    {
        nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
        for (auto const& m : s.metrics)
            metrics[m.name] = m.value;
        snaps_j.push_back({{"step", s.step}, {"t", s.t}, {"metrics", metrics}});
    }
    auto& energy_j = j["energy"] = nlohmann::ordered_json::array();
    for (auto const& e : energy)
        energy_j.push_back({{"step", e.step}, {"t", e.t}, {"total", e.total}, {"drift", e.drift}});
    auto& var_j = j["variance"] = nlohmann::ordered_json::array();
    for (auto const& v : variance)
        var_j.push_back({{"t", v.t}, {"measured", v.measured}, {"expected", v.expected}});
    return j.dump(2) + "\n";
}

ComparisonReport run_scenario(ScenarioConfig const& cfg)
{
    ComparisonReport report;
    report.scenario = std::string(to_string(cfg.scenario));
    report.version = version_string;
    report.seed = cfg.ensemble.seed;
    try
    {
        OutputDir const out(cfg.outputs.dir);
        write_provenance(out, cfg);
        switch (cfg.scenario)
        {
        case Scenario::free_packet:
        case Scenario::harmonic_oscillator:
        case Scenario::custom:
            run_field_scenario(cfg, out, report);
            break;
        case Scenario::arrow_of_time:
            run_arrow_of_time(cfg, out, report);
            break;
        case Scenario::classical_limit:
            run_classical_limit(cfg, out, report);
            break;
        }
        out.write("report.json", report.to_json());
    }
    catch (ConfigurationError const& e)
    {
        write_error_manifest(cfg.outputs.dir, "configuration", e.what());
        throw;
    }
    catch (std::exception const& e)
    {
        write_error_manifest(cfg.outputs.dir, "runtime", e.what());
        throw;
    }
    return report;
}

void emit_plots(ComparisonReport const& report, fs::path const& out_dir)
{
    OutputDir const out(out_dir);
    auto cell = [](std::vector<double> const& col, std::size_t i) {
        return i < col.size() ? format_number(col[i]) : std::string("nan");
    };

    std::vector<std::string> overlay_files;
    for (auto const& o : report.overlays)
    {
        std::string const name = "density_" + step_tag(o.step) + ".dat";
        overlay_files.push_back(name);
        std::ostringstream os;
        os << "# t = " << format_number(o.t) << "\n# x ensemble ck field psi\n";
        for (std::size_t i = 0; i < o.x.size(); ++i)
            os << format_number(o.x[i]) << ' ' << cell(o.ensemble, i) << ' ' << cell(o.ck, i)
               << ' ' << cell(o.field, i) << ' ' << cell(o.psi, i) << '\n';
        out.write(name, os.str());
    }
    {
        std::ostringstream os;
        os << "# density overlays: ensemble histogram, CK-propagated, coupled field, |Psi|^2\n"
           << "set terminal pngcairo size 900,600\n"
           << "set xlabel 'x'\nset ylabel 'rho'\n"
           << "files = \"";
        for (std::size_t i = 0; i < overlay_files.size(); ++i)
            os << (i ? " " : "") << overlay_files[i];
        os << "\"\n"
           << "do for [f in files] {\n"
           << "    set output f.'.png'\n"
           << "    plot f using 1:2 with steps title 'ensemble', \\\n"
           << "         f using 1:3 with lines title 'ck', \\\n"
           << "         f using 1:4 with lines title 'field', \\\n"
           << "         f using 1:5 with lines dashtype 2 title 'psi'\n"
           << "}\n";
        out.write("density.gp", os.str());
    }
    {
        std::ostringstream os;
        os << "# step t total drift\n";
        for (auto const& e : report.energy)
            os << e.step << ' ' << format_number(e.t) << ' ' << format_number(e.total) << ' '
               << format_number(e.drift) << '\n';
        out.write("energy.dat", os.str());
        out.write("energy.gp", "set terminal pngcairo size 900,600\n"
                               "set output 'energy.png'\n"
                               "set xlabel 't'\nset ylabel 'relative drift'\n"
                               "set logscale y\n"
                               "plot 'energy.dat' using 2:4 with lines title 'energy drift'\n");
    }
    {
        std::ostringstream os;
        os << "# t measured expected\n";
        for (auto const& v : report.variance)
            os << format_number(v.t) << ' ' << format_number(v.measured) << ' '
               << format_number(v.expected) << '\n';
        out.write("variance.dat", os.str());
        out.write("variance.gp", "set terminal pngcairo size 900,600\n"
                                 "set output 'variance.png'\n"
                                 "set xlabel 't'\nset ylabel 'variance'\n"
                                 "plot 'variance.dat' using 1:2 with points title 'measured', \\\n"
                                 "     'variance.dat' using 1:3 with lines title 'expected'\n");
    }
}

}  // namespace edlab
