// Acceptance suite: one PASS/FAIL line per criterion AC-1 .. AC-8.
// Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "edlab/config.hpp"
#include "edlab/ensemble.hpp"
#include "edlab/errors.hpp"
#include "edlab/hydro.hpp"
#include "edlab/kernel.hpp"
#include "edlab/scenario.hpp"
#include "edlab/schrodinger.hpp"

using namespace edlab;
namespace fs = std::filesystem;

namespace tol {

constexpr double clip_mass_per_step = 1e-8;
// AC-1
constexpr double l2_field_cn = 1e-3;
constexpr double variance_rel = 5e-3;
// AC-2
constexpr double energy_drift = 1e-6;
constexpr double rho_linf = 1e-6;
constexpr double ground_energy = 1e-4;
// AC-3
constexpr double mean_standard_errors = 4.0;
constexpr double variance_rel_step = 1e-2;
constexpr double halving_standard_errors = 4.0;
// AC-4
constexpr double reverse_identity = 1e-10;
constexpr double asymmetry_min = 1e-3;
constexpr double asymmetry_control = 1e-12;
// AC-5
constexpr double ens_ck_factor = 5.0;
constexpr double ck_field_l1 = 2e-2;
// AC-6
constexpr double variance_ratio_rel = 0.05;
constexpr double track_rel = 0.01;
constexpr double hj_residual = 1e-8;
// AC-7
constexpr double exact_vs_gaussian = 1e-10;
constexpr double alpha_rel = 1e-3;
constexpr double exponent_rel = 0.02;

}  // namespace tol

namespace {

struct Outcome
{
    bool passed = true;
    std::vector<std::string> items;

    void check(std::string const& name, double value, double bound, bool lower = false)
    {
        bool const ok = std::isfinite(value) && (lower ? value > bound : value < bound);
        passed = passed && ok;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s=%.3g %s %.3g%s", name.c_str(), value,
                      lower ? ">" : "<", bound, ok ? "" : " (!)");
        items.emplace_back(buf);
    }
};

fs::path work_dir(std::string const& name)
{
    auto const dir = fs::temp_directory_path() / "edlab_acceptance" / name;
    fs::remove_all(dir);
    return dir;
}

ScenarioConfig scenario_config(std::string const& text, fs::path const& dir)
{
    ConfigOverrides o;
    o.out_dir = dir;
    return resolve_config(read_config_text(text), o);
}

Outcome from_report(ComparisonReport const& r)
{
    Outcome o;
    for (auto const& c : r.checks)
        o.check(c.name, c.value, c.tolerance, c.lower_bound);
    return o;
}

Outcome ac1_schrodinger_equivalence()
{
    PhysicalConstants const c;
    SpatialGrid const g(-20.0, 20.0, 1024);
    FreeGaussian const packet{0.5, 0.0, 0.0};
    double const dt = 1e-3;
    std::size_t const steps = 2000;
    std::size_t const every = 20;
    auto const potential = ScalarField::constant(g, 0.0);

    auto psi = analytic_oracle(packet, 0.0, g, c);
    HydrodynamicState state(psi.density(), ScalarField::constant(g, 0.0));
    double max_l2 = 0;
    double max_var = 0;
    double max_clip = 0;
    for (std::size_t step = 1; step <= steps; ++step)
    {
        auto r = coupled_step(state, potential, dt, c);
        max_clip = std::max(max_clip, r.clipped_mass);
        state = std::move(r.state);
        psi = cn_step(psi, potential, dt, c);
        if (step % every == 0)
        {
            double const t = double(step) * dt;
            max_l2 = std::max(max_l2, l2_distance(state.rho, psi.density()));
            double const var = density_moments(state.rho).variance;
            max_var = std::max(max_var, std::abs(var / analytic_variance(packet, t, c) - 1));
        }
    }
    Outcome o;
    o.check("max_l2_field_cn", max_l2, tol::l2_field_cn);
    o.check("max_variance_rel_error", max_var, tol::variance_rel);
    o.check("max_clip_mass_per_step", max_clip, tol::clip_mass_per_step);
    return o;
}

Outcome ac2_energy_conservation()
{
    PhysicalConstants const c;
    SpatialGrid const g(-10.0, 10.0, 512);
    double const omega = 1.0;
    auto const potential = ScalarField::sample(
        g, [&](double x) { return c.mass() * omega * omega * x * x / 2; });
    HydrodynamicState state(ground_state(potential, c).density(), ScalarField::constant(g, 0.0));
    auto const rho0 = state.rho;
    double const e0 = energy(state, potential, c).total;
    double max_drift = 0;
    double max_dev = 0;
    double max_clip = 0;
    for (std::size_t step = 1; step <= 2000; ++step)
    {
        auto r = coupled_step(state, potential, 1e-3, c);
        max_clip = std::max(max_clip, r.clipped_mass);
        state = std::move(r.state);
        max_drift = std::max(max_drift, std::abs(energy(state, potential, c).total / e0 - 1));
        max_dev = std::max(max_dev, linf_distance(state.rho, rho0));
    }
    Outcome o;
    o.check("max_energy_drift", max_drift, tol::energy_drift);
    o.check("max_rho_linf_dev", max_dev, tol::rho_linf);
    o.check("energy_error", std::abs(e0 - c.eta() * omega / 2), tol::ground_energy);
    o.check("max_clip_mass_per_step", max_clip, tol::clip_mass_per_step);
    return o;
}

struct StepSample
{
    double mean = 0;
    double variance = 0;
    std::size_t n = 0;
};

StepSample single_steps(std::size_t n, double k, double dt, std::uint64_t seed,
                        PhysicalConstants const& c)
{
    auto const start = Ensemble::at_point(n, {0, 0, 0}, 1, seed);
    auto const end = evolve_ensemble(start, constant_gradient({k, 0, 0}), {dt, 1}, c).ensemble;
    StepSample s;
    s.n = n;
    for (double x : end.positions)
        s.mean += x;
    s.mean /= double(n);
    for (double x : end.positions)
        s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= double(n - 1);
    return s;
}

Outcome ac3_stochastic_layer()
{
    PhysicalConstants const c;
    double const k = 0.7;
    double const dt = 0.01;
    std::size_t const n = 1000000;
    auto const full = single_steps(n, k, dt, 20240601, c);
    auto const half = single_steps(n, k, dt / 2, 20240602, c);

    double const expected_mean = c.diffusion() * k * dt;
    double const expected_var = c.diffusion() * dt;
    double const se_mean = std::sqrt(full.variance / double(n));
    double const ratio = half.variance / full.variance;
    // Independent samples: relative SE of a variance is sqrt(2/(n-1)).
    double const se_ratio = ratio * std::sqrt(2.0 / double(n - 1) + 2.0 / double(n - 1));

    Outcome o;
    o.check("mean_error_in_se", std::abs(full.mean - expected_mean) / se_mean,
            tol::mean_standard_errors);
    o.check("variance_rel_error", std::abs(full.variance / expected_var - 1),
            tol::variance_rel_step);
    o.check("halving_error_in_se", std::abs(ratio - 0.5) / se_ratio,
            tol::halving_standard_errors);
    return o;
}

Outcome ac4_arrow_of_time()
{
    auto cfg = scenario_config("scenario = arrow_of_time\n", work_dir("ac4"));
    if (cfg.grid.n != 256)
        throw ConfigurationError("arrow_of_time default grid is not 256 nodes");
    cfg.tolerances.reverse_identity = tol::reverse_identity;
    cfg.tolerances.asymmetry_min = tol::asymmetry_min;
    cfg.tolerances.asymmetry_control = tol::asymmetry_control;
    return from_report(run_scenario(cfg));
}

struct ThreeWay
{
    double max_ens_ck = 0;
    double ens_ck_bound = 0;
    double ck_field_end = 0;
    double max_clip = 0;
};

// Free packet s0 = 1 on [-10, 10]: CK and ensemble steps of dt, coupled field
// in four substeps per step, S = phi + log(rho)/2 refreshed every step.
ThreeWay three_way(std::size_t n, double dt, std::size_t steps, std::size_t walkers)
{
    PhysicalConstants const c;
    SpatialGrid const g(-10.0, 10.0, n);
    FreeGaussian const packet{1.0, 0.0, 0.0};
    auto const potential = ScalarField::constant(g, 0.0);
    HydrodynamicState state(analytic_oracle(packet, 0.0, g, c).density(),
                            ScalarField::constant(g, 0.0));
    ScalarField ck = state.rho;
    Ensemble ens;
    if (walkers > 0)
        ens = Ensemble::gaussian_1d(walkers, packet.x0, packet.s0, 7);
    TimeStepConfig const one{dt, 1};
    std::size_t const substeps = 4;

    ThreeWay out;
    if (walkers > 0)
        out.ens_ck_bound = tol::ens_ck_factor * std::sqrt(double(n) / double(walkers));
    for (std::size_t step = 1; step <= steps; ++step)
    {
        auto const s = entropy_from_phase(state.phi, state.rho);
        ck = ck_propagate(ck, build_exact_kernel(s, one.alpha(c), c));
        if (walkers > 0)
        {
            FieldGradient const grad(s);
            ens = evolve_ensemble(
                      ens,
                      [&grad](double, std::span<double const> x, std::span<double> g_out) {
                          g_out[0] = grad(x[0]);
                      },
                      one, c)
                      .ensemble;
        }
        for (std::size_t k = 0; k < substeps; ++k)
        {
            auto r = coupled_step(state, potential, dt / double(substeps), c);
            out.max_clip = std::max(out.max_clip, r.clipped_mass);
            state = std::move(r.state);
        }
        if (walkers > 0 && (step % 10 == 0 || step == steps))
            out.max_ens_ck = std::max(out.max_ens_ck, l1_distance(ensemble_density(ens, g), ck));
    }
    out.ck_field_end = l1_distance(ck, state.rho);
    return out;
}

Outcome ac5_three_way_agreement()
{
    auto const coarse = three_way(200, 0.01, 100, 100000);
    auto const fine = three_way(400, 0.005, 200, 0);
    Outcome o;
    o.check("max_l1_ens_ck", coarse.max_ens_ck, coarse.ens_ck_bound);
    o.check("l1_ck_field", coarse.ck_field_end, tol::ck_field_l1);
    o.check("l1_ck_field_refined/l1_ck_field", fine.ck_field_end / coarse.ck_field_end, 1.0);
    o.check("max_clip_mass_per_step", std::max(coarse.max_clip, fine.max_clip),
            tol::clip_mass_per_step);
    return o;
}

Outcome ac6_classical_limit()
{
    auto cfg = scenario_config("scenario = classical_limit\n", work_dir("ac6"));
    if (cfg.initial.mass_scale != 100.0)
        throw ConfigurationError("classical_limit default mass scale is not 100");
    cfg.tolerances.variance_ratio = tol::variance_ratio_rel;
    cfg.tolerances.track = tol::track_rel;
    cfg.tolerances.hj_residual = tol::hj_residual;
    return from_report(run_scenario(cfg));
}

double slope(std::vector<double> const& x, std::vector<double> const& y)
{
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= double(x.size());
    my /= double(x.size());
    double sxy = 0;
    double sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

Outcome ac7_kernel_layer()
{
    PhysicalConstants const c;
    Outcome o;

    SpatialGrid const r(-4.0, 4.0, 321, Boundary::reflecting);
    auto const lin = ScalarField::sample(r, [](double x) { return 0.8 * x; });
    double worst = 0;
    for (double alpha : {5.0, 30.0, 300.0})
    {
        auto const a = build_exact_kernel(lin, alpha, c).dense();
        auto const b = build_gaussian_kernel(lin, alpha, c).dense();
        for (std::size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    o.check("max_exact_vs_gaussian", worst, tol::exact_vs_gaussian);

    SpatialGrid const p(0.0, 10.0, 1000);
    double const kappa = 0.01;
    auto const sol = solve_alpha(ScalarField::constant(p, 1.0), kappa, c);
    o.check("alpha_rel_error", std::abs(sol.alpha * kappa - 1), tol::alpha_rel);

    SpatialGrid const fine(-5.0, 5.0, 2001, Boundary::reflecting);
    auto const s = ScalarField::sample(fine, [](double x) { return 1.5 * x; });
    std::vector<double> log_alpha, log_drift, log_std;
    for (double e = 1.0; e <= 4.0 + 1e-9; e += 0.5)
    {
        double const alpha = std::pow(10.0, e);
        auto const m = kernel_moments(build_exact_kernel(s, alpha, c), 1000);
        log_alpha.push_back(std::log(alpha));
        log_drift.push_back(std::log(std::abs(m.mean_step)));
        log_std.push_back(0.5 * std::log(m.covariance));
    }
    o.check("drift_exponent_rel_error", std::abs(slope(log_alpha, log_drift) / -1.0 - 1),
            tol::exponent_rel);
    o.check("std_exponent_rel_error", std::abs(slope(log_alpha, log_std) / -0.5 - 1),
            tol::exponent_rel);
    return o;
}

std::map<std::string, std::string> output_files(fs::path const& root)
{
    std::map<std::string, std::string> out;
    for (auto const& entry : fs::recursive_directory_iterator(root))
    {
        if (!entry.is_regular_file())
            continue;
        auto const rel = fs::relative(entry.path(), root).string();
        if (rel == "resolved.cfg" || rel == "provenance.txt")
            continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        out[rel] = os.str();
    }
    return out;
}

Outcome ac8_determinism()
{
    struct Case
    {
        std::string name;
        std::string text;
    };
    std::vector<Case> const cases = {
        {"free_packet", "scenario = free_packet\n[time]\nn_steps = 200\n[outputs]\nsnapshots = 4\n"},
        {"harmonic_oscillator", "scenario = harmonic_oscillator\n[time]\nn_steps = 200\n"},
        {"arrow_of_time", "scenario = arrow_of_time\n"},
        {"classical_limit", "scenario = classical_limit\n[ensemble]\nwalkers = 20000\n"},
    };
    Outcome o;
    double mismatched = 0;
    double compared = 0;
    for (auto const& k : cases)
    {
        std::vector<std::map<std::string, std::string>> runs;
        for (std::size_t workers : {1, 1, 3})
        {
            auto cfg = scenario_config(
                k.text, work_dir("ac8_" + k.name + "_" + std::to_string(runs.size())));
            cfg.ensemble.seed = 99;
            cfg.ensemble.workers = workers;
            (void)run_scenario(cfg);
            runs.push_back(output_files(cfg.outputs.dir));
        }
        for (std::size_t i = 1; i < runs.size(); ++i)
        {
            compared += double(runs[0].size());
            if (runs[i] != runs[0])
                for (auto const& [file, bytes] : runs[0])
                    mismatched += runs[i].count(file) == 0 || runs[i].at(file) != bytes;
        }
    }
    o.check("files_compared", compared, 0.0, true);
    o.check("mismatched_files", mismatched, 0.5);
    return o;
}

}  // namespace

int main()
{
    struct Criterion
    {
        char const* id;
        char const* title;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> const criteria = {
        {"AC-1", "Schrodinger equivalence", ac1_schrodinger_equivalence},
        {"AC-2", "energy conservation", ac2_energy_conservation},
        {"AC-3", "stochastic layer", ac3_stochastic_layer},
        {"AC-4", "arrow of time", ac4_arrow_of_time},
        {"AC-5", "three-way agreement", ac5_three_way_agreement},
        {"AC-6", "classical limit", ac6_classical_limit},
        {"AC-7", "kernel layer", ac7_kernel_layer},
        {"AC-8", "determinism", ac8_determinism},
    };
    int failures = 0;
    for (auto const& c : criteria)
    {
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (std::exception const& e)
        {
            o.passed = false;
            o.items = {std::string("error: ") + e.what()};
        }
        std::string detail;
        for (auto const& item : o.items)
            detail += (detail.empty() ? "" : "; ") + item;
        std::printf("%s %s (%s): %s\n", c.id, o.passed ? "PASS" : "FAIL", c.title, detail.c_str());
        std::fflush(stdout);
        failures += !o.passed;
    }
    return failures == 0 ? 0 : 1;
}
