#include "edlab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "edlab/csv.hpp"
#include "edlab/errors.hpp"

namespace edlab {

namespace {

constexpr std::pair<Scenario, std::string_view> scenario_names[] = {
    {Scenario::free_packet, "free_packet"},
    {Scenario::harmonic_oscillator, "harmonic_oscillator"},
    {Scenario::arrow_of_time, "arrow_of_time"},
    {Scenario::classical_limit, "classical_limit"},
    {Scenario::custom, "custom"},
};

std::string_view trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto const last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string const& key, RawEntry const& e)
{
    double v = 0;
    auto const* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ParseError("line " + std::to_string(e.line) + ": " + key
                             + " expects a finite number, got '" + e.value + "'",
                         e.line, key);
    return v;
}

std::uint64_t to_unsigned(std::string const& key, RawEntry const& e)
{
    std::uint64_t v = 0;
    auto const* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError("line " + std::to_string(e.line) + ": " + key
                             + " expects a non-negative integer, got '" + e.value + "'",
                         e.line, key);
    return v;
}

std::optional<std::uint64_t> env_seed()
{
    char const* text = std::getenv("EDLAB_SEED");
    if (!text || !*text)
        return std::nullopt;
    std::string_view s(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigurationError("EDLAB_SEED must be a non-negative integer, got '"
                                 + std::string(s) + "'");
    return v;
}

void apply_scenario_defaults(ScenarioConfig& c)
{
    switch (c.scenario)
    {
    case Scenario::free_packet:
        c.ensemble.walkers = 10000;
        c.tolerances.energy_drift = 1e-5;
        break;
    case Scenario::harmonic_oscillator:
        c.grid = {-10.0, 10.0, 512, Boundary::periodic};
        c.omega = 1.0;
        break;
    case Scenario::arrow_of_time:
        c.grid = {0.0, 1.0, 256, Boundary::periodic};
        c.time = {1e-4, 10};
        break;
    case Scenario::classical_limit:
        c.grid = {-5.0, 15.0, 1001, Boundary::reflecting};
        c.time = {1e-2, 100};
        c.initial.s0 = 1.0;
        c.ensemble.walkers = 100000;
        break;
    case Scenario::custom:
        c.time = {1e-3, 1000};
        c.tolerances.energy_drift = 1e-4;
        break;
    }
}

}  // namespace

std::string_view to_string(Scenario s) noexcept
{
    for (auto const& [value, name] : scenario_names)
        if (value == s)
            return name;
    return "unknown";
}

Scenario scenario_from_string(std::string_view name)
{
    for (auto const& [value, text] : scenario_names)
        if (text == name)
            return value;
    throw ConfigurationError("unknown scenario '" + std::string(name)
                             + "' (expected free_packet, harmonic_oscillator, arrow_of_time, "
                               "classical_limit or custom)");
}

RawConfig read_config_text(std::string_view text, std::filesystem::path source_dir)
{
    RawConfig raw;
    raw.source = std::move(source_dir);
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        auto const end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
        {
            if (end == text.size())
                break;
            continue;
        }
        if (line.front() == '[')
        {
            if (line.back() != ']' || trim(line.substr(1, line.size() - 2)).empty())
                throw ParseError("line " + std::to_string(line_no) + ": malformed section header",
                                 line_no, std::string(line));
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'",
                             line_no, std::string(line));
        auto const key_part = trim(line.substr(0, eq));
        auto const value = trim(line.substr(eq + 1));
        if (key_part.empty() || value.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty key or value", line_no,
                             std::string(key_part));
        std::string key = section.empty() || key_part.find('.') != std::string_view::npos
                              ? std::string(key_part)
                              : section + "." + std::string(key_part);
        if (raw.entries.contains(key))
            throw ParseError("line " + std::to_string(line_no) + ": duplicate key " + key,
                             line_no, key);
        raw.entries.emplace(std::move(key), RawEntry{std::string(value), line_no});
        if (end == text.size())
            break;
    }
    return raw;
}

RawConfig read_config(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigurationError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_config_text(buf.str(), path.parent_path());
}

ScenarioConfig resolve_config(RawConfig const& raw, ConfigOverrides const& overrides)
{
    ScenarioConfig c;
    auto const find = [&](std::string const& key) -> RawEntry const* {
        auto it = raw.entries.find(key);
        return it == raw.entries.end() ? nullptr : &it->second;
    };

    if (overrides.scenario)
        c.scenario = *overrides.scenario;
    else if (auto const* e = find("scenario"))
    {
        try
        {
            c.scenario = scenario_from_string(e->value);
        }
        catch (ConfigurationError const& err)
        {
            throw ParseError("line " + std::to_string(e->line) + ": " + err.what(), e->line,
                             "scenario");
        }
    }
    apply_scenario_defaults(c);

    std::optional<double> sigma2, tau, eta, mass;
    bool seed_set = false;
    using Setter = std::function<void(std::string const&, RawEntry const&)>;
    auto num = [](double& target) -> Setter {
        return [&target](std::string const& k, RawEntry const& e) { target = to_double(k, e); };
    };
    auto opt = [](std::optional<double>& target) -> Setter {
        return [&target](std::string const& k, RawEntry const& e) { target = to_double(k, e); };
    };
    auto count = [](std::size_t& target) -> Setter {
        return [&target](std::string const& k, RawEntry const& e) {
            target = static_cast<std::size_t>(to_unsigned(k, e));
        };
    };

    std::map<std::string, Setter> const setters = {
        {"scenario", [](std::string const&, RawEntry const&) {}},
        {"constants.sigma2", opt(sigma2)},
        {"constants.tau", opt(tau)},
        {"constants.eta", opt(eta)},
        {"constants.mass", opt(mass)},
        {"grid.x_min", num(c.grid.x_min)},
        {"grid.x_max", num(c.grid.x_max)},
        {"grid.n", count(c.grid.n)},
        {"grid.boundary",
         [&](std::string const& k, RawEntry const& e) {
             try
             {
                 c.grid.boundary = boundary_from_string(e.value);
             }
             catch (Error const& err)
             {
                 throw ParseError("line " + std::to_string(e.line) + ": " + err.what(), e.line, k);
             }
         }},
        {"initial.s0", num(c.initial.s0)},
        {"initial.k0", num(c.initial.k0)},
        {"initial.x0", num(c.initial.x0)},
        {"initial.v0", num(c.initial.v0)},
        {"initial.mass_scale", num(c.initial.mass_scale)},
        {"initial.rho_amplitude", num(c.initial.rho_amplitude)},
        {"initial.s_amplitude", num(c.initial.s_amplitude)},
        {"initial.table",
         [&](std::string const&, RawEntry const& e) {
             std::filesystem::path p(e.value);
             c.initial.table = p.is_absolute() ? p : raw.source / p;
         }},
        {"potential.omega", num(c.omega)},
        {"time.dt", num(c.time.dt)},
        {"time.n_steps", count(c.time.n_steps)},
        {"time.substeps", count(c.substeps)},
        {"time.integrator",
         [&](std::string const& k, RawEntry const& e) {
             if (e.value == "strang")
                 c.integrator = CoupledIntegrator::strang;
             else if (e.value == "rk4")
                 c.integrator = CoupledIntegrator::rk4;
             else
                 throw ParseError("line " + std::to_string(e.line) + ": " + k
                                      + " must be strang or rk4, got '" + e.value + "'",
                                  e.line, k);
         }},
        {"ensemble.walkers", count(c.ensemble.walkers)},
        {"ensemble.seed",
         [&](std::string const& k, RawEntry const& e) {
             c.ensemble.seed = to_unsigned(k, e);
             seed_set = true;
         }},
        {"ensemble.workers", count(c.ensemble.workers)},
        {"outputs.dir",
         [&](std::string const&, RawEntry const& e) {
             std::filesystem::path p(e.value);
             c.outputs.dir = p.is_absolute() ? p : raw.source / p;
         }},
        {"outputs.snapshots", count(c.outputs.snapshots)},
        {"outputs.trajectory_walkers", count(c.outputs.trajectory_walkers)},
        {"tolerance.l2_field_cn", num(c.tolerances.l2_field_cn)},
        {"tolerance.variance", num(c.tolerances.variance)},
        {"tolerance.energy_drift", num(c.tolerances.energy_drift)},
        {"tolerance.rho_stationary", num(c.tolerances.rho_stationary)},
        {"tolerance.energy_value", num(c.tolerances.energy_value)},
        {"tolerance.ens_ck_factor", num(c.tolerances.ens_ck_factor)},
        {"tolerance.ck_field_l1", num(c.tolerances.ck_field_l1)},
        {"tolerance.reverse_identity", num(c.tolerances.reverse_identity)},
        {"tolerance.asymmetry_min", num(c.tolerances.asymmetry_min)},
        {"tolerance.asymmetry_control", num(c.tolerances.asymmetry_control)},
        {"tolerance.variance_ratio", num(c.tolerances.variance_ratio)},
        {"tolerance.track", num(c.tolerances.track)},
        {"tolerance.hj_residual", num(c.tolerances.hj_residual)},
    };

    for (auto const& [key, entry] : raw.entries)
    {
        auto it = setters.find(key);
        if (it == setters.end())
            throw ParseError("line " + std::to_string(entry.line) + ": unknown key " + key,
                             entry.line, key);
        it->second(key, entry);
    }

    try
    {
        c.constants = PhysicalConstants::from_partial(sigma2, tau, eta, mass);
    }
    catch (ConfigurationError const&)
    {
        throw;
    }
    catch (Error const& err)
    {
        throw ConfigurationError(std::string("constants: ") + err.what());
    }

    if (overrides.seed)
        c.ensemble.seed = *overrides.seed;
    else if (!seed_set)
        if (auto s = env_seed())
            c.ensemble.seed = *s;
    if (overrides.out_dir)
        c.outputs.dir = *overrides.out_dir;

    try
    {
        (void)c.grid.grid();
        c.time.validate();
    }
    catch (ConfigurationError const&)
    {
        throw;
    }
    catch (Error const& err)
    {
        throw ConfigurationError(err.what());
    }
    if (c.time.n_steps == 0)
        throw ConfigurationError("time.n_steps must be at least 1");
    if (c.substeps == 0)
        throw ConfigurationError("time.substeps must be at least 1");
    if (c.ensemble.workers == 0)
        throw ConfigurationError("ensemble.workers must be at least 1");
    if (c.outputs.snapshots == 0)
        throw ConfigurationError("outputs.snapshots must be at least 1");
    if (!(c.initial.s0 > 0))
        throw ConfigurationError("initial.s0 must be positive");
    if (c.omega < 0)
        throw ConfigurationError("potential.omega must be non-negative");
    if (c.scenario == Scenario::harmonic_oscillator && !(c.omega > 0))
        throw ConfigurationError("harmonic_oscillator needs potential.omega > 0");
    if (c.scenario == Scenario::classical_limit && !(c.initial.mass_scale > 1))
        throw ConfigurationError("initial.mass_scale must exceed 1");
    if (c.scenario == Scenario::arrow_of_time
        && !(c.initial.rho_amplitude >= 0 && c.initial.rho_amplitude < 1))
        throw ConfigurationError("initial.rho_amplitude must lie in [0, 1)");
    if (c.scenario == Scenario::custom && c.initial.table.empty())
        throw ConfigurationError("custom scenario needs initial.table (CSV with x, rho, S)");
    if (c.scenario == Scenario::custom && c.ensemble.walkers > 0)
        throw ConfigurationError("custom scenario does not support ensemble.walkers > 0 "
                                 "(walkers start from Gaussian packets only)");
    if (c.scenario == Scenario::arrow_of_time && c.ensemble.walkers > 0)
        throw ConfigurationError("arrow_of_time has no ensemble representation; "
                                 "set ensemble.walkers = 0");
    if (c.scenario == Scenario::classical_limit && c.ensemble.walkers < 2)
        throw ConfigurationError("classical_limit needs at least 2 walkers");
    return c;
}

ScenarioConfig parse_config(std::filesystem::path const& path)
{
    return resolve_config(read_config(path));
}

std::string ScenarioConfig::resolved_text() const
{
    std::ostringstream os;
    auto line = [&](std::string_view key, std::string const& value) {
        os << key << " = " << value << '\n';
    };
    auto num = [&](std::string_view key, double v) { line(key, format_number(v)); };
    auto count = [&](std::string_view key, std::uint64_t v) { line(key, std::to_string(v)); };

    line("scenario", std::string(to_string(scenario)));
    num("constants.sigma2", constants.sigma2());
    num("constants.tau", constants.tau());
    num("constants.eta", constants.eta());
    num("constants.mass", constants.mass());
    num("grid.x_min", grid.x_min);
    num("grid.x_max", grid.x_max);
    count("grid.n", grid.n);
    line("grid.boundary", std::string(to_string(grid.boundary)));
    num("initial.s0", initial.s0);
    num("initial.k0", initial.k0);
    num("initial.x0", initial.x0);
    num("initial.v0", initial.v0);
    num("initial.mass_scale", initial.mass_scale);
    num("initial.rho_amplitude", initial.rho_amplitude);
    num("initial.s_amplitude", initial.s_amplitude);
    if (!initial.table.empty())
        line("initial.table", initial.table.string());
    num("potential.omega", omega);
    num("time.dt", time.dt);
    count("time.n_steps", time.n_steps);
    count("time.substeps", substeps);
    line("time.integrator", integrator == CoupledIntegrator::rk4 ? "rk4" : "strang");
    count("ensemble.walkers", ensemble.walkers);
    count("ensemble.seed", ensemble.seed);
    count("ensemble.workers", ensemble.workers);
    line("outputs.dir", outputs.dir.string());
    count("outputs.snapshots", outputs.snapshots);
    count("outputs.trajectory_walkers", outputs.trajectory_walkers);
    num("tolerance.l2_field_cn", tolerances.l2_field_cn);
    num("tolerance.variance", tolerances.variance);
    num("tolerance.energy_drift", tolerances.energy_drift);
    num("tolerance.rho_stationary", tolerances.rho_stationary);
    num("tolerance.energy_value", tolerances.energy_value);
    num("tolerance.ens_ck_factor", tolerances.ens_ck_factor);
    num("tolerance.ck_field_l1", tolerances.ck_field_l1);
    num("tolerance.reverse_identity", tolerances.reverse_identity);
    num("tolerance.asymmetry_min", tolerances.asymmetry_min);
    num("tolerance.asymmetry_control", tolerances.asymmetry_control);
    num("tolerance.variance_ratio", tolerances.variance_ratio);
    num("tolerance.track", tolerances.track);
    num("tolerance.hj_residual", tolerances.hj_residual);
    return os.str();
}

}  // namespace edlab
