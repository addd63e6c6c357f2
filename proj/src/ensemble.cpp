#include "edlab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "edlab/csv.hpp"
#include "edlab/errors.hpp"

namespace edlab {

void TimeStepConfig::validate() const
{
    if (!(dt > 0) || !std::isfinite(dt))
    {
        std::ostringstream msg;
        msg << "time step dt must be positive and finite, got " << dt;
        throw DomainError(msg.str());
    }
}

Ensemble Ensemble::at_point(std::size_t n_walkers, Position x0, std::size_t dim,
                            std::uint64_t seed, double t0)
{
    if (dim < 1 || dim > 3)
        throw ConfigurationError("ensemble dimension must be 1, 2 or 3");
    Ensemble e;
    e.dim = dim;
    e.seed = seed;
    e.t = t0;
    e.positions.resize(n_walkers * dim);
    for (std::size_t w = 0; w < n_walkers; ++w)
        for (std::size_t a = 0; a < dim; ++a)
            e.positions[w * dim + a] = x0[a];
    return e;
}

Ensemble Ensemble::gaussian_1d(std::size_t n_walkers, double mean, double stddev,
                               std::uint64_t seed, double t0)
{
    Ensemble e = at_point(n_walkers, {mean, 0, 0}, 1, seed, t0);
    constexpr auto init_step = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t w = 0; w < n_walkers; ++w)
    {
        std::array<double, 1> z{};
        WalkerStream(seed, w).normals(init_step, z, 1);
        e.positions[w] = mean + stddev * z[0];
    }
    return e;
}

Position sample_step(Position x, Position grad_s, std::size_t dim,
                     TimeStepConfig const& cfg, PhysicalConstants const& consts,
                     WalkerStream const& rng, std::uint32_t step_index,
                     WalkerBounds const* bounds)
{
    double const diff = consts.diffusion();
    double const noise_scale = std::sqrt(diff * cfg.dt);
    Position z{};
    rng.normals(step_index, z, dim);
    Position out = x;
    for (std::size_t a = 0; a < dim; ++a)
    {
        double const drifted = x[a] + diff * grad_s[a] * cfg.dt;
        double const dw = noise_scale * z[a];
        if (!bounds)
        {
            out[a] = drifted + dw;
        }
        else if (bounds->axis.boundary == Boundary::periodic)
        {
            out[a] = bounds->axis.fold(drifted + dw);
        }
        else
        {
            double const clamped =
                std::clamp(drifted, bounds->axis.x_min, bounds->axis.x_max);
            out[a] = bounds->axis.fold(clamped + dw);
        }
    }
    return out;
}

EntropyGradient constant_gradient(Position grad)
{
    return [grad](double, std::span<double const> x, std::span<double> out) {
        for (std::size_t a = 0; a < x.size(); ++a)
            out[a] = grad[a];
    };
}

FieldGradient::FieldGradient(ScalarField const& entropy)
    : grid_(entropy.grid())
{
    auto const g = gradient(entropy);
    grad_.assign(g.values().begin(), g.values().end());
}

double FieldGradient::operator()(double x) const noexcept
{
    std::size_t const n = grid_.n();
    double const y = grid_.axis(0).fold(x);
    double const s = (y - grid_.x_min()) / grid_.h();
    auto i0 = static_cast<std::size_t>(std::floor(s));
    double frac = s - double(i0);
    if (grid_.periodic())
    {
        i0 %= n;
        return (1 - frac) * grad_[i0] + frac * grad_[(i0 + 1) % n];
    }
    if (i0 + 1 >= n)
        return grad_[n - 1];
    return (1 - frac) * grad_[i0] + frac * grad_[i0 + 1];
}

namespace {

struct WalkerFault
{
    std::size_t walker = std::numeric_limits<std::size_t>::max();
    std::string message;
    std::exception_ptr error;
};

void advance_range(Ensemble& e, std::size_t begin, std::size_t end,
                   EntropyGradient const& grad_s, TimeStepConfig const& cfg,
                   PhysicalConstants const& consts, WalkerBounds const* bounds,
                   std::uint64_t step, double t, WalkerFault& fault)
{
    std::size_t const dim = e.dim;
    try
    {
        for (std::size_t w = begin; w < end; ++w)
        {
            Position x{};
            Position g{};
            std::copy_n(e.positions.data() + w * dim, dim, x.begin());
            grad_s(t, std::span<double const>(x.data(), dim), std::span<double>(g.data(), dim));
            for (std::size_t a = 0; a < dim; ++a)
            {
                if (!std::isfinite(g[a]))
                {
                    std::ostringstream msg;
                    msg << "non-finite entropy gradient for walker " << w << " at step "
                        << step << " (t = " << t << ", x[" << a << "] = " << x[a] << ")";
                    fault.walker = w;
                    fault.message = msg.str();
                    return;
                }
            }
            Position const next = sample_step(x, g, dim, cfg, consts, WalkerStream(e.seed, w),
                                              std::uint32_t(step), bounds);
            std::copy_n(next.begin(), dim, e.positions.data() + w * dim);
        }
    }
    catch (...)
    {
        fault.walker = begin;
        fault.error = std::current_exception();
    }
}

}  // namespace

EvolveResult evolve_ensemble(Ensemble const& e, EntropyGradient const& grad_s,
                             TimeStepConfig const& cfg, PhysicalConstants const& consts,
                             EvolveOptions const& opts)
{
    cfg.validate();
    EvolveResult result{e, {}};
    Ensemble& cur = result.ensemble;
    WalkerBounds const* bounds = opts.bounds ? &*opts.bounds : nullptr;
    if (opts.history_every)
        result.history.push_back({cur.steps_taken, cur.t, cur.positions});

    std::size_t const n = cur.size();
    std::size_t const workers = std::max<std::size_t>(1, std::min(opts.workers, n));
    std::vector<WalkerFault> faults(workers);

    for (std::size_t s = 0; s < cfg.n_steps; ++s)
    {
        if (cur.steps_taken >= std::numeric_limits<std::uint32_t>::max())
            throw RuntimeFailure("ensemble exhausted its 2^32 - 1 step counters");
        std::size_t const chunk = (n + workers - 1) / workers;
        auto run = [&](std::size_t k) {
            std::size_t const b = std::min(n, k * chunk);
            std::size_t const en = std::min(n, b + chunk);
            advance_range(cur, b, en, grad_s, cfg, consts, bounds, cur.steps_taken, cur.t,
                          faults[k]);
        };
        if (workers == 1)
        {
            run(0);
        }
        else
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers - 1);
            for (std::size_t k = 1; k < workers; ++k)
                pool.emplace_back(run, k);
            run(0);
        }
        // Report the lowest-numbered failing walker so errors are deterministic too.
        for (auto& f : faults)
        {
            if (f.error)
                std::rethrow_exception(f.error);
            if (!f.message.empty())
                throw RuntimeFailure(f.message);
        }
        ++cur.steps_taken;
        cur.t = e.t + double(s + 1) * cfg.dt;
        if (opts.history_every && (s + 1) % opts.history_every == 0)
            result.history.push_back({cur.steps_taken, cur.t, cur.positions});
    }
    return result;
}

ScalarField ensemble_density(Ensemble const& e, SpatialGrid const& grid)
{
    if (e.size() == 0)
        throw InvalidDensityError("cannot estimate a density from an empty ensemble");
    if (e.dim != 1)
        throw ConfigurationError("ensemble_density needs a 1-D ensemble");
    std::vector<double> counts(grid.n(), 0.0);
    for (std::size_t w = 0; w < e.size(); ++w)
        counts[grid.cell_of(e.positions[w])] += 1.0;
    double const total = double(e.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        counts[i] /= total * grid.weight(i);
    return ScalarField(grid, std::move(counts), FieldRole::density);
}

ScalarField ck_propagate(ScalarField const& rho, TransitionKernel const& k)
{
    if (!(rho.grid() == k.grid()))
        throw ConfigurationError("ck_propagate: density and kernel live on different grids");
    auto const& grid = rho.grid();
    std::size_t const n = grid.n();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        double const mass = rho[i] * grid.weight(i);
        if (mass == 0)
            continue;
        auto const row = k.row_band(i);
        for (std::size_t p = 0; p < row.size(); ++p)
        {
            std::size_t const j = k.column(i, p);
            if (j != TransitionKernel::npos)
                out[j] += mass * row[p];
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        out[j] /= grid.weight(j);
    return ScalarField(grid, std::move(out), FieldRole::density);
}

TransitionKernel bayes_reverse_kernel(TransitionKernel const& forward,
                                      ScalarField const& prior, ScalarField const& posterior)
{
    auto const& grid = forward.grid();
    if (!(prior.grid() == grid) || !(posterior.grid() == grid))
        throw ConfigurationError("bayes_reverse_kernel: grids do not match");
    auto const expected = ck_propagate(prior, forward);
    double const mismatch = linf_distance(expected, posterior);
    if (mismatch > 1e-8)
    {
        std::ostringstream msg;
        msg << "bayes_reverse_kernel: posterior is not the CK propagation of the prior "
               "(max deviation "
            << mismatch << ")";
        throw ConfigurationError(msg.str());
    }

    std::size_t const n = grid.n();
    double const floor_value = density_floor * posterior.max();
    // Row j of the reverse kernel reaches back over the forward band mirrored,
    // capped at the grid's own reach.
    std::size_t const max_lower = grid.periodic() ? (n - 1) / 2 : n - 1;
    std::size_t const max_upper = grid.periodic() ? n / 2 : n - 1;
    std::size_t const lower = std::min(forward.upper_reach(), max_lower);
    std::size_t const upper = std::min(forward.lower_reach(), max_upper);
    std::size_t const width = lower + upper + 1;
    std::vector<double> band(n * width, 0.0);

    for (std::size_t i = 0; i < n; ++i)
    {
        double const prior_mass = prior[i] * grid.weight(i);
        auto const row = forward.row_band(i);
        for (std::size_t p = 0; p < row.size(); ++p)
        {
            std::size_t const j = forward.column(i, p);
            if (j == TransitionKernel::npos)
                continue;
            double const joint = prior_mass * row[p];
            if (joint == 0)
                continue;
            if (posterior[j] <= floor_value)
            {
                std::ostringstream msg;
                msg << "bayes_reverse_kernel: posterior below the density floor at "
                       "reachable node "
                    << j << " (x = " << grid.x(j) << ")";
                throw SingularReversalError(msg.str(), j);
            }
            long d = long(i) - long(j);
            if (grid.periodic())
            {
                if (d > long(n) / 2)
                    d -= long(n);
                else if (d <= -((long(n) + 1) / 2))
                    d += long(n);
            }
            band[j * width + std::size_t(d + long(lower))] =
                joint / (posterior[j] * grid.weight(j));
        }
    }
    return TransitionKernel(grid, lower, upper, std::move(band), forward.alpha(),
                            forward.form());
}

double kernel_asymmetry(TransitionKernel const& forward, TransitionKernel const& reverse)
{
    if (!(forward.grid() == reverse.grid()))
        throw ConfigurationError("kernel_asymmetry: grids do not match");
    std::size_t const n = forward.n();
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(reverse(j, i) - forward(i, j)));
    return worst;
}

void write_trajectory_csv(std::span<TrajectorySnapshot const> history, std::size_t dim,
                          std::ostream& os)
{
    static constexpr char const* axes[] = {"x", "y", "z"};
    os << "step,walker_id";
    for (std::size_t a = 0; a < dim; ++a)
        os << ',' << axes[a];
    os << '\n';
    for (auto const& snap : history)
    {
        std::size_t const n = snap.positions.size() / dim;
        for (std::size_t w = 0; w < n; ++w)
        {
            os << snap.step << ',' << w;
            for (std::size_t a = 0; a < dim; ++a)
                os << ',' << format_number(snap.positions[w * dim + a]);
            os << '\n';
        }
    }
}

void write_density_csv(ScalarField const& rho, std::ostream& os)
{
    write_csv_header(os, {"node_coordinate", "rho"});
    for (std::size_t i = 0; i < rho.size(); ++i)
    {
        double const row[] = {rho.grid().x(i), rho[i]};
        write_csv_row(os, row);
    }
}

}  // namespace edlab
