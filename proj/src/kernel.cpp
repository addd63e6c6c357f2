#include "edlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "edlab/csv.hpp"
#include "edlab/errors.hpp"

namespace edlab {
namespace {

// exp() of anything below this is zero in double precision.
constexpr double exponent_cutoff = 710.0;
// Normalized masses below this are flushed to zero.
constexpr double flush_threshold = 1e-300;

struct Reach
{
    std::size_t lower;
    std::size_t upper;
};

Reach full_reach(SpatialGrid const& grid)
{
    std::size_t const n = grid.n();
    if (grid.periodic())
        return {(n - 1) / 2, n / 2};
    return {n - 1, n - 1};
}

Reach reach_for_distance(SpatialGrid const& grid, double distance)
{
    Reach const full = full_reach(grid);
    double const nodes = std::ceil(distance / grid.h()) + 1;
    if (!(nodes < double(grid.n())))
        return full;
    auto const w = static_cast<std::size_t>(nodes);
    return {std::min(w, full.lower), std::min(w, full.upper)};
}

void require_alpha(double alpha)
{
    if (!(alpha > 0) || !std::isfinite(alpha))
    {
        std::ostringstream msg;
        msg << "multiplier alpha must be positive and finite, got " << alpha;
        throw DomainError(msg.str());
    }
}

// Fill one band row from exponents; positions outside the grid hold -inf.
void normalize_row(SpatialGrid const& grid, std::size_t i, Reach reach,
                   std::span<double> row, std::span<double const> exponents)
{
    double peak = -std::numeric_limits<double>::infinity();
    for (double e : exponents)
        peak = std::max(peak, e);
    double sum = 0;
    std::size_t const n = grid.n();
    for (std::size_t k = 0; k < row.size(); ++k)
    {
        if (std::isinf(exponents[k]))
        {
            row[k] = 0;
            continue;
        }
        long const d = long(k) - long(reach.lower);
        long j = long(i) + d;
        if (grid.periodic())
            j = (j % long(n) + long(n)) % long(n);
        row[k] = grid.weight(std::size_t(j)) * std::exp(exponents[k] - peak);
        sum += row[k];
    }
    double flushed = 0;
    for (auto& v : row)
    {
        v /= sum;
        if (v < flush_threshold)
            v = 0;
        flushed += v;
    }
    if (flushed != 1.0)
        for (auto& v : row)
            v /= flushed;
}

template<class ExponentFn>
TransitionKernel build_kernel(SpatialGrid const& grid, Reach reach, double alpha,
                              KernelForm form, ExponentFn exponent)
{
    std::size_t const n = grid.n();
    std::size_t const width = reach.lower + reach.upper + 1;
    std::vector<double> band(n * width);
    std::vector<double> exps(width);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t k = 0; k < width; ++k)
        {
            long const d = long(k) - long(reach.lower);
            long j = long(i) + d;
            if (grid.periodic())
            {
                j = (j % long(n) + long(n)) % long(n);
            }
            else if (j < 0 || j >= long(n))
            {
                exps[k] = -std::numeric_limits<double>::infinity();
                continue;
            }
            exps[k] = exponent(i, std::size_t(j), double(d) * grid.h());
        }
        normalize_row(grid, i, reach, {band.data() + i * width, width}, exps);
    }
    return TransitionKernel(grid, reach.lower, reach.upper, std::move(band), alpha, form);
}

}  // namespace

TransitionKernel::TransitionKernel(SpatialGrid grid, std::size_t lower_reach,
                                   std::size_t upper_reach, std::vector<double> band,
                                   double alpha, KernelForm form)
    : grid_(grid), lower_(lower_reach), upper_(upper_reach), band_(std::move(band)),
      alpha_(alpha), form_(form)
{
    if (grid_.dim() != 1)
        throw ConfigurationError("transition kernels are defined on 1-D grids only");
    if (band_.size() != grid_.n() * band_width())
        throw ConfigurationError("kernel band storage does not match the grid");
    Reach const full = full_reach(grid_);
    if (lower_ > full.lower || upper_ > full.upper)
        throw ConfigurationError("kernel band wider than the grid");
}

std::size_t TransitionKernel::column(std::size_t i, std::size_t k) const noexcept
{
    long const n = long(grid_.n());
    long j = long(i) + long(k) - long(lower_);
    if (grid_.periodic())
        return std::size_t((j % n + n) % n);
    if (j < 0 || j >= n)
        return npos;
    return std::size_t(j);
}

double TransitionKernel::operator()(std::size_t i, std::size_t j) const noexcept
{
    long d = long(j) - long(i);
    if (grid_.periodic())
    {
        long const n = long(grid_.n());
        if (d > n / 2)
            d -= n;
        else if (d <= -((n + 1) / 2))
            d += n;
    }
    if (d < -long(lower_) || d > long(upper_))
        return 0.0;
    return band_[i * band_width() + std::size_t(d + long(lower_))];
}

double TransitionKernel::row_sum(std::size_t i) const noexcept
{
    double s = 0;
    for (double v : row_band(i))
        s += v;
    return s;
}

std::vector<double> TransitionKernel::dense() const
{
    std::size_t const n = grid_.n();
    std::vector<double> out(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const row = row_band(i);
        for (std::size_t k = 0; k < row.size(); ++k)
        {
            std::size_t const j = column(i, k);
            if (j != npos)
                out[i * n + j] = row[k];
        }
    }
    return out;
}

TransitionKernel build_exact_kernel(ScalarField const& entropy, double alpha,
                                    PhysicalConstants const& consts)
{
    require_alpha(alpha);
    auto const& grid = entropy.grid();
    double const spread = entropy.max() - entropy.min();
    double const reach_dist =
        std::sqrt(2 * consts.sigma2() * (spread + exponent_cutoff) / alpha);
    double const coeff = alpha / (2 * consts.sigma2());
    auto const s = entropy.values();
    return build_kernel(grid, reach_for_distance(grid, reach_dist), alpha,
                        KernelForm::exact,
                        [&](std::size_t, std::size_t j, double dx) {
                            return s[j] - coeff * dx * dx;
                        });
}

TransitionKernel build_gaussian_kernel(ScalarField const& entropy, double alpha,
                                       PhysicalConstants const& consts)
{
    require_alpha(alpha);
    auto const& grid = entropy.grid();
    auto const grad = gradient(entropy);
    double const shift = consts.sigma2() / alpha;
    double max_drift = 0;
    for (double g : grad.values())
        max_drift = std::max(max_drift, std::abs(shift * g));
    double const reach_dist =
        max_drift + std::sqrt(2 * consts.sigma2() * exponent_cutoff / alpha);
    double const coeff = alpha / (2 * consts.sigma2());
    return build_kernel(grid, reach_for_distance(grid, reach_dist), alpha,
                        KernelForm::gaussian,
                        [&](std::size_t i, std::size_t, double dx) {
                            double const r = dx - shift * grad[i];
                            return -coeff * r * r;
                        });
}

StepMoments kernel_moments(TransitionKernel const& k, std::size_t source_index)
{
    if (source_index >= k.n())
        throw ConfigurationError("kernel_moments: source index out of range");
    auto const row = k.row_band(source_index);
    double const h = k.grid().h();
    double mean = 0;
    for (std::size_t p = 0; p < row.size(); ++p)
        mean += row[p] * (double(long(p) - long(k.lower_reach())) * h);
    double var = 0;
    for (std::size_t p = 0; p < row.size(); ++p)
    {
        double const r = double(long(p) - long(k.lower_reach())) * h - mean;
        var += row[p] * r * r;
    }
    return {mean, var};
}

std::vector<double> exact_kernel_sq_steps(ScalarField const& entropy, double alpha,
                                          PhysicalConstants const& consts)
{
    require_alpha(alpha);
    auto const& grid = entropy.grid();
    std::size_t const n = grid.n();
    double const spread = entropy.max() - entropy.min();
    Reach const reach = reach_for_distance(
        grid, std::sqrt(2 * consts.sigma2() * (spread + exponent_cutoff) / alpha));
    double const coeff = alpha / (2 * consts.sigma2());
    auto const s = entropy.values();

    std::vector<double> out(n);
    std::vector<double> exps(reach.lower + reach.upper + 1);
    for (std::size_t i = 0; i < n; ++i)
    {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < exps.size(); ++k)
        {
            long const d = long(k) - long(reach.lower);
            long j = long(i) + d;
            if (grid.periodic())
                j = (j % long(n) + long(n)) % long(n);
            else if (j < 0 || j >= long(n))
            {
                exps[k] = -std::numeric_limits<double>::infinity();
                continue;
            }
            double const dx = double(d) * grid.h();
            exps[k] = s[std::size_t(j)] - coeff * dx * dx;
            peak = std::max(peak, exps[k]);
        }
        double z = 0;
        double m2 = 0;
        for (std::size_t k = 0; k < exps.size(); ++k)
        {
            if (std::isinf(exps[k]))
                continue;
            long const d = long(k) - long(reach.lower);
            long j = long(i) + d;
            if (grid.periodic())
                j = (j % long(n) + long(n)) % long(n);
            double const p = grid.weight(std::size_t(j)) * std::exp(exps[k] - peak);
            double const dx = double(d) * grid.h();
            z += p;
            m2 += p * dx * dx;
        }
        out[i] = m2 / z / consts.sigma2();
    }
    return out;
}

AlphaSolution solve_alpha(ScalarField const& entropy, double kappa,
                          PhysicalConstants const& consts)
{
    if (!(kappa > 0) || !std::isfinite(kappa))
        throw DomainError("solve_alpha: kappa must be positive and finite");
    auto const& grid = entropy.grid();
    double total_weight = 0;
    for (std::size_t i = 0; i < grid.n(); ++i)
        total_weight += grid.weight(i);

    auto average = [&](double alpha) {
        auto const m = exact_kernel_sq_steps(entropy, alpha, consts);
        double acc = 0;
        for (std::size_t i = 0; i < m.size(); ++i)
            acc += grid.weight(i) * m[i];
        return acc / total_weight;
    };

    // The mean squared step decreases monotonically in alpha.
    double lo = 1.0 / kappa;
    double hi = lo;
    double f_lo = average(lo) - kappa;
    int iterations = 1;
    if (f_lo > 0)
    {
        double f_hi = f_lo;
        while (f_hi > 0)
        {
            hi *= 4;
            ++iterations;
            if (hi > 1e300)
                throw NoSolutionError("solve_alpha: could not bracket kappa from above");
            f_hi = average(hi) - kappa;
        }
        lo = hi / 4;
    }
    else
    {
        int shrink = 0;
        while (f_lo < 0)
        {
            if (++shrink > 60)
            {
                std::ostringstream msg;
                msg << "solve_alpha: kappa = " << kappa
                    << " is out of reach on this grid; the largest achievable mean "
                       "squared step is about "
                    << f_lo + kappa;
                throw NoSolutionError(msg.str());
            }
            lo /= 4;
            ++iterations;
            f_lo = average(lo) - kappa;
        }
        hi = lo * 4;
    }

    double log_lo = std::log(lo);
    double log_hi = std::log(hi);
    double alpha = hi;
    double value = average(hi);
    for (int it = 0; it < 200; ++it)
    {
        double const mid = 0.5 * (log_lo + log_hi);
        alpha = std::exp(mid);
        value = average(alpha);
        ++iterations;
        double const f = value - kappa;
        if (std::abs(f) <= 1e-12 * kappa || log_hi - log_lo < 1e-15)
            break;
        if (f > 0)
            log_lo = mid;
        else
            log_hi = mid;
    }

    auto const pointwise = exact_kernel_sq_steps(entropy, alpha, consts);
    auto const [mn, mx] = std::minmax_element(pointwise.begin(), pointwise.end());
    return {alpha, value, *mn, *mx, iterations};
}

TransitionKernel compose_kernels(TransitionKernel const& first,
                                 TransitionKernel const& second)
{
    if (!(first.grid() == second.grid()))
        throw ConfigurationError("compose_kernels: kernels live on different grids");
    auto const& grid = first.grid();
    std::size_t const n = grid.n();
    Reach const full = full_reach(grid);
    Reach const reach{std::min(first.lower_reach() + second.lower_reach(), full.lower),
                      std::min(first.upper_reach() + second.upper_reach(), full.upper)};
    std::size_t const width = reach.lower + reach.upper + 1;
    std::vector<double> band(n * width, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const a_row = first.row_band(i);
        for (std::size_t p = 0; p < a_row.size(); ++p)
        {
            std::size_t const j = first.column(i, p);
            if (j == TransitionKernel::npos || a_row[p] == 0)
                continue;
            auto const b_row = second.row_band(j);
            for (std::size_t q = 0; q < b_row.size(); ++q)
            {
                std::size_t const k = second.column(j, q);
                if (k == TransitionKernel::npos)
                    continue;
                long d = long(k) - long(i);
                if (grid.periodic())
                {
                    if (d > long(n) / 2)
                        d -= long(n);
                    else if (d <= -((long(n) + 1) / 2))
                        d += long(n);
                }
                band[i * width + std::size_t(d + long(reach.lower))] += a_row[p] * b_row[q];
            }
        }
    }
    double const alpha =
        first.alpha() * second.alpha() / (first.alpha() + second.alpha());
    return TransitionKernel(grid, reach.lower, reach.upper, std::move(band), alpha,
                            first.form());
}

void write_kernel_csv(TransitionKernel const& k, std::ostream& os)
{
    std::size_t const n = k.n();
    std::vector<double> coords(n);
    for (std::size_t i = 0; i < n; ++i)
        coords[i] = k.grid().x(i);
    write_csv_row(os, coords);
    auto const dense = k.dense();
    for (std::size_t i = 0; i < n; ++i)
        write_csv_row(os, std::span<double const>(dense.data() + i * n, n));
}

}  // namespace edlab
