#include "edlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "edlab/errors.hpp"

namespace edlab {

std::string_view to_string(FieldRole role) noexcept
{
    switch (role)
    {
        case FieldRole::density:
            return "density";
        case FieldRole::entropy:
            return "entropy";
        case FieldRole::phase:
            return "phase";
        case FieldRole::potential:
            return "potential";
        case FieldRole::generic:
            break;
    }
    return "generic";
}

ScalarField::ScalarField(SpatialGrid grid, std::vector<double> values, FieldRole role)
    : grid_(grid), values_(std::move(values)), role_(role)
{
    if (grid_.dim() != 1)
        throw ConfigurationError("scalar fields are defined on 1-D grids only");
    if (values_.size() != grid_.n())
    {
        std::ostringstream msg;
        msg << "field has " << values_.size() << " values for a grid of "
            << grid_.n() << " nodes";
        throw ConfigurationError(msg.str());
    }
    for (std::size_t i = 0; i < values_.size(); ++i)
    {
        if (!std::isfinite(values_[i]))
        {
            std::ostringstream msg;
            msg << to_string(role_) << " field is not finite at node " << i
                << " (x = " << grid_.x(i) << ")";
            throw RuntimeFailure(msg.str());
        }
        if (role_ == FieldRole::density && values_[i] < 0)
        {
            std::ostringstream msg;
            msg << "density is negative at node " << i << " (value " << values_[i]
                << ")";
            throw InvalidDensityError(msg.str());
        }
    }
}

ScalarField ScalarField::constant(SpatialGrid const& grid, double value, FieldRole role)
{
    return ScalarField(grid, std::vector<double>(grid.n(), value), role);
}

ScalarField ScalarField::sample(SpatialGrid const& grid,
                                std::function<double(double)> const& f,
                                FieldRole role)
{
    std::vector<double> v(grid.n());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = f(grid.x(i));
    return ScalarField(grid, std::move(v), role);
}

double ScalarField::max() const
{
    return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const
{
    return *std::min_element(values_.begin(), values_.end());
}

ScalarField ScalarField::with_role(FieldRole role) const
{
    return ScalarField(grid_, values_, role);
}

void require_same_grid(ScalarField const& a, ScalarField const& b, char const* where)
{
    if (!(a.grid() == b.grid()))
        throw ConfigurationError(std::string(where) + ": fields live on different grids");
}

namespace {

template<class Op>
ScalarField combine(ScalarField const& a, ScalarField const& b, Op op)
{
    require_same_grid(a, b, "field arithmetic");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = op(a[i], b[i]);
    return ScalarField(a.grid(), std::move(out));
}

}  // namespace

ScalarField operator+(ScalarField const& a, ScalarField const& b)
{
    return combine(a, b, std::plus<>{});
}

ScalarField operator-(ScalarField const& a, ScalarField const& b)
{
    return combine(a, b, std::minus<>{});
}

ScalarField operator*(double s, ScalarField const& f)
{
    std::vector<double> out(f.values().begin(), f.values().end());
    for (auto& v : out)
        v *= s;
    return ScalarField(f.grid(), std::move(out));
}

ScalarField gradient(ScalarField const& f)
{
    auto const& g = f.grid();
    std::size_t const n = g.n();
    auto const v = f.values();
    double const inv2h = 0.5 / g.h();
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (v[i + 1] - v[i - 1]) * inv2h;
    if (g.periodic())
    {
        out[0] = (v[1] - v[n - 1]) * inv2h;
        out[n - 1] = (v[0] - v[n - 2]) * inv2h;
    }
    else
    {
        out[0] = (4 * (v[1] - v[0]) - (v[2] - v[0])) * inv2h;
        out[n - 1] = ((v[n - 3] - v[n - 1]) - 4 * (v[n - 2] - v[n - 1])) * inv2h;
    }
    return ScalarField(g, std::move(out));
}

ScalarField laplacian(ScalarField const& f)
{
    auto const& g = f.grid();
    std::size_t const n = g.n();
    auto const v = f.values();
    double const inv_h2 = 1.0 / (g.h() * g.h());
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (v[i + 1] - 2 * v[i] + v[i - 1]) * inv_h2;
    if (g.periodic())
    {
        out[0] = (v[1] - 2 * v[0] + v[n - 1]) * inv_h2;
        out[n - 1] = (v[0] - 2 * v[n - 1] + v[n - 2]) * inv_h2;
    }
    else
    {
        out[0] = 2 * (v[1] - v[0]) * inv_h2;
        out[n - 1] = 2 * (v[n - 2] - v[n - 1]) * inv_h2;
    }
    return ScalarField(g, std::move(out));
}

double integrate(SpatialGrid const& grid, std::span<double const> values)
{
    double sum = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        sum += grid.weight(i) * values[i];
    return sum;
}

double integrate(ScalarField const& f)
{
    return integrate(f.grid(), f.values());
}

ScalarField normalize_density(ScalarField const& f)
{
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        if (f[i] < 0)
        {
            std::ostringstream msg;
            msg << "cannot normalize: negative value " << f[i] << " at node " << i;
            throw InvalidDensityError(msg.str());
        }
    }
    double const mass = integrate(f);
    if (!(mass > 0))
        throw InvalidDensityError("cannot normalize an all-zero density");
    std::vector<double> out(f.values().begin(), f.values().end());
    for (auto& v : out)
        v /= mass;
    return ScalarField(f.grid(), std::move(out), FieldRole::density);
}

ClampedDensity clamp_to_floor(ScalarField const& rho)
{
    double const peak = rho.max();
    if (!(peak > 0))
        throw InvalidDensityError("density is zero everywhere; nothing above the floor");
    ClampedDensity out;
    out.floor_value = density_floor * peak;
    out.values.assign(rho.values().begin(), rho.values().end());
    for (auto& v : out.values)
    {
        if (v < out.floor_value)
        {
            v = out.floor_value;
            ++out.clamped_nodes;
        }
    }
    return out;
}

double l1_distance(ScalarField const& a, ScalarField const& b)
{
    require_same_grid(a, b, "l1_distance");
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a.grid().weight(i) * std::abs(a[i] - b[i]);
    return sum;
}

double l2_distance(ScalarField const& a, ScalarField const& b)
{
    require_same_grid(a, b, "l2_distance");
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        double const d = a[i] - b[i];
        sum += a.grid().weight(i) * d * d;
    }
    return std::sqrt(sum);
}

double linf_distance(ScalarField const& a, ScalarField const& b)
{
    require_same_grid(a, b, "linf_distance");
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

HydrodynamicState::HydrodynamicState(ScalarField rho_in, ScalarField phi_in, double t_in)
    : rho(std::move(rho_in)), phi(std::move(phi_in)), t(t_in)
{
    require_same_grid(rho, phi, "HydrodynamicState");
    if (rho.role() != FieldRole::density)
        rho = rho.with_role(FieldRole::density);
    if (phi.role() != FieldRole::phase)
        phi = phi.with_role(FieldRole::phase);
    double const mass = integrate(rho);
    if (std::abs(mass - 1.0) > 1e-8)
    {
        std::ostringstream msg;
        msg << "hydrodynamic state density must be normalized, integral is " << mass;
        throw InvalidDensityError(msg.str());
    }
}

}  // namespace edlab
