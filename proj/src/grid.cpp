#include "edlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "edlab/errors.hpp"

namespace edlab {

std::string_view to_string(Boundary b) noexcept
{
    return b == Boundary::periodic ? "periodic" : "reflecting";
}

Boundary boundary_from_string(std::string_view name)
{
    if (name == "periodic")
        return Boundary::periodic;
    if (name == "reflecting")
        return Boundary::reflecting;
    throw ConfigurationError("unknown boundary type '" + std::string(name)
                             + "' (expected periodic or reflecting)");
}

double Axis::spacing() const noexcept
{
    return boundary == Boundary::periodic ? length() / double(n)
                                          : length() / double(n - 1);
}

double Axis::fold(double x) const noexcept
{
    double const len = length();
    if (boundary == Boundary::periodic)
    {
        double y = std::fmod(x - x_min, len);
        if (y < 0)
            y += len;
        // fmod can return len for tiny negative inputs after the shift
        if (y >= len)
            y = 0.0;
        return x_min + y;
    }
    // Mirror folding with period 2L.
    double y = std::fmod(x - x_min, 2 * len);
    if (y < 0)
        y += 2 * len;
    if (y > len)
        y = 2 * len - y;
    return x_min + y;
}

SpatialGrid::SpatialGrid(double x_min, double x_max, std::size_t n, Boundary boundary)
    : SpatialGrid(1, Axis{x_min, x_max, n, boundary})
{
}

SpatialGrid::SpatialGrid(std::size_t dim, Axis const& axis) : dim_(dim)
{
    for (auto& a : axes_)
        a = axis;
    validate();
    h_ = axes_[0].spacing();
}

void SpatialGrid::validate() const
{
    if (dim_ < 1 || dim_ > max_dim)
        throw ConfigurationError("grid dimension must be 1, 2 or 3, got "
                                 + std::to_string(dim_));
    auto const& a = axes_[0];
    if (a.n < min_points)
    {
        std::ostringstream msg;
        msg << "grid needs at least " << min_points << " points per axis, got "
            << a.n;
        throw ConfigurationError(msg.str());
    }
    if (!std::isfinite(a.x_min) || !std::isfinite(a.x_max) || !(a.x_max > a.x_min))
    {
        std::ostringstream msg;
        msg << "grid extent must satisfy x_min < x_max, got [" << a.x_min << ", "
            << a.x_max << "]";
        throw ConfigurationError(msg.str());
    }
}

double SpatialGrid::weight(std::size_t i) const noexcept
{
    if (!periodic() && (i == 0 || i + 1 == n()))
        return 0.5 * h_;
    return h_;
}

double SpatialGrid::displacement(std::size_t i, std::size_t j) const noexcept
{
    if (!periodic())
        return (double(j) - double(i)) * h_;
    auto const nn = static_cast<long>(n());
    long d = static_cast<long>(j) - static_cast<long>(i);
    // Minimum image; the antipodal node of an even grid goes to +n/2.
    if (d > nn / 2)
        d -= nn;
    else if (d <= -((nn + 1) / 2))
        d += nn;
    return double(d) * h_;
}

std::size_t SpatialGrid::cell_of(double x) const noexcept
{
    auto const& a = axes_[0];
    double const y = a.fold(x);
    auto idx = static_cast<long>(std::floor((y - a.x_min) / h_ + 0.5));
    auto const nn = static_cast<long>(a.n);
    if (a.boundary == Boundary::periodic)
    {
        idx %= nn;
        if (idx < 0)
            idx += nn;
    }
    else
    {
        idx = std::clamp(idx, 0L, nn - 1);
    }
    return static_cast<std::size_t>(idx);
}

bool SpatialGrid::operator==(SpatialGrid const& other) const noexcept
{
    if (dim_ != other.dim_)
        return false;
    for (std::size_t k = 0; k < dim_; ++k)
        if (!(axes_[k] == other.axes_[k]))
            return false;
    return true;
}

}  // namespace edlab
