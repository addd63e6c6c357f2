#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "edlab/grid.hpp"

namespace edlab {

/// Densities are clamped to density_floor * max(rho) before any logarithm or
/// division by sqrt(rho).
inline constexpr double density_floor = 1e-12;

enum class FieldRole
{
    density,
    entropy,
    phase,
    potential,
    generic,
};

std::string_view to_string(FieldRole role) noexcept;

/// Real values on the nodes of a 1-D grid. Immutable; operations return new
/// fields. Values are always finite, and density fields are non-negative.
class ScalarField
{
  public:
    ScalarField(SpatialGrid grid, std::vector<double> values,
                FieldRole role = FieldRole::generic);

    static ScalarField constant(SpatialGrid const& grid, double value,
                                FieldRole role = FieldRole::generic);
    static ScalarField sample(SpatialGrid const& grid,
                              std::function<double(double)> const& f,
                              FieldRole role = FieldRole::generic);

    SpatialGrid const& grid() const noexcept { return grid_; }
    std::span<double const> values() const noexcept { return values_; }
    FieldRole role() const noexcept { return role_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    double max() const;
    double min() const;

    /// Same values, different role (revalidated).
    ScalarField with_role(FieldRole role) const;

  private:
    SpatialGrid grid_;
    std::vector<double> values_;
    FieldRole role_;
};

/// Throws ConfigurationError unless both fields live on the same grid.
void require_same_grid(ScalarField const& a, ScalarField const& b, char const* where);

ScalarField operator+(ScalarField const& a, ScalarField const& b);
ScalarField operator-(ScalarField const& a, ScalarField const& b);
ScalarField operator*(double s, ScalarField const& f);

/// Central difference; second-order one-sided stencil at reflecting ends.
/// Exact for affine f in the interior and for quadratics everywhere.
ScalarField gradient(ScalarField const& f);

/// Standard three-point second difference. Reflecting ends use the mirror
/// ghost node (zero-flux Neumann condition).
ScalarField laplacian(ScalarField const& f);

/// Rectangle rule on periodic grids, trapezoid rule on reflecting grids.
double integrate(ScalarField const& f);
double integrate(SpatialGrid const& grid, std::span<double const> values);

/// Rescale a non-negative field to unit integral.
ScalarField normalize_density(ScalarField const& f);

/// max(rho, density_floor * max(rho)) nodewise, plus the number of nodes
/// that were raised.
struct ClampedDensity
{
    std::vector<double> values;
    std::size_t clamped_nodes = 0;
    double floor_value = 0.0;
};
ClampedDensity clamp_to_floor(ScalarField const& rho);

double l1_distance(ScalarField const& a, ScalarField const& b);
double l2_distance(ScalarField const& a, ScalarField const& b);
double linf_distance(ScalarField const& a, ScalarField const& b);

/// The Madelung pair at one entropic instant.
struct HydrodynamicState
{
    HydrodynamicState(ScalarField rho, ScalarField phi, double t = 0.0);

    ScalarField rho;
    ScalarField phi;
    double t = 0.0;

    SpatialGrid const& grid() const noexcept { return rho.grid(); }
};

}  // namespace edlab
