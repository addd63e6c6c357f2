#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace edlab {

enum class Boundary
{
    periodic,
    reflecting,
};

std::string_view to_string(Boundary b) noexcept;
Boundary boundary_from_string(std::string_view name);

/// One uniform axis. Periodic axes have n cells of width (x_max - x_min) / n
/// with nodes at x_min + i h; the node at x_max is identified with x_min.
/// Reflecting axes have n nodes spanning [x_min, x_max] inclusive.
struct Axis
{
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n = 8;
    Boundary boundary = Boundary::periodic;

    double length() const noexcept { return x_max - x_min; }
    double spacing() const noexcept;
    double node(std::size_t i) const noexcept { return x_min + double(i) * spacing(); }

    /// Map a coordinate into the axis: wrap (periodic) or mirror (reflecting).
    double fold(double x) const noexcept;

    bool operator==(Axis const&) const = default;
};

/// Uniform tensor-product grid of dimension 1 to 3.
///
/// Field solvers only accept dim() == 1; the 1-D accessors below refer to the
/// first axis. Immutable after construction.
class SpatialGrid
{
  public:
    static constexpr std::size_t max_dim = 3;
    static constexpr std::size_t min_points = 8;

    SpatialGrid(double x_min, double x_max, std::size_t n,
                Boundary boundary = Boundary::periodic);
    SpatialGrid(std::size_t dim, Axis const& axis);

    std::size_t dim() const noexcept { return dim_; }
    Axis const& axis(std::size_t k) const { return axes_.at(k); }

    std::size_t n() const noexcept { return axes_[0].n; }
    double h() const noexcept { return h_; }
    double x_min() const noexcept { return axes_[0].x_min; }
    double x_max() const noexcept { return axes_[0].x_max; }
    double length() const noexcept { return axes_[0].length(); }
    Boundary boundary() const noexcept { return axes_[0].boundary; }
    bool periodic() const noexcept { return boundary() == Boundary::periodic; }
    double x(std::size_t i) const noexcept { return axes_[0].x_min + double(i) * h_; }

    /// Quadrature weight of node i: h, or h/2 at the ends of a reflecting axis.
    double weight(std::size_t i) const noexcept;

    /// x_j - x_i, using the minimum image on periodic grids.
    double displacement(std::size_t i, std::size_t j) const noexcept;

    /// Index of the node whose cell contains x (after folding into the axis).
    std::size_t cell_of(double x) const noexcept;

    bool operator==(SpatialGrid const& other) const noexcept;

  private:
    void validate() const;

    std::size_t dim_ = 1;
    std::array<Axis, max_dim> axes_{};
    double h_ = 0.0;
};

}  // namespace edlab
