#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "edlab/constants.hpp"
#include "edlab/field.hpp"
#include "edlab/grid.hpp"

namespace edlab {

enum class KernelForm
{
    exact,
    gaussian,
};

/// Row-stochastic matrix of step probabilities on a 1-D grid.
///
/// Entry (i, j) is the probability mass of landing on node j when starting
/// from node i, i.e. P(x_j | x_i) times the quadrature weight of node j.
/// Storage is banded: row i holds offsets -lower_reach() .. upper_reach()
/// around i (cyclic on periodic grids). Entries outside the band are zero.
class TransitionKernel
{
  public:
    TransitionKernel(SpatialGrid grid, std::size_t lower_reach, std::size_t upper_reach,
                     std::vector<double> band, double alpha, KernelForm form);

    SpatialGrid const& grid() const noexcept { return grid_; }
    std::size_t n() const noexcept { return grid_.n(); }
    double alpha() const noexcept { return alpha_; }
    KernelForm form() const noexcept { return form_; }
    std::size_t lower_reach() const noexcept { return lower_; }
    std::size_t upper_reach() const noexcept { return upper_; }
    std::size_t band_width() const noexcept { return lower_ + upper_ + 1; }

    /// Band of row i; position k corresponds to offset k - lower_reach().
    std::span<double const> row_band(std::size_t i) const noexcept
    {
        return {band_.data() + i * band_width(), band_width()};
    }

    /// Destination node of band position k in row i, or npos if it falls
    /// outside a reflecting grid.
    std::size_t column(std::size_t i, std::size_t k) const noexcept;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    double operator()(std::size_t i, std::size_t j) const noexcept;
    double row_sum(std::size_t i) const noexcept;

    /// Dense n x n copy, row-major.
    std::vector<double> dense() const;

  private:
    SpatialGrid grid_;
    std::size_t lower_;
    std::size_t upper_;
    std::vector<double> band_;
    double alpha_;
    KernelForm form_;
};

/// Mean and variance of the displacement x' - x over one kernel row.
struct StepMoments
{
    double mean_step = 0.0;
    double covariance = 0.0;
};

/// Row i proportional to exp[S(x_j) - alpha (x_j - x_i)^2 / (2 sigma^2)].
TransitionKernel build_exact_kernel(ScalarField const& entropy, double alpha,
                                    PhysicalConstants const& consts = {});

/// Row i is the discretized Gaussian with mean x_i + (sigma^2/alpha) dS(x_i)
/// and variance sigma^2/alpha.
TransitionKernel build_gaussian_kernel(ScalarField const& entropy, double alpha,
                                       PhysicalConstants const& consts = {});

StepMoments kernel_moments(TransitionKernel const& k, std::size_t source_index);

/// Result of matching the mean squared step length to kappa.
struct AlphaSolution
{
    double alpha = 0.0;
    /// Grid average of <gamma_ab dx^a dx^b> at the returned alpha.
    double mean_sq_step = 0.0;
    /// Smallest and largest per-source values of <gamma_ab dx^a dx^b>; their
    /// spread shows how far a single alpha is from the pointwise constraint.
    double pointwise_min = 0.0;
    double pointwise_max = 0.0;
    int iterations = 0;
};

/// Find the single alpha for which the quadrature-weighted grid average of
/// <gamma_ab dx^a dx^b> under the exact kernel equals kappa. Bisection on
/// log(alpha). Throws NoSolutionError if kappa is out of reach on the grid.
AlphaSolution solve_alpha(ScalarField const& entropy, double kappa,
                          PhysicalConstants const& consts = {});

/// Per-source <gamma_ab dx^a dx^b> of the exact kernel, without building it.
std::vector<double> exact_kernel_sq_steps(ScalarField const& entropy, double alpha,
                                          PhysicalConstants const& consts = {});

/// Kernel of two successive steps: C = A * B.
TransitionKernel compose_kernels(TransitionKernel const& first,
                                 TransitionKernel const& second);

/// Row-major CSV: a header of node coordinates followed by n rows of n masses.
void write_kernel_csv(TransitionKernel const& k, std::ostream& os);

}  // namespace edlab
