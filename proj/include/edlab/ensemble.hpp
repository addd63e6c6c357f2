#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "edlab/constants.hpp"
#include "edlab/field.hpp"
#include "edlab/grid.hpp"
#include "edlab/kernel.hpp"
#include "edlab/philox.hpp"

namespace edlab {

using Position = std::array<double, 3>;

/// Step size and count; the implied multiplier is alpha = tau / dt.
struct TimeStepConfig
{
    double dt = 1e-3;
    std::size_t n_steps = 0;

    double alpha(PhysicalConstants const& consts) const noexcept { return consts.tau() / dt; }
    void validate() const;
};

/// Walker cloud realizing the Wiener process. Walker w draws its noise for
/// step s from the counter (seed, w, s), where s counts every step the
/// ensemble has taken since creation.
struct Ensemble
{
    std::size_t dim = 1;
    std::vector<double> positions;  ///< walker-major, dim values per walker
    double t = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t steps_taken = 0;

    std::size_t size() const noexcept { return dim ? positions.size() / dim : 0; }
    std::span<double const> position(std::size_t w) const noexcept
    {
        return {positions.data() + w * dim, dim};
    }

    /// All walkers at the same point.
    static Ensemble at_point(std::size_t n_walkers, Position x0, std::size_t dim,
                             std::uint64_t seed, double t0 = 0.0);
    /// 1-D walkers drawn i.i.d. from a normal distribution, using stream
    /// step index 2^32-1 so initialization never collides with evolution.
    static Ensemble gaussian_1d(std::size_t n_walkers, double mean, double stddev,
                                std::uint64_t seed, double t0 = 0.0);
};

/// Optional bounding box. Periodic axes wrap; reflecting axes mirror.
struct WalkerBounds
{
    Axis axis;  ///< applied to every coordinate
};

/// One Euler-Maruyama step: x + b dt + dw, b = (sigma^2/tau) grad S,
/// dw ~ N(0, (sigma^2/tau) dt) per axis. With reflecting bounds the drifted
/// point is clamped into the box and only the fluctuation is mirrored.
Position sample_step(Position x, Position grad_s, std::size_t dim,
                     TimeStepConfig const& cfg, PhysicalConstants const& consts,
                     WalkerStream const& rng, std::uint32_t step_index,
                     WalkerBounds const* bounds = nullptr);

/// grad S at (t, x). Must be callable concurrently.
using EntropyGradient =
    std::function<void(double t, std::span<double const> x, std::span<double> grad)>;

/// Gradient that is the same everywhere and at all times.
EntropyGradient constant_gradient(Position grad);

/// Linear interpolation of gradient(S) on the field's grid (wrapping on
/// periodic grids, clamping at reflecting ends); 1-D walkers only.
class FieldGradient
{
  public:
    explicit FieldGradient(ScalarField const& entropy);
    double operator()(double x) const noexcept;

  private:
    SpatialGrid grid_;
    std::vector<double> grad_;
};

struct EvolveOptions
{
    std::size_t workers = 1;
    std::optional<WalkerBounds> bounds;
    /// Record the ensemble every this many steps (0 disables history).
    std::size_t history_every = 0;
};

struct TrajectorySnapshot
{
    std::uint64_t step = 0;
    double t = 0.0;
    std::vector<double> positions;
};

struct EvolveResult
{
    Ensemble ensemble;
    std::vector<TrajectorySnapshot> history;
};

/// Apply sample_step n_steps times. grad S is sampled at the start of each
/// step. Output is bit-identical for any worker count. A non-finite gradient
/// aborts with RuntimeFailure naming the walker and step.
EvolveResult evolve_ensemble(Ensemble const& e, EntropyGradient const& grad_s,
                             TimeStepConfig const& cfg, PhysicalConstants const& consts,
                             EvolveOptions const& opts = {});

/// Histogram on the grid's cells (cell i centered on node i), scaled so the
/// result integrates to one with the grid's quadrature rule.
ScalarField ensemble_density(Ensemble const& e, SpatialGrid const& grid);

/// Chapman-Kolmogorov step: rho'(x') = sum_x P(x'|x) rho(x) w(x).
ScalarField ck_propagate(ScalarField const& rho, TransitionKernel const& k);

/// P(x|x') = rho(x) P(x'|x) / rho'(x'). The posterior must equal
/// ck_propagate(prior, k) to 1e-8; otherwise ConfigurationError.
TransitionKernel bayes_reverse_kernel(TransitionKernel const& forward,
                                      ScalarField const& prior,
                                      ScalarField const& posterior);

/// max over (i, j) of |P_rev(x_i | x'_j) - P_fwd(x'_j | x_i)|, both as masses.
double kernel_asymmetry(TransitionKernel const& forward, TransitionKernel const& reverse);

/// CSV with columns step, walker_id, x[, y, z].
void write_trajectory_csv(std::span<TrajectorySnapshot const> history, std::size_t dim,
                          std::ostream& os);

/// CSV with columns node_coordinate, rho.
void write_density_csv(ScalarField const& rho, std::ostream& os);

}  // namespace edlab
