#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "edlab/constants.hpp"
#include "edlab/field.hpp"

namespace edlab {

using Complex = std::complex<double>;

/// Complex amplitudes on a 1-D grid, normalized to one under the grid's
/// quadrature rule.
class WaveFunction
{
  public:
    /// Throws RuntimeFailure on non-finite amplitudes and InvalidDensityError
    /// unless the norm is 1 within 1e-10.
    WaveFunction(SpatialGrid grid, std::vector<Complex> amplitudes, double t = 0.0);

    /// Rescales to unit norm first.
    static WaveFunction normalized(SpatialGrid grid, std::vector<Complex> amplitudes,
                                   double t = 0.0);

    SpatialGrid const& grid() const noexcept { return grid_; }
    std::span<Complex const> amplitudes() const noexcept { return amps_; }
    Complex operator[](std::size_t i) const noexcept { return amps_[i]; }
    std::size_t size() const noexcept { return amps_.size(); }
    double t() const noexcept { return t_; }

    double norm() const noexcept;
    ScalarField density() const;

  private:
    SpatialGrid grid_;
    std::vector<Complex> amps_;
    double t_;
};

/// Psi = rho^(1/2) exp(i phi), renormalized.
WaveFunction to_wavefunction(HydrodynamicState const& state);

/// rho = |Psi|^2 and the phase unwrapped left to right. Throws
/// NodalStateError if |Psi|^2 falls to the floor anywhere and AliasingError
/// if a neighbour phase jump reaches pi.
HydrodynamicState from_wavefunction(WaveFunction const& psi);

/// Left-to-right unwrapped phase without the nodal check (for output).
std::vector<double> unwrap_phase(WaveFunction const& psi);

/// Crank-Nicolson step of i eta Psi_t = -(eta^2/2m) lap Psi + V Psi.
/// Cyclic tridiagonal solve on periodic grids; zero-flux ends otherwise.
WaveFunction cn_step(WaveFunction const& psi, ScalarField const& potential, double dt,
                     PhysicalConstants const& consts);

/// Strang split step: half potential phase, exact kinetic propagator per
/// Fourier mode, half potential phase. Periodic grids only.
WaveFunction splitstep_step(WaveFunction const& psi, ScalarField const& potential,
                            double dt, PhysicalConstants const& consts);

/// Lowest eigenstate of the three-point grid Hamiltonian used by cn_step and
/// the hydrodynamic scheme, by shifted inverse iteration. Real and positive.
/// Throws NoSolutionError if the iteration fails to settle.
WaveFunction ground_state(ScalarField const& potential, PhysicalConstants const& consts);

struct FreeGaussian
{
    double s0 = 1.0;  ///< initial position standard deviation
    double k0 = 0.0;  ///< carrier wavenumber
    double x0 = 0.0;
};

struct HarmonicGround
{
    double omega = 1.0;
};

using AnalyticState = std::variant<FreeGaussian, HarmonicGround>;

/// Closed-form solutions sampled on the grid (then renormalized on it).
///   FreeGaussian: variance s0^2 (1 + (eta t / (2 m s0^2))^2), group velocity eta k0 / m.
///   HarmonicGround: variance eta / (2 m omega), phase -omega t / 2.
WaveFunction analytic_oracle(AnalyticState const& kind, double t, SpatialGrid const& grid,
                             PhysicalConstants const& consts);

/// Exact amplitude of an analytic state at one point (not grid-normalized).
Complex analytic_amplitude(AnalyticState const& kind, double x, double t,
                           PhysicalConstants const& consts);

/// Position variance of the exact solution at time t.
double analytic_variance(AnalyticState const& kind, double t, PhysicalConstants const& consts);

/// Mean and variance of |Psi|^2 (or any density) on the grid.
struct DensityMoments
{
    double mean = 0.0;
    double variance = 0.0;
};
DensityMoments density_moments(ScalarField const& rho);

/// CSV with columns node_coordinate, re, im, rho, phi_unwrapped.
void write_wavefunction_csv(WaveFunction const& psi, std::ostream& os);

}  // namespace edlab
