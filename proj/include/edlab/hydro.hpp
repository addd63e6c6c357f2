#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "edlab/constants.hpp"
#include "edlab/field.hpp"

namespace edlab {

/// b (drift), u (osmotic) and v = b + u (current), all in length/time.
struct VelocityFields
{
    ScalarField drift_b;
    ScalarField osmotic_u;
    ScalarField current_v;
};

struct EnergyReport
{
    double kinetic_current = 0.0;  ///< integral of rho * m v^2 / 2
    double kinetic_osmotic = 0.0;  ///< integral of rho * m u^2 / 2
    double potential = 0.0;
    double total = 0.0;
};

/// b = (sigma^2/tau) grad S.
ScalarField drift_velocity(ScalarField const& entropy, PhysicalConstants const& consts);

/// u = -(sigma^2/tau) grad log rho^(1/2), with rho clamped at the floor.
/// Throws InvalidDensityError if rho is zero everywhere.
ScalarField osmotic_velocity(ScalarField const& rho, PhysicalConstants const& consts);

/// v = (sigma^2/tau) grad phi = (eta/m) grad phi. Phase differences between
/// neighbours are taken modulo 2 pi, so phases with a winding number on a
/// periodic grid are handled.
ScalarField current_velocity(ScalarField const& phi, PhysicalConstants const& consts);

VelocityFields velocity_fields(ScalarField const& entropy, ScalarField const& rho,
                               PhysicalConstants const& consts);

/// Central difference of a phase using neighbour differences reduced mod 2 pi.
ScalarField phase_gradient(ScalarField const& phi);

struct PhaseMap
{
    ScalarField phi;
    std::size_t clamped_nodes = 0;  ///< nodes where rho was raised to the floor
};

/// phi = S - (1/2) log rho.
PhaseMap phase_from_entropy(ScalarField const& entropy, ScalarField const& rho);

/// S = phi + (1/2) log rho, the inverse map (rho clamped at the floor).
ScalarField entropy_from_phase(ScalarField const& phi, ScalarField const& rho);

/// (eta^2 / 2m) lap(rho^1/2) / rho^1/2 with the three-point stencil, evaluated
/// as ratios exp(log rho^1/2 [neighbour] - log rho^1/2 [node]). In sub-floor
/// tails log rho^1/2 is continued from the populated edge with a non-increasing
/// slope and non-positive curvature.
ScalarField quantum_potential(ScalarField const& rho, PhysicalConstants const& consts);

struct FpStepResult
{
    ScalarField rho;
    /// Mass removed by zeroing negative values before renormalization.
    double clipped_mass = 0.0;
};

/// One step of d_t rho = -d_x (v rho) on nodal velocities. Face velocities
/// are centered averages, face densities centered averages, and the update
/// is Crank-Nicolson in time (tridiagonal, cyclic when periodic). Mass is
/// conserved exactly; reflecting walls carry no flux.
/// Throws StepSizeError if max|v| dt / h > 0.5.
FpStepResult fp_step(ScalarField const& rho, ScalarField const& v, double dt);

/// Same update with velocities given on faces: face k sits between node k and
/// node k+1 (mod n). Reflecting grids have n-1 faces, periodic grids n.
/// Only faces adjacent to density above the floor enter the CFL check.
FpStepResult fp_step_faces(ScalarField const& rho, std::span<double const> face_v, double dt);

/// d_t phi from eta phi_dot = -(eta^2/2m)(d phi)^2 - V + (eta^2/2m) lap(rho^1/2)/rho^1/2.
/// (d phi)^2 is the mean of the squared one-sided differences at each node,
/// which makes this the exact variational derivative of energy().
ScalarField phase_rate(ScalarField const& phi, ScalarField const& rho,
                       ScalarField const& potential, PhysicalConstants const& consts);

/// d_t rho = -(eta/m) d(rho d phi) in the same conservative discretization.
ScalarField density_rate(ScalarField const& rho, ScalarField const& phi,
                         PhysicalConstants const& consts);

/// Explicit Euler update phi + dt * phase_rate. Throws InstabilityError if
/// phi moves by more than 1e6 anywhere in one step.
ScalarField phase_step(ScalarField const& phi, ScalarField const& rho,
                       ScalarField const& potential, double dt,
                       PhysicalConstants const& consts);

enum class CoupledIntegrator
{
    strang,  ///< half phase, Crank-Nicolson density, half phase
    rk4,     ///< classical Runge-Kutta on the same semi-discrete system
};

struct CoupledStepResult
{
    HydrodynamicState state;
    double clipped_mass = 0.0;
};

/// Advance (rho, phi) by dt. The default splitting is symplectic for the
/// discrete energy below, so energy errors stay O(dt^2) without drift.
CoupledStepResult coupled_step(HydrodynamicState const& state,
                               ScalarField const& potential, double dt,
                               PhysicalConstants const& consts,
                               CoupledIntegrator integrator = CoupledIntegrator::strang);

/// E = integral rho [ (eta^2/2m)(d phi)^2 + (eta^2/2m)(d log rho^1/2)^2 + V ].
/// The gradient terms live on faces: rho (d phi)^2 with face-averaged rho, and
/// the osmotic term as (d rho^1/2)^2, which equals rho (d log rho^1/2)^2.
EnergyReport energy(HydrodynamicState const& state, ScalarField const& potential,
                    PhysicalConstants const& consts);

/// eta phi_dot + (eta^2/2m)(d phi)^2 + V per node: the classical
/// Hamilton-Jacobi residual with S_HJ = eta phi.
ScalarField hj_residual(ScalarField const& phi, ScalarField const& potential,
                        ScalarField const& phi_dot, PhysicalConstants const& consts);

/// ConfigurationError if rho drops to the floor between two regions above it.
void require_nodeless(ScalarField const& rho);

/// CSV header for energy time series: t, kinetic_current, kinetic_osmotic,
/// potential, total.
void write_energy_csv_header(std::ostream& os);
void write_energy_csv_row(std::ostream& os, double t, EnergyReport const& e);

}  // namespace edlab
