#pragma once

#include <optional>

namespace edlab {

/// The four scales of the theory: metric length scale sigma^2, time unit tau,
/// action unit eta, and the derived mass m = eta * tau / sigma^2.
///
/// Only three are independent. The mass is always computed, never stored on
/// its own, so mass * sigma2 == eta * tau holds by construction.
class PhysicalConstants
{
  public:
    /// Natural units: eta = tau = sigma^2 = 1, hence m = 1.
    PhysicalConstants() = default;

    /// Throws DomainError unless all three are strictly positive and finite.
    PhysicalConstants(double sigma2, double tau, double eta);

    /// Build from any three (or all four) of the constants. The missing one is
    /// derived from m = eta * tau / sigma^2. If all four are given they must
    /// satisfy the relation to 1e-12 relative, otherwise ConfigurationError.
    static PhysicalConstants from_partial(std::optional<double> sigma2,
                                          std::optional<double> tau,
                                          std::optional<double> eta,
                                          std::optional<double> mass);

    double sigma2() const noexcept { return sigma2_; }
    double tau() const noexcept { return tau_; }
    double eta() const noexcept { return eta_; }
    double mass() const noexcept { return eta_ * tau_ / sigma2_; }

    /// sigma^2 / tau, which equals eta / m.
    double diffusion() const noexcept { return sigma2_ / tau_; }

    /// Same theory with the mass scaled by `factor` at fixed eta and tau
    /// (sigma^2 shrinks accordingly).
    PhysicalConstants with_mass_scaled(double factor) const;

    bool operator==(PhysicalConstants const&) const = default;

  private:
    double sigma2_ = 1.0;
    double tau_ = 1.0;
    double eta_ = 1.0;
};

}  // namespace edlab
