#include "edlab/constants.hpp"

#include <cmath>
#include <sstream>

#include "edlab/errors.hpp"

namespace edlab {
namespace {

void require_positive(double value, char const* name)
{
    if (!(value > 0.0) || !std::isfinite(value))
    {
        std::ostringstream msg;
        msg << "physical constant " << name
            << " must be strictly positive and finite, got " << value;
        throw DomainError(msg.str());
    }
}

}  // namespace

PhysicalConstants::PhysicalConstants(double sigma2, double tau, double eta)
    : sigma2_(sigma2), tau_(tau), eta_(eta)
{
    require_positive(sigma2, "sigma2");
    require_positive(tau, "tau");
    require_positive(eta, "eta");
}

PhysicalConstants PhysicalConstants::from_partial(std::optional<double> sigma2,
                                                  std::optional<double> tau,
                                                  std::optional<double> eta,
                                                  std::optional<double> mass)
{
    int given = int(sigma2.has_value()) + int(tau.has_value())
                + int(eta.has_value()) + int(mass.has_value());
    if (mass)
        require_positive(*mass, "mass");

    // Fill unspecified values from natural units until three are known.
    if (given < 3)
    {
        for (auto* slot : {&eta, &tau, &sigma2})
        {
            if (given >= 3)
                break;
            if (!slot->has_value())
            {
                *slot = 1.0;
                ++given;
            }
        }
    }

    if (sigma2 && tau && eta)
    {
        PhysicalConstants result(*sigma2, *tau, *eta);
        if (mass)
        {
            double rel = std::abs(result.mass() - *mass) / *mass;
            if (rel > 1e-12)
            {
                std::ostringstream msg;
                msg << "inconsistent constants: m * sigma2 must equal eta * tau"
                    << " (m = " << *mass << ", eta * tau / sigma2 = "
                    << result.mass() << ")";
                throw ConfigurationError(msg.str());
            }
        }
        return result;
    }
    if (!sigma2)
        return PhysicalConstants(*eta * *tau / *mass, *tau, *eta);
    if (!tau)
        return PhysicalConstants(*sigma2, *mass * *sigma2 / *eta, *eta);
    return PhysicalConstants(*sigma2, *tau, *mass * *sigma2 / *tau);
}

PhysicalConstants PhysicalConstants::with_mass_scaled(double factor) const
{
    require_positive(factor, "mass scale factor");
    return PhysicalConstants(sigma2_ / factor, tau_, eta_);
}

}  // namespace edlab
