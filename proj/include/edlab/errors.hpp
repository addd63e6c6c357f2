#pragma once

#include <stdexcept>
#include <string>

namespace edlab {

/// Base for every error raised by the library. The CLI maps the concrete
/// subclasses onto exit codes.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Bad grid, mismatched grids, bad constants, wrong boundary type.
class ConfigurationError : public Error
{
  public:
    using Error::Error;
};

/// Parameter outside the mathematical domain of an operation (e.g. alpha <= 0).
class DomainError : public Error
{
  public:
    using Error::Error;
};

/// Density that cannot be normalized, or is below the floor everywhere.
class InvalidDensityError : public Error
{
  public:
    using Error::Error;
};

/// Root finding for the step-length multiplier has no bracket.
class NoSolutionError : public Error
{
  public:
    using Error::Error;
};

/// Time step violates a stability bound.
class StepSizeError : public Error
{
  public:
    using Error::Error;
};

/// Explicit update blew up.
class InstabilityError : public Error
{
  public:
    using Error::Error;
};

/// Bayes reversal attempted where the posterior vanishes at a reachable node.
class SingularReversalError : public Error
{
  public:
    SingularReversalError(std::string const& what, std::size_t node)
        : Error(what), node_(node)
    {
    }
    std::size_t node() const noexcept { return node_; }

  private:
    std::size_t node_;
};

/// Wavefunction has a node; the (rho, phi) map is singular there.
class NodalStateError : public Error
{
  public:
    using Error::Error;
};

/// Phase jump between neighbouring nodes reaches pi: grid too coarse to unwrap.
class AliasingError : public Error
{
  public:
    using Error::Error;
};

/// Non-finite values encountered during a run.
class RuntimeFailure : public Error
{
  public:
    using Error::Error;
};

/// Config file problems; carries the offending line (0 if not line-specific).
class ParseError : public ConfigurationError
{
  public:
    ParseError(std::string const& what, int line, std::string key)
        : ConfigurationError(what), line_(line), key_(std::move(key))
    {
    }
    int line() const noexcept { return line_; }
    std::string const& key() const noexcept { return key_; }

  private:
    int line_;
    std::string key_;
};

class IoError : public Error
{
  public:
    using Error::Error;
};

}  // namespace edlab
