#pragma once

#include <stdexcept>
#include <string>

namespace rhs {

// Base class for every library error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (e.g. r < 0).
struct DomainError : Error {
    using Error::Error;
};

// Energy within the exclusion band around E = 0 or E = V0, where the
// matching formulas divide by a vanishing wavenumber.
struct DegenerateEnergy : Error {
    using Error::Error;
};

// Eigenfunction family requested at an energy outside its validity region.
struct IncompatibleRegion : Error {
    using Error::Error;
};

// Resolvent evaluation requested at a point of the continuous spectrum.
struct OnSpectrum : Error {
    using Error::Error;
};

// A quadrature did not reach its requested accuracy.
struct QuadratureFailure : Error {
    QuadratureFailure(const std::string& what, double achieved_estimate)
        : Error(what), achieved(achieved_estimate) {}
    double achieved;
};

// Limit extrapolation (Stone formula) failed to converge.
struct ExtrapolationFailure : Error {
    ExtrapolationFailure(const std::string& what, double achieved_estimate)
        : Error(what), achieved(achieved_estimate) {}
    double achieved;
};

// Chosen energy cutoff provably dominates the error of an integral.
struct CutoffTooSmall : Error {
    using Error::Error;
};

// Test-function support touches a forbidden point ({0, a, b} in position,
// the exclusion bands in energy).
struct SupportError : Error {
    using Error::Error;
};

// Operation requires a capability the function representation lacks
// (analytic derivatives, h-application, ...).
struct CapabilityError : Error {
    using Error::Error;
};

// Input state is not normalized where the operation requires it.
struct NormalizationError : Error {
    using Error::Error;
};

// An eigenfunction expected to be real carries a non-negligible
// imaginary part.
struct NonRealEigenfunction : Error {
    using Error::Error;
};

// Invalid configuration (library-level or parsed from file).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace rhs
