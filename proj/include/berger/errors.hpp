#pragma once

#include <stdexcept>
#include <string>

namespace berger {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A state does not satisfy the unit-tangent-bundle constraints.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

/// lambda^2 = c^2 + delta^2 mu^2 exceeds the unit lifted speed.
class InfeasibleSpeed : public Error {
public:
    InfeasibleSpeed(const std::string& what, double lambda_sq)
        : Error(what), lambda_sq_(lambda_sq) {}
    [[nodiscard]] double lambda_sq() const noexcept { return lambda_sq_; }

private:
    double lambda_sq_;
};

/// The projected curve is a point (x' = 0); Frenet data are undefined.
class DegenerateProjection : public Error {
public:
    using Error::Error;
};

/// Algebraic derivative chains need a parallel twisted operator.
class NotParallel : public Error {
public:
    using Error::Error;
};

/// A check that does not apply to the requested configuration.
class Inapplicable : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double last_good_sigma)
        : Error(what), last_good_sigma_(last_good_sigma) {}
    [[nodiscard]] double last_good_sigma() const noexcept { return last_good_sigma_; }

private:
    double last_good_sigma_;
};

} // namespace berger
