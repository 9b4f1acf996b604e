#pragma once

#include <stdexcept>
#include <string>

namespace pelastica {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an iterative or adaptive method fails to reach its tolerance.
///
/// `estimate` and `bound` carry the best value found and its error bound (for
/// quadrature) or the final bracket (for root finding).
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string &what, double estimate, double bound)
        : std::runtime_error(what), estimate_(estimate), bound_(bound) {}

    double estimate() const noexcept { return estimate_; }
    double bound() const noexcept { return bound_; }

private:
    double estimate_;
    double bound_;
};

}  // namespace pelastica
