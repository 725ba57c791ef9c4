#pragma once

#include <stdexcept>
#include <string>

namespace pcbff {

// Invalid argument or parameter outside an operation's domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iteration caps, non-finite intermediate values, failed root brackets.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model-level failures: rank-deficient designs, degenerate predictors,
// covariance matrices that are not positive definite.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pcbff
