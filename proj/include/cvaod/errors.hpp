#pragma once

#include <stdexcept>
#include <string>

namespace cvaod {

/// Invalid input: wrong shapes, violated preconditions, unstable systems.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A factorization or eigensolve failed, or a matrix was too ill-conditioned.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The estimator could not produce a system from the given data.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cvaod
