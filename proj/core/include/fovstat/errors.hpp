#pragma once

#include <stdexcept>
#include <string>

namespace fovstat {

/// Input violated a structural or numerical precondition.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix required to be symmetric positive-definite was not.
class NonPositiveDefiniteError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// A Bayes update retained zero probability mass: the evidence contradicts
/// the prior (e.g. conditioning on absence when all mass lies inside the FoV).
class ContradictionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fovstat
