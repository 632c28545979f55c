#pragma once

#include <stdexcept>
#include <string>

namespace levelhull {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: wrong dimension, out-of-range parameter, malformed file.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The estimator could not produce a result from otherwise valid input
/// (empty X+ set, failed bracket, degenerate split).
class EstimationError : public Error {
public:
    using Error::Error;
};

} // namespace levelhull
