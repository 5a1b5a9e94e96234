#pragma once

#include <stdexcept>
#include <string>

namespace cgldp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Paths or solvers defined on different time grids were combined.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A Gram matrix has an eigenvalue below -1e-10 * trace.
class NonPsd : public Error {
public:
    using Error::Error;
};

/// A prior configuration lets too much mass escape the positivity floor.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// The covariance vanishes at the requested time (e.g. t = 0).
class DegenerateTime : public Error {
public:
    using Error::Error;
};

/// Every probed (t, y) gave an infinite rate.
class NoFiniteRate : public Error {
public:
    using Error::Error;
};

/// A rung of an n-ladder produced too few crossings for a log-probability fit.
class InsufficientHits : public Error {
public:
    using Error::Error;
};

/// Experiment configuration failed schema or range validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace cgldp
