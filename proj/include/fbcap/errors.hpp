#pragma once

#include <stdexcept>
#include <string>

namespace fbcap {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class EvaluationAtPole : public Error {
public:
    using Error::Error;
};

/// A polynomial root sits too close to the unit circle for a log-modulus integral.
class IllConditionedIntegral : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

/// Plant coefficients outside |a| > 1, c != 0.
class InvalidPlant : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    using Error::Error;
};

class OutOfScope : public Error {
public:
    using Error::Error;
};

}  // namespace fbcap
