#pragma once

#include <stdexcept>
#include <string>

namespace fairalloc {

// Base of every error raised by the library. Callers that only care about
// "something in fairalloc went wrong" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (e.g. λ ∉ [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed input: wrong answer shape, unknown category, bad file content.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Out-of-order or stale request against a stateful object.
class ConflictError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Logistic fit diverging because the outcome is (quasi-)perfectly separated.
class SeparationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fairalloc
