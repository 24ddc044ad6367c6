#pragma once

#include <stdexcept>
#include <string>

namespace doseopt {

// Base of every error raised by the engine. The C API maps each subclass to a
// distinct status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// Fewer distinct design points than the model has parameters.
class DegenerateDesignError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class NonInvertibleError : public Error {
public:
    using Error::Error;
};

// Input is valid but the fitted model is unusable under the requested policy
// (e.g. a negative exposure-response slope). Callers fall back to point estimates.
class PolicyError : public Error {
public:
    using Error::Error;
};

// Configuration problem; `key()` names the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace doseopt
