#pragma once

#include <stdexcept>
#include <string>

namespace volpr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the domain of an operation was violated
/// (evaluation outside the validity window, negative time, bad order, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An excitation pole sits on top of a Laguerre basis pole (lambda ~ -a).
class PoleCollisionError : public Error {
public:
    using Error::Error;
};

/// A least-squares design matrix lost rank.
class RankDeficientError : public Error {
public:
    using Error::Error;
};

/// Exponential decomposition of a sampled signal is ill-posed.
class DecompositionError : public Error {
public:
    using Error::Error;
};

/// A structural invariant of a value type does not hold.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Malformed experiment configuration; `key()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace volpr
