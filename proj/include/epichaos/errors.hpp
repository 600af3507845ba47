#pragma once

#include <stdexcept>
#include <string>

namespace epichaos {

/// Bad input file, malformed config or violated precondition on user data.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoPeakError : public NumericalError {
public:
    enum class Reason {
        NeverTakesOff,   // compartment only decreases from the start
        HorizonTooShort  // compartment still rising at the end of the run
    };

    NoPeakError(Reason reason, const std::string& what)
        : NumericalError(what), reason_(reason) {}

    Reason reason() const noexcept { return reason_; }

private:
    Reason reason_;
};

}  // namespace epichaos
