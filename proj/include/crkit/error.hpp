#pragma once

#include <stdexcept>
#include <string>

namespace crkit {

// Error taxonomy shared by the CLI exit-code contract:
//   input error -> 4, degree-budget error -> 3, verification failure -> 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input: block mismatches, bad preconditions, parse errors.
struct InputError : Error {
    using Error::Error;
};

/// A computation ran out of truncation degree for the requested output.
struct BudgetError : Error {
    using Error::Error;
};

/// An exact check failed (mapping equation, invariant, certificate).
struct VerifyError : Error {
    using Error::Error;
};

} // namespace crkit
