#pragma once

#include <stdexcept>
#include <string>

namespace gridstrength {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or invalid user input (files, parameters, flags).
class InputError : public Error {
public:
    using Error::Error;
};

// A numerical precondition failed (singular block, asymmetric matrix, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

// A bisection bracket does not contain a sign change.
class BracketError : public Error {
public:
    using Error::Error;
};

// Two independent routes to the same quantity disagree.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace gridstrength
