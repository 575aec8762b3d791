#pragma once

#include <stdexcept>
#include <string>

namespace metarec {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV, JSON, manifest).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A classifier could not be trained on the given data.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// An experiment table file does not match the on-disk contract.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace metarec
