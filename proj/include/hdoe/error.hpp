#pragma once

#include <stdexcept>
#include <string>

namespace hdoe {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A space document violates the schema or a dimension invariant.
/// `dimension_id()` names the offending dimension when one is known.
class SpaceError : public Error {
public:
    SpaceError(std::string dimension_id, const std::string& what)
        : Error(dimension_id.empty() ? what : "dimension '" + dimension_id + "': " + what),
          dimension_id_(std::move(dimension_id)) {}

    const std::string& dimension_id() const noexcept { return dimension_id_; }

private:
    std::string dimension_id_;
};

/// A design (or a row of one) breaks the hierarchy / range invariants.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// A metric is not defined for the given design (e.g. fewer than two points).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

/// Malformed CSV or JSON input.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace hdoe
