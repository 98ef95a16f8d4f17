#pragma once

#include <stdexcept>
#include <string>

namespace growth {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameter or argument outside the domain a model/estimator is defined on.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Requested a closed-form size curve for a model that only supports
// numerical integration.
class UnsupportedClosedForm : public Error {
public:
    explicit UnsupportedClosedForm(const std::string& msg) : Error(msg) {}
};

// Numerical integration left the admissible state space (overflow, X <= 0).
class NumericalBlowup : public Error {
public:
    explicit NumericalBlowup(const std::string& msg) : Error(msg) {}
};

// Vector/matrix sizes do not agree.
class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

// A linear solve inside an optimizer met a singular system.
class SingularJacobian : public Error {
public:
    explicit SingularJacobian(const std::string& msg) : Error(msg) {}
};

// Smoothing window longer than the series (or not odd).
class WindowTooLarge : public Error {
public:
    explicit WindowTooLarge(const std::string& msg) : Error(msg) {}
};

// Data value that must be positive is not.
class NonPositiveValue : public Error {
public:
    explicit NonPositiveValue(const std::string& msg) : Error(msg) {}
};

// A profile or series with no usable entries where one is required.
class EmptyProfile : public Error {
public:
    explicit EmptyProfile(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (files, layouts, schedules).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Interval-window pathologies of the rate-parameter estimators.  The profile
// API carries these as per-window flags; the point APIs throw them.
class NonPositiveLogArgument : public Error {
public:
    explicit NonPositiveLogArgument(const std::string& msg) : Error(msg) {}
};

class DegenerateDenominator : public Error {
public:
    explicit DegenerateDenominator(const std::string& msg) : Error(msg) {}
};

class NonPositiveBase : public Error {
public:
    explicit NonPositiveBase(const std::string& msg) : Error(msg) {}
};

} // namespace growth
