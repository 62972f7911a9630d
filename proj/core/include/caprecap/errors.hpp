#pragma once

#include <stdexcept>
#include <string>

namespace caprecap {

// Base of all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input-data / schema problems. The CLI maps these to exit code 2.
struct SchemaError : Error {
    using Error::Error;
};

// Numerical / estimation problems. The CLI maps these to exit code 3.
struct EstimationError : Error {
    using Error::Error;
};

struct EmptyDataset : SchemaError {
    EmptyDataset() : SchemaError("dataset has no rows") {}
};

struct InconsistentWidth : SchemaError {
    explicit InconsistentWidth(const std::string& what) : SchemaError(what) {}
};

struct AllZeroCaptureRow : SchemaError {
    explicit AllZeroCaptureRow(std::size_t row)
        : SchemaError("row " + std::to_string(row) +
                      ": all-zero capture vector (unit outside the observed support)") {}
};

struct NonBinaryIndicator : SchemaError {
    NonBinaryIndicator(std::size_t row, std::size_t col)
        : SchemaError("row " + std::to_string(row) + ", column y" +
                      std::to_string(col + 1) + ": capture indicator must be 0 or 1") {}
};

struct NonFiniteCovariate : SchemaError {
    NonFiniteCovariate(std::size_t row, std::size_t col)
        : SchemaError("row " + std::to_string(row) + ", column x" +
                      std::to_string(col + 1) + ": covariate must be finite") {}
};

struct ParseError : SchemaError {
    using SchemaError::SchemaError;
};

struct EmptyInput : EstimationError {
    explicit EmptyInput(const std::string& where)
        : EstimationError(where + ": empty input") {}
};

struct PositivityViolation : EstimationError {
    explicit PositivityViolation(const std::string& what) : EstimationError(what) {}
};

struct LengthMismatch : EstimationError {
    explicit LengthMismatch(const std::string& what) : EstimationError(what) {}
};

struct DegenerateDesign : EstimationError {
    explicit DegenerateDesign(const std::string& what) : EstimationError(what) {}
};

struct BadFoldCount : EstimationError {
    explicit BadFoldCount(const std::string& what) : EstimationError(what) {}
};

struct TooFewValues : EstimationError {
    explicit TooFewValues(const std::string& what) : EstimationError(what) {}
};

struct MissingVariance : EstimationError {
    MissingVariance()
        : EstimationError("plug-in estimate carries no variance; supply a borrowed "
                          "influence-function variance") {}
};

struct OrderViolation : EstimationError {
    explicit OrderViolation(const std::string& what) : EstimationError(what) {}
};

struct AllUnobserved : EstimationError {
    AllUnobserved() : EstimationError("no unit was captured on any list") {}
};

}  // namespace caprecap
