#pragma once

#include <stdexcept>
#include <string>

namespace trajclust {

/// Broad error families. The CLI maps these onto exit codes.
enum class ErrorCategory {
    Usage,     // bad configuration or API misuse
    Data,      // malformed or incompatible input data
    Internal,  // numerical or internal failure
};

enum class ErrorKind {
    Schema,
    DuplicateObservation,
    Parse,
    Shape,
    Alignment,
    MissingData,
    Imputation,
    EmptyDataset,
    UnknownMethod,
    Validation,
    Range,
    PartialAssignment,
    NotFound,
    Infeasible,
    Capacity,
    Rule,
    Contract,
    UnknownMetric,
    IncompatiblePartition,
    Degenerate,
    Io,
    Config,
};

const char* to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_of(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace trajclust
