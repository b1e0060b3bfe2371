#include "trajclust/errors.hpp"

namespace trajclust {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Schema: return "schema error";
        case ErrorKind::DuplicateObservation: return "duplicate observation";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Shape: return "shape error";
        case ErrorKind::Alignment: return "alignment error";
        case ErrorKind::MissingData: return "missing data";
        case ErrorKind::Imputation: return "imputation error";
        case ErrorKind::EmptyDataset: return "empty dataset";
        case ErrorKind::UnknownMethod: return "unknown method";
        case ErrorKind::Validation: return "validation error";
        case ErrorKind::Range: return "range error";
        case ErrorKind::PartialAssignment: return "partial assignment";
        case ErrorKind::NotFound: return "not found";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Capacity: return "capacity exceeded";
        case ErrorKind::Rule: return "rule error";
        case ErrorKind::Contract: return "contract error";
        case ErrorKind::UnknownMetric: return "unknown metric";
        case ErrorKind::IncompatiblePartition: return "incompatible partition";
        case ErrorKind::Degenerate: return "degenerate trajectory";
        case ErrorKind::Io: return "i/o error";
        case ErrorKind::Config: return "configuration error";
    }
    return "error";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::UnknownMethod:
        case ErrorKind::Validation:
        case ErrorKind::Range:
        case ErrorKind::NotFound:
        case ErrorKind::Rule:
        case ErrorKind::Contract:
        case ErrorKind::UnknownMetric:
        case ErrorKind::Config:
        case ErrorKind::EmptyDataset:
            return ErrorCategory::Usage;
        case ErrorKind::Schema:
        case ErrorKind::DuplicateObservation:
        case ErrorKind::Parse:
        case ErrorKind::Shape:
        case ErrorKind::Alignment:
        case ErrorKind::MissingData:
        case ErrorKind::Imputation:
        case ErrorKind::PartialAssignment:
        case ErrorKind::Infeasible:
        case ErrorKind::Capacity:
        case ErrorKind::IncompatiblePartition:
        case ErrorKind::Degenerate:
        case ErrorKind::Io:
            return ErrorCategory::Data;
    }
    return ErrorCategory::Internal;
}

}  // namespace trajclust
