#include "driftscope/error.hpp"

namespace driftscope {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::UnlabeledDataset: return "UnlabeledDataset";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::EmptyPrototypeSet: return "EmptyPrototypeSet";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NoPrototypes: return "NoPrototypes";
    case ErrorKind::EmptyBackground: return "EmptyBackground";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SingularHessian: return "SingularHessian";
    case ErrorKind::EmptyRemainder: return "EmptyRemainder";
    case ErrorKind::IdenticalGifims: return "IdenticalGifims";
    case ErrorKind::EmptyAttributeSet: return "EmptyAttributeSet";
    case ErrorKind::EmptyDocument: return "EmptyDocument";
    case ErrorKind::ProviderError: return "ProviderError";
    case ErrorKind::TooFewItems: return "TooFewItems";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace driftscope
