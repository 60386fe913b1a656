#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driftscope {

enum class ErrorKind {
    ParseError,
    MissingColumn,
    EmptyDataset,
    SchemaMismatch,
    UnlabeledDataset,
    DimensionMismatch,
    ZeroVector,
    TooFewRows,
    UnknownColumn,
    EmptyPrototypeSet,
    IndexOutOfRange,
    NoPrototypes,
    EmptyBackground,
    SingleClass,
    NonConvergence,
    SingularHessian,
    EmptyRemainder,
    IdenticalGifims,
    EmptyAttributeSet,
    EmptyDocument,
    ProviderError,
    TooFewItems,
    LengthMismatch,
    InvalidSpec,
    InvalidArgument,
    ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries a kind so the CLI can map it
// to an exit code and tests can assert on the exact failure.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace driftscope
