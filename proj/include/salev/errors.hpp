#ifndef SALEV_ERRORS_HPP
#define SALEV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace salev {

// Error codes shared between the C++ core and the C API. The CLI prints the
// code name as a machine-parseable reason on exit.
enum class ErrorCode {
    InvalidArgument,
    ShapeMismatch,
    ModalityMismatch,
    NonFiniteInput,
    EmptyGroup,
    NoGradientCapability,
    NoRepresentationCapability,
    NoActivationCapability,
    KernelTooLarge,
    SingularFit,
    EmptyPool,
    InvalidLayer,
    Divergence,
    TooManySegments,
    TooFewPoints,
    NoKeptNeighbors,
    WrongModality,
    DegenerateCurve,
    BatchTooSmall,
    DegenerateGroups,
    AllTied,
    IncompleteCube,
    AllMissing,
    MethodUniverseEmpty,
    InvalidSpec,
    MalformedHeader,
    UnsupportedDtype,
    TruncatedPayload,
    MissingStageInput,
    ConfigHashMismatch,
    IoFailure,
    Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace salev

#endif
