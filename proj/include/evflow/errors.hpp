#pragma once

#include <stdexcept>
#include <string>

namespace evflow {

/// Error categories used to pick the process exit code in the CLI.
/// Computation errors exit with 1, usage/IO errors with 2.
enum class ErrorKind {
    Computation,
    UsageIo,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string klass, const std::string& message)
        : std::runtime_error(klass + ": " + message), kind_(kind), class_(std::move(klass)) {}

    ErrorKind kind() const { return kind_; }
    const std::string& error_class() const { return class_; }

private:
    ErrorKind kind_;
    std::string class_;
};

#define EVFLOW_DEFINE_ERROR(NAME, KIND)                                   \
    class NAME : public Error {                                           \
    public:                                                               \
        explicit NAME(const std::string& message)                         \
            : Error(ErrorKind::KIND, #NAME, message) {}                   \
    }

// event_model
EVFLOW_DEFINE_ERROR(NonConvergence, Computation);
EVFLOW_DEFINE_ERROR(OutOfRange, Computation);
// scene_sim
EVFLOW_DEFINE_ERROR(NonPositiveDepth, Computation);
EVFLOW_DEFINE_ERROR(EmptyScene, Computation);
// flow_head
EVFLOW_DEFINE_ERROR(ShapeMismatch, Computation);
EVFLOW_DEFINE_ERROR(EmptyDataset, Computation);
// uq
EVFLOW_DEFINE_ERROR(TooFewSamples, Computation);
// egomotion
EVFLOW_DEFINE_ERROR(InsufficientData, Computation);
EVFLOW_DEFINE_ERROR(DegenerateGeometry, Computation);
EVFLOW_DEFINE_ERROR(ZeroSolution, Computation);
// metrics
EVFLOW_DEFINE_ERROR(EmptyInput, Computation);
EVFLOW_DEFINE_ERROR(LengthMismatch, Computation);
// cli / io
EVFLOW_DEFINE_ERROR(EmptyPredictions, Computation);
EVFLOW_DEFINE_ERROR(ParseError, UsageIo);
EVFLOW_DEFINE_ERROR(FileError, UsageIo);

#undef EVFLOW_DEFINE_ERROR

} // namespace evflow
