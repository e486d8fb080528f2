#pragma once

#include <stdexcept>
#include <string>

namespace revgan {

/// Root of every error raised by the library. `kind()` is a stable tag
/// used by the CLI and by reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define REVGAN_DEFINE_ERROR(Name, tag)                                        \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(tag, what) {}          \
    };

REVGAN_DEFINE_ERROR(ShapeError, "shape")
REVGAN_DEFINE_ERROR(DomainError, "domain")
REVGAN_DEFINE_ERROR(NotInvertibleAtPoint, "not_invertible_at_point")
REVGAN_DEFINE_ERROR(SingularMatrix, "singular_matrix")
REVGAN_DEFINE_ERROR(TrainingError, "training")
REVGAN_DEFINE_ERROR(InitError, "init")
REVGAN_DEFINE_ERROR(IngestionError, "ingestion")
REVGAN_DEFINE_ERROR(FilterError, "filter")
REVGAN_DEFINE_ERROR(RangeError, "range")
REVGAN_DEFINE_ERROR(BatchingError, "batching")
REVGAN_DEFINE_ERROR(RecoveryError, "recovery")
REVGAN_DEFINE_ERROR(FlatSegmentOutput, "flat_segment_output")
REVGAN_DEFINE_ERROR(LayoutError, "layout")
REVGAN_DEFINE_ERROR(EncodingTimeout, "encoding_timeout")
REVGAN_DEFINE_ERROR(PayloadError, "payload")
REVGAN_DEFINE_ERROR(FormatError, "format")
REVGAN_DEFINE_ERROR(SetupError, "setup")
REVGAN_DEFINE_ERROR(ChainError, "chain")

#undef REVGAN_DEFINE_ERROR

/// Wraps an error raised inside one stage of the sender/receiver pipeline.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), "[" + stage + "] " + cause.what()),
          stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace revgan
