#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace fieldlens {

enum class ErrorCode {
    // label maps and annotation sets
    DuplicateClass,
    EmptyLabelMap,
    EmptyClassName,
    BoxOutOfBounds,
    DegenerateBox,
    NonFiniteCoordinate,
    InvalidConfidence,
    DanglingMediaId,
    DuplicateMediaId,
    UnknownClassId,
    UnlabeledImage,
    InvalidDimensions,
    InconsistentFrameSource,
    TaskLabelMismatch,

    // format parsers
    ParseError,
    MissingSize,
    DanglingImageId,
    ClassOutOfRange,
    NormalizedOutOfRange,
    MissingDims,
    UnknownClass,
    EmptyDataset,
    UnsupportedExport,

    // dataset
    InvalidRate,
    InvalidRatio,
    RateClamped,

    // models
    NoFeasibleModel,
    ClassCapacityExceeded,
    InvalidConstraints,
    InvalidRegistry,

    // training
    MissingSplit,
    InvalidConfig,
    TrainerUnavailable,
    TrainerFailed,
    OutOfOrderStep,
    InvalidLoss,
    RunNotActive,
    RunNotFinished,
    ArtifactMissing,
    UnknownRun,

    // app building
    TaskMismatch,
    UnsupportedCustomization,
    InvalidCustomization,
    MissingModel,
    PlatformNotTargeted,
    UnknownTemplate,
    UnknownBundle,

    // service
    EmailTaken,
    WeakCredential,
    InvalidEmail,
    InvalidCredentials,
    UnsupportedSignIn,
    Unauthenticated,
    Forbidden,
    UnknownProject,
    UnknownObservation,
    ValidationFailed,
    PayloadTooLarge,

    IoError,
};

/// Upper-snake name used in reports, JSON output and HTTP error bodies.
std::string_view to_string(ErrorCode code);

struct Error {
    ErrorCode code;
    std::string message;
    std::optional<std::string> media_id{};

    std::string describe() const;
};

template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : state_(std::in_place_index<0>, std::move(value)) {}
    Result(Error error) : state_(std::in_place_index<1>, std::move(error)) {}

    bool ok() const { return state_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T& value() & { return std::get<0>(state_); }
    const T& value() const& { return std::get<0>(state_); }
    T&& value() && { return std::get<0>(std::move(state_)); }

    T& operator*() & { return value(); }
    const T& operator*() const& { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

    const Error& error() const { return std::get<1>(state_); }

private:
    std::variant<T, Error> state_;
};

template <>
class [[nodiscard]] Result<void> {
public:
    Result() = default;
    Result(Error error) : error_(std::move(error)) {}

    bool ok() const { return !error_.has_value(); }
    explicit operator bool() const { return ok(); }
    const Error& error() const { return *error_; }

private:
    std::optional<Error> error_;
};

inline Error make_error(ErrorCode code, std::string message) {
    return Error{code, std::move(message), std::nullopt};
}

}  // namespace fieldlens
