#include "fieldlens/result.hpp"

namespace fieldlens {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateClass: return "DUPLICATE_CLASS";
        case ErrorCode::EmptyLabelMap: return "EMPTY_LABEL_MAP";
        case ErrorCode::EmptyClassName: return "EMPTY_CLASS_NAME";
        case ErrorCode::BoxOutOfBounds: return "BOX_OUT_OF_BOUNDS";
        case ErrorCode::DegenerateBox: return "DEGENERATE_BOX";
        case ErrorCode::NonFiniteCoordinate: return "NON_FINITE_COORDINATE";
        case ErrorCode::InvalidConfidence: return "INVALID_CONFIDENCE";
        case ErrorCode::DanglingMediaId: return "DANGLING_MEDIA_ID";
        case ErrorCode::DuplicateMediaId: return "DUPLICATE_MEDIA_ID";
        case ErrorCode::UnknownClassId: return "UNKNOWN_CLASS_ID";
        case ErrorCode::UnlabeledImage: return "UNLABELED_IMAGE";
        case ErrorCode::InvalidDimensions: return "INVALID_DIMENSIONS";
        case ErrorCode::InconsistentFrameSource: return "INCONSISTENT_FRAME_SOURCE";
        case ErrorCode::TaskLabelMismatch: return "TASK_LABEL_MISMATCH";
        case ErrorCode::ParseError: return "PARSE_ERROR";
        case ErrorCode::MissingSize: return "MISSING_SIZE";
        case ErrorCode::DanglingImageId: return "DANGLING_IMAGE_ID";
        case ErrorCode::ClassOutOfRange: return "CLASS_OUT_OF_RANGE";
        case ErrorCode::NormalizedOutOfRange: return "NORMALIZED_OUT_OF_RANGE";
        case ErrorCode::MissingDims: return "MISSING_DIMS";
        case ErrorCode::UnknownClass: return "UNKNOWN_CLASS";
        case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
        case ErrorCode::UnsupportedExport: return "UNSUPPORTED_EXPORT";
        case ErrorCode::InvalidRate: return "INVALID_RATE";
        case ErrorCode::InvalidRatio: return "INVALID_RATIO";
        case ErrorCode::RateClamped: return "RATE_CLAMPED";
        case ErrorCode::NoFeasibleModel: return "NO_FEASIBLE_MODEL";
        case ErrorCode::ClassCapacityExceeded: return "CLASS_CAPACITY_EXCEEDED";
        case ErrorCode::InvalidConstraints: return "INVALID_CONSTRAINTS";
        case ErrorCode::InvalidRegistry: return "INVALID_REGISTRY";
        case ErrorCode::MissingSplit: return "MISSING_SPLIT";
        case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
        case ErrorCode::TrainerUnavailable: return "TRAINER_UNAVAILABLE";
        case ErrorCode::TrainerFailed: return "TRAINER_FAILED";
        case ErrorCode::OutOfOrderStep: return "OUT_OF_ORDER_STEP";
        case ErrorCode::InvalidLoss: return "INVALID_LOSS";
        case ErrorCode::RunNotActive: return "RUN_NOT_ACTIVE";
        case ErrorCode::RunNotFinished: return "RUN_NOT_FINISHED";
        case ErrorCode::ArtifactMissing: return "ARTIFACT_MISSING";
        case ErrorCode::UnknownRun: return "UNKNOWN_RUN";
        case ErrorCode::TaskMismatch: return "TASK_MISMATCH";
        case ErrorCode::UnsupportedCustomization: return "UNSUPPORTED_CUSTOMIZATION";
        case ErrorCode::InvalidCustomization: return "INVALID_CUSTOMIZATION";
        case ErrorCode::MissingModel: return "MISSING_MODEL";
        case ErrorCode::PlatformNotTargeted: return "PLATFORM_NOT_TARGETED";
        case ErrorCode::UnknownTemplate: return "UNKNOWN_TEMPLATE";
        case ErrorCode::UnknownBundle: return "UNKNOWN_BUNDLE";
        case ErrorCode::EmailTaken: return "EMAIL_TAKEN";
        case ErrorCode::WeakCredential: return "WEAK_CREDENTIAL";
        case ErrorCode::InvalidEmail: return "INVALID_EMAIL";
        case ErrorCode::InvalidCredentials: return "INVALID_CREDENTIALS";
        case ErrorCode::UnsupportedSignIn: return "UNSUPPORTED_SIGN_IN";
        case ErrorCode::Unauthenticated: return "UNAUTHENTICATED";
        case ErrorCode::Forbidden: return "FORBIDDEN";
        case ErrorCode::UnknownProject: return "UNKNOWN_PROJECT";
        case ErrorCode::UnknownObservation: return "UNKNOWN_OBSERVATION";
        case ErrorCode::ValidationFailed: return "VALIDATION_FAILED";
        case ErrorCode::PayloadTooLarge: return "PAYLOAD_TOO_LARGE";
        case ErrorCode::IoError: return "IO_ERROR";
    }
    return "UNKNOWN";
}

std::string Error::describe() const {
    std::string out(to_string(code));
    if (media_id) out += " [" + *media_id + "]";
    if (!message.empty()) out += ": " + message;
    return out;
}

}  // namespace fieldlens
