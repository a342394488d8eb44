#include "labloop/error.hpp"

namespace labloop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedCursor: return "MalformedCursor";
    case ErrorCode::EmptyGroundingText: return "EmptyGroundingText";
    case ErrorCode::MissingStageHeader: return "MissingStageHeader";
    case ErrorCode::MissingObjective: return "MissingObjective";
    case ErrorCode::MissingCompletionIndicator: return "MissingCompletionIndicator";
    case ErrorCode::NonContiguousStages: return "NonContiguousStages";
    case ErrorCode::MissingBlueprint: return "MissingBlueprint";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::DuplicateSection: return "DuplicateSection";
    case ErrorCode::PlaceholderSection: return "PlaceholderSection";
    case ErrorCode::InvalidChoiceIndex: return "InvalidChoiceIndex";
    case ErrorCode::MissingStepsSection: return "MissingStepsSection";
    case ErrorCode::MissingTemplateSection: return "MissingTemplateSection";
    case ErrorCode::UnknownSlotName: return "UnknownSlotName";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::TransportFailure: return "TransportFailure";
    case ErrorCode::NonSuccessStatus: return "NonSuccessStatus";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::NoSuchCampaign: return "NoSuchCampaign";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::DuplicateScore: return "DuplicateScore";
    case ErrorCode::ZeroTasks: return "ZeroTasks";
    case ErrorCode::BadRatio: return "BadRatio";
    case ErrorCode::UnknownModulatorCode: return "UnknownModulatorCode";
    case ErrorCode::NonIntegerField: return "NonIntegerField";
    case ErrorCode::DuplicateExpId: return "DuplicateExpId";
    case ErrorCode::NonMonotonicTrajectory: return "NonMonotonicTrajectory";
    case ErrorCode::NoProbeYet: return "NoProbeYet";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::TurnInFlight: return "TurnInFlight";
  }
  return "Unknown";
}

namespace {

std::string compose_message(ErrorCode code, const std::string& detail) {
  std::string msg(to_string(code));
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(compose_message(code, detail)),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace labloop
