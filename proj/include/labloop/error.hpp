#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace labloop {

enum class ErrorCode {
  InvalidArgument,
  MalformedCursor,
  EmptyGroundingText,
  MissingStageHeader,
  MissingObjective,
  MissingCompletionIndicator,
  NonContiguousStages,
  MissingBlueprint,
  MissingSection,
  DuplicateSection,
  PlaceholderSection,
  InvalidChoiceIndex,
  MissingStepsSection,
  MissingTemplateSection,
  UnknownSlotName,
  Timeout,
  AuthFailure,
  TransportFailure,
  NonSuccessStatus,
  StorageFailure,
  IllegalTransition,
  CorruptLog,
  NoSuchCampaign,
  UnknownTask,
  DuplicateScore,
  ZeroTasks,
  BadRatio,
  UnknownModulatorCode,
  NonIntegerField,
  DuplicateExpId,
  NonMonotonicTrajectory,
  NoProbeYet,
  SessionClosed,
  TurnInFlight,
};

std::string_view to_string(ErrorCode code);

// Every module reports failures through this one exception type; `code()` is
// the stable, machine-readable part and `detail()` carries the context
// (section name, offending field, HTTP status, log sequence number, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace labloop
