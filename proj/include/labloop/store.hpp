#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "labloop/model.hpp"

namespace labloop {

// Applies one event to `campaign`, validating that the event is legal in the
// current state. Throws IllegalTransition, UnknownTask, DuplicateScore or
// InvalidArgument (malformed payload); `campaign` is unchanged on throw.
void apply_event(Campaign& campaign, const Event& event);

// Folds a complete event list from an empty campaign. Throws CorruptLog(seq)
// on a sequence gap or an event that does not apply.
Campaign fold_events(const std::vector<Event>& events);

// SHA-256 over the canonical JSON of every non-timestamp field.
std::string state_hash(const Campaign& campaign);

struct NewCampaign {
  std::string subject;
  int stage_count = 5;
  std::optional<std::string> exemplar_subject;
  std::optional<std::string> exemplar_summary;
  std::optional<std::string> id;  // generated when absent
};

// One JSONL file per campaign under `data_dir`: a schema header line, then
// one event per line. Appends are validated against the live state,
// fsync'ed, and serialized per campaign.
class EventStore {
 public:
  explicit EventStore(std::string data_dir);

  const std::string& data_dir() const noexcept { return data_dir_; }

  // Appends CampaignCreated and returns the new campaign.
  Campaign create_campaign(const NewCampaign& spec);

  // Returns the event's seq. Throws IllegalTransition, UnknownTask,
  // DuplicateScore, NoSuchCampaign, StorageFailure.
  std::int64_t append(const std::string& campaign_id, EventKind kind, json payload);

  // Live state as maintained by append; loads the log on first access.
  Campaign snapshot(const std::string& campaign_id);

  // Re-reads and folds the log from disk. Throws NoSuchCampaign, CorruptLog.
  Campaign replay(const std::string& campaign_id) const;

  std::vector<Event> events(const std::string& campaign_id, std::int64_t from_seq = 1) const;
  std::vector<std::string> list() const;
  bool exists(const std::string& campaign_id) const;
  std::string log_path(const std::string& campaign_id) const;

 private:
  struct Slot {
    std::mutex mu;
    std::optional<Campaign> live;
    std::int64_t last_seq = 0;
  };

  Slot& slot(const std::string& campaign_id) const;
  void load_locked(const std::string& campaign_id, Slot& s);
  std::string next_campaign_id() const;

  std::string data_dir_;
  mutable std::mutex slots_mu_;
  mutable std::map<std::string, std::unique_ptr<Slot>> slots_;
};

inline constexpr std::string_view kEventLogSchema = "labloop.campaign-events";
inline constexpr int kEventLogVersion = 1;

}  // namespace labloop
