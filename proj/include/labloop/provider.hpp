#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace labloop {

// Single-message chat completion. Every call is a fresh conversation; no
// state carries over between calls.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string chat(const std::string& prompt) = 0;
};

struct ProviderConfig {
  std::string endpoint_url;  // e.g. https://host/v1/chat/completions
  std::string model_name;
  std::string credential_env_var = "LABLOOP_API_KEY";
  std::chrono::milliseconds timeout{120000};
  int max_retries = 2;
  std::optional<double> temperature;
  std::chrono::milliseconds retry_backoff{500};
};

// POSTs {model, messages:[{role:"user", content}], temperature?} with a
// bearer token read from the environment at call time. Retries transport
// failures, timeouts, 429 and 5xx up to max_retries extra attempts. Throws
// AuthFailure (unset credential, 401, 403), Timeout, TransportFailure,
// NonSuccessStatus.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config);
  std::string chat(const std::string& prompt) override;
  const ProviderConfig& config() const noexcept { return config_; }

 private:
  ProviderConfig config_;
};

struct TranscriptEntry {
  std::optional<std::string> prompt_sha256;
  std::string response;
};

// JSONL, one {"prompt_sha256", "response"} object per line.
std::vector<TranscriptEntry> load_transcript(const std::string& path);
void save_transcript(const std::string& path, const std::vector<TranscriptEntry>& entries);

// Replays canned responses in order, one per call. A present prompt hash
// must match the prompt. Throws TransportFailure when exhausted or on a hash
// mismatch. Calls are serialized.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(std::vector<TranscriptEntry> entries);
  static ScriptedProvider from_responses(const std::vector<std::string>& responses);

  std::string chat(const std::string& prompt) override;
  std::size_t position() const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<TranscriptEntry> entries_;
  std::size_t next_ = 0;
  mutable std::mutex mu_;
};

class CallbackProvider : public Provider {
 public:
  explicit CallbackProvider(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string chat(const std::string& prompt) override { return fn_(prompt); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

// Appends each successful (prompt, response) pair to a transcript file. The
// file also carries the prompt text for reading; every secret is replaced by
// "[REDACTED]" in both texts. Throws StorageFailure.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, std::string path, std::vector<std::string> secrets = {});
  std::string chat(const std::string& prompt) override;

 private:
  std::string redact(std::string text) const;

  Provider& inner_;
  std::string path_;
  std::vector<std::string> secrets_;
  std::mutex mu_;
};

// Value of the credential variable, or empty.
std::string credential_value(const ProviderConfig& config);

}  // namespace labloop
