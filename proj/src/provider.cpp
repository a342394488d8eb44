#include "labloop/provider.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "labloop/error.hpp"
#include "labloop/text.hpp"

namespace labloop {

namespace {

using json = nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "endpoint URL needs a scheme: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(ErrorCode::InvalidArgument, "unsupported scheme " + scheme);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Outcome of one HTTP attempt; `retryable` failures may be attempted again.
struct AttemptFailure {
  ErrorCode code;
  std::string detail;
  bool retryable;
};

std::string extract_content(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::TransportFailure, "response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::TransportFailure, "response lacks choices[0].message.content");
  }
}

}  // namespace

std::string credential_value(const ProviderConfig& config) {
  if (config.credential_env_var.empty()) return {};
  const char* v = std::getenv(config.credential_env_var.c_str());
  return v == nullptr ? std::string{} : std::string(v);
}

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  if (config_.max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
}

std::string HttpProvider::chat(const std::string& prompt) {
  const std::string key = credential_value(config_);
  if (key.empty()) {
    throw Error(ErrorCode::AuthFailure, "environment variable " + config_.credential_env_var + " is not set");
  }
  const Endpoint ep = split_url(config_.endpoint_url);

  json body = {{"model", config_.model_name}, {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  if (config_.temperature) body["temperature"] = *config_.temperature;
  const std::string payload = body.dump();

  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);

  AttemptFailure last{ErrorCode::TransportFailure, "no attempt made", false};
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * attempt);

    httplib::Client client(ep.origin);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_bearer_token_auth(key);

    const auto started = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(ep.path, payload, "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - started;

    if (!res) {
      const bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                             (res.error() == httplib::Error::Read && elapsed >= config_.timeout);
      last = {timed_out ? ErrorCode::Timeout : ErrorCode::TransportFailure, httplib::to_string(res.error()), true};
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) return extract_content(res->body);
    if (status == 401 || status == 403) throw Error(ErrorCode::AuthFailure, "HTTP " + std::to_string(status));
    last = {ErrorCode::NonSuccessStatus, std::to_string(status), status == 429 || status >= 500};
    if (!last.retryable) break;
  }
  throw Error(last.code, last.detail);
}

std::vector<TranscriptEntry> load_transcript(const std::string& path) {
  std::string text = read_file(path);
  std::vector<TranscriptEntry> entries;
  int line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("response") || !j.at("response").is_string()) {
      throw Error(ErrorCode::CorruptLog, path + ":" + std::to_string(line_no));
    }
    TranscriptEntry e;
    if (j.contains("prompt_sha256") && j.at("prompt_sha256").is_string()) {
      e.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
    }
    e.response = j.at("response").get<std::string>();
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_transcript(const std::string& path, const std::vector<TranscriptEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    json j = {{"prompt_sha256", e.prompt_sha256 ? json(*e.prompt_sha256) : json(nullptr)}, {"response", e.response}};
    out += j.dump() + "\n";
  }
  write_file(path, out);
}

ScriptedProvider::ScriptedProvider(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}

ScriptedProvider ScriptedProvider::from_responses(const std::vector<std::string>& responses) {
  std::vector<TranscriptEntry> entries;
  for (const auto& r : responses) entries.push_back({std::nullopt, r});
  return ScriptedProvider(std::move(entries));
}

std::string ScriptedProvider::chat(const std::string& prompt) {
  std::lock_guard lock(mu_);
  if (next_ >= entries_.size()) throw Error(ErrorCode::TransportFailure, "transcript exhausted");
  const TranscriptEntry& e = entries_[next_];
  if (e.prompt_sha256 && *e.prompt_sha256 != sha256_hex(prompt)) {
    throw Error(ErrorCode::TransportFailure, "prompt hash mismatch at transcript entry " + std::to_string(next_ + 1));
  }
  ++next_;
  return e.response;
}

std::size_t ScriptedProvider::position() const {
  std::lock_guard lock(mu_);
  return next_;
}

RecordingProvider::RecordingProvider(Provider& inner, std::string path, std::vector<std::string> secrets)
    : inner_(inner), path_(std::move(path)) {
  for (auto& s : secrets) {
    if (!s.empty()) secrets_.push_back(std::move(s));
  }
}

std::string RecordingProvider::redact(std::string text) const {
  for (const auto& secret : secrets_) {
    if (secret.empty()) continue;
    for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos)) {
      text.replace(pos, secret.size(), "[REDACTED]");
    }
  }
  return text;
}

std::string RecordingProvider::chat(const std::string& prompt) {
  std::string response = inner_.chat(prompt);
  json j = {{"prompt_sha256", sha256_hex(prompt)}, {"prompt", redact(prompt)}, {"response", redact(response)}};
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << j.dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot append to " + path_);
  return response;
}

}  // namespace labloop
