#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lpg {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
  std::vector<std::string> images;  // base64-encoded blobs, pass-through
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct ChatResponse {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

// Stable hash of the rendered message list, used to pin replay scripts to
// the exact prompts they were recorded against.
std::string request_fingerprint(const ChatRequest& req);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://localhost:8080
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;
  int max_attempts = 3;
  int initial_backoff_ms = 250;
  int timeout_seconds = 120;

  // LPG_ENDPOINT / LPG_MODEL / LPG_API_KEY.
  static HttpBackendConfig from_env();
};

// OpenAI-compatible chat-completions client. Transient failures (timeouts,
// 429, 5xx) are retried with exponential backoff up to max_attempts.
std::unique_ptr<Backend> make_http_backend(HttpBackendConfig cfg);

struct ReplayEntry {
  std::optional<std::string> fingerprint;
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ReplayScript {
  std::vector<ReplayEntry> entries;

  static ReplayScript load(const std::filesystem::path& path);  // JSON lines
  void save(const std::filesystem::path& path) const;
};

// Consumes the script strictly in order; exhaustion throws ReplayExhausted,
// a fingerprint mismatch throws ReplayMismatch naming the step index.
std::unique_ptr<Backend> make_replay_backend(ReplayScript script);

// Forwards to `inner` and appends every exchange (with fingerprints) to the
// script file at `out`.
std::unique_ptr<Backend> make_record_backend(std::unique_ptr<Backend> inner,
                                             std::filesystem::path out);

enum class CallTag { planning, augmentation };

struct CallRecord {
  CallTag tag;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

// Per-episode token accounting. Augmentation-tagged calls accumulate
// separately and never count toward planning totals.
class TokenLedger {
 public:
  void record(CallTag tag, const ChatResponse& resp) {
    calls_.push_back({tag, resp.prompt_tokens, resp.completion_tokens});
  }
  long planning_tokens() const {
    long total = 0;
    for (const auto& c : calls_)
      if (c.tag == CallTag::planning) total += c.prompt_tokens + c.completion_tokens;
    return total;
  }
  long augmentation_tokens() const {
    long total = 0;
    for (const auto& c : calls_)
      if (c.tag == CallTag::augmentation) total += c.prompt_tokens + c.completion_tokens;
    return total;
  }
  const std::vector<CallRecord>& calls() const { return calls_; }

 private:
  std::vector<CallRecord> calls_;
};

// A backend plus the episode's ledger; every call is tagged.
class LmClient {
 public:
  LmClient(Backend& backend, TokenLedger& ledger) : backend_(backend), ledger_(ledger) {}
  ChatResponse complete(const ChatRequest& req, CallTag tag) {
    ChatResponse resp = backend_.complete(req);
    ledger_.record(tag, resp);
    return resp;
  }
  TokenLedger& ledger() { return ledger_; }

 private:
  Backend& backend_;
  TokenLedger& ledger_;
};

}  // namespace lpg
