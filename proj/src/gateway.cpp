#include "lpg/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "lpg/errors.hpp"
#include "lpg/hash.hpp"

// cpp-httplib: client side only, no TLS needed for the test server.
#include <httplib.h>

namespace lpg {

using nlohmann::json;
using nlohmann::ordered_json;

std::string request_fingerprint(const ChatRequest& req) {
  std::string buf;
  for (const auto& m : req.messages) {
    buf += m.role;
    buf += '\x1e';
    buf += m.content;
    buf += '\x1e';
    for (const auto& img : m.images) {
      buf += sha256_hex(img);
      buf += '\x1e';
    }
    buf += '\x1f';
  }
  return sha256_hex(buf);
}

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig cfg;
  if (const char* v = std::getenv("LPG_ENDPOINT")) cfg.endpoint = v;
  if (const char* v = std::getenv("LPG_MODEL")) cfg.model = v;
  if (const char* v = std::getenv("LPG_API_KEY")) cfg.api_key = v;
  return cfg;
}

namespace {

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty())
      throw ConfigError("http backend requires an endpoint (LPG_ENDPOINT)");
  }

  ChatResponse complete(const ChatRequest& req) override {
    json body;
    body["model"] = cfg_.model;
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    json messages = json::array();
    for (const auto& m : req.messages) {
      json msg{{"role", m.role}};
      if (m.images.empty()) {
        msg["content"] = m.content;
      } else {
        json parts = json::array();
        parts.push_back({{"type", "text"}, {"text", m.content}});
        for (const auto& img : m.images)
          parts.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:image/png;base64," + img}}}});
        msg["content"] = parts;
      }
      messages.push_back(msg);
    }
    body["messages"] = messages;
    const std::string payload = body.dump();

    std::string last_error;
    int backoff_ms = cfg_.initial_backoff_ms;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        backoff_ms *= 2;
      }
      httplib::Client client(cfg_.endpoint);
      client.set_read_timeout(cfg_.timeout_seconds, 0);
      httplib::Headers headers;
      if (!cfg_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + cfg_.api_key);
      auto res = client.Post(cfg_.path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw WireError("HTTP " + std::to_string(res->status) + ": " + res->body);
      return parse_response(res->body);
    }
    throw WireError("request failed after " + std::to_string(cfg_.max_attempts) +
                    " attempts: " + last_error);
  }

 private:
  static ChatResponse parse_response(const std::string& body) {
    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::parse_error& e) {
      throw WireError(std::string("malformed response body: ") + e.what());
    }
    ChatResponse resp;
    try {
      resp.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw WireError("response lacks choices[0].message.content");
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
      resp.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
      resp.completion_tokens = doc["usage"].value("completion_tokens", 0L);
    }
    return resp;
  }

  HttpBackendConfig cfg_;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(ReplayScript script) : script_(std::move(script)) {}

  ChatResponse complete(const ChatRequest& req) override {
    if (cursor_ >= script_.entries.size())
      throw ReplayExhausted("replay script exhausted at step " + std::to_string(cursor_));
    const ReplayEntry& e = script_.entries[cursor_];
    if (e.fingerprint) {
      std::string fp = request_fingerprint(req);
      if (fp != *e.fingerprint)
        throw ReplayMismatch("fingerprint mismatch at step " + std::to_string(cursor_));
    }
    ++cursor_;
    return {e.text, e.prompt_tokens, e.completion_tokens};
  }

 private:
  ReplayScript script_;
  size_t cursor_ = 0;
};

class RecordBackend : public Backend {
 public:
  RecordBackend(std::unique_ptr<Backend> inner, std::filesystem::path out)
      : inner_(std::move(inner)), out_(std::move(out)) {
    std::ofstream(out_, std::ios::trunc);  // start fresh
  }

  ChatResponse complete(const ChatRequest& req) override {
    ChatResponse resp = inner_->complete(req);
    ordered_json line{{"fingerprint", request_fingerprint(req)},
                      {"text", resp.text},
                      {"prompt_tokens", resp.prompt_tokens},
                      {"completion_tokens", resp.completion_tokens}};
    std::ofstream f(out_, std::ios::app);
    f << line.dump() << "\n";
    return resp;
  }

 private:
  std::unique_ptr<Backend> inner_;
  std::filesystem::path out_;
};

}  // namespace

ReplayScript ReplayScript::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open replay script: " + path.string());
  ReplayScript script;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError("replay script line " + std::to_string(lineno) + ": " + e.what());
    }
    ReplayEntry entry;
    if (doc.contains("fingerprint") && doc["fingerprint"].is_string())
      entry.fingerprint = doc["fingerprint"].get<std::string>();
    entry.text = doc.at("text").get<std::string>();
    entry.prompt_tokens = doc.value("prompt_tokens", 0L);
    entry.completion_tokens = doc.value("completion_tokens", 0L);
    script.entries.push_back(std::move(entry));
  }
  return script;
}

void ReplayScript::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::trunc);
  for (const auto& e : entries) {
    ordered_json line;
    if (e.fingerprint) line["fingerprint"] = *e.fingerprint;
    line["text"] = e.text;
    line["prompt_tokens"] = e.prompt_tokens;
    line["completion_tokens"] = e.completion_tokens;
    f << line.dump() << "\n";
  }
}

std::unique_ptr<Backend> make_http_backend(HttpBackendConfig cfg) {
  return std::make_unique<HttpBackend>(std::move(cfg));
}

std::unique_ptr<Backend> make_replay_backend(ReplayScript script) {
  return std::make_unique<ReplayBackend>(std::move(script));
}

std::unique_ptr<Backend> make_record_backend(std::unique_ptr<Backend> inner,
                                             std::filesystem::path out) {
  return std::make_unique<RecordBackend>(std::move(inner), std::move(out));
}

}  // namespace lpg
