#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

namespace dualsys {

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr double kSamplingTemperature = 0.4;

struct Message {
  std::string role;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = kDefaultTemperature;
  int max_output_tokens = 2048;
  std::optional<std::uint64_t> seed;
};

struct ChatResponse {
  std::string text;
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  double latency_ms = 0;
  std::string endpoint;
};

/// Key-sorted JSON of (model, messages, temperature, max_tokens, seed).
std::string canonical_json(const ChatRequest& req);
/// Lowercase hex SHA-256 of canonical_json.
std::string cache_key(const ChatRequest& req);

/// Whitespace-delimited word count; the token proxy for scripted endpoints.
long long count_words(const std::string& text);

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  /// Throws Error{transport|auth|rate_limit|unscripted|exhausted}.
  virtual ChatResponse complete(const ChatRequest& req) = 0;
  virtual std::string name() const = 0;
  /// Model id placed in requests.
  virtual std::string model() const = 0;
  /// In-flight bound the runner should respect.
  virtual int parallelism() const { return 1; }
};

struct RetryPolicy {
  int max_retries = 3;
  int backoff_ms = 250;  // doubled per attempt
};

struct EndpointConfig {
  std::string name;
  std::string base_url;  // "https://host[:port][/prefix]"; requests go to <prefix>/chat/completions
  std::string model;
  std::string api_key_env;  // empty: no Authorization header
  int parallelism = 4;
  int timeout_s = 120;
  RetryPolicy retry;
};

/// {"endpoints": {"<name>": {"base_url", "model", "api_key_env", "parallelism",
/// "timeout_s", "retries", "backoff_ms"}}}. Inline credentials ("api_key",
/// "key", "token") are rejected.
std::map<std::string, EndpointConfig> parse_endpoint_table(const nlohmann::json& j);
std::map<std::string, EndpointConfig> load_endpoint_table(const std::string& path);

/// Chat-completions over HTTP(S).
class HttpEndpoint : public Endpoint {
 public:
  explicit HttpEndpoint(EndpointConfig config);
  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return config_.name; }
  std::string model() const override { return config_.model; }
  int parallelism() const override { return config_.parallelism; }

 private:
  EndpointConfig config_;
  std::string scheme_host_;
  std::string path_;
  std::string api_key_;
  std::counting_semaphore<1024> slots_;
};

/// Response cache in `dir`, one `<cache_key>.json` per request.
class CachingEndpoint : public Endpoint {
 public:
  CachingEndpoint(std::shared_ptr<Endpoint> inner, std::string dir);
  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return inner_->name(); }
  std::string model() const override { return inner_->model(); }
  int parallelism() const override { return inner_->parallelism(); }

  long long hits() const { return hits_; }
  long long misses() const { return misses_; }

 private:
  std::shared_ptr<Endpoint> inner_;
  std::string dir_;
  std::atomic<long long> hits_{0};
  std::atomic<long long> misses_{0};
};

/// Deterministic test double. Rules are tried in order; the first rule that
/// matches and still has a reply answers.
class ScriptedOracle : public Endpoint {
 public:
  using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

  struct Rule {
    std::vector<std::string> contains;  // all must occur in the joined message contents
    std::string regex;                  // optional, ECMAScript, searched
    std::vector<std::string> replies;   // consumed in order
    bool repeat = false;                // keep returning the last reply
    Responder responder;                // alternative to replies; nullopt = no match
  };

  explicit ScriptedOracle(std::string model = "scripted", int parallelism = 8);

  /// {"model": "...", "parallelism": n, "rules": [{"match": [...], "regex": "...",
  /// "replies": [...], "repeat": bool}]}
  static std::shared_ptr<ScriptedOracle> from_json(const nlohmann::json& j);
  static std::shared_ptr<ScriptedOracle> load(const std::string& path);

  void add_rule(Rule rule);
  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return "scripted"; }
  std::string model() const override { return model_; }
  int parallelism() const override { return parallelism_; }
  long long calls() const { return calls_; }

 private:
  struct Compiled {
    Rule rule;
    std::optional<std::regex> re;
    std::size_t used = 0;
  };
  std::string model_;
  int parallelism_;
  std::mutex mu_;
  std::vector<Compiled> rules_;
  std::atomic<long long> calls_{0};
};

/// HttpEndpoint for `config`, wrapped in a cache when cache_dir is non-empty.
std::shared_ptr<Endpoint> open_endpoint(const EndpointConfig& config, const std::string& cache_dir = {});

}  // namespace dualsys
