#include "dualsys/gateway.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dualsys/error.hpp"

namespace dualsys {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string joined_contents(const ChatRequest& req) {
  std::string s;
  for (const auto& m : req.messages) {
    if (!s.empty()) s += '\n';
    s += m.content;
  }
  return s;
}

std::string excerpt(const std::string& s, std::size_t n = 160) {
  return s.size() <= n ? s : s.substr(0, n) + "...";
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string canonical_json(const ChatRequest& req) {
  json msgs = json::array();
  for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  json j = {{"model", req.model},
            {"messages", msgs},
            {"temperature", req.temperature},
            {"max_tokens", req.max_output_tokens}};
  j["seed"] = req.seed ? json(*req.seed) : json(nullptr);
  return j.dump();
}

std::string cache_key(const ChatRequest& req) {
  const auto text = canonical_json(req);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::internal, "SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

long long count_words(const std::string& text) {
  std::istringstream in(text);
  long long n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::map<std::string, EndpointConfig> parse_endpoint_table(const json& j) {
  if (!j.is_object() || !j.contains("endpoints") || !j.at("endpoints").is_object())
    fail(ErrorCode::schema, "endpoint table needs an 'endpoints' object");
  std::map<std::string, EndpointConfig> out;
  for (const auto& [name, e] : j.at("endpoints").items()) {
    for (const char* secret : {"api_key", "key", "token", "secret"})
      if (e.contains(secret))
        fail(ErrorCode::schema, "endpoint '" + name + "': credentials must come from the environment (use api_key_env)");
    EndpointConfig c;
    c.name = name;
    try {
      c.base_url = e.at("base_url").get<std::string>();
      c.model = e.at("model").get<std::string>();
      c.api_key_env = e.value("api_key_env", std::string());
      c.parallelism = e.value("parallelism", 4);
      c.timeout_s = e.value("timeout_s", 120);
      c.retry.max_retries = e.value("retries", 3);
      c.retry.backoff_ms = e.value("backoff_ms", 250);
    } catch (const json::exception& ex) {
      fail(ErrorCode::schema, "endpoint '" + name + "': " + ex.what());
    }
    if (c.parallelism < 1 || c.parallelism > 1024)
      fail(ErrorCode::schema, "endpoint '" + name + "': parallelism must be in 1..1024");
    if (c.retry.max_retries < 0) fail(ErrorCode::schema, "endpoint '" + name + "': retries must be >= 0");
    out.emplace(name, std::move(c));
  }
  return out;
}

std::map<std::string, EndpointConfig> load_endpoint_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open endpoint table " + path);
  try {
    return parse_endpoint_table(json::parse(in));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, path + ": " + e.what());
  }
}

HttpEndpoint::HttpEndpoint(EndpointConfig config)
    : config_(std::move(config)), slots_(std::clamp(config_.parallelism, 1, 1024)) {
  const auto& url = config_.base_url;
  const auto sep = url.find("://");
  if (sep == std::string::npos) fail(ErrorCode::invalid_argument, "base_url needs a scheme: " + url);
  const auto slash = url.find('/', sep + 3);
  scheme_host_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "" : url.substr(slash);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      fail(ErrorCode::auth, "endpoint '" + config_.name + "': environment variable " + config_.api_key_env + " is unset");
    api_key_ = key;
  }
}

ChatResponse HttpEndpoint::complete(const ChatRequest& req) {
  json body = json::parse(canonical_json(req));
  if (body["seed"].is_null()) body.erase("seed");
  const auto payload = body.dump();

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  httplib::Client cli(scheme_host_);
  cli.set_connection_timeout(config_.timeout_s, 0);
  cli.set_read_timeout(config_.timeout_s, 0);
  cli.set_write_timeout(config_.timeout_s, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_problem;
  bool rate_limited = false;
  for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry.backoff_ms << std::min(attempt - 1, 10)));
    const auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_problem = "transport: " + httplib::to_string(res.error());
      rate_limited = false;
      continue;
    }
    if (res->status == 401 || res->status == 403)
      fail(ErrorCode::auth, "endpoint '" + config_.name + "' rejected credentials (HTTP " + std::to_string(res->status) + ")");
    if (res->status == 429) {
      last_problem = "HTTP 429";
      rate_limited = true;
      continue;
    }
    if (res->status >= 500) {
      last_problem = "HTTP " + std::to_string(res->status);
      rate_limited = false;
      continue;
    }
    if (res->status != 200)
      fail(ErrorCode::transport,
           "endpoint '" + config_.name + "' returned HTTP " + std::to_string(res->status) + ": " + excerpt(res->body));
    try {
      const auto j = json::parse(res->body);
      ChatResponse out;
      const auto& content = j.at("choices").at(0).at("message").at("content");
      out.text = content.is_null() ? "" : content.get<std::string>();
      if (j.contains("usage") && j.at("usage").is_object()) {
        out.prompt_tokens = j.at("usage").value("prompt_tokens", 0LL);
        out.completion_tokens = j.at("usage").value("completion_tokens", 0LL);
      }
      out.latency_ms = elapsed_ms(t0);
      out.endpoint = config_.name;
      return out;
    } catch (const json::exception& e) {
      fail(ErrorCode::transport, "endpoint '" + config_.name + "' sent a malformed completion: " + e.what());
    }
  }
  const auto tries = std::to_string(config_.retry.max_retries + 1);
  if (rate_limited) fail(ErrorCode::rate_limit, "endpoint '" + config_.name + "' rate limited after " + tries + " attempts");
  fail(ErrorCode::transport, "endpoint '" + config_.name + "' failed after " + tries + " attempts (" + last_problem + ")");
}

CachingEndpoint::CachingEndpoint(std::shared_ptr<Endpoint> inner, std::string dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::io, "cannot create cache directory " + dir_ + ": " + ec.message());
}

ChatResponse CachingEndpoint::complete(const ChatRequest& req) {
  const auto key = cache_key(req);
  const auto path = fs::path(dir_) / (key + ".json");
  if (std::ifstream in(path); in) {
    try {
      const auto j = json::parse(in).at("response");
      ChatResponse r{j.at("text"), j.at("prompt_tokens"), j.at("completion_tokens"), j.at("latency_ms"),
                     j.at("endpoint")};
      ++hits_;
      return r;
    } catch (const json::exception&) {
      // Corrupt entry: fall through and overwrite.
    }
  }
  ++misses_;
  auto r = inner_->complete(req);
  const json entry = {{"key", key},
                      {"request", json::parse(canonical_json(req))},
                      {"response",
                       {{"text", r.text},
                        {"prompt_tokens", r.prompt_tokens},
                        {"completion_tokens", r.completion_tokens},
                        {"latency_ms", r.latency_ms},
                        {"endpoint", r.endpoint}}}};
  std::ostringstream tag;
  tag << std::this_thread::get_id();
  const auto tmp = fs::path(dir_) / (key + ".tmp." + tag.str());
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write cache entry " + tmp.string());
    out << entry.dump(2) << '\n';
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::io, "cannot commit cache entry " + path.string() + ": " + ec.message());
  return r;
}

ScriptedOracle::ScriptedOracle(std::string model, int parallelism)
    : model_(std::move(model)), parallelism_(parallelism) {}

void ScriptedOracle::add_rule(Rule rule) {
  if (rule.replies.empty() && !rule.responder)
    fail(ErrorCode::invalid_argument, "scripted rule needs replies or a responder");
  Compiled c{std::move(rule), std::nullopt, 0};
  if (!c.rule.regex.empty()) {
    try {
      c.re.emplace(c.rule.regex, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      fail(ErrorCode::parse, "bad scripted regex '" + c.rule.regex + "': " + e.what());
    }
  }
  std::lock_guard lock(mu_);
  rules_.push_back(std::move(c));
}

std::shared_ptr<ScriptedOracle> ScriptedOracle::from_json(const json& j) {
  if (!j.is_object() || !j.contains("rules") || !j.at("rules").is_array() || j.at("rules").empty())
    fail(ErrorCode::schema, "transcript needs a non-empty 'rules' array");
  auto oracle = std::make_shared<ScriptedOracle>(j.value("model", std::string("scripted")), j.value("parallelism", 8));
  for (const auto& r : j.at("rules")) {
    Rule rule;
    try {
      if (r.contains("match")) {
        const auto& m = r.at("match");
        rule.contains = m.is_string() ? std::vector<std::string>{m.get<std::string>()} : m.get<std::vector<std::string>>();
      }
      rule.regex = r.value("regex", std::string());
      rule.replies = r.at("replies").get<std::vector<std::string>>();
      rule.repeat = r.value("repeat", false);
    } catch (const json::exception& e) {
      fail(ErrorCode::schema, std::string("transcript rule: ") + e.what());
    }
    oracle->add_rule(std::move(rule));
  }
  return oracle;
}

std::shared_ptr<ScriptedOracle> ScriptedOracle::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open transcript " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, path + ": " + e.what());
  }
}

ChatResponse ScriptedOracle::complete(const ChatRequest& req) {
  ++calls_;
  const auto text = joined_contents(req);
  std::optional<std::string> reply;
  bool matched_exhausted = false;
  {
    std::lock_guard lock(mu_);
    for (auto& c : rules_) {
      bool ok = true;
      for (const auto& s : c.rule.contains)
        if (text.find(s) == std::string::npos) ok = false;
      if (ok && c.re && !std::regex_search(text, *c.re)) ok = false;
      if (!ok) continue;
      if (c.rule.responder) {
        reply = c.rule.responder(req);
        if (reply) break;
        continue;
      }
      if (c.used < c.rule.replies.size()) {
        reply = c.rule.replies[c.used++];
        break;
      }
      if (c.rule.repeat) {
        reply = c.rule.replies.back();
        break;
      }
      matched_exhausted = true;
    }
  }
  if (!reply) {
    if (matched_exhausted) fail(ErrorCode::exhausted, "scripted replies exhausted for request: " + excerpt(text));
    fail(ErrorCode::unscripted, "unscripted request: " + excerpt(text));
  }
  ChatResponse r;
  r.text = *reply;
  r.prompt_tokens = count_words(text);
  r.completion_tokens = count_words(r.text);
  r.endpoint = "scripted";
  return r;
}

std::shared_ptr<Endpoint> open_endpoint(const EndpointConfig& config, const std::string& cache_dir) {
  std::shared_ptr<Endpoint> ep = std::make_shared<HttpEndpoint>(config);
  if (!cache_dir.empty()) ep = std::make_shared<CachingEndpoint>(ep, cache_dir);
  return ep;
}

}  // namespace dualsys
