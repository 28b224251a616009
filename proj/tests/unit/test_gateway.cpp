#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dualsys/error.hpp"
#include "dualsys/gateway.hpp"
#include "support/paths.hpp"

using namespace dualsys;
using nlohmann::json;

namespace {

ChatRequest req(const std::string& content, std::optional<std::uint64_t> seed = std::nullopt) {
  ChatRequest r;
  r.model = "m";
  r.messages = {{"system", "sys"}, {"user", content}};
  r.seed = seed;
  return r;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

struct LocalServer {
  httplib::Server srv;
  std::thread th;
  int port = 0;
  std::atomic<int> hits{0};
  std::string last_auth;
  std::string last_body;

  LocalServer() {
    port = srv.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~LocalServer() {
    srv.stop();
    th.join();
  }
  EndpointConfig config(const std::string& prefix = "/v1") const {
    EndpointConfig c;
    c.name = "local";
    c.base_url = "http://127.0.0.1:" + std::to_string(port) + prefix;
    c.model = "local-model";
    c.timeout_s = 5;
    c.retry.max_retries = 2;
    c.retry.backoff_ms = 1;
    return c;
  }
};

const char* kOk = R"({"choices":[{"message":{"role":"assistant","content":"hello there"}}],
                      "usage":{"prompt_tokens":12,"completion_tokens":2}})";

}  // namespace

TEST_SUITE("gateway") {
  TEST_CASE("canonical json and cache keys") {
    const auto a = req("x", 7);
    CHECK(canonical_json(a) ==
          R"({"max_tokens":2048,"messages":[{"content":"sys","role":"system"},{"content":"x","role":"user"}],)"
          R"("model":"m","seed":7,"temperature":0.0})");
    CHECK(cache_key(a) == cache_key(req("x", 7)));
    CHECK(cache_key(a) != cache_key(req("x", 8)));
    CHECK(cache_key(a) != cache_key(req("x")));
    CHECK(cache_key(a).size() == 64);
    auto b = a;
    b.temperature = kSamplingTemperature;
    CHECK(cache_key(a) != cache_key(b));
  }

  TEST_CASE("word counts") {
    CHECK(count_words("") == 0);
    CHECK(count_words("  one\ttwo\nthree  ") == 3);
  }

  TEST_CASE("endpoint table") {
    const auto t = parse_endpoint_table(json::parse(
        R"({"endpoints":{"a":{"base_url":"https://x/v1","model":"m","api_key_env":"K","parallelism":2}}})"));
    REQUIRE(t.count("a"));
    CHECK(t.at("a").parallelism == 2);
    CHECK(t.at("a").retry.max_retries == 3);
    CHECK(code_of([] {
            parse_endpoint_table(json::parse(R"({"endpoints":{"a":{"base_url":"u","model":"m","api_key":"s"}}})"));
          }) == ErrorCode::schema);
    CHECK(code_of([] { parse_endpoint_table(json::parse(R"({"endpoints":{"a":{"model":"m"}}})")); }) ==
          ErrorCode::schema);
    CHECK(code_of([] { parse_endpoint_table(json::parse(R"({"x":1})")); }) == ErrorCode::schema);
    CHECK(code_of([] { load_endpoint_table("/nonexistent/table.json"); }) == ErrorCode::io);
  }

  TEST_CASE("http success carries usage and auth header") {
    LocalServer s;
    s.srv.Post("/v1/chat/completions", [&](const httplib::Request& rq, httplib::Response& rs) {
      ++s.hits;
      s.last_auth = rq.get_header_value("Authorization");
      s.last_body = rq.body;
      rs.set_content(kOk, "application/json");
    });
    ::setenv("DUALSYS_TEST_KEY", "sekrit", 1);
    auto cfg = s.config();
    cfg.api_key_env = "DUALSYS_TEST_KEY";
    HttpEndpoint ep(cfg);
    const auto r = ep.complete(req("hi"));
    CHECK(r.text == "hello there");
    CHECK(r.prompt_tokens == 12);
    CHECK(r.completion_tokens == 2);
    CHECK(r.endpoint == "local");
    CHECK(s.last_auth == "Bearer sekrit");
    const auto body = json::parse(s.last_body);
    CHECK_FALSE(body.contains("seed"));
    CHECK(body["messages"].size() == 2);
  }

  TEST_CASE("http error statuses") {
    LocalServer s;
    s.srv.Post("/v1/chat/completions", [&](const httplib::Request& rq, httplib::Response& rs) {
      const int n = ++s.hits;
      const auto content = json::parse(rq.body)["messages"][1]["content"].get<std::string>();
      if (content == "auth") rs.status = 401;
      else if (content == "busy") rs.status = 429;
      else if (content == "flaky" && n % 2 == 1) rs.status = 503;
      else if (content == "bad") rs.status = 400;
      else if (content == "garbage") rs.set_content("not json", "text/plain");
      else rs.set_content(kOk, "application/json");
    });
    HttpEndpoint ep(s.config());
    CHECK(code_of([&] { ep.complete(req("auth")); }) == ErrorCode::auth);
    s.hits = 0;
    CHECK(code_of([&] { ep.complete(req("busy")); }) == ErrorCode::rate_limit);
    CHECK(s.hits == 3);
    s.hits = 0;
    CHECK(ep.complete(req("flaky")).text == "hello there");
    CHECK(s.hits == 2);
    CHECK(code_of([&] { ep.complete(req("bad")); }) == ErrorCode::transport);
    CHECK(code_of([&] { ep.complete(req("garbage")); }) == ErrorCode::transport);
  }

  TEST_CASE("unreachable host and missing key") {
    EndpointConfig c;
    c.name = "dead";
    c.base_url = "http://127.0.0.1:1";
    c.model = "m";
    c.timeout_s = 1;
    c.retry.max_retries = 1;
    c.retry.backoff_ms = 1;
    HttpEndpoint ep(c);
    CHECK(code_of([&] { ep.complete(req("x")); }) == ErrorCode::transport);
    ::unsetenv("DUALSYS_TEST_MISSING");
    c.api_key_env = "DUALSYS_TEST_MISSING";
    CHECK(code_of([&] { HttpEndpoint e2(c); }) == ErrorCode::auth);
    c.base_url = "no-scheme";
    c.api_key_env.clear();
    CHECK(code_of([&] { HttpEndpoint e3(c); }) == ErrorCode::invalid_argument);
  }

  TEST_CASE("caching endpoint") {
    testpaths::TempDir dir("cache");
    auto inner = std::make_shared<ScriptedOracle>();
    ScriptedOracle::Rule rule;
    rule.contains = {"q"};
    rule.replies = {"one", "two"};
    inner->add_rule(rule);
    CachingEndpoint c(inner, dir.file("c"));
    CHECK(c.complete(req("q", 1)).text == "one");
    CHECK(c.complete(req("q", 1)).text == "one");
    CHECK(c.complete(req("q", 2)).text == "two");
    CHECK(c.hits() == 1);
    CHECK(c.misses() == 2);
    CHECK(inner->calls() == 2);
    CachingEndpoint again(inner, dir.file("c"));
    CHECK(again.complete(req("q", 2)).text == "two");
    CHECK(again.hits() == 1);
  }

  TEST_CASE("scripted oracle") {
    auto o = ScriptedOracle::from_json(json::parse(R"({"model":"s1","rules":[
      {"match":["alpha"],"replies":["a1","a2"]},
      {"match":"beta","replies":["b"],"repeat":true},
      {"regex":"gam+a","replies":["g"]}]})"));
    CHECK(o->model() == "s1");
    CHECK(o->complete(req("alpha")).text == "a1");
    CHECK(o->complete(req("alpha")).text == "a2");
    CHECK(code_of([&] { o->complete(req("alpha")); }) == ErrorCode::exhausted);
    CHECK(o->complete(req("beta")).text == "b");
    CHECK(o->complete(req("beta")).text == "b");
    CHECK(o->complete(req("gammma")).text == "g");
    CHECK(code_of([&] { o->complete(req("delta")); }) == ErrorCode::unscripted);
    const auto r = o->complete(req("beta two three"));
    CHECK(r.prompt_tokens == 4);
    CHECK(r.completion_tokens == 1);
    CHECK(code_of([] { ScriptedOracle::from_json(json::parse(R"({"rules":[]})")); }) == ErrorCode::schema);
    CHECK(code_of([] { ScriptedOracle::from_json(json::parse(R"({"rules":[{"regex":"(","replies":["x"]}]})")); }) ==
          ErrorCode::parse);
    CHECK(code_of([] { ScriptedOracle::load("/nonexistent.json"); }) == ErrorCode::io);
  }

  TEST_CASE("scripted replies are consumed once under concurrency") {
    ScriptedOracle o;
    ScriptedOracle::Rule rule;
    rule.contains = {"x"};
    for (int i = 0; i < 400; ++i) rule.replies.push_back(std::to_string(i));
    o.add_rule(rule);
    std::vector<std::vector<int>> seen(8);
    std::vector<std::thread> ts;
    for (int t = 0; t < 8; ++t)
      ts.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) seen[t].push_back(std::stoi(o.complete(req("x")).text));
      });
    for (auto& t : ts) t.join();
    std::vector<int> all;
    for (auto& v : seen) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 400; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
  }
}
