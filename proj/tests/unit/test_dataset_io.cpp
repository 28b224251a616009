#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <functional>

#include "dualsys/dataset_io.hpp"
#include "dualsys/error.hpp"
#include "dualsys/raven.hpp"
#include "support/fixtures.hpp"
#include "support/paths.hpp"

using namespace dualsys;

namespace {

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

}  // namespace

TEST_SUITE("dataset_io") {
  TEST_CASE("instance json round trip") {
    for (const auto& inst : raven::generate_batch(std::nullopt, 7, 1)) CHECK(instance_from_json(to_json(inst)) == inst);
    for (const auto& inst : fixtures::listfn_set(5, 1)) CHECK(instance_from_json(to_json(inst)) == inst);
    auto e = fixtures::ekar_instance();
    e.difficulty.reset();
    const auto j = to_json(e);
    CHECK(j["difficulty"].is_null());
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(instance_from_json(j) == e);
  }

  TEST_CASE("schema errors") {
    auto j = to_json(fixtures::ekar_instance());
    j.erase("id");
    CHECK(code_of([&] { instance_from_json(j); }) == ErrorCode::schema);
    j = to_json(fixtures::ekar_instance());
    j["modality"] = "olfactory";
    CHECK(code_of([&] { instance_from_json(j); }) == ErrorCode::schema);
    j = to_json(fixtures::ekar_instance());
    j["body"]["A"] = 4;
    CHECK(code_of([&] { instance_from_json(j); }) == ErrorCode::schema);
  }

  TEST_CASE("load names the failing line") {
    testpaths::TempDir dir("io");
    const auto good = to_json(fixtures::ekar_instance()).dump();
    write(dir.file("a.jsonl"), good + "\n{broken\n");
    try {
      load_dataset(dir.file("a.jsonl"));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    write(dir.file("b.jsonl"), good + "\n");
    CHECK(code_of([&] { load_dataset(dir.file("b.jsonl"), DatasetKind::raven); }) == ErrorCode::schema);
    auto v = to_json(fixtures::ekar_instance());
    v["schema_version"] = 99;
    write(dir.file("c.jsonl"), v.dump() + "\n");
    CHECK(code_of([&] { load_dataset(dir.file("c.jsonl")); }) == ErrorCode::schema);
    CHECK(code_of([&] { load_dataset(dir.file("missing.jsonl")); }) == ErrorCode::io);
  }

  TEST_CASE("save then load") {
    testpaths::TempDir dir("io");
    const auto set = fixtures::listfn_set(6, 2);
    save_dataset(set, dir.file("s.jsonl"));
    CHECK(load_dataset(dir.file("s.jsonl"), DatasetKind::listfn) == set);
    save_dataset({set[0]}, dir.file("s.jsonl"));
    CHECK(load_dataset(dir.file("s.jsonl")).size() == 1);
  }

  TEST_CASE("mcq and ftg projections") {
    const auto base = fixtures::ekar_instance();
    const auto m = project_mcq(base, {"left", "over", "above"}, 4);
    CHECK(m.format == TaskFormat::mcq);
    CHECK(m.candidates().size() == 4);
    CHECK(std::count(m.candidates().begin(), m.candidates().end(), "down") == 1);
    CHECK(project_mcq(base, {"left", "over", "above"}, 4) == m);
    CHECK(code_of([&] { project_mcq(base, {"down"}, 1); }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { project_mcq(base, {"left", "left"}, 1); }) == ErrorCode::invalid_argument);
    const auto f = project_ftg(m);
    CHECK(f.format == TaskFormat::ftg);
    CHECK(f.candidates().empty());
    auto vis = ingest_vasr(testpaths::fixture("vasr_sample.jsonl")).front();
    CHECK(code_of([&] { project_ftg(vis); }) == ErrorCode::invalid_argument);
  }

  TEST_CASE("run records round trip and append") {
    testpaths::TempDir dir("io");
    RunRecord r;
    r.instance = fixtures::ekar_instance();
    r.pipeline.kind = PipelineKind::selection;
    r.pipeline.k = 3;
    r.result.final_answer = "down";
    r.result.answered = true;
    r.result.calls = 2;
    r.result.trail.push_back({"opposites", "", HypothesisKind::free_text_pattern, "abduction"});
    r.result.ledger.append({0, 10, 4, "abduction"});
    r.result.ledger.append({1, 12, 3, "deduction"});
    r.result.flags = {"x"};
    r.model = "m";
    r.correct = true;
    r.timestamp = "t";
    const auto j = to_json(r);
    CHECK(j["pipeline"]["label"] == "selection(k=3)");
    CHECK(j["result"]["completion_tokens"] == 7);
    CHECK(record_from_json(j) == r);
    CHECK(write_run_records({r, r}, dir.file("r.jsonl")) == 2);
    CHECK(write_run_records({r}, dir.file("r.jsonl")) == 1);
    CHECK(load_run_records(dir.file("r.jsonl")).size() == 3);
  }

  TEST_CASE("e-kar adapter") {
    const auto mcq = ingest_ekar(testpaths::fixture("ekar_sample.json"));
    REQUIRE(mcq.size() == 2);
    const auto& a = std::get<AnalogyInstance>(mcq[0].body);
    CHECK(mcq[0].id == "ekar-0001");
    CHECK(a.a == "sun");
    CHECK(a.a_prime == "day");
    CHECK(a.b == "moon");
    CHECK(a.gold == "night");
    CHECK(a.candidates == std::vector<std::string>{"night", "sky", "cloud", "leaf"});
    CHECK(mcq[0].meta["explanation"] == "the first shines during the second");
    CHECK(std::get<AnalogyInstance>(mcq[1].body).gold == "kitchen");
    const auto ftg = ingest_ekar(testpaths::fixture("ekar_sample.json"), TaskFormat::ftg);
    CHECK(ftg[0].candidates().empty());
    for (const auto& t : mcq) CHECK(validate_instance(t).empty());
  }

  TEST_CASE("vasr adapter") {
    const auto v = ingest_vasr(testpaths::fixture("vasr_sample.jsonl"));
    REQUIRE(v.size() == 2);
    CHECK(v[0].modality == Modality::visual);
    CHECK(v[0].gold() == "img/d1.jpg");
    CHECK(v[1].candidates().size() == 4);
    testpaths::TempDir dir("io");
    write(dir.file("bad.jsonl"),
          R"({"A_img":"a","B_img":"b","C_img":"c","D_img":"d","candidates":["x","d"],"label":0})"
          "\n");
    CHECK(code_of([&] { ingest_vasr(dir.file("bad.jsonl")); }) == ErrorCode::schema);
  }
}
