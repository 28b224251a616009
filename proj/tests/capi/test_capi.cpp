#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "dualsys/dualsys.h"

#include "support/paths.hpp"

namespace {

int failures = 0;

#define EXPECT(cond)                                                        \
  do {                                                                      \
    if (!(cond)) {                                                          \
      std::fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                           \
    }                                                                       \
  } while (0)

#define EXPECT_OK(call)                                                                          \
  do {                                                                                           \
    dualsys_status st_ = (call);                                                                 \
    if (st_ != DUALSYS_OK) {                                                                     \
      std::fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call,                  \
                   dualsys_status_name(st_), dualsys_last_error());                              \
      ++failures;                                                                                \
    }                                                                                            \
  } while (0)

std::string take(char* s) {
  std::string out = s ? s : "";
  dualsys_string_free(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void status_names() {
  EXPECT(std::strcmp(dualsys_status_name(DUALSYS_OK), "ok") == 0);
  EXPECT(std::strcmp(dualsys_status_name(DUALSYS_E_IO), "io") == 0);
  EXPECT(std::strcmp(dualsys_status_name(DUALSYS_E_EMPTY), "empty_selection") == 0);
  EXPECT(std::strlen(dualsys_version()) > 0);
}

void errors_are_reported() {
  dualsys_dataset* ds = nullptr;
  EXPECT(dualsys_dataset_load("/nonexistent/x.jsonl", nullptr, &ds) == DUALSYS_E_IO);
  EXPECT(ds == nullptr);
  EXPECT(std::strlen(dualsys_last_error()) > 0);
  EXPECT(dualsys_dataset_load(nullptr, nullptr, &ds) == DUALSYS_E_INVALID_ARGUMENT);
  EXPECT(dualsys_gen_raven("no_such_config", 3, 1, DUALSYS_FORMAT_MCQ, &ds) != DUALSYS_OK);
  double adv = 0;
  EXPECT(dualsys_system2_advantage(1, 0, &adv) == DUALSYS_E_INVALID_ARGUMENT);
  EXPECT_OK(dualsys_system2_advantage(59.13, 55.70, &adv));
  EXPECT(adv > 6.15 && adv < 6.17);
  EXPECT(std::strlen(dualsys_last_error()) == 0);
  size_t n = 0;
  EXPECT(dualsys_endpoint_table_check(R"({"endpoints":{"a":{"base_url":"u","model":"m","api_key":"x"}}})", &n) ==
         DUALSYS_E_SCHEMA);
  EXPECT_OK(dualsys_endpoint_table_check(R"({"endpoints":{"a":{"base_url":"https://h","model":"m"}}})", &n));
  EXPECT(n == 1);
  dualsys_run_options o;
  dualsys_run_options_init(&o);
  o.pipeline = "selection";
  o.k = 11;
  EXPECT(dualsys_run_options_check(&o) == DUALSYS_E_INVALID_ARGUMENT);
  o.k = 3;
  EXPECT_OK(dualsys_run_options_check(&o));
  o.pipeline = "nope";
  EXPECT(dualsys_run_options_check(&o) != DUALSYS_OK);
}

void generators_round_trip() {
  testpaths::TempDir dir("capi");
  const char* data = DUALSYS_TEST_DATA_DIR;
  struct {
    const char* kind;
    dualsys_status st;
    dualsys_dataset* ds;
  } sets[3] = {{"raven", DUALSYS_OK, nullptr}, {"salt", DUALSYS_OK, nullptr}, {"listfn", DUALSYS_OK, nullptr}};
  sets[0].st = dualsys_gen_raven(nullptr, 14, 3, DUALSYS_FORMAT_MCQ, &sets[0].ds);
  sets[1].st = dualsys_gen_salt(data, 12, 3, DUALSYS_FORMAT_FTG, &sets[1].ds);
  sets[2].st = dualsys_gen_listfn(data, 10, 4, 3, DUALSYS_FORMAT_MCQ, &sets[2].ds);
  for (auto& s : sets) {
    EXPECT(s.st == DUALSYS_OK);
    if (!s.ds) continue;
    size_t invalid = 99;
    char* report = nullptr;
    EXPECT_OK(dualsys_dataset_validate(s.ds, &invalid, &report));
    EXPECT(invalid == 0);
    take(report);
    const auto path = dir.file(std::string(s.kind) + ".jsonl");
    EXPECT_OK(dualsys_dataset_save(s.ds, path.c_str()));
    dualsys_dataset* back = nullptr;
    EXPECT_OK(dualsys_dataset_load(path.c_str(), s.kind, &back));
    EXPECT(dualsys_dataset_size(back) == dualsys_dataset_size(s.ds));
    char *a = nullptr, *b = nullptr;
    EXPECT_OK(dualsys_dataset_instance_json(s.ds, 0, &a));
    EXPECT_OK(dualsys_dataset_instance_json(back, 0, &b));
    EXPECT(take(a) == take(b));
    EXPECT(dualsys_dataset_instance_json(back, 1000, &a) == DUALSYS_E_INVALID_ARGUMENT);
    dualsys_dataset_free(back);
  }
  dualsys_dataset* wrong = nullptr;
  EXPECT(dualsys_dataset_load(dir.file("salt.jsonl").c_str(), "raven", &wrong) == DUALSYS_E_SCHEMA);
  EXPECT(dualsys_dataset_to_ftg(sets[0].ds) == DUALSYS_OK);
  EXPECT_OK(dualsys_dataset_to_ftg(sets[2].ds));
  for (auto& s : sets) dualsys_dataset_free(s.ds);
}

void ingest_run_report() {
  testpaths::TempDir dir("capi-run");
  dualsys_dataset* ds = nullptr;
  EXPECT_OK(dualsys_ingest("ekar", testpaths::fixture("ekar_sample.json").c_str(), DUALSYS_FORMAT_MCQ, &ds));
  if (!ds) return;
  EXPECT(dualsys_dataset_size(ds) == 2);
  dualsys_endpoint* ep = nullptr;
  EXPECT_OK(dualsys_endpoint_scripted(testpaths::fixture("ekar_transcript.json").c_str(), nullptr, &ep));
  dualsys_run_options o;
  dualsys_run_options_init(&o);
  o.pipeline = "induction";
  o.seed = 5;
  o.timestamp = "2026-01-01T00:00:00Z";
  dualsys_records* recs = nullptr;
  EXPECT(dualsys_run(ds, ep, &o, &recs) == DUALSYS_E_INVALID_ARGUMENT);  // unlabeled difficulty
  EXPECT_OK(dualsys_annotate(ds, testpaths::fixture("ekar_vectors.txt").c_str(), "ekar"));
  EXPECT_OK(dualsys_run(ds, ep, &o, &recs));
  if (recs) {
    EXPECT(dualsys_records_size(recs) == 2);
    size_t correct = 0;
    EXPECT_OK(dualsys_records_score(recs, &correct));
    EXPECT(correct == 1);
    char* j = nullptr;
    EXPECT_OK(dualsys_records_record_json(recs, 0, &j));
    const auto line = take(j);
    EXPECT(line.find("\"timestamp\":\"2026-01-01T00:00:00Z\"") != std::string::npos);
    EXPECT(line.find("\"model\":\"scripted-ekar\"") != std::string::npos);
    const auto path = dir.file("runs.jsonl");
    size_t written = 0;
    EXPECT_OK(dualsys_records_append(recs, path.c_str(), &written));
    EXPECT(written == 2);
    dualsys_records* back = nullptr;
    EXPECT_OK(dualsys_records_load(path.c_str(), &back));
    EXPECT(dualsys_records_size(back) == 2);
    char* rep = nullptr;
    EXPECT_OK(dualsys_report(back, "csv", "completion", &rep));
    const auto csv = take(rep);
    EXPECT(csv.find("modality,induction,textual,50.00,2") != std::string::npos);
    EXPECT(dualsys_report(back, "xml", nullptr, &rep) == DUALSYS_E_INVALID_ARGUMENT);
    EXPECT_OK(dualsys_report(back, "text", nullptr, &rep));
    EXPECT(take(rep).find("induction") != std::string::npos);
    dualsys_records_free(back);
    dualsys_records_free(recs);
  }
  dualsys_endpoint_free(ep);
  dualsys_dataset_free(ds);
}

}  // namespace

int main() {
  status_names();
  errors_are_reported();
  generators_round_trip();
  ingest_run_report();
  std::printf("capi: %d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
