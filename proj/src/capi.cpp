#include "dualsys/dualsys.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "dualsys/dataset_io.hpp"
#include "dualsys/difficulty.hpp"
#include "dualsys/error.hpp"
#include "dualsys/gateway.hpp"
#include "dualsys/listfn.hpp"
#include "dualsys/pipeline.hpp"
#include "dualsys/raven.hpp"
#include "dualsys/salt.hpp"
#include "dualsys/scoring.hpp"

#ifndef DUALSYS_DEFAULT_DATA_DIR
#define DUALSYS_DEFAULT_DATA_DIR "data"
#endif

struct dualsys_dataset {
  std::vector<dualsys::TaskInstance> items;
};

struct dualsys_endpoint {
  std::shared_ptr<dualsys::Endpoint> ep;
};

struct dualsys_records {
  std::vector<dualsys::RunRecord> items;
};

namespace {

thread_local std::string g_last_error;

using dualsys::ErrorCode;
using dualsys::fail;

dualsys_status to_status(ErrorCode c) { return static_cast<dualsys_status>(static_cast<int>(c) + 1); }

template <typename F>
dualsys_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return DUALSYS_OK;
  } catch (const dualsys::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return DUALSYS_E_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DUALSYS_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DUALSYS_E_INTERNAL;
  }
}

template <typename T>
T* need(T* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " is NULL");
  return p;
}

std::string str(const char* s, const char* what) { return need(s, what); }

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string data_dir(const char* override_dir) {
  if (override_dir && *override_dir) return override_dir;
  if (const char* env = std::getenv("DUALSYS_DATA_DIR"); env && *env) return env;
  return DUALSYS_DEFAULT_DATA_DIR;
}

dualsys::TaskFormat to_format(dualsys_format f) {
  if (f == DUALSYS_FORMAT_MCQ) return dualsys::TaskFormat::mcq;
  if (f == DUALSYS_FORMAT_FTG) return dualsys::TaskFormat::ftg;
  fail(ErrorCode::invalid_argument, "unknown format value");
}

dualsys::PipelineSpec to_spec(const dualsys_run_options& o) {
  dualsys::PipelineSpec s;
  s.kind = dualsys::parse_pipeline_kind(o.pipeline ? o.pipeline : "induction");
  s.k = o.k;
  s.rounds = o.rounds;
  s.budget = dualsys::parse_budget(o.budget ? o.budget : "low");
  s.dummy_tokens = o.dummy_tokens;
  s.check();
  return s;
}

}  // namespace

extern "C" {

const char* dualsys_last_error(void) { return g_last_error.c_str(); }

const char* dualsys_status_name(dualsys_status s) {
  static const char* const names[] = {"ok",        "invalid_argument", "io",         "parse",      "schema",
                                      "infeasible", "transport",       "auth",       "rate_limit", "unscripted",
                                      "exhausted",  "empty_selection", "internal"};
  const auto i = static_cast<int>(s);
  return i >= 0 && i <= DUALSYS_E_INTERNAL ? names[i] : "unknown";
}

const char* dualsys_version(void) { return "1.0.0"; }

void dualsys_string_free(char* s) { std::free(s); }

dualsys_status dualsys_dataset_load(const char* path, const char* kind, dualsys_dataset** out) {
  return guard([&] {
    need(out, "out");
    std::optional<dualsys::DatasetKind> k;
    if (kind && *kind) k = dualsys::parse_dataset(kind);
    auto ds = std::make_unique<dualsys_dataset>();
    ds->items = dualsys::load_dataset(str(path, "path"), k);
    *out = ds.release();
  });
}

dualsys_status dualsys_dataset_save(const dualsys_dataset* ds, const char* path) {
  return guard([&] { dualsys::save_dataset(need(ds, "dataset")->items, str(path, "path")); });
}

size_t dualsys_dataset_size(const dualsys_dataset* ds) { return ds ? ds->items.size() : 0; }

dualsys_status dualsys_dataset_instance_json(const dualsys_dataset* ds, size_t i, char** out) {
  return guard([&] {
    need(out, "out");
    if (i >= need(ds, "dataset")->items.size()) fail(ErrorCode::invalid_argument, "index out of range");
    *out = dup(dualsys::to_json(ds->items[i]).dump());
  });
}

dualsys_status dualsys_dataset_validate(const dualsys_dataset* ds, size_t* invalid, char** report) {
  return guard([&] {
    need(ds, "dataset");
    std::optional<dualsys::listfn::Registry> registry;
    std::optional<dualsys::salt::Lexicon> lexicon;
    std::string text;
    std::size_t bad = 0;
    for (const auto& inst : ds->items) {
      std::vector<std::string> problems;
      dualsys::DemoOracle oracle;
      if (inst.dataset == dualsys::DatasetKind::listfn) {
        if (!registry) registry = dualsys::listfn::Registry::load(data_dir(nullptr) + "/listfn_registry.tsv");
        oracle = dualsys::listfn::make_oracle(*registry);
      }
      for (auto v : dualsys::validate_instance(inst, oracle)) problems.emplace_back(dualsys::to_string(v));
      if (inst.dataset == dualsys::DatasetKind::salt) {
        if (!lexicon) lexicon = dualsys::salt::Lexicon::load(data_dir(nullptr) + "/english_lexicon.txt");
        for (auto& p : dualsys::salt::audit_instance(inst, *lexicon)) problems.push_back(std::move(p));
      }
      if (problems.empty()) continue;
      ++bad;
      text += inst.id + ":";
      for (const auto& p : problems) text += " " + p + ";";
      text += "\n";
    }
    if (invalid) *invalid = bad;
    if (report) *report = dup(text);
  });
}

dualsys_status dualsys_dataset_to_ftg(dualsys_dataset* ds) {
  return guard([&] {
    auto items = need(ds, "dataset")->items;
    for (auto& t : items)
      if (t.format == dualsys::TaskFormat::mcq) t = dualsys::project_ftg(t);
    ds->items = std::move(items);
  });
}

void dualsys_dataset_free(dualsys_dataset* ds) { delete ds; }

dualsys_status dualsys_gen_raven(const char* config, size_t count, uint64_t seed, dualsys_format format,
                                 dualsys_dataset** out) {
  return guard([&] {
    need(out, "out");
    std::optional<dualsys::raven::Configuration> c;
    if (config && *config) c = dualsys::raven::parse_configuration(config);
    auto ds = std::make_unique<dualsys_dataset>();
    ds->items = dualsys::raven::generate_batch(c, count, seed);
    if (to_format(format) == dualsys::TaskFormat::ftg)
      for (auto& t : ds->items) t = dualsys::project_ftg(t);
    *out = ds.release();
  });
}

dualsys_status dualsys_gen_salt(const char* dir, size_t count, uint64_t seed, dualsys_format format,
                                dualsys_dataset** out) {
  return guard([&] {
    need(out, "out");
    const auto root = data_dir(dir);
    const auto catalog = dualsys::salt::Catalog::load(root + "/salt_catalog.json");
    const auto lexicon = dualsys::salt::Lexicon::load(root + "/english_lexicon.txt");
    auto ds = std::make_unique<dualsys_dataset>();
    ds->items = dualsys::salt::generate_batch(catalog, lexicon, count, seed, to_format(format));
    *out = ds.release();
  });
}

dualsys_status dualsys_gen_listfn(const char* dir, size_t count, size_t shots, uint64_t seed, dualsys_format format,
                                  dualsys_dataset** out) {
  return guard([&] {
    need(out, "out");
    const auto registry = dualsys::listfn::Registry::load(data_dir(dir) + "/listfn_registry.tsv");
    auto ds = std::make_unique<dualsys_dataset>();
    ds->items = dualsys::listfn::generate_batch(registry, count, shots, seed, to_format(format));
    *out = ds.release();
  });
}

dualsys_status dualsys_ingest(const char* kind, const char* path, dualsys_format format, dualsys_dataset** out) {
  return guard([&] {
    need(out, "out");
    const auto k = dualsys::parse_dataset(str(kind, "kind"));
    auto ds = std::make_unique<dualsys_dataset>();
    if (k == dualsys::DatasetKind::ekar) ds->items = dualsys::ingest_ekar(str(path, "path"), to_format(format));
    else if (k == dualsys::DatasetKind::vasr) {
      if (to_format(format) != dualsys::TaskFormat::mcq)
        fail(ErrorCode::invalid_argument, "visual instances are evaluated only as multiple choice");
      ds->items = dualsys::ingest_vasr(str(path, "path"));
    } else fail(ErrorCode::invalid_argument, "ingest supports ekar and vasr");
    *out = ds.release();
  });
}

dualsys_status dualsys_annotate(dualsys_dataset* ds, const char* vectors_path, const char* kind) {
  return guard([&] {
    need(ds, "dataset");
    const auto store = dualsys::VectorStore::load(str(vectors_path, "vectors_path"));
    auto items = ds->items;
    if (kind && *kind) {
      dualsys::annotate(items, store, dualsys::thresholds_for(dualsys::parse_dataset(kind)));
    } else {
      for (auto& t : items) {
        std::vector<dualsys::TaskInstance> one{t};
        dualsys::annotate(one, store, dualsys::thresholds_for(t.dataset));
        t = std::move(one.front());
      }
    }
    ds->items = std::move(items);
  });
}

dualsys_status dualsys_endpoint_open(const char* table_json, const char* name, const char* cache_dir,
                                     dualsys_endpoint** out) {
  return guard([&] {
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(str(table_json, "table_json"));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::parse, std::string("endpoint table: ") + e.what());
    }
    const auto table = dualsys::parse_endpoint_table(j);
    const auto it = table.find(str(name, "name"));
    if (it == table.end()) fail(ErrorCode::invalid_argument, "no endpoint named '" + std::string(name) + "'");
    auto ep = std::make_unique<dualsys_endpoint>();
    ep->ep = dualsys::open_endpoint(it->second, cache_dir ? cache_dir : "");
    *out = ep.release();
  });
}

dualsys_status dualsys_endpoint_scripted(const char* transcript_path, const char* cache_dir, dualsys_endpoint** out) {
  return guard([&] {
    need(out, "out");
    auto ep = std::make_unique<dualsys_endpoint>();
    ep->ep = dualsys::ScriptedOracle::load(str(transcript_path, "transcript_path"));
    if (cache_dir && *cache_dir) ep->ep = std::make_shared<dualsys::CachingEndpoint>(ep->ep, cache_dir);
    *out = ep.release();
  });
}

dualsys_status dualsys_endpoint_table_check(const char* table_json, size_t* count) {
  return guard([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(str(table_json, "table_json"));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::parse, std::string("endpoint table: ") + e.what());
    }
    const auto table = dualsys::parse_endpoint_table(j);
    if (count) *count = table.size();
  });
}

void dualsys_endpoint_free(dualsys_endpoint* ep) { delete ep; }

void dualsys_run_options_init(dualsys_run_options* o) {
  if (!o) return;
  *o = dualsys_run_options{};
  o->pipeline = "induction";
  o->k = 1;
  o->rounds = 0;
  o->budget = "low";
  o->parallelism = 1;
  o->max_output_tokens = 2048;
}

dualsys_status dualsys_run_options_check(const dualsys_run_options* o) {
  return guard([&] {
    to_spec(*need(o, "options"));
    if (o->parallelism < 1) fail(ErrorCode::invalid_argument, "parallelism must be >= 1");
  });
}

dualsys_status dualsys_run(const dualsys_dataset* ds, dualsys_endpoint* ep, const dualsys_run_options* o,
                           dualsys_records** out) {
  return guard([&] {
    need(out, "out");
    need(ds, "dataset");
    need(ep, "endpoint");
    need(o, "options");
    dualsys::BatchOptions b;
    b.run.spec = to_spec(*o);
    b.run.seed = o->seed;
    if (o->max_output_tokens > 0) b.run.max_output_tokens = o->max_output_tokens;
    b.parallelism = o->parallelism;
    b.timestamp = o->timestamp ? o->timestamp : "";
    auto recs = std::make_unique<dualsys_records>();
    recs->items = dualsys::run_batch(ds->items, *ep->ep, b);
    *out = recs.release();
  });
}

dualsys_status dualsys_records_load(const char* path, dualsys_records** out) {
  return guard([&] {
    need(out, "out");
    auto recs = std::make_unique<dualsys_records>();
    recs->items = dualsys::load_run_records(str(path, "path"));
    *out = recs.release();
  });
}

dualsys_status dualsys_records_append(const dualsys_records* recs, const char* path, size_t* written) {
  return guard([&] {
    const auto n = dualsys::write_run_records(need(recs, "records")->items, str(path, "path"));
    if (written) *written = n;
  });
}

dualsys_status dualsys_records_score(dualsys_records* recs, size_t* correct) {
  return guard([&] {
    std::size_t ok = 0;
    for (auto& r : need(recs, "records")->items) ok += dualsys::score_record(r) ? 1 : 0;
    if (correct) *correct = ok;
  });
}

size_t dualsys_records_size(const dualsys_records* recs) { return recs ? recs->items.size() : 0; }

dualsys_status dualsys_records_record_json(const dualsys_records* recs, size_t i, char** out) {
  return guard([&] {
    need(out, "out");
    if (i >= need(recs, "records")->items.size()) fail(ErrorCode::invalid_argument, "index out of range");
    *out = dup(dualsys::to_json(recs->items[i]).dump());
  });
}

void dualsys_records_free(dualsys_records* recs) { delete recs; }

dualsys_status dualsys_report(const dualsys_records* recs, const char* format, const char* token_measure,
                              char** out) {
  return guard([&] {
    need(out, "out");
    dualsys::ReportOptions opt;
    if (token_measure && *token_measure) opt.tokens = dualsys::parse_token_measure(token_measure);
    const auto rep = dualsys::build_report(need(recs, "records")->items, opt);
    const std::string f = format ? format : "text";
    if (f == "csv") *out = dup(rep.to_csv());
    else if (f == "text") *out = dup(rep.to_text());
    else fail(ErrorCode::invalid_argument, "report format must be csv or text");
  });
}

dualsys_status dualsys_decoupled(const dualsys_records* abduction, const dualsys_records* deduction,
                                 const char* dir, uint64_t seed, double* abduction_acc, double* deduction_acc) {
  return guard([&] {
    const auto registry = dualsys::listfn::Registry::load(data_dir(dir) + "/listfn_registry.tsv");
    const auto d = dualsys::abduction_deduction_decoupled(need(abduction, "abduction")->items,
                                                          need(deduction, "deduction")->items, registry, seed);
    if (abduction_acc) *abduction_acc = d.abduction;
    if (deduction_acc) *deduction_acc = d.deduction;
  });
}

dualsys_status dualsys_system2_advantage(double acc_sys2, double acc_induction, double* out) {
  return guard([&] { *need(out, "out") = dualsys::system2_advantage(acc_sys2, acc_induction); });
}

}  // extern "C"
