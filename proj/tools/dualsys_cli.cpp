#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "dualsys/dualsys.h"

namespace {

using nlohmann::json;

constexpr int kUsageExit = 2;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void usage(const std::string& msg) { throw Failure{kUsageExit, msg}; }

void check(dualsys_status s) {
  if (s == DUALSYS_OK) return;
  throw Failure{static_cast<int>(s) + 1,
                std::string("error[") + dualsys_status_name(s) + "]: " + dualsys_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
};
using Dataset = Handle<dualsys_dataset, dualsys_dataset_free>;
using Endpoint = Handle<dualsys_endpoint, dualsys_endpoint_free>;
using Records = Handle<dualsys_records, dualsys_records_free>;

std::string take(char* s) {
  std::string out = s ? s : "";
  dualsys_string_free(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{static_cast<int>(DUALSYS_E_IO) + 1, "error[io]: cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dualsys_format parse_format(const std::string& f) {
  if (f == "mcq") return DUALSYS_FORMAT_MCQ;
  if (f == "ftg") return DUALSYS_FORMAT_FTG;
  usage("--format must be mcq or ftg");
}

// Values from --config, overridden by explicit flags.
struct FileConfig {
  json j = json::object();
  std::string dir;

  void load(const std::string& path) {
    try {
      j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
      throw Failure{static_cast<int>(DUALSYS_E_PARSE) + 1, std::string("error[parse]: ") + path + ": " + e.what()};
    }
    if (!j.is_object()) throw Failure{static_cast<int>(DUALSYS_E_SCHEMA) + 1, "error[schema]: config must be an object"};
    const auto slash = path.find_last_of('/');
    dir = slash == std::string::npos ? "" : path.substr(0, slash + 1);
  }

  std::string resolve(const std::string& p) const {
    if (p.empty() || p.front() == '/' || dir.empty()) return p;
    return dir + p;
  }

  template <typename T>
  std::optional<T> get(const char* key) const {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    try {
      return j[key].get<T>();
    } catch (const json::exception&) {
      throw Failure{static_cast<int>(DUALSYS_E_SCHEMA) + 1, std::string("error[schema]: config field '") + key + "' has the wrong type"};
    }
  }
};

struct Common {
  std::string config_path;
  std::string data_dir;
  FileConfig file;

  const char* data_dir_arg() const { return data_dir.empty() ? nullptr : data_dir.c_str(); }
};

std::uint64_t need_seed(const CLI::Option* opt, std::uint64_t flag_value, const FileConfig& file) {
  if (opt->count() > 0) return flag_value;
  if (auto s = file.get<std::uint64_t>("seed")) return *s;
  usage("--seed is required");
}

void echo(const json& resolved) { std::cerr << "config: " << resolved.dump() << "\n"; }

void write_dataset(const Dataset& ds, const std::string& out) {
  if (out.empty() || out == "-") {
    const auto n = dualsys_dataset_size(ds.p);
    for (size_t i = 0; i < n; ++i) {
      char* line = nullptr;
      check(dualsys_dataset_instance_json(ds.p, i, &line));
      std::cout << take(line) << "\n";
    }
    return;
  }
  check(dualsys_dataset_save(ds.p, out.c_str()));
  std::cerr << "wrote " << dualsys_dataset_size(ds.p) << " instances to " << out << "\n";
}

std::string dataset_path(const std::string& name_or_path, const FileConfig& file) {
  if (file.j.contains("datasets") && file.j["datasets"].is_object() && file.j["datasets"].contains(name_or_path))
    return file.resolve(file.j["datasets"][name_or_path].get<std::string>());
  return name_or_path;
}

std::string endpoint_table(const FileConfig& file) {
  if (file.j.contains("endpoints")) return json{{"endpoints", file.j["endpoints"]}}.dump();
  if (auto p = file.get<std::string>("endpoint_table")) return slurp(file.resolve(*p));
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-system reasoning benchmark toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dualsys_version()));
  Common common;
  app.add_option("--config", common.config_path, "JSON config file");
  app.add_option("--data-dir", common.data_dir, "Directory with catalog, lexicon and registry files");

  std::uint64_t seed = 0;
  std::string out;
  std::string format = "mcq";
  std::size_t count = 0;

  auto* gen_raven = app.add_subcommand("gen-raven", "Generate visual matrix puzzles");
  std::string raven_config;
  gen_raven->add_option("--count", count, "Number of puzzles")->required();
  auto* raven_seed = gen_raven->add_option("--seed", seed, "Global seed");
  gen_raven->add_option("--configuration", raven_config, "Restrict to one configuration");
  gen_raven->add_option("--format", format, "mcq or ftg");
  gen_raven->add_option("--out", out, "Output JSONL (stdout if omitted)");

  auto* gen_salt = app.add_subcommand("gen-salt", "Generate artificial-language translation tasks");
  gen_salt->add_option("--count", count, "Number of tasks")->required();
  auto* salt_seed = gen_salt->add_option("--seed", seed, "Global seed");
  gen_salt->add_option("--format", format, "mcq or ftg");
  gen_salt->add_option("--out", out, "Output JSONL (stdout if omitted)");

  auto* gen_listfn = app.add_subcommand("gen-listfn", "Generate list-function tasks");
  std::size_t shots = 4;
  gen_listfn->add_option("--count", count, "Number of tasks")->required();
  gen_listfn->add_option("--shots", shots, "Demonstrations per task");
  auto* listfn_seed = gen_listfn->add_option("--seed", seed, "Global seed");
  gen_listfn->add_option("--format", format, "mcq or ftg");
  gen_listfn->add_option("--out", out, "Output JSONL (stdout if omitted)");

  auto* ingest = app.add_subcommand("ingest", "Convert an upstream E-KAR or VASR file");
  std::string kind, input;
  ingest->add_option("--kind", kind, "ekar or vasr")->required();
  ingest->add_option("--input", input, "Upstream file")->required();
  ingest->add_option("--format", format, "mcq or ftg");
  ingest->add_option("--out", out, "Output JSONL (stdout if omitted)");

  auto* annotate = app.add_subcommand("annotate", "Assign difficulty from an embedding vector file");
  std::string dataset, vectors;
  annotate->add_option("--dataset", dataset, "Dataset JSONL or config name")->required();
  annotate->add_option("--vectors", vectors, "Vector file")->required();
  annotate->add_option("--kind", kind, "Threshold set (ekar or vasr); default per instance");
  annotate->add_option("--out", out, "Output JSONL (stdout if omitted)");

  auto* validate = app.add_subcommand("validate", "Check every instance of a dataset");
  validate->add_option("--dataset", dataset, "Dataset JSONL or config name")->required();
  validate->add_option("--kind", kind, "Expected dataset kind");

  auto* run = app.add_subcommand("run", "Run a pipeline over a dataset");
  std::string pipeline, endpoint, budget, timestamp, cache_dir;
  int k = -1, rounds = -1, dummy = -1, parallelism = 0, max_tokens = 0;
  run->add_option("--dataset", dataset, "Dataset JSONL or config name")->required();
  run->add_option("--pipeline", pipeline, "induction|automatic|abd_ded|selection|refinement|adaptive|gold_deduction");
  run->add_option("--format", format, "mcq or ftg");
  run->add_option("--endpoint", endpoint, "Endpoint name or scripted:<transcript>")->required();
  auto* run_seed = run->add_option("--seed", seed, "Global seed");
  run->add_option("--out", out, "Records JSONL (appended)")->required();
  run->add_option("--k", k, "Candidates for selection");
  run->add_option("--rounds", rounds, "Maximum refinement rounds");
  run->add_option("--budget", budget, "low or high (adaptive)");
  run->add_option("--dummy-tokens", dummy, "Filler tokens in the reasoning field");
  run->add_option("--parallelism", parallelism, "Worker count");
  run->add_option("--timestamp", timestamp, "Timestamp stored in records");
  run->add_option("--cache-dir", cache_dir, "Response cache directory");
  run->add_option("--max-output-tokens", max_tokens, "Generation cap per call");

  auto* score = app.add_subcommand("score", "Re-score records");
  std::string records;
  score->add_option("--records", records, "Records JSONL")->required();
  score->add_option("--out", out, "Rescored records JSONL (stdout summary if omitted)");

  auto* report = app.add_subcommand("report", "Accuracy and token tables");
  std::string report_format = "text", tokens = "completion", abd_records, ded_records;
  report->add_option("--records", records, "Records JSONL");
  report->add_option("--format", report_format, "csv or text");
  report->add_option("--tokens", tokens, "completion|prompt|total");
  report->add_option("--abduction", abd_records, "abd_ded list-function records (decoupled table)");
  report->add_option("--deduction", ded_records, "gold_deduction list-function records (decoupled table)");
  auto* report_seed = report->add_option("--seed", seed, "Seed for held-out inputs (decoupled table)");

  auto* check_endpoints = app.add_subcommand("check-endpoints", "Validate the endpoint table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kUsageExit;
  }

  try {
    if (!common.config_path.empty()) common.file.load(common.config_path);
    const auto& file = common.file;
    if (common.data_dir.empty())
      if (auto d = file.get<std::string>("data_dir")) common.data_dir = file.resolve(*d);
    auto out_path = [&](const std::string& p) {
      if (p.empty() || p == "-" || p.front() == '/') return p;
      if (auto dir = file.get<std::string>("out_dir")) return *dir + "/" + p;
      return p;
    };

    if (gen_raven->parsed()) {
      const auto s = need_seed(raven_seed, seed, file);
      const auto f = parse_format(format);
      echo({{"command", "gen-raven"}, {"count", count}, {"seed", s}, {"format", format},
            {"configuration", raven_config.empty() ? json(nullptr) : json(raven_config)}});
      Dataset ds;
      check(dualsys_gen_raven(raven_config.empty() ? nullptr : raven_config.c_str(), count, s, f, ds.out()));
      write_dataset(ds, out_path(out));
    } else if (gen_salt->parsed()) {
      const auto s = need_seed(salt_seed, seed, file);
      const auto f = parse_format(format);
      echo({{"command", "gen-salt"}, {"count", count}, {"seed", s}, {"format", format}});
      Dataset ds;
      check(dualsys_gen_salt(common.data_dir_arg(), count, s, f, ds.out()));
      write_dataset(ds, out_path(out));
    } else if (gen_listfn->parsed()) {
      const auto s = need_seed(listfn_seed, seed, file);
      const auto f = parse_format(format);
      echo({{"command", "gen-listfn"}, {"count", count}, {"shots", shots}, {"seed", s}, {"format", format}});
      Dataset ds;
      check(dualsys_gen_listfn(common.data_dir_arg(), count, shots, s, f, ds.out()));
      write_dataset(ds, out_path(out));
    } else if (ingest->parsed()) {
      const auto f = parse_format(format);
      echo({{"command", "ingest"}, {"kind", kind}, {"input", input}, {"format", format}});
      Dataset ds;
      check(dualsys_ingest(kind.c_str(), input.c_str(), f, ds.out()));
      write_dataset(ds, out_path(out));
    } else if (annotate->parsed()) {
      const auto path = dataset_path(dataset, file);
      echo({{"command", "annotate"}, {"dataset", path}, {"vectors", vectors}, {"kind", kind}});
      Dataset ds;
      check(dualsys_dataset_load(path.c_str(), nullptr, ds.out()));
      check(dualsys_annotate(ds.p, vectors.c_str(), kind.empty() ? nullptr : kind.c_str()));
      write_dataset(ds, out_path(out));
    } else if (validate->parsed()) {
      const auto path = dataset_path(dataset, file);
      Dataset ds;
      check(dualsys_dataset_load(path.c_str(), kind.empty() ? nullptr : kind.c_str(), ds.out()));
      size_t invalid = 0;
      char* rep = nullptr;
      check(dualsys_dataset_validate(ds.p, &invalid, &rep));
      std::cout << take(rep);
      std::cout << dualsys_dataset_size(ds.p) << " instances, " << invalid << " invalid\n";
      if (invalid > 0) return static_cast<int>(DUALSYS_E_SCHEMA) + 1;
    } else if (run->parsed()) {
      const auto s = need_seed(run_seed, seed, file);
      dualsys_run_options opts;
      dualsys_run_options_init(&opts);
      const json pj = file.j.contains("pipeline") && file.j["pipeline"].is_object() ? file.j["pipeline"] : json::object();
      if (pipeline.empty()) pipeline = pj.value("kind", std::string("induction"));
      if (budget.empty()) budget = pj.value("budget", std::string("low"));
      opts.pipeline = pipeline.c_str();
      opts.budget = budget.c_str();
      opts.k = k >= 0 ? k : pj.value("k", 1);
      opts.rounds = rounds >= 0 ? rounds : pj.value("rounds", 0);
      opts.dummy_tokens = dummy >= 0 ? dummy : pj.value("dummy_tokens", 0);
      opts.parallelism = parallelism > 0 ? parallelism : file.get<int>("parallelism").value_or(1);
      opts.seed = s;
      if (max_tokens > 0) opts.max_output_tokens = max_tokens;
      if (timestamp.empty())
        if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) timestamp = sde;
      opts.timestamp = timestamp.c_str();
      if (cache_dir.empty()) cache_dir = file.get<std::string>("cache_dir").value_or("");
      const auto f = parse_format(format);
      check(dualsys_run_options_check(&opts));

      const auto path = dataset_path(dataset, file);
      const auto records_out = out_path(out);
      echo({{"command", "run"},
            {"dataset", path},
            {"pipeline", pipeline},
            {"k", opts.k},
            {"rounds", opts.rounds},
            {"budget", budget},
            {"dummy_tokens", opts.dummy_tokens},
            {"format", format},
            {"endpoint", endpoint},
            {"seed", s},
            {"parallelism", opts.parallelism},
            {"timestamp", timestamp},
            {"cache_dir", cache_dir},
            {"out", records_out}});

      Dataset ds;
      check(dualsys_dataset_load(path.c_str(), nullptr, ds.out()));
      if (f == DUALSYS_FORMAT_FTG) check(dualsys_dataset_to_ftg(ds.p));
      Endpoint ep;
      const char* cache = cache_dir.empty() ? nullptr : cache_dir.c_str();
      if (endpoint.rfind("scripted:", 0) == 0) {
        check(dualsys_endpoint_scripted(endpoint.substr(9).c_str(), cache, ep.out()));
      } else {
        const auto table = endpoint_table(file);
        if (table.empty()) usage("endpoint '" + endpoint + "' needs an endpoint table in --config");
        check(dualsys_endpoint_open(table.c_str(), endpoint.c_str(), cache, ep.out()));
      }
      Records recs;
      check(dualsys_run(ds.p, ep.p, &opts, recs.out()));
      size_t written = 0;
      check(dualsys_records_append(recs.p, records_out.c_str(), &written));
      size_t correct = 0, errors = 0;
      for (size_t i = 0; i < dualsys_records_size(recs.p); ++i) {
        char* line = nullptr;
        check(dualsys_records_record_json(recs.p, i, &line));
        const auto r = json::parse(take(line));
        correct += r.value("correct", false) ? 1 : 0;
        errors += r["result"].value("error", std::string()).empty() ? 0 : 1;
      }
      std::cerr << "wrote " << written << " records to " << records_out << " (" << correct << " correct, " << errors
                << " errors)\n";
    } else if (score->parsed()) {
      Records recs;
      check(dualsys_records_load(records.c_str(), recs.out()));
      size_t correct = 0;
      check(dualsys_records_score(recs.p, &correct));
      const auto n = dualsys_records_size(recs.p);
      if (!out.empty()) {
        check(dualsys_records_append(recs.p, out_path(out).c_str(), nullptr));
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f", n ? 100.0 * static_cast<double>(correct) / static_cast<double>(n) : 0.0);
      std::cout << correct << "/" << n << " correct (" << buf << "%)\n";
    } else if (report->parsed()) {
      if (records.empty() && abd_records.empty()) usage("report needs --records or --abduction/--deduction");
      if (!records.empty()) {
        Records recs;
        check(dualsys_records_load(records.c_str(), recs.out()));
        char* text = nullptr;
        check(dualsys_report(recs.p, report_format.c_str(), tokens.c_str(), &text));
        std::cout << take(text);
      }
      if (!abd_records.empty() || !ded_records.empty()) {
        if (abd_records.empty() || ded_records.empty()) usage("--abduction and --deduction go together");
        const auto s = need_seed(report_seed, seed, file);
        Records abd, ded;
        check(dualsys_records_load(abd_records.c_str(), abd.out()));
        check(dualsys_records_load(ded_records.c_str(), ded.out()));
        double a = 0, d = 0;
        check(dualsys_decoupled(abd.p, ded.p, common.data_dir_arg(), s, &a, &d));
        std::printf("abduction,deduction\n%.2f,%.2f\n", a, d);
      }
    } else if (check_endpoints->parsed()) {
      const auto table = endpoint_table(file);
      if (table.empty()) usage("check-endpoints needs --config with endpoints or endpoint_table");
      size_t n = 0;
      check(dualsys_endpoint_table_check(table.c_str(), &n));
      std::cout << n << " endpoints ok\n";
    }
  } catch (const Failure& f) {
    std::cerr << (f.code == kUsageExit ? "usage error: " : "") << f.message << "\n";
    return f.code;
  }
  return 0;
}
