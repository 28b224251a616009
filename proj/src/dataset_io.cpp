#include "dualsys/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dualsys/error.hpp"
#include "dualsys/rng.hpp"

namespace dualsys {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::schema, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::schema, std::string("field '") + key + "' has the wrong type");
  }
}

json hypothesis_json(const Hypothesis& h) {
  return {{"text", h.text}, {"grammar", h.grammar}, {"kind", to_string(h.kind)}, {"origin", h.origin}};
}

Hypothesis hypothesis_from(const json& j) {
  return {field<std::string>(j, "text"), field<std::string>(j, "grammar"),
          parse_hypothesis_kind(field<std::string>(j, "kind")), field<std::string>(j, "origin")};
}

std::vector<json> read_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<json> items;
  if (first == std::string::npos) return items;
  if (text[first] == '[') {
    try {
      for (auto& e : json::parse(text)) items.push_back(std::move(e));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::parse, path + ": " + e.what());
    }
    return items;
  }
  std::istringstream lines(text);
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      items.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::parse, path + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return items;
}

std::pair<std::string, std::string> split_terms(const std::string& s, const std::string& what) {
  const auto pos = s.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size())
    fail(ErrorCode::schema, what + ": expected 'x:y', got '" + s + "'");
  return {s.substr(0, pos), s.substr(pos + 1)};
}

std::string item_id(const json& j, const char* prefix, std::size_t index) {
  if (j.contains("id")) {
    const auto& id = j.at("id");
    return id.is_string() ? id.get<std::string>() : id.dump();
  }
  return prefix + std::to_string(index);
}

}  // namespace

json to_json(const TaskInstance& inst) {
  json body;
  if (const auto* a = std::get_if<AnalogyInstance>(&inst.body)) {
    body = {{"A", a->a}, {"A_prime", a->a_prime}, {"B", a->b}, {"gold", a->gold}, {"candidates", a->candidates}};
    body["pattern_gold"] = a->pattern_gold ? json(*a->pattern_gold) : json(nullptr);
  } else {
    const auto& icl = std::get<IclInstance>(inst.body);
    json demos = json::array();
    for (const auto& d : icl.demos) demos.push_back({{"input", d.input}, {"output", d.output}});
    body = {{"demos", demos},
            {"test_input", icl.test_input},
            {"gold_output", icl.gold_output},
            {"function_id", icl.function_id},
            {"candidates", icl.candidates}};
  }
  json j = {{"schema_version", kSchemaVersion},
            {"id", inst.id},
            {"dataset", to_string(inst.dataset)},
            {"modality", to_string(inst.modality)},
            {"format", to_string(inst.format)},
            {"body", body},
            {"meta", inst.meta}};
  j["difficulty"] = inst.difficulty ? json(to_string(*inst.difficulty)) : json(nullptr);
  return j;
}

TaskInstance instance_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::schema, "instance is not a JSON object");
  const auto version = field<int>(j, "schema_version");
  if (version != kSchemaVersion)
    fail(ErrorCode::schema, "schema_version " + std::to_string(version) + " (expected " +
                                std::to_string(kSchemaVersion) + ")");
  TaskInstance t;
  t.id = field<std::string>(j, "id");
  t.dataset = parse_dataset(field<std::string>(j, "dataset"));
  t.modality = parse_modality(field<std::string>(j, "modality"));
  t.format = parse_format(field<std::string>(j, "format"));
  if (j.contains("difficulty") && !j.at("difficulty").is_null())
    t.difficulty = parse_difficulty(field<std::string>(j, "difficulty"));
  if (j.contains("meta")) t.meta = j.at("meta");
  const auto& b = j.contains("body") ? j.at("body") : json();
  if (!b.is_object()) fail(ErrorCode::schema, "missing object field 'body'");
  if (is_analogy(t.dataset)) {
    AnalogyInstance a;
    a.a = field<std::string>(b, "A");
    a.a_prime = field<std::string>(b, "A_prime");
    a.b = field<std::string>(b, "B");
    a.gold = field<std::string>(b, "gold");
    if (b.contains("candidates")) a.candidates = field<std::vector<std::string>>(b, "candidates");
    if (b.contains("pattern_gold") && !b.at("pattern_gold").is_null())
      a.pattern_gold = field<std::string>(b, "pattern_gold");
    t.body = std::move(a);
  } else {
    IclInstance icl;
    const auto demos = b.contains("demos") ? b.at("demos") : json();
    if (!demos.is_array()) fail(ErrorCode::schema, "missing array field 'demos'");
    for (const auto& d : demos) icl.demos.push_back({field<std::string>(d, "input"), field<std::string>(d, "output")});
    icl.test_input = field<std::string>(b, "test_input");
    icl.gold_output = field<std::string>(b, "gold_output");
    icl.function_id = field<std::string>(b, "function_id");
    if (b.contains("candidates")) icl.candidates = field<std::vector<std::string>>(b, "candidates");
    t.body = std::move(icl);
  }
  return t;
}

json to_json(const RunRecord& rec) {
  json trail = json::array();
  for (const auto& h : rec.result.trail) trail.push_back(hypothesis_json(h));
  json ledger = json::array();
  for (const auto& e : rec.result.ledger.entries())
    ledger.push_back({{"call", e.call},
                      {"prompt_tokens", e.prompt_tokens},
                      {"completion_tokens", e.completion_tokens},
                      {"label", e.label}});
  const auto& p = rec.pipeline;
  const auto& r = rec.result;
  return {{"schema_version", kSchemaVersion},
          {"instance", to_json(rec.instance)},
          {"pipeline",
           {{"kind", to_string(p.kind)},
            {"k", p.k},
            {"rounds", p.rounds},
            {"budget", to_string(p.budget)},
            {"dummy_tokens", p.dummy_tokens},
            {"label", p.label()}}},
          {"result",
           {{"final_answer", r.final_answer},
            {"answered", r.answered},
            {"trail", trail},
            {"calls", r.calls},
            {"rounds_used", r.rounds_used},
            {"ledger", ledger},
            {"prompt_tokens", r.ledger.prompt_tokens()},
            {"completion_tokens", r.ledger.completion_tokens()},
            {"malformed_retries", r.malformed_retries},
            {"flags", r.flags},
            {"error", r.error}}},
          {"model", rec.model},
          {"correct", rec.correct},
          {"timestamp", rec.timestamp}};
}

RunRecord record_from_json(const json& j) {
  const auto version = field<int>(j, "schema_version");
  if (version != kSchemaVersion) fail(ErrorCode::schema, "record schema_version " + std::to_string(version));
  RunRecord rec;
  rec.instance = instance_from_json(field<json>(j, "instance"));
  const auto p = field<json>(j, "pipeline");
  rec.pipeline.kind = parse_pipeline_kind(field<std::string>(p, "kind"));
  rec.pipeline.k = field<int>(p, "k");
  rec.pipeline.rounds = field<int>(p, "rounds");
  rec.pipeline.budget = parse_budget(field<std::string>(p, "budget"));
  rec.pipeline.dummy_tokens = field<int>(p, "dummy_tokens");
  const auto r = field<json>(j, "result");
  rec.result.final_answer = field<std::string>(r, "final_answer");
  rec.result.answered = field<bool>(r, "answered");
  for (const auto& h : field<json>(r, "trail")) rec.result.trail.push_back(hypothesis_from(h));
  rec.result.calls = field<int>(r, "calls");
  rec.result.rounds_used = field<int>(r, "rounds_used");
  for (const auto& e : field<json>(r, "ledger"))
    rec.result.ledger.append({field<int>(e, "call"), field<long long>(e, "prompt_tokens"),
                              field<long long>(e, "completion_tokens"), field<std::string>(e, "label")});
  rec.result.malformed_retries = field<int>(r, "malformed_retries");
  rec.result.flags = field<std::vector<std::string>>(r, "flags");
  rec.result.error = field<std::string>(r, "error");
  rec.model = field<std::string>(j, "model");
  rec.correct = field<bool>(j, "correct");
  rec.timestamp = field<std::string>(j, "timestamp");
  return rec;
}

std::vector<TaskInstance> load_dataset(const std::string& path, std::optional<DatasetKind> kind,
                                       const DemoOracle& oracle) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open dataset " + path);
  std::vector<TaskInstance> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + ": line " + std::to_string(n);
    TaskInstance t;
    try {
      t = instance_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::parse, where + ": " + e.what());
    } catch (const Error& e) {
      fail(e.code(), where + ": " + e.what());
    }
    if (kind && t.dataset != *kind)
      fail(ErrorCode::schema, where + ": dataset '" + std::string(to_string(t.dataset)) + "', expected '" +
                                  std::string(to_string(*kind)) + "'");
    const auto violations = validate_instance(t, oracle);
    if (!violations.empty()) {
      std::string msg = where + ": instance " + t.id + " invalid:";
      for (auto v : violations) msg += " " + std::string(to_string(v));
      fail(ErrorCode::schema, msg);
    }
    out.push_back(std::move(t));
  }
  return out;
}

void save_dataset(const std::vector<TaskInstance>& instances, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  for (const auto& t : instances) out << to_json(t).dump() << '\n';
  if (!out.flush()) fail(ErrorCode::io, "write failed for " + path);
}

TaskInstance project_mcq(const TaskInstance& instance, const std::vector<std::string>& distractors,
                         std::uint64_t seed) {
  if (instance.format != TaskFormat::ftg) fail(ErrorCode::invalid_argument, "project_mcq needs an ftg instance");
  if (distractors.empty()) fail(ErrorCode::invalid_argument, "no distractors");
  const auto& gold = instance.gold();
  std::set<std::string> seen{gold};
  for (const auto& d : distractors) {
    if (d == gold) fail(ErrorCode::invalid_argument, "distractor equals gold '" + gold + "'");
    if (!seen.insert(d).second) fail(ErrorCode::invalid_argument, "duplicate distractor '" + d + "'");
  }
  std::vector<std::string> cands{gold};
  cands.insert(cands.end(), distractors.begin(), distractors.end());
  Rng rng(derive_seed(seed, instance.id));
  rng.shuffle(cands);
  TaskInstance out = instance;
  out.format = TaskFormat::mcq;
  out.candidates() = std::move(cands);
  return out;
}

TaskInstance project_ftg(const TaskInstance& instance) {
  if (instance.format != TaskFormat::mcq) fail(ErrorCode::invalid_argument, "project_ftg needs an mcq instance");
  if (instance.modality == Modality::visual)
    fail(ErrorCode::invalid_argument, "visual instances are evaluated only as multiple choice");
  TaskInstance out = instance;
  out.format = TaskFormat::ftg;
  out.candidates().clear();
  return out;
}

std::size_t write_run_records(const std::vector<RunRecord>& records, const std::string& path) {
  if (records.empty()) fail(ErrorCode::invalid_argument, "no records to write");
  std::string buf;
  for (const auto& r : records) buf += to_json(r).dump() + "\n";
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open " + path + " for append");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out.flush()) fail(ErrorCode::io, "write failed for " + path);
  return records.size();
}

std::vector<RunRecord> load_run_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open records " + path);
  std::vector<RunRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::parse, path + ": line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      fail(e.code(), path + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TaskInstance> ingest_ekar(const std::string& path, TaskFormat format) {
  std::vector<TaskInstance> out;
  const auto items = read_items(path);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& j = items[i];
    const auto id = item_id(j, "ekar-", i);
    try {
      const auto [a, a_prime] = split_terms(field<std::string>(j, "question"), id);
      const auto choices = field<json>(j, "choices");
      const auto labels = field<std::vector<std::string>>(choices, "label");
      const auto texts = field<std::vector<std::string>>(choices, "text");
      const auto key = field<std::string>(j, "answerKey");
      if (labels.size() != texts.size()) fail(ErrorCode::schema, "choice labels and texts differ in length");
      AnalogyInstance body;
      body.a = a;
      body.a_prime = a_prime;
      bool found = false;
      for (std::size_t c = 0; c < labels.size(); ++c) {
        const auto [x, y] = split_terms(texts[c], id);
        body.candidates.push_back(y);
        if (labels[c] == key) {
          body.b = x;
          body.gold = y;
          found = true;
        }
      }
      if (!found) fail(ErrorCode::schema, "answerKey '" + key + "' not among choice labels");
      if (format == TaskFormat::ftg) body.candidates.clear();
      TaskInstance t;
      t.id = id;
      t.dataset = DatasetKind::ekar;
      t.modality = Modality::textual;
      t.format = format;
      t.body = std::move(body);
      if (j.contains("explanation")) t.meta["explanation"] = j.at("explanation");
      out.push_back(std::move(t));
    } catch (const Error& e) {
      fail(e.code(), path + ": item " + id + ": " + e.what());
    }
  }
  return out;
}

std::vector<TaskInstance> ingest_vasr(const std::string& path) {
  std::vector<TaskInstance> out;
  const auto items = read_items(path);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& j = items[i];
    const auto id = item_id(j, "vasr-", i);
    try {
      AnalogyInstance body;
      body.a = field<std::string>(j, "A_img");
      body.a_prime = field<std::string>(j, "B_img");
      body.b = field<std::string>(j, "C_img");
      body.gold = field<std::string>(j, "D_img");
      body.candidates = field<std::vector<std::string>>(j, "candidates");
      if (j.contains("label")) {
        const auto label = field<std::size_t>(j, "label");
        if (label >= body.candidates.size() || body.candidates[label] != body.gold)
          fail(ErrorCode::schema, "label does not point at D_img");
      }
      TaskInstance t;
      t.id = id;
      t.dataset = DatasetKind::vasr;
      t.modality = Modality::visual;
      t.format = TaskFormat::mcq;
      t.body = std::move(body);
      out.push_back(std::move(t));
    } catch (const Error& e) {
      fail(e.code(), path + ": item " + id + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dualsys
