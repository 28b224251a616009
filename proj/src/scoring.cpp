#include "dualsys/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "dualsys/raven.hpp"
#include "dualsys/rng.hpp"

namespace dualsys {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool iequal(const std::string& a, const std::string& b) { return lower(trim(a)) == lower(trim(b)); }

std::vector<std::string> salt_tokens(const std::string& s) {
  std::string t;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    t += std::ispunct(u) ? ' ' : static_cast<char>(std::tolower(u));
  }
  std::istringstream in(t);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool ftg_equal(const std::string& pred, const std::string& gold, DatasetKind dataset) {
  try {
    switch (dataset) {
      case DatasetKind::raven: return raven::parse_symbolic(trim(pred)) == raven::parse_symbolic(trim(gold));
      case DatasetKind::listfn: return listfn::parse_list(pred) == listfn::parse_list(gold);
      case DatasetKind::salt: return salt_tokens(pred) == salt_tokens(gold);
      default: return iequal(pred, gold);
    }
  } catch (const Error&) {
    return false;
  }
}

// Matching closing brace for the object starting at `open`, honoring strings.
std::size_t object_end(const std::string& s, std::size_t open) {
  int depth = 0;
  bool in_str = false, esc = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (esc) esc = false;
      else if (c == '\\') esc = true;
      else if (c == '"') in_str = false;
      continue;
    }
    if (c == '"') in_str = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string::npos;
}

std::tuple<int, int, int, int, int> spec_order(const PipelineSpec& p) {
  return {static_cast<int>(p.kind), p.k, p.rounds, static_cast<int>(p.budget), p.dummy_tokens};
}

std::vector<std::string> row_labels(const std::vector<RunRecord>& records) {
  std::vector<PipelineSpec> specs;
  for (const auto& r : records)
    if (std::find(specs.begin(), specs.end(), r.pipeline) == specs.end()) specs.push_back(r.pipeline);
  std::sort(specs.begin(), specs.end(), [](const auto& a, const auto& b) { return spec_order(a) < spec_order(b); });
  std::vector<std::string> out;
  for (const auto& s : specs) out.push_back(s.label());
  return out;
}

AccuracyGrid make_grid(std::string title, const std::vector<RunRecord>& records, std::vector<std::string> columns,
                       const std::function<std::string(const RunRecord&)>& column_of, const ReportOptions& opt) {
  AccuracyGrid g;
  g.title = std::move(title);
  g.rows = row_labels(records);
  g.columns = std::move(columns);
  for (const auto& row : g.rows) {
    std::vector<std::optional<ReportCell>> line;
    for (const auto& col : g.columns) {
      std::size_t n = 0, ok = 0;
      for (const auto& r : records)
        if (r.pipeline.label() == row && column_of(r) == col) {
          ++n;
          ok += r.correct ? 1 : 0;
        }
      if (n == 0) {
        line.emplace_back();
        continue;
      }
      line.push_back(ReportCell{row, col, n, ok, 100.0 * static_cast<double>(ok) / static_cast<double>(n)});
    }
    g.cells.push_back(std::move(line));
  }
  for (const auto& col : g.columns) {
    const auto* base = g.cell(opt.baseline, col);
    const auto* sys2 = g.cell(opt.system2, col);
    if (base && sys2 && base->accuracy > 0) g.advantage.push_back(system2_advantage(sys2->accuracy, base->accuracy));
    else g.advantage.emplace_back();
  }
  return g;
}

long long tokens_of(const RunRecord& r, TokenMeasure m) {
  switch (m) {
    case TokenMeasure::prompt: return r.result.ledger.prompt_tokens();
    case TokenMeasure::total: return r.result.ledger.total_tokens();
    default: return r.result.ledger.completion_tokens();
  }
}

std::string_view measure_name(TokenMeasure m) {
  switch (m) {
    case TokenMeasure::prompt: return "prompt";
    case TokenMeasure::total: return "total";
    default: return "completion";
  }
}

std::string fmt1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", round_to(v, 1));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

std::string render_table(const std::string& title, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& body) {
  std::vector<std::size_t> width(header.size(), 0);
  auto grow = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], row[i].size());
  };
  grow(header);
  for (const auto& r : body) grow(r);
  std::string out = title + "\n";
  auto line = [&](const std::vector<std::string>& row) {
    std::string l;
    for (std::size_t i = 0; i < row.size(); ++i) l += (i ? "  " : "") + pad(row[i], width[i]);
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total > 2 ? total - 2 : 0, '-') + "\n";
  for (const auto& r : body) line(r);
  return out;
}

std::string grid_text(const AccuracyGrid& g) {
  std::vector<std::string> header{"pipeline"};
  header.insert(header.end(), g.columns.begin(), g.columns.end());
  std::vector<std::vector<std::string>> body;
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    std::vector<std::string> row{g.rows[r]};
    for (const auto& c : g.cells[r]) row.push_back(c ? format_percent(c->accuracy) : "-");
    body.push_back(std::move(row));
  }
  std::vector<std::string> adv{"System 2 Advantage"};
  for (const auto& a : g.advantage) adv.push_back(a ? format_signed_percent(*a) : "-");
  body.push_back(std::move(adv));
  return render_table(g.title, header, body);
}

void grid_csv(const AccuracyGrid& g, const std::string& table, std::string& out) {
  for (std::size_t r = 0; r < g.rows.size(); ++r)
    for (std::size_t c = 0; c < g.columns.size(); ++c)
      if (const auto& cell = g.cells[r][c])
        out += table + "," + csv_field(g.rows[r]) + "," + csv_field(g.columns[c]) + "," +
               format_percent(cell->accuracy) + "," + std::to_string(cell->n) + "\n";
  for (std::size_t c = 0; c < g.columns.size(); ++c)
    if (g.advantage[c])
      out += table + ",system2_advantage," + csv_field(g.columns[c]) + "," + format_signed_percent(*g.advantage[c]) +
             ",\n";
}

}  // namespace

std::optional<json> first_json_object(const std::string& text) {
  for (auto open = text.find('{'); open != std::string::npos; open = text.find('{', open + 1)) {
    const auto close = object_end(text, open);
    if (close == std::string::npos) continue;
    try {
      auto j = json::parse(text.substr(open, close - open + 1));
      if (j.is_object()) return j;
    } catch (const json::parse_error&) {
    }
  }
  return std::nullopt;
}

std::string extract_json_field(const std::string& text, const std::string& field) {
  const auto obj = first_json_object(text);
  if (!obj) throw ExtractError(ExtractFailure::no_object, "no JSON object in response");
  if (!obj->contains(field)) throw ExtractError(ExtractFailure::field_absent, "field '" + field + "' absent");
  const auto& v = obj->at(field);
  if (v.is_string()) return trim(v.get<std::string>());
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ExtractError(ExtractFailure::non_scalar, "field '" + field + "' is not a scalar");
}

std::optional<std::size_t> option_index(const std::string& pred) {
  auto s = trim(pred);
  const auto low = lower(s);
  for (const char* prefix : {"option ", "choice ", "answer "})
    if (low.rfind(prefix, 0) == 0) s = trim(s.substr(std::string(prefix).size()));
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '(' || s[i] == '[')) ++i;
  if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) return std::nullopt;
  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(s[i])));
  if (letter < 'A' || letter > 'J') return std::nullopt;
  ++i;
  if (i == s.size() || s[i] == ')' || s[i] == ']' || s[i] == '.' || s[i] == ':' || s[i] == ' ')
    return static_cast<std::size_t>(letter - 'A');
  return std::nullopt;
}

bool match_answer(const std::string& pred, const std::string& gold, DatasetKind dataset, TaskFormat format,
                  const std::vector<std::string>& candidates) {
  if (trim(pred).empty()) return false;
  if (format == TaskFormat::ftg) return ftg_equal(pred, gold, dataset);
  const auto gold_label = option_index(gold);
  const bool gold_is_label = gold_label && trim(gold).size() <= 3;
  if (const auto idx = option_index(pred)) {
    if (gold_is_label) return *idx == *gold_label;
    if (*idx < candidates.size() && trim(pred).size() <= 10) return iequal(candidates[*idx], gold);
    // "B. <text>": fall back to the text after the label.
    const auto dot = pred.find_first_of(".)");
    if (dot != std::string::npos && iequal(pred.substr(dot + 1), gold)) return true;
  }
  if (iequal(pred, gold)) return true;
  return dataset == DatasetKind::raven && ftg_equal(pred, gold, dataset);
}

bool score_record(RunRecord& rec) {
  const auto& inst = rec.instance;
  rec.correct = rec.result.answered &&
                match_answer(rec.result.final_answer, inst.gold(), inst.dataset, inst.format, inst.candidates());
  return rec.correct;
}

ReportCell accuracy(const std::vector<RunRecord>& records, const std::function<bool(const RunRecord&)>& filter) {
  ReportCell c;
  for (const auto& r : records)
    if (!filter || filter(r)) {
      ++c.n;
      c.correct += r.correct ? 1 : 0;
    }
  if (c.n == 0) fail(ErrorCode::empty_selection, "filter selects no records");
  c.accuracy = 100.0 * static_cast<double>(c.correct) / static_cast<double>(c.n);
  return c;
}

double system2_advantage(double acc_sys2, double acc_induction) {
  if (acc_induction == 0) fail(ErrorCode::invalid_argument, "induction accuracy is zero; advantage undefined");
  return 100.0 * (acc_sys2 - acc_induction) / acc_induction;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  const double nudge = 1e-9 * std::max(1.0, std::fabs(scaled));
  return (scaled >= 0 ? std::floor(scaled + 0.5 + nudge) : std::ceil(scaled - 0.5 - nudge)) / scale;
}

std::string format_percent(double value) {
  char buf[64];
  const double r = round_to(value, 2);
  std::snprintf(buf, sizeof buf, "%.2f", r == 0 ? 0.0 : r);
  return buf;
}

std::string format_signed_percent(double value) {
  const double r = round_to(value, 2);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.2f%%", r > 0 ? "+" : (r < 0 ? "-" : ""), std::fabs(r));
  return buf;
}

HypothesisExecutor dsl_executor() {
  return [](const std::string& hypothesis, const listfn::List& input) -> std::optional<listfn::List> {
    try {
      return listfn::eval_program(listfn::parse_program(trim(hypothesis)), input);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
}

DecoupledAccuracy abduction_deduction_decoupled(const std::vector<RunRecord>& abduction_records,
                                                const std::vector<RunRecord>& deduction_records,
                                                const listfn::Registry& registry, std::uint64_t seed,
                                                std::size_t held_out, const HypothesisExecutor& execute) {
  if (abduction_records.empty() || deduction_records.empty())
    fail(ErrorCode::empty_selection, "decoupled accuracy needs both record sets");
  std::set<std::string> abd_ids, ded_ids;
  for (const auto& r : abduction_records) abd_ids.insert(r.instance.id);
  for (const auto& r : deduction_records) ded_ids.insert(r.instance.id);
  if (abd_ids != ded_ids) fail(ErrorCode::invalid_argument, "abduction and deduction records cover different instances");

  std::size_t abd_ok = 0;
  for (const auto& r : abduction_records) {
    const auto* icl = std::get_if<IclInstance>(&r.instance.body);
    if (!icl || icl->function_id.rfind("listfn:", 0) != 0)
      fail(ErrorCode::invalid_argument, "instance " + r.instance.id + " is not a list-function task");
    const auto& fn = registry.by_id(std::stoi(icl->function_id.substr(7)));
    if (r.result.trail.empty()) continue;
    Rng rng(derive_seed(seed, r.instance.id, 0x68656c64));
    bool all = true;
    for (std::size_t i = 0; i < held_out && all; ++i) {
      listfn::List in(static_cast<std::size_t>(rng.uniform(3, 10)));
      for (auto& v : in) v = rng.uniform(0, listfn::kMaxElement);
      const auto got = execute(r.result.trail.front().text, in);
      all = got && *got == listfn::eval_fn(fn, in);
    }
    abd_ok += all ? 1 : 0;
  }
  DecoupledAccuracy out;
  out.n = abduction_records.size();
  out.abduction = 100.0 * static_cast<double>(abd_ok) / static_cast<double>(out.n);
  out.deduction = accuracy(deduction_records, nullptr).accuracy;
  return out;
}

std::string render_decoupled(const std::vector<std::pair<std::string, DecoupledAccuracy>>& rows) {
  std::string out = "model,abduction,deduction\n";
  double sa = 0, sd = 0;
  for (const auto& [model, d] : rows) {
    out += csv_field(model) + "," + format_percent(d.abduction) + "," + format_percent(d.deduction) + "\n";
    sa += d.abduction;
    sd += d.deduction;
  }
  if (!rows.empty()) {
    const auto n = static_cast<double>(rows.size());
    out += "Average," + format_percent(sa / n) + "," + format_percent(sd / n) + "\n";
  }
  return out;
}

TokenMeasure parse_token_measure(std::string_view s) {
  if (s == "completion") return TokenMeasure::completion;
  if (s == "prompt") return TokenMeasure::prompt;
  if (s == "total") return TokenMeasure::total;
  fail(ErrorCode::invalid_argument, "unknown token measure '" + std::string(s) + "' (completion|prompt|total)");
}

const ReportCell* AccuracyGrid::cell(const std::string& row, const std::string& column) const {
  const auto r = std::find(rows.begin(), rows.end(), row);
  const auto c = std::find(columns.begin(), columns.end(), column);
  if (r == rows.end() || c == columns.end()) return nullptr;
  const auto& v = cells[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - columns.begin())];
  return v ? &*v : nullptr;
}

std::string TokenCell::render() const {
  return show_rounds ? fmt1(mean_tokens) + " (" + fmt1(mean_rounds) + ")" : fmt1(mean_tokens);
}

Report build_report(const std::vector<RunRecord>& records, const ReportOptions& options) {
  if (records.empty()) fail(ErrorCode::empty_selection, "no records to report");
  Report rep;

  std::vector<RunRecord> mcq;
  for (const auto& r : records)
    if (r.instance.format == TaskFormat::mcq) mcq.push_back(r);
  const auto& by_mcq = mcq.empty() ? records : mcq;
  const std::string scope = mcq.empty() ? "all formats" : "format = mcq";

  std::vector<std::string> modalities;
  for (auto m : {Modality::textual, Modality::visual, Modality::symbolic, Modality::math_code, Modality::textual_icl})
    for (const auto& r : by_mcq)
      if (r.instance.modality == m) {
        modalities.emplace_back(to_string(m));
        break;
      }
  rep.modality = make_grid("Accuracy by modality (" + scope + ")", by_mcq, modalities,
                           [](const RunRecord& r) { return std::string(to_string(r.instance.modality)); }, options);

  auto difficulty_of = [](const RunRecord& r) {
    return r.instance.difficulty ? std::string(to_string(*r.instance.difficulty)) : std::string("unlabeled");
  };
  std::vector<std::string> tiers;
  for (const char* t : {"easy", "medium", "hard", "unlabeled"})
    for (const auto& r : by_mcq)
      if (difficulty_of(r) == t) {
        tiers.emplace_back(t);
        break;
      }
  rep.difficulty = make_grid("Accuracy by difficulty (" + scope + ")", by_mcq, tiers, difficulty_of, options);

  auto format_col = [](const RunRecord& r) {
    return std::string(to_string(r.instance.modality)) + "/" + std::string(to_string(r.instance.format));
  };
  std::vector<std::string> fcols;
  for (auto m : {Modality::textual, Modality::visual, Modality::symbolic, Modality::math_code, Modality::textual_icl})
    for (auto f : {TaskFormat::mcq, TaskFormat::ftg}) {
      const auto col = std::string(to_string(m)) + "/" + std::string(to_string(f));
      for (const auto& r : records)
        if (format_col(r) == col) {
          fcols.push_back(col);
          break;
        }
    }
  rep.format = make_grid("Accuracy by task format", records, fcols, format_col, options);

  auto& tg = rep.tokens;
  tg.measure = options.tokens;
  tg.rows = row_labels(records);
  tg.columns = {"easy", "medium", "hard"};
  for (const auto& row : tg.rows) {
    std::vector<std::optional<TokenCell>> line;
    std::size_t n_row = 0, ok_row = 0;
    for (const auto& col : tg.columns) {
      TokenCell c;
      double tok = 0, rounds = 0;
      for (const auto& r : records) {
        if (r.pipeline.label() != row || difficulty_of(r) != col) continue;
        ++c.n;
        tok += static_cast<double>(tokens_of(r, options.tokens));
        rounds += r.result.rounds_used;
        c.show_rounds = r.pipeline.kind == PipelineKind::refinement || r.pipeline.kind == PipelineKind::adaptive;
      }
      if (c.n == 0) {
        line.emplace_back();
        continue;
      }
      c.mean_tokens = tok / static_cast<double>(c.n);
      c.mean_rounds = rounds / static_cast<double>(c.n);
      line.push_back(c);
    }
    for (const auto& r : records)
      if (r.pipeline.label() == row) {
        ++n_row;
        ok_row += r.correct ? 1 : 0;
      }
    tg.cells.push_back(std::move(line));
    tg.row_accuracy.push_back(n_row ? 100.0 * static_cast<double>(ok_row) / static_cast<double>(n_row) : 0.0);
  }
  return rep;
}

std::string Report::to_csv() const {
  std::string out = "table,row,column,value,n\n";
  grid_csv(modality, "modality", out);
  grid_csv(difficulty, "difficulty", out);
  grid_csv(format, "format", out);
  for (std::size_t r = 0; r < tokens.rows.size(); ++r) {
    for (std::size_t c = 0; c < tokens.columns.size(); ++c)
      if (const auto& cell = tokens.cells[r][c])
        out += "tokens," + csv_field(tokens.rows[r]) + "," + tokens.columns[c] + "," + csv_field(cell->render()) + "," +
               std::to_string(cell->n) + "\n";
    out += "tokens," + csv_field(tokens.rows[r]) + ",accuracy," + fmt1(tokens.row_accuracy[r]) + ",\n";
  }
  return out;
}

std::string Report::to_text() const {
  std::string out = grid_text(modality) + "\n" + grid_text(difficulty) + "\n" + grid_text(format) + "\n";
  std::vector<std::string> header{"pipeline"};
  header.insert(header.end(), tokens.columns.begin(), tokens.columns.end());
  header.emplace_back("accuracy");
  std::vector<std::vector<std::string>> body;
  for (std::size_t r = 0; r < tokens.rows.size(); ++r) {
    std::vector<std::string> row{tokens.rows[r]};
    for (const auto& c : tokens.cells[r]) row.push_back(c ? c->render() : "-");
    row.push_back(fmt1(tokens.row_accuracy[r]));
    body.push_back(std::move(row));
  }
  out += render_table("Inference tokens (" + std::string(measure_name(tokens.measure)) +
                          ") with mean refinement rounds in parentheses",
                      header, body);
  return out;
}

}  // namespace dualsys
