#include "dualsys/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "dualsys/error.hpp"
#include "dualsys/rng.hpp"
#include "dualsys/scoring.hpp"

namespace dualsys {

namespace {

const char* const kRespond = "Your response should strictly follow the JSON dict format:";

struct Slot {
  std::string name;
  std::string placeholder;
  bool tight = false;  // "name":"value" rather than "name": "value"
  bool comma = true;
};

std::string schema(const std::vector<Slot>& slots) {
  std::string s = "{\n";
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& f = slots[i];
    s += "    \"" + f.name + "\":" + (f.tight ? "" : " ") + "\"" + f.placeholder + "\"";
    if (i + 1 < slots.size() && f.comma) s += ",";
    s += "\n";
  }
  return s + "}";
}

Slot reasoning() { return {"reasoning", "reasoning steps here", true}; }

std::string answer_placeholder(DatasetKind d) {
  switch (d) {
    case DatasetKind::ekar: return "missing word here";
    case DatasetKind::vasr: return "missing image choice here";
    case DatasetKind::raven: return "missing symbol here";
    case DatasetKind::listfn: return "output list here";
    case DatasetKind::salt: return "translated sentence here";
  }
  return {};
}

std::vector<Slot> hypothesis_slots(DatasetKind d, bool revised) {
  const std::string pre = revised ? "revised " : "";
  switch (d) {
    case DatasetKind::listfn: return {{"function", revised ? "revised python function here" : "python function here"}};
    case DatasetKind::salt:
      return {{"vocabulary", pre + "word mappings here"}, {"grammar", pre + "syntax rules here"}};
    default: return {{"pattern", pre + "relational pattern here"}};
  }
}

std::string answer_schema(DatasetKind d, bool with_reasoning) {
  std::vector<Slot> slots;
  if (with_reasoning) slots.push_back(reasoning());
  slots.push_back({answer_field(d), answer_placeholder(d)});
  return schema(slots);
}

std::string abduction_schema(DatasetKind d) {
  std::vector<Slot> slots{reasoning()};
  if (d == DatasetKind::ekar) slots[0] = {"reasoning", "reasoning steps here", false, false};
  for (auto& s : hypothesis_slots(d, false)) slots.push_back(s);
  return schema(slots);
}

std::string letter(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

std::string options_block(const TaskInstance& inst, const std::string& heading) {
  const auto& c = inst.candidates();
  if (c.size() > 10) fail(ErrorCode::invalid_argument, "instance " + inst.id + " has more than 10 options");
  std::string s = heading + ":\n";
  for (std::size_t i = 0; i < c.size(); ++i) s += letter(i) + ". " + c[i] + "\n";
  return s;
}

std::string hypothesis_text(DatasetKind d, const Hypothesis& h) {
  if (d == DatasetKind::salt) return "Vocabulary mapping: " + h.text + "; Syntax rules: " + h.grammar;
  return h.text;
}

std::string hypothesis_noun(DatasetKind d) {
  switch (d) {
    case DatasetKind::listfn: return "function";
    case DatasetKind::salt: return "set of word mappings and syntax rules";
    default: return "relational pattern";
  }
}

std::string matrix_text(const AnalogyInstance& a) {
  return "row 1: " + a.a + "; row 2: " + a.a_prime + "; row 3: " + a.b + ", ?";
}

std::string icl_demos(const IclInstance& icl, const char* in_label, const char* out_label) {
  std::string s;
  for (std::size_t i = 0; i < icl.demos.size(); ++i) {
    const auto n = std::to_string(i + 1);
    s += std::string(in_label) + " " + n + ": " + icl.demos[i].input + ", " + out_label + " " + n + ": " +
         icl.demos[i].output + "\n";
  }
  return s;
}

// Intro sentence(s) before the data block. `task_clause` selects the answer or
// the abduction wording; `pattern` is appended for deduction.
std::string intro(DatasetKind d, bool abductive, const std::string* pattern) {
  switch (d) {
    case DatasetKind::ekar: {
      std::string s = "Below is an analogy question, where analogy x:y::x':y' exists between the two wordsets, your task is to ";
      s += abductive ? "infer the relational pattern within wordsets." : "finish the second wordset to complete the analogy.";
      if (pattern) s += " Here's the relational pattern: " + *pattern;
      return s;
    }
    case DatasetKind::vasr: {
      std::string s = "Below is an analogy question, where analogy x:y::x':y' exists between the two image pairs, your task is to ";
      s += abductive ? "infer the relational pattern within image pairs." : "complete the second image pair to complete the analogy.";
      if (pattern) s += " Here's the relational pattern: " + *pattern;
      return s;
    }
    case DatasetKind::raven: {
      std::string s = "Below is a 3x3 matrix of abstracted symbols. The symbols follow a certain rule or pattern in rows. Your task is to ";
      s += abductive ? "infer the relational pattern." : "infer the missing symbol.";
      if (pattern) s += " Here's the relational pattern: " + *pattern;
      return s;
    }
    case DatasetKind::listfn: {
      std::string s = "Below are several examples of input and output lists. There exists an unified function that maps the input list to the output list.";
      if (pattern) s += " The python code for the function is: " + *pattern;
      return s;
    }
    case DatasetKind::salt: {
      std::string s = abductive ? "You are required to study translations from english sentences to an artificial language.\n"
                                : "You are required to translate english sentences to an artificial language.\n";
      s += "The translation involves both vocabulary mapping and syntax rules transition.";
      if (pattern) s += " " + *pattern + ".";
      return s + " Below are translation examples:";
    }
  }
  return {};
}

// Data block; `query` adds the question part (test input, options).
std::string data_block(const TaskInstance& inst, bool query) {
  const bool mcq = inst.format == TaskFormat::mcq;
  switch (inst.dataset) {
    case DatasetKind::ekar: {
      const auto& a = std::get<AnalogyInstance>(inst.body);
      std::string s = "Wordset1: " + a.a + ":" + a.a_prime + "\nWordset2: " + a.b + ":[missing_word]\n";
      if (query && mcq) s += options_block(inst, "Options");
      return s + "  \n";
    }
    case DatasetKind::vasr: {
      const auto& a = std::get<AnalogyInstance>(inst.body);
      return "Image Pair 1: " + a.a + ":" + a.a_prime + "\nImage Pair 2: " + a.b + ":[missing_img]\n\n" +
             options_block(inst, "Candidate Images") + "\n";
    }
    case DatasetKind::raven: {
      const auto& a = std::get<AnalogyInstance>(inst.body);
      std::string s = "Incomplete Matrix: " + matrix_text(a) + "\n";
      if (query && mcq) s += options_block(inst, "Options");
      return s + "\n";
    }
    case DatasetKind::listfn: {
      const auto& icl = std::get<IclInstance>(inst.body);
      std::string s = "\n" + icl_demos(icl, "Input", "Output") + "\n";
      if (!query) return s;
      s += "Please infer the output list for the new input list below:\nNew Input: " + icl.test_input + "\n\n";
      if (mcq) s += options_block(inst, "Options") + "\n";
      return s;
    }
    case DatasetKind::salt: {
      const auto& icl = std::get<IclInstance>(inst.body);
      std::string s = "\n" + icl_demos(icl, "English", "Translation") + "\n";
      if (!query) return s;
      s += "Please translate this sentence: " + icl.test_input + "\n";
      if (mcq) s += options_block(inst, "Options");
      return s;
    }
  }
  return {};
}

// SALT and ListFn abduction put the instruction right before the schema line.
std::string respond_prefix(DatasetKind d) {
  return d == DatasetKind::salt ? std::string(kRespond) + "\n" : std::string(kRespond) + "\n\n";
}

std::string hypothesis_context(const TaskInstance& inst) {
  const auto d = inst.dataset;
  return intro(d, true, nullptr) + "\n" + data_block(inst, d == DatasetKind::vasr);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

using Fields = std::map<std::string, std::string>;

// One logical request with the malformed-output repair loop.
class Session {
 public:
  Session(const TaskInstance& inst, Endpoint& ep, const RunOptions& opt, PipelineResult& res)
      : inst_(inst), ep_(ep), opt_(opt), res_(res) {}

  std::optional<Fields> ask(std::vector<Message> messages, const std::vector<std::string>& fields,
                            const std::string& label, double temperature = kDefaultTemperature,
                            std::optional<std::uint64_t> seed = std::nullopt) {
    for (int attempt = 0;; ++attempt) {
      ChatRequest req{ep_.model(), messages, temperature, opt_.max_output_tokens, seed};
      const auto resp = ep_.complete(req);
      res_.ledger.append({res_.calls, resp.prompt_tokens, resp.completion_tokens,
                          attempt == 0 ? label : label + "_retry_" + std::to_string(attempt)});
      ++res_.calls;
      Fields out;
      std::string problem;
      try {
        for (const auto& f : fields) out[f] = extract_json_field(resp.text, f);
        return out;
      } catch (const ExtractError& e) {
        problem = e.what();
      }
      if (attempt >= opt_.max_malformed_retries) {
        res_.flags.push_back(label + "_malformed");
        return std::nullopt;
      }
      ++res_.malformed_retries;
      std::string names;
      for (const auto& f : fields) names += (names.empty() ? "\"" : ", \"") + f + "\"";
      messages.push_back({"assistant", resp.text});
      messages.push_back({"user", "Your previous response could not be used (" + problem +
                                      "). Respond with valid JSON only, containing the fields " + names + "."});
    }
  }

  std::vector<Message> prompt(Stage s, const PromptContext& ctx = {}) const {
    auto m = build_prompt(inst_, s, ctx);
    if (opt_.spec.dummy_tokens > 0 && (s == Stage::induction || s == Stage::automatic || s == Stage::deduction))
      m = inject_dummy_tokens(std::move(m), opt_.spec.dummy_tokens);
    return m;
  }

  std::optional<Hypothesis> abduce(const std::string& label, double temperature, std::optional<std::uint64_t> seed,
                                   const std::string& origin) {
    const auto fields = reply_fields(inst_.dataset, Stage::abduction);
    const auto r = ask(prompt(Stage::abduction), fields, label, temperature, seed);
    if (!r) return std::nullopt;
    return to_hypothesis(*r, origin);
  }

  Hypothesis to_hypothesis(const Fields& f, const std::string& origin) const {
    Hypothesis h;
    h.kind = hypothesis_kind_of(inst_.dataset);
    h.origin = origin;
    switch (inst_.dataset) {
      case DatasetKind::listfn: h.text = f.at("function"); break;
      case DatasetKind::salt:
        h.text = f.at("vocabulary");
        h.grammar = f.at("grammar");
        break;
      default: h.text = f.at("pattern");
    }
    return h;
  }

  void deduce(const Hypothesis& h) {
    PromptContext ctx;
    ctx.hypothesis = &h;
    const auto r = ask(prompt(Stage::deduction, ctx), {answer_field(inst_.dataset)}, "deduction");
    settle(r);
  }

  void settle(const std::optional<Fields>& r) {
    if (!r) return;
    res_.final_answer = r->at(answer_field(inst_.dataset));
    res_.answered = true;
  }

  // Verify/refine loop; returns the surviving hypothesis.
  Hypothesis refine(Hypothesis h, int max_rounds, bool offer_stop) {
    for (int round = 1; round <= max_rounds; ++round) {
      res_.rounds_used = round;
      PromptContext ctx;
      ctx.hypothesis = &h;
      ctx.offer_stop = offer_stop;
      const auto tag = "_round_" + std::to_string(round);
      const auto v = ask(prompt(Stage::verification, ctx), {"verdict"}, "verification" + tag);
      std::string verdict = v ? lower(trim(v->at("verdict"))) : "";
      if (verdict == "valid" || (offer_stop && verdict == "stop")) break;
      if (verdict != "invalid") res_.flags.push_back("verdict_unparsed" + tag);
      const auto r = ask(prompt(Stage::refinement, ctx), reply_fields(inst_.dataset, Stage::refinement),
                         "refinement" + tag);
      if (!r) continue;
      h = to_hypothesis(*r, "refinement_round_" + std::to_string(round));
      res_.trail.push_back(h);
    }
    return h;
  }

  // k sampled hypotheses plus the selection call (k > 1).
  std::optional<Hypothesis> select(int k) {
    std::vector<Hypothesis> pool;
    for (int i = 0; i < k; ++i) {
      auto h = abduce(k == 1 ? "abduction" : "abduction_sample_" + std::to_string(i + 1), kSamplingTemperature,
                      derive_seed(opt_.seed, inst_.id, static_cast<std::uint64_t>(i)),
                      k == 1 ? "abduction" : "sample_" + std::to_string(i + 1));
      if (h) pool.push_back(std::move(*h));
    }
    res_.trail.insert(res_.trail.end(), pool.begin(), pool.end());
    if (pool.empty()) return std::nullopt;
    if (k == 1) return pool.front();
    if (pool.size() == 1) {
      res_.flags.push_back("selection_skipped_single_candidate");
      return pool.front();
    }
    PromptContext ctx;
    ctx.candidates = &pool;
    const auto r = ask(prompt(Stage::selection, ctx), {"choice"}, "selection");
    std::size_t idx = 0;
    bool ok = false;
    if (r) {
      try {
        std::size_t used = 0;
        const auto s = trim(r->at("choice"));
        const long v = std::stol(s, &used);
        if (used == s.size() && v >= 1 && static_cast<std::size_t>(v) <= pool.size()) {
          idx = static_cast<std::size_t>(v - 1);
          ok = true;
        }
      } catch (const std::exception&) {
      }
    }
    if (!ok) res_.flags.push_back("selection_fallback");
    auto chosen = pool[idx];
    chosen.origin = "selection";
    res_.trail.push_back(chosen);
    return chosen;
  }

  const TaskInstance& inst() const { return inst_; }

 private:
  const TaskInstance& inst_;
  Endpoint& ep_;
  const RunOptions& opt_;
  PipelineResult& res_;
};

template <typename Body>
PipelineResult guarded(const TaskInstance& inst, Endpoint& ep, const RunOptions& opt, Body body) {
  PipelineResult res;
  Session s(inst, ep, opt, res);
  try {
    body(s, res);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::auth || e.code() == ErrorCode::invalid_argument) throw;
    res.error = std::string(e.what());
    res.answered = false;
    res.final_answer.clear();
    res.flags.push_back("endpoint_error");
  }
  if (!res.answered) res.flags.push_back("unanswered");
  return res;
}

std::string vocab_text(const nlohmann::json& vocab) {
  std::string s;
  for (const auto& [k, v] : vocab.items()) s += (s.empty() ? "" : ", ") + k + " -> " + v.get<std::string>();
  return s;
}

}  // namespace

std::string_view to_string(Stage s) {
  static constexpr std::array<std::string_view, 7> names{"induction", "automatic",    "abduction", "deduction",
                                                         "selection", "verification", "refinement"};
  return names[static_cast<std::size_t>(s)];
}

std::string answer_field(DatasetKind dataset) { return dataset == DatasetKind::salt ? "translation" : "answer"; }

std::vector<std::string> reply_fields(DatasetKind dataset, Stage stage) {
  switch (stage) {
    case Stage::induction:
    case Stage::automatic:
    case Stage::deduction: return {answer_field(dataset)};
    case Stage::selection: return {"choice"};
    case Stage::verification: return {"verdict"};
    case Stage::abduction:
    case Stage::refinement: {
      std::vector<std::string> out;
      for (const auto& s : hypothesis_slots(dataset, false)) out.push_back(s.name);
      return out;
    }
  }
  return {};
}

std::vector<Message> build_prompt(const TaskInstance& inst, Stage stage, const PromptContext& ctx) {
  const auto d = inst.dataset;
  if (is_analogy(d) != std::holds_alternative<AnalogyInstance>(inst.body))
    fail(ErrorCode::invalid_argument, "instance " + inst.id + " body does not match its dataset");
  auto need_hypothesis = [&] {
    if (!ctx.hypothesis)
      fail(ErrorCode::invalid_argument, std::string(to_string(stage)) + " prompt needs a hypothesis");
    return hypothesis_text(d, *ctx.hypothesis);
  };
  std::string text;
  switch (stage) {
    case Stage::induction:
    case Stage::automatic:
      text = intro(d, false, nullptr) + "\n" + data_block(inst, true) + respond_prefix(d) +
             answer_schema(d, stage == Stage::automatic);
      break;
    case Stage::abduction: {
      text = intro(d, true, nullptr) + "\n" + data_block(inst, d == DatasetKind::vasr);
      if (d == DatasetKind::listfn) text += "Please infer the mapping function in python.\n" + std::string(kRespond) + "\n\n";
      else if (d == DatasetKind::salt) text += "Please infer the word mappings and syntax rules.\n" + respond_prefix(d);
      else text += respond_prefix(d);
      text += abduction_schema(d);
      break;
    }
    case Stage::deduction: {
      const auto h = need_hypothesis();
      text = intro(d, false, &h) + "\n" + data_block(inst, true) + respond_prefix(d) + answer_schema(d, true);
      break;
    }
    case Stage::selection: {
      if (!ctx.candidates || ctx.candidates->empty())
        fail(ErrorCode::invalid_argument, "selection prompt needs candidate hypotheses");
      text = hypothesis_context(inst) + "Below are candidate " + hypothesis_noun(d) + " hypotheses:\n";
      for (std::size_t i = 0; i < ctx.candidates->size(); ++i)
        text += "Candidate " + std::to_string(i + 1) + ": " + hypothesis_text(d, (*ctx.candidates)[i]) + "\n";
      text += "\nPlease select the candidate that best explains the examples.\n" + std::string(kRespond) + "\n\n" +
              schema({reasoning(), {"choice", "index of the best candidate here"}});
      break;
    }
    case Stage::verification: {
      const auto h = need_hypothesis();
      text = hypothesis_context(inst) + "Candidate " + hypothesis_noun(d) + ": " + h + "\n\n" +
             "Please verify whether the candidate is consistent with all the given examples.";
      if (ctx.offer_stop) text += " Answer \"stop\" if you judge that further refinement is unnecessary.";
      text += "\n" + std::string(kRespond) + "\n\n" +
              schema({reasoning(), {"verdict", ctx.offer_stop ? "valid, invalid, or stop" : "valid or invalid"}});
      break;
    }
    case Stage::refinement: {
      const auto h = need_hypothesis();
      std::vector<Slot> slots{reasoning()};
      for (auto& s : hypothesis_slots(d, true)) slots.push_back(s);
      text = hypothesis_context(inst) + "Candidate " + hypothesis_noun(d) + ": " + h + "\n\n" +
             "The candidate was judged inconsistent with the examples. Please revise it.\n" + std::string(kRespond) +
             "\n\n" + schema(slots);
      break;
    }
  }
  return {{"user", text}};
}

std::string dummy_filler(int length) {
  static const char* const words[] = {"and", "so", "then", "next"};
  std::string s;
  for (int i = 0; i < length; ++i) {
    if (i) s += ' ';
    s += words[i % 4];
  }
  return s;
}

std::vector<Message> inject_dummy_tokens(std::vector<Message> messages, int length) {
  if (length <= 0 || messages.empty()) return messages;
  auto& text = messages.back().content;
  const auto filler = dummy_filler(length);
  const std::string placeholder = "\"reasoning steps here\"";
  if (const auto p = text.rfind(placeholder); p != std::string::npos) {
    text.replace(p, placeholder.size(), "\"" + filler + "\"");
    return messages;
  }
  for (const char* field : {"\"answer\":", "\"translation\":"}) {
    const auto p = text.rfind(std::string("    ") + field);
    if (p == std::string::npos) continue;
    text.insert(p, "    \"reasoning\":\"" + filler + "\",\n");
    return messages;
  }
  fail(ErrorCode::invalid_argument, "no answer slot to place dummy tokens before");
}

PipelineResult run_induction(const TaskInstance& inst, Endpoint& ep, const RunOptions& opt) {
  return guarded(inst, ep, opt, [](Session& s, PipelineResult&) {
    s.settle(s.ask(s.prompt(Stage::induction), {answer_field(s.inst().dataset)}, "induction"));
  });
}

PipelineResult run_automatic(const TaskInstance& inst, Endpoint& ep, const RunOptions& opt) {
  return guarded(inst, ep, opt, [](Session& s, PipelineResult&) {
    s.settle(s.ask(s.prompt(Stage::automatic), {answer_field(s.inst().dataset)}, "automatic"));
  });
}

PipelineResult run_abd_ded(const TaskInstance& inst, Endpoint& ep, const RunOptions& opt) {
  return guarded(inst, ep, opt, [](Session& s, PipelineResult& res) {
    const auto h = s.abduce("abduction", kDefaultTemperature, std::nullopt, "abduction");
    if (!h) return;
    res.trail.push_back(*h);
    s.deduce(*h);
  });
}

PipelineResult run_selection(const TaskInstance& inst, int k, Endpoint& ep, const RunOptions& opt) {
  if (k < 1 || k > 10) fail(ErrorCode::invalid_argument, "k must be in 1..10");
  return guarded(inst, ep, opt, [k](Session& s, PipelineResult&) {
    const auto h = s.select(k);
    if (h) s.deduce(*h);
  });
}

PipelineResult run_refinement(const TaskInstance& inst, int max_rounds, Endpoint& ep, const RunOptions& opt) {
  if (max_rounds < 0 || max_rounds > 5) fail(ErrorCode::invalid_argument, "rounds must be in 0..5");
  return guarded(inst, ep, opt, [max_rounds](Session& s, PipelineResult& res) {
    const auto h = s.abduce("abduction", kDefaultTemperature, std::nullopt, "abduction");
    if (!h) return;
    res.trail.push_back(*h);
    s.deduce(s.refine(*h, max_rounds, false));
  });
}

PipelineResult run_adaptive(const TaskInstance& inst, Budget budget, Endpoint& ep, const RunOptions& opt) {
  const int n = budget == Budget::low ? 3 : 5;
  return guarded(inst, ep, opt, [n](Session& s, PipelineResult&) {
    const auto h = s.select(n);
    if (!h) return;
    s.deduce(s.refine(*h, n, true));
  });
}

Hypothesis gold_hypothesis(const TaskInstance& inst) {
  Hypothesis h;
  h.kind = hypothesis_kind_of(inst.dataset);
  h.origin = "gold";
  const auto& m = inst.meta;
  switch (inst.dataset) {
    case DatasetKind::listfn:
      if (!m.contains("program")) break;
      h.text = m.at("program").get<std::string>();
      return h;
    case DatasetKind::salt: {
      if (!m.contains("vocab") || !m.contains("rules")) break;
      h.text = vocab_text(m.at("vocab"));
      for (const auto& r : m.at("rules")) h.grammar += (h.grammar.empty() ? "" : ", ") + r.get<std::string>();
      return h;
    }
    case DatasetKind::raven: {
      if (!m.contains("rules")) break;
      for (const auto& r : m.at("rules")) {
        std::string d = "group " + r.at("group").dump() + " " + r.at("attribute").get<std::string>() + ": " +
                        r.at("rule").get<std::string>();
        if (r.contains("step")) d += " (step " + r.at("step").dump() + ")";
        h.text += (h.text.empty() ? "" : "; ") + d;
      }
      return h;
    }
    default: {
      const auto& a = std::get<AnalogyInstance>(inst.body);
      if (!a.pattern_gold) break;
      h.text = *a.pattern_gold;
      return h;
    }
  }
  fail(ErrorCode::invalid_argument, "instance " + inst.id + " carries no ground-truth rule");
}

PipelineResult run_gold_deduction(const TaskInstance& inst, Endpoint& ep, const RunOptions& opt) {
  const auto h = gold_hypothesis(inst);
  return guarded(inst, ep, opt, [&h](Session& s, PipelineResult& res) {
    res.trail.push_back(h);
    s.deduce(h);
  });
}

PipelineResult run_pipeline(const TaskInstance& inst, Endpoint& ep, const RunOptions& opt) {
  opt.spec.check();
  switch (opt.spec.kind) {
    case PipelineKind::induction: return run_induction(inst, ep, opt);
    case PipelineKind::automatic: return run_automatic(inst, ep, opt);
    case PipelineKind::abd_ded: return run_abd_ded(inst, ep, opt);
    case PipelineKind::selection: return run_selection(inst, opt.spec.k, ep, opt);
    case PipelineKind::refinement: return run_refinement(inst, opt.spec.rounds, ep, opt);
    case PipelineKind::adaptive: return run_adaptive(inst, opt.spec.budget, ep, opt);
    case PipelineKind::gold_deduction: return run_gold_deduction(inst, ep, opt);
  }
  fail(ErrorCode::internal, "unhandled pipeline kind");
}

std::vector<RunRecord> run_batch(const std::vector<TaskInstance>& instances, Endpoint& ep, const BatchOptions& opt) {
  opt.run.spec.check();
  if (opt.parallelism < 1) fail(ErrorCode::invalid_argument, "parallelism must be >= 1");
  for (const auto& inst : instances)
    if (!inst.difficulty)
      fail(ErrorCode::invalid_argument, "instance " + inst.id + " has no difficulty label; annotate it first");

  std::vector<RunRecord> out(instances.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= instances.size()) return;
      try {
        RunRecord rec;
        rec.instance = instances[i];
        rec.pipeline = opt.run.spec;
        rec.result = run_pipeline(instances[i], ep, opt.run);
        rec.model = ep.model();
        rec.timestamp = opt.timestamp;
        score_record(rec);
        out[i] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = instances.size();
        return;
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::min<long long>(opt.parallelism, std::max<std::size_t>(1, instances.size())));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace dualsys
