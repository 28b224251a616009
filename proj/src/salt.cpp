#include "dualsys/salt.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "dualsys/dataset_io.hpp"
#include "dualsys/error.hpp"
#include "dualsys/rng.hpp"

namespace dualsys::salt {

namespace {

constexpr std::array<std::string_view, 5> kPosNames{"pronoun", "noun", "adjective", "verb", "adverb"};
constexpr std::array<std::string_view, 7> kRuleNames{
    "word_to_word",         "noun_repetition",          "verb_repetition",
    "adjective_repetition", "noun_adjective_inversion", "predicate_subject_inversion",
    "verb_adverb_inversion"};
constexpr std::array<std::string_view, 3> kComplexityNames{"simple", "intermediate", "complex"};

template <std::size_t N>
std::size_t find_name(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return i;
  fail(ErrorCode::schema, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool has_tag(const std::vector<Pos>& tags, Pos p) { return std::find(tags.begin(), tags.end(), p) != tags.end(); }

bool has_adjacent(const std::vector<Pos>& tags, Pos first, Pos second) {
  for (std::size_t i = 0; i + 1 < tags.size(); ++i)
    if (tags[i] == first && tags[i + 1] == second) return true;
  return false;
}

// Swaps each adjacent (first, second) pair, scanning left to right.
RuleOutput swap_pairs(RuleOutput in, Pos first, Pos second) {
  if (!has_adjacent(in.tags, first, second)) {
    in.warning = true;
    return in;
  }
  for (std::size_t i = 0; i + 1 < in.tags.size();) {
    if (in.tags[i] == first && in.tags[i + 1] == second) {
      std::swap(in.tokens[i], in.tokens[i + 1]);
      std::swap(in.tags[i], in.tags[i + 1]);
      i += 2;
    } else {
      ++i;
    }
  }
  return in;
}

RuleOutput repeat_pos(const RuleOutput& in, Pos p) {
  if (!has_tag(in.tags, p)) {
    RuleOutput out = in;
    out.warning = true;
    return out;
  }
  RuleOutput out;
  for (std::size_t i = 0; i < in.tokens.size(); ++i) {
    const int copies = in.tags[i] == p ? 2 : 1;
    for (int c = 0; c < copies; ++c) {
      out.tokens.push_back(in.tokens[i]);
      out.tags.push_back(in.tags[i]);
    }
    if (i + 1 == in.subject_len) out.subject_len = out.tokens.size();
  }
  if (in.subject_len == 0) out.subject_len = 0;
  return out;
}

// Slot category used to populate templates with semantically plausible words.
std::string slot_category(const SentenceTemplate& t, std::size_t i) {
  switch (t.pos[i]) {
    case Pos::pronoun: return "pronoun";
    case Pos::adjective: return "adjective";
    case Pos::adverb: return "adverb";
    case Pos::noun: return i < t.subject_len ? "animate_noun" : "object_noun";
    case Pos::verb: {
      bool transitive = false;
      for (std::size_t j = i + 1; j < t.pos.size(); ++j)
        if (t.pos[j] == Pos::noun || t.pos[j] == Pos::adjective) transitive = true;
      const bool pronoun_subject = t.subject_len == 1 && t.pos[0] == Pos::pronoun;
      return std::string(transitive ? "tv_" : "iv_") + (pronoun_subject ? "base" : "third");
    }
  }
  return {};
}

std::vector<std::string> pool_for(const WordBank& bank, const std::string& category) {
  auto forms = [](const std::vector<std::pair<std::string, std::string>>& verbs, bool third) {
    std::vector<std::string> out;
    for (const auto& [base, thirdp] : verbs) out.push_back(third ? thirdp : base);
    return out;
  };
  if (category == "pronoun") return bank.pronoun;
  if (category == "animate_noun") return bank.animate_noun;
  if (category == "object_noun") return bank.object_noun;
  if (category == "adjective") return bank.adjective;
  if (category == "adverb") return bank.adverb;
  if (category == "tv_base") return forms(bank.transitive_verb, false);
  if (category == "tv_third") return forms(bank.transitive_verb, true);
  if (category == "iv_base") return forms(bank.intransitive_verb, false);
  if (category == "iv_third") return forms(bank.intransitive_verb, true);
  fail(ErrorCode::internal, "unknown slot category " + category);
}

struct Filled {
  TaggedSentence sentence;
  std::vector<std::string> categories;
};

Filled fill(const SentenceTemplate& t, const WordBank& bank, Rng& rng) {
  Filled f;
  f.sentence.tags = t.pos;
  f.sentence.subject_len = t.subject_len;
  std::set<std::string> used;
  for (std::size_t i = 0; i < t.pos.size(); ++i) {
    const auto category = slot_category(t, i);
    auto pool = pool_for(bank, category);
    std::erase_if(pool, [&](const std::string& w) { return used.count(w) > 0; });
    if (pool.empty()) fail(ErrorCode::infeasible, "word bank exhausted for category " + category);
    const auto& w = rng.pick(pool);
    used.insert(w);
    f.sentence.words.push_back(w);
    f.categories.push_back(category);
  }
  return f;
}

TaggedSentence probe_sentence(const SentenceTemplate& t) {
  TaggedSentence s;
  s.tags = t.pos;
  s.subject_len = t.subject_len;
  s.words.assign(t.pos.size(), "w");
  return s;
}

std::vector<std::string> strings_of(const nlohmann::json& j) { return j.get<std::vector<std::string>>(); }

std::vector<std::pair<std::string, std::string>> verb_pairs(const nlohmann::json& j) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : j) out.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  return out;
}

}  // namespace

std::string_view to_string(Pos p) { return kPosNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(SyntaxRule r) { return kRuleNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(Complexity c) { return kComplexityNames[static_cast<std::size_t>(c)]; }
Pos parse_pos(std::string_view s) { return static_cast<Pos>(find_name(kPosNames, s, "POS tag")); }
SyntaxRule parse_rule(std::string_view s) { return static_cast<SyntaxRule>(find_name(kRuleNames, s, "syntax rule")); }
Complexity parse_complexity(std::string_view s) {
  return static_cast<Complexity>(find_name(kComplexityNames, s, "complexity"));
}

Difficulty difficulty_of(Complexity c) {
  switch (c) {
    case Complexity::simple: return Difficulty::easy;
    case Complexity::intermediate: return Difficulty::medium;
    case Complexity::complex: return Difficulty::hard;
  }
  return Difficulty::easy;
}

const std::vector<Mode>& mode_catalog() {
  using enum SyntaxRule;
  static const std::vector<Mode> modes{
      {word_to_word, Complexity::simple},
      {noun_repetition, Complexity::simple},
      {noun_adjective_inversion, Complexity::simple},
      {predicate_subject_inversion, Complexity::simple},
      {word_to_word, Complexity::intermediate},
      {verb_repetition, Complexity::intermediate},
      {noun_adjective_inversion, Complexity::intermediate},
      {predicate_subject_inversion, Complexity::intermediate},
      {word_to_word, Complexity::complex},
      {adjective_repetition, Complexity::complex},
      {verb_adverb_inversion, Complexity::complex},
      {predicate_subject_inversion, Complexity::complex},
  };
  return modes;
}

std::string TaggedSentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out + punct;
}

Lexicon::Lexicon(std::vector<std::string> words) {
  for (auto& w : words) words_.insert(lower(w));
  std::string t = "aaa";
  for (char a = 'a'; a <= 'z'; ++a)
    for (char b = 'a'; b <= 'z'; ++b)
      for (char c = 'a'; c <= 'z'; ++c) {
        t = {a, b, c};
        if (!words_.count(t)) free_tokens_.push_back(t);
      }
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open lexicon " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.push_back(std::move(line));
  }
  return Lexicon(std::move(words));
}

bool Lexicon::contains(std::string_view word) const { return words_.count(lower(word)) > 0; }

VocabMap synth_vocab(const std::vector<std::string>& english_words, const Lexicon& lexicon, std::uint64_t seed) {
  std::set<std::string> unique(english_words.begin(), english_words.end());
  std::vector<std::string> pool = lexicon.free_tokens();
  if (unique.size() > pool.size())
    fail(ErrorCode::infeasible, "token space exhausted: " + std::to_string(unique.size()) + " words, " +
                                    std::to_string(pool.size()) + " free tokens");
  Rng rng(seed);
  VocabMap vocab;
  std::size_t next = 0;
  for (const auto& w : unique) {
    // Partial Fisher-Yates: draw without replacement.
    std::swap(pool[next], pool[next + rng.index(pool.size() - next)]);
    vocab.emplace(w, pool[next++]);
  }
  return vocab;
}

RuleOutput apply_rule(const std::vector<std::string>& tokens, const std::vector<Pos>& tags, std::size_t subject_len,
                      SyntaxRule rule) {
  if (tokens.size() != tags.size())
    fail(ErrorCode::invalid_argument, "POS tags not aligned with tokens");
  RuleOutput in{tokens, tags, subject_len, false};
  switch (rule) {
    case SyntaxRule::word_to_word: return in;
    case SyntaxRule::noun_repetition: return repeat_pos(in, Pos::noun);
    case SyntaxRule::verb_repetition: return repeat_pos(in, Pos::verb);
    case SyntaxRule::adjective_repetition: return repeat_pos(in, Pos::adjective);
    case SyntaxRule::noun_adjective_inversion: return swap_pairs(std::move(in), Pos::adjective, Pos::noun);
    case SyntaxRule::verb_adverb_inversion: return swap_pairs(std::move(in), Pos::verb, Pos::adverb);
    case SyntaxRule::predicate_subject_inversion: {
      if (subject_len == 0 || subject_len >= tokens.size()) {
        in.warning = true;
        return in;
      }
      RuleOutput out;
      out.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(subject_len), tokens.end());
      out.tokens.insert(out.tokens.end(), tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(subject_len));
      out.tags.assign(tags.begin() + static_cast<std::ptrdiff_t>(subject_len), tags.end());
      out.tags.insert(out.tags.end(), tags.begin(), tags.begin() + static_cast<std::ptrdiff_t>(subject_len));
      // The subject now trails; constituent boundary tracks the predicate.
      out.subject_len = tokens.size() - subject_len;
      return out;
    }
  }
  return in;
}

bool exercises(const TaggedSentence& s, SyntaxRule rule) {
  switch (rule) {
    case SyntaxRule::word_to_word: return !s.words.empty();
    case SyntaxRule::noun_repetition: return has_tag(s.tags, Pos::noun);
    case SyntaxRule::verb_repetition: return has_tag(s.tags, Pos::verb);
    case SyntaxRule::adjective_repetition: return has_tag(s.tags, Pos::adjective);
    case SyntaxRule::noun_adjective_inversion: return has_adjacent(s.tags, Pos::adjective, Pos::noun);
    case SyntaxRule::verb_adverb_inversion: return has_adjacent(s.tags, Pos::verb, Pos::adverb);
    case SyntaxRule::predicate_subject_inversion: return s.subject_len > 0 && s.subject_len < s.words.size();
  }
  return false;
}

std::string translate(const TaggedSentence& sentence, const VocabMap& vocab, const std::vector<SyntaxRule>& rules) {
  std::vector<std::string> tokens;
  for (const auto& w : sentence.words) {
    auto it = vocab.find(w);
    if (it == vocab.end()) it = vocab.find(lower(w));
    if (it == vocab.end()) fail(ErrorCode::invalid_argument, "unmapped word '" + w + "'");
    tokens.push_back(it->second);
  }
  RuleOutput cur{std::move(tokens), sentence.tags, sentence.subject_len, false};
  for (auto rule : rules) cur = apply_rule(cur.tokens, cur.tags, cur.subject_len, rule);
  std::string out;
  for (std::size_t i = 0; i < cur.tokens.size(); ++i) {
    if (i) out += ' ';
    out += cur.tokens[i];
  }
  return out + sentence.punct;
}

Catalog Catalog::from_json(const nlohmann::json& j) {
  Catalog c;
  for (const auto& t : j.at("templates")) {
    SentenceTemplate st;
    for (const auto& p : t.at("pos")) st.pos.push_back(parse_pos(p.get<std::string>()));
    st.subject_len = t.at("subject").get<std::size_t>();
    st.complexity = parse_complexity(t.at("complexity").get<std::string>());
    if (st.subject_len == 0 || st.subject_len >= st.pos.size())
      fail(ErrorCode::schema, "template subject span must leave a non-empty predicate");
    c.templates.push_back(std::move(st));
  }
  const auto& b = j.at("bank");
  c.bank.pronoun = strings_of(b.at("pronoun"));
  c.bank.animate_noun = strings_of(b.at("animate_noun"));
  c.bank.object_noun = strings_of(b.at("object_noun"));
  c.bank.adjective = strings_of(b.at("adjective"));
  c.bank.adverb = strings_of(b.at("adverb"));
  c.bank.transitive_verb = verb_pairs(b.at("transitive_verb"));
  c.bank.intransitive_verb = verb_pairs(b.at("intransitive_verb"));
  return c;
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open SALT catalog " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, "SALT catalog " + path + ": " + e.what());
  }
}

SaltTask build_task(const Catalog& catalog, const Lexicon& lexicon, SyntaxRule rule, Complexity complexity,
                    std::uint64_t seed) {
  std::vector<const SentenceTemplate*> tier, bearing;
  for (const auto& t : catalog.templates) {
    if (t.complexity != complexity) continue;
    tier.push_back(&t);
    if (exercises(probe_sentence(t), rule)) bearing.push_back(&t);
  }
  if (bearing.empty())
    fail(ErrorCode::infeasible, "no " + std::string(to_string(complexity)) + " template exercises " +
                                    std::string(to_string(rule)));

  Rng rng(seed);
  for (int attempt = 0; attempt < 500; ++attempt) {
    const auto test = fill(*rng.pick(bearing), catalog.bank, rng);

    std::vector<const SentenceTemplate*> demo_templates{rng.pick(bearing)};
    while (demo_templates.size() < kDemoCount) demo_templates.push_back(rng.pick(tier));
    rng.shuffle(demo_templates);
    std::vector<Filled> demos;
    for (const auto* t : demo_templates) demos.push_back(fill(*t, catalog.bank, rng));

    // Place every test word into some demo slot of the same category.
    std::vector<std::vector<bool>> reserved(demos.size());
    for (std::size_t d = 0; d < demos.size(); ++d) reserved[d].assign(demos[d].sentence.words.size(), false);
    std::vector<std::size_t> order(test.sentence.words.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    bool placed_all = true;
    for (std::size_t i : order) {
      const auto& word = test.sentence.words[i];
      const auto& category = test.categories[i];
      bool covered = false;
      for (const auto& d : demos)
        if (std::find(d.sentence.words.begin(), d.sentence.words.end(), word) != d.sentence.words.end())
          covered = true;
      if (covered) continue;
      std::vector<std::pair<std::size_t, std::size_t>> slots;
      for (std::size_t d = 0; d < demos.size(); ++d)
        for (std::size_t s = 0; s < demos[d].categories.size(); ++s)
          if (!reserved[d][s] && demos[d].categories[s] == category) slots.emplace_back(d, s);
      if (slots.empty()) {
        placed_all = false;
        break;
      }
      const auto [d, s] = rng.pick(slots);
      demos[d].sentence.words[s] = word;
      reserved[d][s] = true;
    }
    if (!placed_all) continue;

    bool duplicate = false;
    std::set<std::string> seen{test.sentence.text()};
    for (const auto& d : demos) {
      std::set<std::string> words(d.sentence.words.begin(), d.sentence.words.end());
      if (words.size() != d.sentence.words.size() || !seen.insert(d.sentence.text()).second) duplicate = true;
    }
    if (duplicate) continue;

    SaltTask task;
    task.rules = {rule};
    task.complexity = complexity;
    task.difficulty = difficulty_of(complexity);
    task.test = test.sentence;
    std::vector<std::string> all_words = test.sentence.words;
    for (const auto& d : demos) all_words.insert(all_words.end(), d.sentence.words.begin(), d.sentence.words.end());
    task.vocab = synth_vocab(all_words, lexicon, rng.next());
    for (const auto& d : demos) task.demos.push_back({d.sentence, translate(d.sentence, task.vocab, task.rules)});
    task.gold_translation = translate(task.test, task.vocab, task.rules);
    if (check_coverage(task)) return task;
  }
  fail(ErrorCode::infeasible, "could not satisfy compositional coverage for " + std::string(to_string(rule)) + "/" +
                                  std::string(to_string(complexity)));
}

bool check_coverage(const SaltTask& task) {
  for (const auto& w : task.test.words) {
    bool found = false;
    for (const auto& d : task.demos)
      if (std::find(d.english.words.begin(), d.english.words.end(), w) != d.english.words.end()) found = true;
    if (!found) return false;
  }
  for (auto rule : task.rules) {
    if (!exercises(task.test, rule)) continue;
    bool shown = false;
    for (const auto& d : task.demos)
      if (exercises(d.english, rule)) shown = true;
    if (!shown) return false;
  }
  return true;
}

std::vector<std::string> make_distractors(const SaltTask& task, std::size_t k, std::uint64_t seed) {
  std::set<std::string> seen{task.gold_translation};
  std::vector<std::string> pool;
  auto offer = [&](std::string s) {
    if (seen.insert(s).second) pool.push_back(std::move(s));
  };
  for (std::size_t r = 0; r < kRuleNames.size(); ++r) {
    const auto other = static_cast<SyntaxRule>(r);
    if (std::find(task.rules.begin(), task.rules.end(), other) != task.rules.end()) continue;
    offer(translate(task.test, task.vocab, {other}));
  }
  // Adjacent swaps of the gold token sequence.
  std::string body = task.gold_translation.substr(0, task.gold_translation.size() - task.test.punct.size());
  std::vector<std::string> toks;
  for (std::size_t start = 0; start < body.size();) {
    const auto end = body.find(' ', start);
    toks.push_back(body.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    auto t = toks;
    std::swap(t[i], t[i + 1]);
    std::string s;
    for (std::size_t j = 0; j < t.size(); ++j) s += (j ? " " : "") + t[j];
    offer(s + task.test.punct);
  }
  Rng rng(seed);
  rng.shuffle(pool);
  if (pool.size() > k) pool.resize(k);
  return pool;
}

TaskInstance to_task_instance(const SaltTask& task, std::string id) {
  IclInstance body;
  for (const auto& d : task.demos) body.demos.push_back({d.english.text(), d.translation});
  body.test_input = task.test.text();
  body.gold_output = task.gold_translation;
  std::string fid = "salt:";
  for (std::size_t i = 0; i < task.rules.size(); ++i) fid += (i ? "+" : "") + std::string(to_string(task.rules[i]));
  body.function_id = fid;

  TaskInstance t;
  t.id = std::move(id);
  t.dataset = DatasetKind::salt;
  t.modality = Modality::textual_icl;
  t.format = TaskFormat::ftg;
  t.difficulty = task.difficulty;
  t.body = std::move(body);

  auto sentence_json = [](const TaggedSentence& s) {
    nlohmann::json tags = nlohmann::json::array();
    for (auto p : s.tags) tags.push_back(to_string(p));
    return nlohmann::json{{"words", s.words}, {"tags", tags}, {"subject_len", s.subject_len}, {"punct", s.punct}};
  };
  nlohmann::json rules = nlohmann::json::array();
  for (auto r : task.rules) rules.push_back(to_string(r));
  nlohmann::json demos = nlohmann::json::array();
  for (const auto& d : task.demos) demos.push_back(sentence_json(d.english));
  t.meta = {{"rules", rules},
            {"complexity", to_string(task.complexity)},
            {"vocab", task.vocab},
            {"test", sentence_json(task.test)},
            {"demo_sentences", demos}};
  return t;
}

std::vector<TaskInstance> generate_batch(const Catalog& catalog, const Lexicon& lexicon, std::size_t count,
                                         std::uint64_t seed, TaskFormat format) {
  const auto& modes = mode_catalog();
  std::vector<TaskInstance> out;
  out.reserve(count);
  std::size_t index = 0;
  for (std::size_t tier = 0; tier < 3; ++tier) {
    const std::size_t quota = count / 3 + (tier < count % 3 ? 1 : 0);
    for (std::size_t j = 0; j < quota; ++j, ++index) {
      const Mode& mode = modes[tier * 4 + j % 4];
      char id[32];
      std::snprintf(id, sizeof id, "salt-%05zu", index);
      const auto task = build_task(catalog, lexicon, mode.rule, mode.complexity, derive_seed(seed, id));
      auto inst = to_task_instance(task, id);
      if (format == TaskFormat::mcq)
        inst = project_mcq(inst, make_distractors(task, 3, derive_seed(seed, id, 2)), seed);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

}  // namespace dualsys::salt

namespace dualsys::salt {

std::vector<std::string> audit_instance(const TaskInstance& inst, const Lexicon& lexicon) {
  std::vector<std::string> problems;
  const auto* icl = std::get_if<IclInstance>(&inst.body);
  if (!icl) return {"not an in-context instance"};
  try {
    const auto& m = inst.meta;
    auto sentence = [](const nlohmann::json& j) {
      TaggedSentence s;
      s.words = j.at("words").get<std::vector<std::string>>();
      for (const auto& t : j.at("tags")) s.tags.push_back(parse_pos(t.get<std::string>()));
      s.subject_len = j.at("subject_len").get<std::size_t>();
      s.punct = j.at("punct").get<std::string>();
      return s;
    };
    SaltTask task;
    task.vocab = m.at("vocab").get<VocabMap>();
    for (const auto& r : m.at("rules")) task.rules.push_back(parse_rule(r.get<std::string>()));
    task.test = sentence(m.at("test"));
    const auto& demos = m.at("demo_sentences");
    if (demos.size() != icl->demos.size()) problems.push_back("demo count differs from meta");
    for (std::size_t i = 0; i < demos.size() && i < icl->demos.size(); ++i) {
      const auto s = sentence(demos[i]);
      task.demos.push_back({s, icl->demos[i].output});
      if (s.text() != icl->demos[i].input) problems.push_back("demo " + std::to_string(i + 1) + " text mismatch");
      if (translate(s, task.vocab, task.rules) != icl->demos[i].output)
        problems.push_back("demo " + std::to_string(i + 1) + " translation mismatch");
    }
    if (task.test.text() != icl->test_input) problems.push_back("test sentence mismatch");
    if (translate(task.test, task.vocab, task.rules) != icl->gold_output) problems.push_back("gold translation mismatch");
    std::set<std::string> targets;
    for (const auto& [w, t] : task.vocab) {
      if (lexicon.contains(t)) problems.push_back("token '" + t + "' is an English word");
      if (!targets.insert(t).second) problems.push_back("token '" + t + "' assigned twice");
    }
    if (!check_coverage(task)) problems.push_back("demos do not cover the test sentence");
  } catch (const std::exception& e) {
    problems.push_back(std::string("meta unreadable: ") + e.what());
  }
  return problems;
}

}  // namespace dualsys::salt
