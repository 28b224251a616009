#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dualsys/task_model.hpp"

namespace dualsys::salt {

enum class Pos { pronoun, noun, adjective, verb, adverb };

enum class SyntaxRule {
  word_to_word,
  noun_repetition,
  verb_repetition,
  adjective_repetition,
  noun_adjective_inversion,
  predicate_subject_inversion,
  verb_adverb_inversion,
};

enum class Complexity { simple, intermediate, complex };

std::string_view to_string(Pos p);
std::string_view to_string(SyntaxRule r);
std::string_view to_string(Complexity c);
Pos parse_pos(std::string_view s);
SyntaxRule parse_rule(std::string_view s);
Complexity parse_complexity(std::string_view s);

/// simple -> easy, intermediate -> medium, complex -> hard.
Difficulty difficulty_of(Complexity c);

/// One (rule, complexity) translation mode.
struct Mode {
  SyntaxRule rule;
  Complexity complexity;
};

/// The twelve modes, grouped easy / medium / hard, four each.
const std::vector<Mode>& mode_catalog();

/// POS skeleton; tokens [0, subject_len) form the subject constituent, the
/// remainder the predicate.
struct SentenceTemplate {
  std::vector<Pos> pos;
  std::size_t subject_len = 0;
  Complexity complexity = Complexity::simple;
};

struct TaggedSentence {
  std::vector<std::string> words;
  std::vector<Pos> tags;
  std::size_t subject_len = 0;
  std::string punct = ".";

  /// "Giant elephant runs quickly." (first letter capitalized).
  std::string text() const;
};

/// English word -> artificial token. Ordered for deterministic iteration.
using VocabMap = std::map<std::string, std::string>;

/// English lexicon used for the out-of-vocabulary guarantee.
class Lexicon {
 public:
  static Lexicon load(const std::string& path);
  explicit Lexicon(std::vector<std::string> words);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

  /// All three-letter lowercase strings absent from the lexicon, sorted.
  const std::vector<std::string>& free_tokens() const { return free_tokens_; }

 private:
  std::unordered_set<std::string> words_;
  std::vector<std::string> free_tokens_;
};

/// Injective map onto fresh 3-letter tokens none of which is in the lexicon.
/// Throws Error{infeasible} when the token space is exhausted.
VocabMap synth_vocab(const std::vector<std::string>& english_words, const Lexicon& lexicon, std::uint64_t seed);

struct RuleOutput {
  std::vector<std::string> tokens;
  std::vector<Pos> tags;
  std::size_t subject_len = 0;
  bool warning = false;  // rule referenced a POS absent from the sequence
};

RuleOutput apply_rule(const std::vector<std::string>& tokens, const std::vector<Pos>& tags, std::size_t subject_len,
                      SyntaxRule rule);

/// True iff `rule` changes (or, for word_to_word, applies to) the sentence.
bool exercises(const TaggedSentence& sentence, SyntaxRule rule);

/// Vocabulary substitution then rules in order; terminal punctuation kept.
/// Throws Error{invalid_argument} naming an unmapped word.
std::string translate(const TaggedSentence& sentence, const VocabMap& vocab, const std::vector<SyntaxRule>& rules);

struct WordBank {
  std::vector<std::string> pronoun;
  std::vector<std::string> animate_noun;
  std::vector<std::string> object_noun;
  std::vector<std::string> adjective;
  std::vector<std::pair<std::string, std::string>> transitive_verb;  // base, third person
  std::vector<std::pair<std::string, std::string>> intransitive_verb;
  std::vector<std::string> adverb;
};

struct Catalog {
  std::vector<SentenceTemplate> templates;
  WordBank bank;

  static Catalog load(const std::string& path);
  static Catalog from_json(const nlohmann::json& j);
};

struct SaltDemo {
  TaggedSentence english;
  std::string translation;
};

struct SaltTask {
  std::vector<SaltDemo> demos;
  TaggedSentence test;
  std::string gold_translation;
  std::vector<SyntaxRule> rules;
  VocabMap vocab;
  Complexity complexity = Complexity::simple;
  Difficulty difficulty = Difficulty::easy;
};

inline constexpr std::size_t kDemoCount = 4;

/// Throws Error{infeasible} when the pool has no template at `complexity`
/// exercising `rule`, or coverage cannot be met.
SaltTask build_task(const Catalog& catalog, const Lexicon& lexicon, SyntaxRule rule, Complexity complexity,
                    std::uint64_t seed);

/// (a) every test word appears in some demo; (b) every rule the test
/// exercises is exercised by some demo.
bool check_coverage(const SaltTask& task);

/// Up to k distinct wrong translations of the test sentence.
std::vector<std::string> make_distractors(const SaltTask& task, std::size_t k, std::uint64_t seed);

TaskInstance to_task_instance(const SaltTask& task, std::string id);

/// `count` tasks split evenly over the three tiers (remainder to the easier
/// tiers), each tier cycling through its four modes.
std::vector<TaskInstance> generate_batch(const Catalog& catalog, const Lexicon& lexicon, std::size_t count,
                                         std::uint64_t seed, TaskFormat format = TaskFormat::ftg);

}  // namespace dualsys::salt

namespace dualsys::salt {

/// Re-derives a SALT instance from its meta block: OOV vocabulary, injective
/// map, coverage, and demo/gold re-translation. One message per failure.
std::vector<std::string> audit_instance(const TaskInstance& instance, const Lexicon& lexicon);

}  // namespace dualsys::salt
