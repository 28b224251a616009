#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dualsys {

enum class Modality { textual, visual, symbolic, math_code, textual_icl };
enum class Difficulty { easy, medium, hard };
enum class TaskFormat { mcq, ftg };
enum class DatasetKind { ekar, vasr, raven, listfn, salt };
enum class HypothesisKind { free_text_pattern, code_function, vocab_and_grammar };

std::string_view to_string(Modality m);
std::string_view to_string(Difficulty d);
std::string_view to_string(TaskFormat f);
std::string_view to_string(DatasetKind k);
std::string_view to_string(HypothesisKind k);

// Parsers throw Error{schema} on unknown names.
Modality parse_modality(std::string_view s);
Difficulty parse_difficulty(std::string_view s);
TaskFormat parse_format(std::string_view s);
DatasetKind parse_dataset(std::string_view s);
HypothesisKind parse_hypothesis_kind(std::string_view s);

Modality modality_of(DatasetKind k);
HypothesisKind hypothesis_kind_of(DatasetKind k);
bool is_analogy(DatasetKind k);

/// A : A' :: B : B'. Items are canonical strings (symbolic panels serialized,
/// images as file references).
struct AnalogyInstance {
  std::string a;
  std::string a_prime;
  std::string b;
  std::string gold;
  std::vector<std::string> candidates;  // mcq only
  std::optional<std::string> pattern_gold;

  bool operator==(const AnalogyInstance&) const = default;
};

struct Demo {
  std::string input;
  std::string output;

  bool operator==(const Demo&) const = default;
};

/// n-shot input/output task with latent mapping `function_id`.
struct IclInstance {
  std::vector<Demo> demos;
  std::string test_input;
  std::string gold_output;
  std::string function_id;
  std::vector<std::string> candidates;  // mcq only

  bool operator==(const IclInstance&) const = default;
};

using TaskBody = std::variant<AnalogyInstance, IclInstance>;

struct TaskInstance {
  std::string id;
  Modality modality = Modality::textual;
  std::optional<Difficulty> difficulty;  // must be set before a pipeline run
  TaskFormat format = TaskFormat::ftg;
  DatasetKind dataset = DatasetKind::ekar;
  TaskBody body;
  nlohmann::json meta = nlohmann::json::object();  // dataset-specific extras

  const std::string& gold() const;
  const std::vector<std::string>& candidates() const;
  std::vector<std::string>& candidates();

  bool operator==(const TaskInstance&) const = default;
};

/// Intermediate pattern P_h. For vocab_and_grammar, `text` carries the
/// vocabulary mapping and `grammar` the syntax rules; otherwise `grammar` is
/// empty.
struct Hypothesis {
  std::string text;
  std::string grammar;
  HypothesisKind kind = HypothesisKind::free_text_pattern;
  std::string origin;  // "abduction", "selection", "refinement_round_<k>"

  bool operator==(const Hypothesis&) const = default;
};

enum class Violation {
  empty_id,
  modality_mismatch,
  body_mismatch,
  empty_gold,
  gold_not_in_candidates,
  gold_repeated_in_candidates,
  mcq_without_candidates,
  candidates_in_ftg,
  visual_not_mcq,
  no_demos,
  demo_inconsistent,
};

std::string_view to_string(Violation v);

/// Optional callback re-deriving f(input) for ICL instances; returns nullopt
/// when the function id is unknown to it.
using DemoOracle = std::function<std::optional<std::string>(const std::string& function_id,
                                                            const std::string& input)>;

/// One entry per broken invariant; empty iff the instance is well formed.
std::vector<Violation> validate_instance(const TaskInstance& instance,
                                         const DemoOracle& oracle = nullptr);

}  // namespace dualsys
