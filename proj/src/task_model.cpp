#include "dualsys/task_model.hpp"

#include <algorithm>
#include <array>

#include "dualsys/error.hpp"

namespace dualsys {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  fail(ErrorCode::schema, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 5> kModalities{"textual", "visual", "symbolic", "math_code",
                                                      "textual_icl"};
constexpr std::array<std::string_view, 3> kDifficulties{"easy", "medium", "hard"};
constexpr std::array<std::string_view, 2> kFormats{"mcq", "ftg"};
constexpr std::array<std::string_view, 5> kDatasets{"ekar", "vasr", "raven", "listfn", "salt"};
constexpr std::array<std::string_view, 3> kHypothesisKinds{"free_text_pattern", "code_function",
                                                           "vocab_and_grammar"};
constexpr std::array<std::string_view, 11> kViolations{
    "empty_id",        "modality_mismatch",  "body_mismatch",
    "empty_gold",      "gold_not_in_candidates", "gold_repeated_in_candidates",
    "mcq_without_candidates", "candidates_in_ftg", "visual_not_mcq",
    "no_demos",        "demo_inconsistent"};

}  // namespace

std::string_view to_string(Modality m) { return kModalities[static_cast<std::size_t>(m)]; }
std::string_view to_string(Difficulty d) { return kDifficulties[static_cast<std::size_t>(d)]; }
std::string_view to_string(TaskFormat f) { return kFormats[static_cast<std::size_t>(f)]; }
std::string_view to_string(DatasetKind k) { return kDatasets[static_cast<std::size_t>(k)]; }
std::string_view to_string(HypothesisKind k) { return kHypothesisKinds[static_cast<std::size_t>(k)]; }
std::string_view to_string(Violation v) { return kViolations[static_cast<std::size_t>(v)]; }

Modality parse_modality(std::string_view s) { return parse_enum<Modality>(s, kModalities, "modality"); }
Difficulty parse_difficulty(std::string_view s) { return parse_enum<Difficulty>(s, kDifficulties, "difficulty"); }
TaskFormat parse_format(std::string_view s) { return parse_enum<TaskFormat>(s, kFormats, "format"); }
DatasetKind parse_dataset(std::string_view s) { return parse_enum<DatasetKind>(s, kDatasets, "dataset"); }
HypothesisKind parse_hypothesis_kind(std::string_view s) {
  return parse_enum<HypothesisKind>(s, kHypothesisKinds, "hypothesis kind");
}

Modality modality_of(DatasetKind k) {
  switch (k) {
    case DatasetKind::ekar: return Modality::textual;
    case DatasetKind::vasr: return Modality::visual;
    case DatasetKind::raven: return Modality::symbolic;
    case DatasetKind::listfn: return Modality::math_code;
    case DatasetKind::salt: return Modality::textual_icl;
  }
  return Modality::textual;
}

HypothesisKind hypothesis_kind_of(DatasetKind k) {
  switch (k) {
    case DatasetKind::listfn: return HypothesisKind::code_function;
    case DatasetKind::salt: return HypothesisKind::vocab_and_grammar;
    default: return HypothesisKind::free_text_pattern;
  }
}

bool is_analogy(DatasetKind k) {
  return k == DatasetKind::ekar || k == DatasetKind::vasr || k == DatasetKind::raven;
}

const std::string& TaskInstance::gold() const {
  return std::visit(
      [](const auto& b) -> const std::string& {
        if constexpr (std::is_same_v<std::decay_t<decltype(b)>, AnalogyInstance>)
          return b.gold;
        else
          return b.gold_output;
      },
      body);
}

const std::vector<std::string>& TaskInstance::candidates() const {
  return std::visit([](const auto& b) -> const std::vector<std::string>& { return b.candidates; }, body);
}

std::vector<std::string>& TaskInstance::candidates() {
  return std::visit([](auto& b) -> std::vector<std::string>& { return b.candidates; }, body);
}

std::vector<Violation> validate_instance(const TaskInstance& instance, const DemoOracle& oracle) {
  std::vector<Violation> out;
  if (instance.id.empty()) out.push_back(Violation::empty_id);
  if (instance.modality != modality_of(instance.dataset)) out.push_back(Violation::modality_mismatch);

  const bool analogy_body = std::holds_alternative<AnalogyInstance>(instance.body);
  if (analogy_body != is_analogy(instance.dataset)) out.push_back(Violation::body_mismatch);

  const std::string& gold = instance.gold();
  const auto& candidates = instance.candidates();
  if (gold.empty()) out.push_back(Violation::empty_gold);

  if (instance.format == TaskFormat::mcq) {
    if (candidates.empty()) {
      out.push_back(Violation::mcq_without_candidates);
    } else {
      const auto hits = std::count(candidates.begin(), candidates.end(), gold);
      if (hits == 0) out.push_back(Violation::gold_not_in_candidates);
      if (hits > 1) out.push_back(Violation::gold_repeated_in_candidates);
    }
  } else if (!candidates.empty()) {
    out.push_back(Violation::candidates_in_ftg);
  }
  if (instance.modality == Modality::visual && instance.format != TaskFormat::mcq)
    out.push_back(Violation::visual_not_mcq);

  if (const auto* icl = std::get_if<IclInstance>(&instance.body)) {
    if (icl->demos.empty()) out.push_back(Violation::no_demos);
    if (oracle) {
      bool consistent = true;
      for (const auto& d : icl->demos) {
        const auto expected = oracle(icl->function_id, d.input);
        if (expected && *expected != d.output) consistent = false;
      }
      if (!consistent) out.push_back(Violation::demo_inconsistent);
    }
  }
  return out;
}

}  // namespace dualsys
