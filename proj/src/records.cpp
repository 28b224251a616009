#include "dualsys/records.hpp"

#include <array>

#include "dualsys/error.hpp"

namespace dualsys {

namespace {
constexpr std::array<std::string_view, 7> kKinds{"induction",  "automatic", "abd_ded",       "selection",
                                                 "refinement", "adaptive",  "gold_deduction"};
constexpr std::array<std::string_view, 2> kBudgets{"low", "high"};
}  // namespace

long long UsageLedger::prompt_tokens() const {
  long long t = 0;
  for (const auto& e : entries_) t += e.prompt_tokens;
  return t;
}

long long UsageLedger::completion_tokens() const {
  long long t = 0;
  for (const auto& e : entries_) t += e.completion_tokens;
  return t;
}

std::string_view to_string(PipelineKind k) { return kKinds[static_cast<std::size_t>(k)]; }
std::string_view to_string(Budget b) { return kBudgets[static_cast<std::size_t>(b)]; }

PipelineKind parse_pipeline_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKinds.size(); ++i)
    if (kKinds[i] == s) return static_cast<PipelineKind>(i);
  fail(ErrorCode::invalid_argument, "unknown pipeline '" + std::string(s) + "'");
}

Budget parse_budget(std::string_view s) {
  for (std::size_t i = 0; i < kBudgets.size(); ++i)
    if (kBudgets[i] == s) return static_cast<Budget>(i);
  fail(ErrorCode::invalid_argument, "unknown budget '" + std::string(s) + "' (expected low|high)");
}

std::string PipelineSpec::label() const {
  std::string s(to_string(kind));
  switch (kind) {
    case PipelineKind::selection: s += "(k=" + std::to_string(k) + ")"; break;
    case PipelineKind::refinement: s += "(rounds=" + std::to_string(rounds) + ")"; break;
    case PipelineKind::adaptive: s += "(" + std::string(to_string(budget)) + ")"; break;
    default: break;
  }
  if (dummy_tokens > 0) s += "+dummy(" + std::to_string(dummy_tokens) + ")";
  return s;
}

void PipelineSpec::check() const {
  if (kind == PipelineKind::selection && (k < 1 || k > 10))
    fail(ErrorCode::invalid_argument, "k must be in 1..10, got " + std::to_string(k));
  if (kind == PipelineKind::refinement && (rounds < 0 || rounds > 5))
    fail(ErrorCode::invalid_argument, "rounds must be in 0..5, got " + std::to_string(rounds));
  if (dummy_tokens < 0) fail(ErrorCode::invalid_argument, "dummy token count must be >= 0");
}

}  // namespace dualsys
