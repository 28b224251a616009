#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dualsys/task_model.hpp"

namespace dualsys {

struct LedgerEntry {
  int call = 0;
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  std::string label;  // "abduction", "selection", "verification_round_2", "abduction_retry_1", ...

  bool operator==(const LedgerEntry&) const = default;
};

/// Append-only per-run usage log.
class UsageLedger {
 public:
  void append(LedgerEntry e) { entries_.push_back(std::move(e)); }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  long long prompt_tokens() const;
  long long completion_tokens() const;
  long long total_tokens() const { return prompt_tokens() + completion_tokens(); }

  bool operator==(const UsageLedger&) const = default;

 private:
  std::vector<LedgerEntry> entries_;
};

enum class PipelineKind { induction, automatic, abd_ded, selection, refinement, adaptive, gold_deduction };
enum class Budget { low, high };

std::string_view to_string(PipelineKind k);
std::string_view to_string(Budget b);
PipelineKind parse_pipeline_kind(std::string_view s);
Budget parse_budget(std::string_view s);

struct PipelineSpec {
  PipelineKind kind = PipelineKind::induction;
  int k = 1;         // selection
  int rounds = 0;    // refinement
  Budget budget = Budget::low;
  int dummy_tokens = 0;

  /// "induction", "selection(k=3)", "refinement(rounds=2)", "adaptive(low)",
  /// with "+dummy(L)" when dummy tokens are injected.
  std::string label() const;
  /// Throws invalid_argument when k or rounds leave their ranges.
  void check() const;

  bool operator==(const PipelineSpec&) const = default;
};

struct PipelineResult {
  std::string final_answer;
  bool answered = false;
  std::vector<Hypothesis> trail;
  int calls = 0;
  int rounds_used = 0;
  UsageLedger ledger;
  int malformed_retries = 0;
  std::vector<std::string> flags;
  std::string error;  // set when the run aborted on an endpoint failure

  bool operator==(const PipelineResult&) const = default;
};

struct RunRecord {
  TaskInstance instance;
  PipelineSpec pipeline;
  PipelineResult result;
  std::string model;
  bool correct = false;
  std::string timestamp;

  bool operator==(const RunRecord&) const = default;
};

}  // namespace dualsys
