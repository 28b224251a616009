#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualsys/error.hpp"
#include "dualsys/listfn.hpp"
#include "dualsys/records.hpp"

namespace dualsys {

enum class ExtractFailure { no_object, field_absent, non_scalar };

class ExtractError : public Error {
 public:
  ExtractError(ExtractFailure kind, const std::string& what) : Error(ErrorCode::parse, what), kind_(kind) {}
  ExtractFailure kind() const noexcept { return kind_; }

 private:
  ExtractFailure kind_;
};

/// First parseable JSON object in `text`, tolerating prose and code fences.
std::optional<nlohmann::json> first_json_object(const std::string& text);

/// Named scalar field of the first JSON object, trimmed. Numbers and booleans
/// are rendered as JSON text. Throws ExtractError.
std::string extract_json_field(const std::string& text, const std::string& field);

/// Option letter in "B", "B)", "(b)", "Option B", "B. foo"; nullopt otherwise.
std::optional<std::size_t> option_index(const std::string& pred);

/// MCQ: option label or option text, case-insensitive. FTG per dataset:
/// raven symbolic equality, listfn element-wise, salt normalized tokens,
/// otherwise trimmed case-insensitive exact match.
bool match_answer(const std::string& pred, const std::string& gold, DatasetKind dataset, TaskFormat format,
                  const std::vector<std::string>& candidates = {});

/// Sets rec.correct from the result and the instance's gold; returns it.
bool score_record(RunRecord& rec);

struct ReportCell {
  std::string row;
  std::string column;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0;  // percent, unrounded
};

/// Throws Error{empty_selection} when nothing matches.
ReportCell accuracy(const std::vector<RunRecord>& records, const std::function<bool(const RunRecord&)>& filter);

/// 100 * (sys2 - induction) / induction. Throws invalid_argument on a zero baseline.
double system2_advantage(double acc_sys2, double acc_induction);

/// Half away from zero.
double round_to(double value, int decimals);
std::string format_percent(double value);        // "59.13"
std::string format_signed_percent(double value); // "+6.16%"

using HypothesisExecutor =
    std::function<std::optional<listfn::List>(const std::string& hypothesis, const listfn::List& input)>;

/// Runs hypotheses written in the list DSL; anything else is rejected.
HypothesisExecutor dsl_executor();

struct DecoupledAccuracy {
  double abduction = 0;
  double deduction = 0;
  std::size_t n = 0;
};

/// Abduction correct iff the first hypothesis reproduces the registry
/// function on every held-out input; deduction is the plain accuracy of the
/// second record set. Both sets must cover the same instance ids.
DecoupledAccuracy abduction_deduction_decoupled(const std::vector<RunRecord>& abduction_records,
                                                const std::vector<RunRecord>& deduction_records,
                                                const listfn::Registry& registry, std::uint64_t seed = 0,
                                                std::size_t held_out = 10,
                                                const HypothesisExecutor& execute = dsl_executor());

/// "model,abduction,deduction" rows plus an Average row.
std::string render_decoupled(const std::vector<std::pair<std::string, DecoupledAccuracy>>& rows);

enum class TokenMeasure { completion, prompt, total };
TokenMeasure parse_token_measure(std::string_view s);

struct ReportOptions {
  TokenMeasure tokens = TokenMeasure::completion;
  std::string baseline = "induction";
  std::string system2 = "abd_ded";
};

struct AccuracyGrid {
  std::string title;
  std::vector<std::string> rows;     // pipeline labels
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<ReportCell>>> cells;
  std::vector<std::optional<double>> advantage;  // per column, unrounded

  const ReportCell* cell(const std::string& row, const std::string& column) const;
};

struct TokenCell {
  double mean_tokens = 0;
  double mean_rounds = 0;
  std::size_t n = 0;
  bool show_rounds = false;

  std::string render() const;  // "4308.0 (3.8)" or "989.0"
};

struct TokenGrid {
  std::vector<std::string> rows;
  std::vector<std::string> columns;  // easy, medium, hard
  std::vector<std::vector<std::optional<TokenCell>>> cells;
  std::vector<double> row_accuracy;
  TokenMeasure measure = TokenMeasure::completion;
};

struct Report {
  AccuracyGrid modality;
  AccuracyGrid difficulty;
  AccuracyGrid format;
  TokenGrid tokens;

  std::string to_csv() const;
  std::string to_text() const;
};

Report build_report(const std::vector<RunRecord>& records, const ReportOptions& options = {});

}  // namespace dualsys
