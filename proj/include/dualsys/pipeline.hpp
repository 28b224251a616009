#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dualsys/gateway.hpp"
#include "dualsys/records.hpp"
#include "dualsys/task_model.hpp"

namespace dualsys {

enum class Stage { induction, automatic, abduction, deduction, selection, verification, refinement };

std::string_view to_string(Stage s);

struct PromptContext {
  const Hypothesis* hypothesis = nullptr;               // deduction, verification, refinement
  const std::vector<Hypothesis>* candidates = nullptr;  // selection
  bool offer_stop = false;                              // adaptive verification
};

/// Fields the reply to `stage` must carry, in schema order.
std::vector<std::string> reply_fields(DatasetKind dataset, Stage stage);

/// "answer", or "translation" for SALT.
std::string answer_field(DatasetKind dataset);

/// Single user message instantiating the template for (dataset, stage).
/// Throws invalid_argument when a required context item is missing.
std::vector<Message> build_prompt(const TaskInstance& instance, Stage stage, const PromptContext& ctx = {});

/// `length` words from a fixed cycle of neutral words.
std::string dummy_filler(int length);

/// Places the filler as the "reasoning" value in the reply schema ahead of the
/// answer field: replaces the placeholder when the schema has one, otherwise
/// inserts the slot. length 0 returns the messages unchanged.
std::vector<Message> inject_dummy_tokens(std::vector<Message> messages, int length);

struct RunOptions {
  PipelineSpec spec;
  std::uint64_t seed = 0;
  int max_output_tokens = 2048;
  int max_malformed_retries = 2;
};

/// One instance through the configured pipeline. Endpoint failures other
/// than authentication end the run with result.error set; auth errors throw.
PipelineResult run_pipeline(const TaskInstance& instance, Endpoint& endpoint, const RunOptions& options);

PipelineResult run_induction(const TaskInstance& instance, Endpoint& endpoint, const RunOptions& options);
PipelineResult run_automatic(const TaskInstance& instance, Endpoint& endpoint, const RunOptions& options);
PipelineResult run_abd_ded(const TaskInstance& instance, Endpoint& endpoint, const RunOptions& options);
PipelineResult run_selection(const TaskInstance& instance, int k, Endpoint& endpoint, const RunOptions& options);
PipelineResult run_refinement(const TaskInstance& instance, int max_rounds, Endpoint& endpoint,
                              const RunOptions& options);
PipelineResult run_adaptive(const TaskInstance& instance, Budget budget, Endpoint& endpoint, const RunOptions& options);
/// Deduction given the generator's own rule for the instance.
PipelineResult run_gold_deduction(const TaskInstance& instance, Endpoint& endpoint, const RunOptions& options);

/// The generator's rule for an instance, phrased as a hypothesis.
Hypothesis gold_hypothesis(const TaskInstance& instance);

struct BatchOptions {
  RunOptions run;
  int parallelism = 1;
  std::string timestamp;
};

/// Runs every instance on a pool of `parallelism` workers. Records come back
/// in instance order, scored. Instances without a difficulty are rejected up
/// front.
std::vector<RunRecord> run_batch(const std::vector<TaskInstance>& instances, Endpoint& endpoint,
                                 const BatchOptions& options);

}  // namespace dualsys
