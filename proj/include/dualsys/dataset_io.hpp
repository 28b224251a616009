#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualsys/records.hpp"
#include "dualsys/task_model.hpp"

namespace dualsys {

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const TaskInstance& inst);
/// Throws Error{schema} on missing or ill-typed fields.
TaskInstance instance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunRecord& rec);
RunRecord record_from_json(const nlohmann::json& j);

/// Every line must parse, carry the current schema version, match `kind`
/// when given, and pass validate_instance. Errors name the line.
std::vector<TaskInstance> load_dataset(const std::string& path, std::optional<DatasetKind> kind = std::nullopt,
                                       const DemoOracle& oracle = nullptr);

/// Truncates and writes one line per instance.
void save_dataset(const std::vector<TaskInstance>& instances, const std::string& path);

/// Candidates = shuffle of {gold} + distractors seeded from (seed, instance id).
TaskInstance project_mcq(const TaskInstance& instance, const std::vector<std::string>& distractors, std::uint64_t seed);

/// Drops candidates. Visual instances are rejected.
TaskInstance project_ftg(const TaskInstance& instance);

/// Appends one line per record; returns the count written.
std::size_t write_run_records(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> load_run_records(const std::string& path);

/// E-KAR release items: {"id", "question": "a:b", "choices": {"label": [...],
/// "text": ["c:d", ...]}, "answerKey": "B"}; JSON array or JSONL. Terms are
/// split on the last ':'; MCQ candidates are the completing terms.
std::vector<TaskInstance> ingest_ekar(const std::string& path, TaskFormat format = TaskFormat::mcq);

/// VASR release items: {"A_img", "B_img", "C_img", "D_img", "candidates":
/// [...], "label": <index of D_img>}; JSON array or JSONL. MCQ only.
std::vector<TaskInstance> ingest_vasr(const std::string& path);

}  // namespace dualsys
