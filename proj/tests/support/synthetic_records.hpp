#pragma once
#include <cstdio>
#include <string>
#include <vector>

#include "dualsys/records.hpp"

namespace synth {

inline dualsys::RunRecord record(const std::string& id, dualsys::PipelineSpec spec, dualsys::Modality modality,
                                 dualsys::Difficulty difficulty, dualsys::TaskFormat format, bool correct,
                                 long long completion_tokens = 0, int rounds = 0) {
  dualsys::RunRecord r;
  r.instance.id = id;
  r.instance.modality = modality;
  r.instance.difficulty = difficulty;
  r.instance.format = format;
  r.instance.dataset = dualsys::DatasetKind::ekar;
  dualsys::AnalogyInstance a{"a", "b", "c", "d", {}, std::nullopt};
  if (format == dualsys::TaskFormat::mcq) a.candidates = {"d", "e"};
  r.instance.body = a;
  r.pipeline = spec;
  r.result.answered = true;
  r.result.final_answer = correct ? "d" : "e";
  r.result.rounds_used = rounds;
  r.result.calls = 1;
  r.result.ledger.append({0, 10, completion_tokens, "call"});
  r.correct = correct;
  r.model = "synthetic";
  return r;
}

inline dualsys::PipelineSpec spec(dualsys::PipelineKind k) {
  dualsys::PipelineSpec s;
  s.kind = k;
  return s;
}

// `n` textual mcq records under `spec`, `k` of them correct.
inline void add_block(std::vector<dualsys::RunRecord>& out, const dualsys::PipelineSpec& s, std::size_t n,
                      std::size_t k, dualsys::Modality m = dualsys::Modality::textual,
                      dualsys::Difficulty d = dualsys::Difficulty::easy) {
  for (std::size_t i = 0; i < n; ++i) {
    char id[48];
    std::snprintf(id, sizeof id, "%s-%zu", s.label().c_str(), i);
    out.push_back(record(id, s, m, d, dualsys::TaskFormat::mcq, i < k));
  }
}

}  // namespace synth
