#pragma once
#include <cstdio>
#include <vector>

#include "dualsys/listfn.hpp"
#include "dualsys/task_model.hpp"
#include "support/paths.hpp"

namespace fixtures {

inline const dualsys::listfn::Registry& registry() {
  static const auto r = dualsys::listfn::Registry::load(testpaths::data("listfn_registry.tsv"));
  return r;
}

// n list-function instances spread over the registry ranks.
inline std::vector<dualsys::TaskInstance> listfn_set(std::size_t n, std::uint64_t seed) {
  std::vector<dualsys::TaskInstance> out;
  const auto& all = registry().all();
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%03zu", i);
    out.push_back(dualsys::listfn::make_instance(all[(i * 5) % all.size()], 4, seed + i, id));
  }
  return out;
}

inline dualsys::TaskInstance ekar_instance(dualsys::TaskFormat format = dualsys::TaskFormat::ftg) {
  dualsys::TaskInstance t;
  t.id = "ekar-1";
  t.dataset = dualsys::DatasetKind::ekar;
  t.modality = dualsys::Modality::textual;
  t.format = format;
  t.difficulty = dualsys::Difficulty::easy;
  dualsys::AnalogyInstance a{"hot", "cold", "up", "down", {}, std::string("antonyms")};
  if (format == dualsys::TaskFormat::mcq) a.candidates = {"left", "down", "over", "above"};
  t.body = a;
  return t;
}

}  // namespace fixtures
