#include <doctest.h>

#include <set>

#include "dualsys/error.hpp"
#include "dualsys/raven.hpp"
#include "support/ref_raven.hpp"

using namespace dualsys;
using namespace dualsys::raven;

namespace {

// Table of (config, easy upper bound), medium is the next count.
struct Row {
  Configuration c;
  int easy_max;
};
const Row kTable[] = {
    {Configuration::center_single, 1},
    {Configuration::distribute_four, 2},
    {Configuration::distribute_nine, 2},
    {Configuration::in_center_single_out_center_single, 3},
    {Configuration::in_distribute_four_out_center_single, 3},
    {Configuration::up_center_single_down_center_single, 3},
    {Configuration::left_center_single_right_center_single, 4},
};

bool ref_check(const TaskInstance& t, const std::string& completion) {
  const auto& a = std::get<AnalogyInstance>(t.body);
  return ref::consistent(t.meta, a.a, a.a_prime, a.b, completion);
}

}  // namespace

TEST_SUITE("raven") {
  TEST_CASE("symbolic text round trip") {
    Panel p{{{0, {1, 2, 3}}, {3, {4, 5, 9}}}};
    const auto s = serialize_symbolic(p);
    CHECK(s == "[0:(1,2,3) 3:(4,5,9)]");
    CHECK(parse_symbolic(s) == p);
    CHECK(parse_symbolic("[]").entities.empty());
    CHECK(parse_symbolic("[ 0:(1,2,3)  3:(4,5,9) ]") == p);
    for (const char* bad : {"", "[0:(1,2)]", "[0:(1,2,3)", "0:(1,2,3)]", "[x:(1,2,3)]", "[3:(1,2,3) 0:(1,2,3)]"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_symbolic(bad), Error);
    }
  }

  TEST_CASE("difficulty thresholds per configuration") {
    for (const auto& row : kTable) {
      CAPTURE(to_string(row.c));
      for (int n = 1; n <= row.easy_max; ++n) CHECK(classify_raven_difficulty(row.c, n) == Difficulty::easy);
      CHECK(classify_raven_difficulty(row.c, row.easy_max + 1) == Difficulty::medium);
      for (int n = row.easy_max + 2; n <= 12; ++n) CHECK(classify_raven_difficulty(row.c, n) == Difficulty::hard);
    }
    CHECK(classify_raven_difficulty(Configuration::center_single, 2) == Difficulty::medium);
    CHECK(classify_raven_difficulty(Configuration::distribute_four, 3) == Difficulty::medium);
    CHECK(classify_raven_difficulty(Configuration::left_center_single_right_center_single, 6) == Difficulty::hard);
    CHECK_THROWS_AS(classify_raven_difficulty(Configuration::center_single, -1), Error);
  }

  TEST_CASE("count_transitions") {
    CHECK(count_transitions({}) == 0);
    CHECK(count_transitions({{0, Attribute::type, RuleKind::progression, 1},
                             {0, Attribute::size, RuleKind::constant, 0},
                             {0, Attribute::color, RuleKind::distribute_three, 0}}) == 2);
  }

  TEST_CASE("center_single with one transition") {
    const auto p = generate_matrix(Configuration::center_single, 1, 7);
    int non_constant = 0;
    for (const auto& r : p.rules) non_constant += r.kind != RuleKind::constant;
    CHECK(non_constant == 1);
    CHECK(p.n_transitions == 1);
    const auto q = generate_matrix(Configuration::center_single, 1, 7);
    CHECK(serialize_symbolic(p.gold()) == serialize_symbolic(q.gold()));
    CHECK(p.rules == q.rules);
    CHECK_THROWS_AS(generate_matrix(Configuration::center_single, 99, 1), Error);
    try {
      generate_matrix(Configuration::center_single, 0, 1);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::infeasible);
      CHECK(std::string(e.what()).find("[1, 3]") != std::string::npos);
    }
  }

  TEST_CASE("every feasible target on every configuration") {
    for (auto c : kAllConfigurations) {
      const auto [lo, hi] = feasible_transitions(c);
      for (int n = lo; n <= hi; ++n) {
        CAPTURE(to_string(c));
        CAPTURE(n);
        const auto p = generate_matrix(c, n, 1000 + static_cast<std::uint64_t>(n));
        CHECK(count_transitions(p.rules) == n);
        CHECK(p.n_transitions == n);
        REQUIRE(p.candidates.size() == 8);
        int consistent = 0;
        for (const auto& cand : p.candidates) consistent += completes(p, cand);
        CHECK(consistent == 1);
        CHECK(completes(p, p.gold()));
        std::set<std::string> distinct;
        for (const auto& cand : p.candidates) distinct.insert(serialize_symbolic(cand));
        CHECK(distinct.size() == 8);
      }
    }
  }

  TEST_CASE("independent row check agrees on generated batches") {
    const auto batch = generate_batch(std::nullopt, 140, 42);
    std::set<std::string> configs;
    for (const auto& t : batch) {
      CAPTURE(t.id);
      const auto& a = std::get<AnalogyInstance>(t.body);
      configs.insert(t.meta["config"].get<std::string>());
      CHECK(validate_instance(t).empty());
      CHECK(t.format == TaskFormat::mcq);
      CHECK(t.modality == Modality::symbolic);
      REQUIRE(a.candidates.size() == 8);
      int ok = 0;
      for (const auto& c : a.candidates) ok += ref_check(t, c) ? 1 : 0;
      CHECK(ok == 1);
      CHECK(ref_check(t, a.gold));
      int transitions = 0;
      for (const auto& r : t.meta["rules"]) transitions += r["rule"] != "constant";
      CHECK(transitions == t.meta["n_transitions"].get<int>());
      CHECK(t.difficulty == classify_raven_difficulty(parse_configuration(t.meta["config"].get<std::string>()), transitions));
    }
    CHECK(configs.size() == 7);
  }

  TEST_CASE("rule-breaking edit is rejected") {
    const auto p = generate_matrix(Configuration::distribute_four, 2, 3);
    auto wrong = p.gold();
    wrong.entities.front().entity.color = (wrong.entities.front().entity.color + 1) % kColorCount;
    CHECK_FALSE(completes(p, wrong));
    Panel stray = p.gold();
    stray.entities.push_back({40, stray.entities.front().entity});
    CHECK_FALSE(completes(p, stray));
  }

  TEST_CASE("render shows a blank") {
    const auto p = generate_matrix(Configuration::center_single, 2, 5);
    const auto r = render_incomplete(p.panels);
    CHECK(r.rfind("row 1: ", 0) == 0);
    CHECK(r.find("row 3: ") != std::string::npos);
    CHECK(r.back() == '?');
  }

  TEST_CASE("batches are deterministic and rotate tiers") {
    const auto a = generate_batch(Configuration::distribute_nine, 9, 8);
    CHECK(a == generate_batch(Configuration::distribute_nine, 9, 8));
    CHECK(a[0].difficulty == Difficulty::easy);
    CHECK(a[1].difficulty == Difficulty::medium);
    CHECK(a[2].difficulty == Difficulty::hard);
  }
}
