#include <doctest.h>

#include <cmath>

#include "dualsys/error.hpp"
#include "dualsys/scoring.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic_records.hpp"

using namespace dualsys;

TEST_SUITE("scoring") {
  TEST_CASE("json field extraction") {
    CHECK(extract_json_field("Sure!\n```json\n{\"answer\": \" down \"}\n```", "answer") == "down");
    CHECK(extract_json_field("{\"reasoning\": \"a {brace}\", \"answer\": 3}", "answer") == "3");
    CHECK(extract_json_field("x {not json} then {\"answer\": true}", "answer") == "true");
    auto kind = [](const std::string& text) {
      try {
        extract_json_field(text, "answer");
      } catch (const ExtractError& e) {
        return static_cast<int>(e.kind());
      }
      return -1;
    };
    CHECK(kind("no braces") == static_cast<int>(ExtractFailure::no_object));
    CHECK(kind("{\"other\": 1}") == static_cast<int>(ExtractFailure::field_absent));
    CHECK(kind("{\"answer\": [1, 2]}") == static_cast<int>(ExtractFailure::non_scalar));
  }

  TEST_CASE("option labels") {
    CHECK(option_index("B") == 1u);
    CHECK(option_index("b)") == 1u);
    CHECK(option_index("(C)") == 2u);
    CHECK(option_index("Option D") == 3u);
    CHECK(option_index("A. left") == 0u);
    CHECK_FALSE(option_index("banana"));
    CHECK_FALSE(option_index("Z"));
  }

  TEST_CASE("answer matching per format") {
    const std::vector<std::string> cands{"left", "down"};
    CHECK(match_answer("B", "down", DatasetKind::ekar, TaskFormat::mcq, cands));
    CHECK(match_answer("Down", "down", DatasetKind::ekar, TaskFormat::mcq, cands));
    CHECK_FALSE(match_answer("A", "down", DatasetKind::ekar, TaskFormat::mcq, cands));
    CHECK(match_answer(" Down ", "down", DatasetKind::ekar, TaskFormat::ftg));
    CHECK_FALSE(match_answer("downward", "down", DatasetKind::ekar, TaskFormat::ftg));
    CHECK(match_answer("[1,2, 3]", "[1, 2, 3]", DatasetKind::listfn, TaskFormat::ftg));
    CHECK_FALSE(match_answer("[1, 2]", "[1, 2, 3]", DatasetKind::listfn, TaskFormat::ftg));
    CHECK_FALSE(match_answer("not a list", "[1]", DatasetKind::listfn, TaskFormat::ftg));
    CHECK(match_answer("gkt ivo cbi prr.", "gkt ivo cbi prr.", DatasetKind::salt, TaskFormat::ftg));
    CHECK(match_answer("Gkt  ivo cbi prr", "gkt ivo cbi prr.", DatasetKind::salt, TaskFormat::ftg));
    CHECK_FALSE(match_answer("gkt ivo prr cbi.", "gkt ivo cbi prr.", DatasetKind::salt, TaskFormat::ftg));
    CHECK(match_answer("[0:(1,2,3)  4:(0,0,0)]", "[0:(1,2,3) 4:(0,0,0)]", DatasetKind::raven, TaskFormat::ftg));
    CHECK_FALSE(match_answer("", "down", DatasetKind::ekar, TaskFormat::ftg));
  }

  TEST_CASE("score_record") {
    RunRecord r;
    r.instance = fixtures::ekar_instance(TaskFormat::mcq);
    r.result.final_answer = "B";
    r.result.answered = true;
    CHECK(score_record(r));
    r.result.answered = false;
    CHECK_FALSE(score_record(r));
  }

  TEST_CASE("advantage on reference pairs") {
    auto near = [](double acc_sys2, double acc_ind, double want) {
      return std::abs(round_to(system2_advantage(acc_sys2, acc_ind), 2) - want) <= 0.05;
    };
    CHECK(near(59.13, 55.70, 6.16));
    CHECK(near(37.69, 28.58, 31.86));
    CHECK(near(11.33, 19.18, -40.93));
    CHECK(near(33.58, 23.42, 43.42));
    CHECK(format_signed_percent(system2_advantage(59.13, 55.70)) == "+6.16%");
    CHECK(format_signed_percent(system2_advantage(11.33, 19.18)) == "-40.93%");
    CHECK_THROWS_AS(system2_advantage(1, 0), Error);
  }

  TEST_CASE("rounding") {
    CHECK(round_to(2.675, 2) == doctest::Approx(2.68));
    CHECK(round_to(-2.675, 2) == doctest::Approx(-2.68));
    CHECK(round_to(0.125, 2) == doctest::Approx(0.13));
    CHECK(format_percent(59.125) == "59.13");
    CHECK(format_percent(55.7) == "55.70");
  }

  TEST_CASE("accuracy filter") {
    std::vector<RunRecord> recs;
    synth::add_block(recs, synth::spec(PipelineKind::induction), 4, 3);
    CHECK(accuracy(recs, nullptr).accuracy == doctest::Approx(75.0));
    CHECK_THROWS_AS(accuracy(recs, [](const RunRecord&) { return false; }), Error);
  }

  TEST_CASE("report grid shape") {
    std::vector<RunRecord> recs;
    synth::add_block(recs, synth::spec(PipelineKind::induction), 2508, 1397);
    synth::add_block(recs, synth::spec(PipelineKind::automatic), 2508, 1456);
    synth::add_block(recs, synth::spec(PipelineKind::abd_ded), 2508, 1483);
    const auto rep = build_report(recs);
    REQUIRE(rep.modality.rows == std::vector<std::string>{"induction", "automatic", "abd_ded"});
    CHECK(format_percent(rep.modality.cell("induction", "textual")->accuracy) == "55.70");
    CHECK(format_percent(rep.modality.cell("automatic", "textual")->accuracy) == "58.05");
    CHECK(format_percent(rep.modality.cell("abd_ded", "textual")->accuracy) == "59.13");
    REQUIRE(rep.modality.advantage[0]);
    CHECK(format_signed_percent(*rep.modality.advantage[0]) == "+6.16%");
    const auto csv = rep.to_csv();
    CHECK(csv.find("modality,abd_ded,textual,59.13,2508\n") != std::string::npos);
    CHECK(csv.find("modality,system2_advantage,textual,+6.16%,\n") != std::string::npos);
    const auto text = rep.to_text();
    CHECK(text.find("System 2 Advantage") != std::string::npos);
    CHECK(text.find("+6.16%") != std::string::npos);
  }

  TEST_CASE("token cells show rounds for iterative pipelines") {
    PipelineSpec high;
    high.kind = PipelineKind::adaptive;
    high.budget = Budget::high;
    std::vector<RunRecord> recs;
    const int rounds[] = {3, 4, 4, 4, 4};
    for (int i = 0; i < 5; ++i)
      recs.push_back(synth::record("h" + std::to_string(i), high, Modality::math_code, Difficulty::hard, TaskFormat::ftg,
                                   i < 3, 4308, rounds[i]));
    for (int i = 0; i < 2; ++i)
      recs.push_back(synth::record("b" + std::to_string(i), synth::spec(PipelineKind::induction), Modality::math_code,
                                   Difficulty::easy, TaskFormat::ftg, true, 989));
    const auto rep = build_report(recs);
    REQUIRE(rep.tokens.rows == std::vector<std::string>{"induction", "adaptive(high)"});
    CHECK(rep.tokens.cells[1][2]->render() == "4308.0 (3.8)");
    CHECK(rep.tokens.cells[0][0]->render() == "989.0");
    CHECK_FALSE(rep.tokens.cells[0][2]);
    CHECK(rep.tokens.row_accuracy[1] == doctest::Approx(60.0));
    CHECK(rep.to_text().find("4308.0 (3.8)") != std::string::npos);
    ReportOptions total;
    total.tokens = TokenMeasure::total;
    CHECK(build_report(recs, total).tokens.cells[1][2]->render() == "4318.0 (3.8)");
    CHECK_THROWS_AS(build_report({}), Error);
  }

  TEST_CASE("decoupled abduction and deduction") {
    const auto& reg = fixtures::registry();
    const auto set = fixtures::listfn_set(4, 6);
    std::vector<RunRecord> abd, ded;
    for (std::size_t i = 0; i < set.size(); ++i) {
      RunRecord a;
      a.instance = set[i];
      a.pipeline.kind = PipelineKind::abd_ded;
      a.result.trail.push_back({i < 2 ? set[i].meta["program"].get<std::string>() : "append 12345", "",
                                HypothesisKind::code_function, "abduction"});
      abd.push_back(a);
      RunRecord d;
      d.instance = set[i];
      d.pipeline.kind = PipelineKind::gold_deduction;
      d.correct = i != 3;
      ded.push_back(d);
    }
    const auto r = abduction_deduction_decoupled(abd, ded, reg, 1);
    CHECK(r.n == 4);
    CHECK(r.abduction == doctest::Approx(50.0));
    CHECK(r.deduction == doctest::Approx(75.0));
    ded.pop_back();
    CHECK_THROWS_AS(abduction_deduction_decoupled(abd, ded, reg, 1), Error);
    const auto table = render_decoupled({{"m1", {26.80, 86.64, 1}}, {"m2", {50.20, 90.72, 1}}, {"m3", {40.60, 92.56, 1}}});
    CHECK(table.find("Average,39.20,89.97\n") != std::string::npos);
  }
}
