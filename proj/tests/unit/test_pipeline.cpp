#include <doctest.h>

#include "dualsys/dataset_io.hpp"
#include "dualsys/error.hpp"
#include "dualsys/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/scripted.hpp"

using namespace dualsys;

namespace {

RunOptions opts(PipelineKind kind, int k = 1, int rounds = 0, Budget budget = Budget::low) {
  RunOptions o;
  o.spec.kind = kind;
  o.spec.k = k;
  o.spec.rounds = rounds;
  o.spec.budget = budget;
  o.seed = 17;
  return o;
}

long long sum_completion(const PipelineResult& r) {
  long long s = 0;
  for (const auto& e : r.ledger.entries()) s += e.completion_tokens;
  return s;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("textual induction prompt matches the template") {
    const auto m = build_prompt(fixtures::ekar_instance(), Stage::induction);
    REQUIRE(m.size() == 1);
    CHECK(m[0].role == "user");
    CHECK(m[0].content ==
          "Below is an analogy question, where analogy x:y::x':y' exists between the two wordsets, your task is to "
          "finish the second wordset to complete the analogy.\n"
          "Wordset1: hot:cold\nWordset2: up:[missing_word]\n  \n"
          "Your response should strictly follow the JSON dict format:\n\n"
          "{\n    \"answer\": \"missing word here\"\n}");
  }

  TEST_CASE("textual abduction keeps the reference schema verbatim") {
    const auto m = build_prompt(fixtures::ekar_instance(), Stage::abduction);
    CHECK(m[0].content.find("{\n    \"reasoning\": \"reasoning steps here\"\n    \"pattern\": \"relational pattern here\"\n}") !=
          std::string::npos);
  }

  TEST_CASE("deduction carries the hypothesis and a reasoning slot") {
    Hypothesis h{"opposites", "", HypothesisKind::free_text_pattern, "abduction"};
    PromptContext ctx;
    ctx.hypothesis = &h;
    const auto m = build_prompt(fixtures::ekar_instance(), Stage::deduction, ctx);
    CHECK(m[0].content.find("complete the analogy. Here's the relational pattern: opposites\n") != std::string::npos);
    CHECK(m[0].content.find("\"reasoning\":\"reasoning steps here\",\n    \"answer\": \"missing word here\"") !=
          std::string::npos);
    CHECK_THROWS_AS(build_prompt(fixtures::ekar_instance(), Stage::deduction), Error);
  }

  TEST_CASE("mcq prompts list lettered options") {
    const auto m = build_prompt(fixtures::ekar_instance(TaskFormat::mcq), Stage::induction);
    CHECK(m[0].content.find("Options:\nA. left\nB. down\nC. over\nD. above\n") != std::string::npos);
  }

  TEST_CASE("list abduction prompt") {
    const auto inst = fixtures::listfn_set(1, 3).front();
    const auto& icl = std::get<IclInstance>(inst.body);
    const auto text = build_prompt(inst, Stage::abduction)[0].content;
    std::string want =
        "Below are several examples of input and output lists. There exists an unified function that maps the input "
        "list to the output list.\n\n";
    for (std::size_t i = 0; i < icl.demos.size(); ++i)
      want += "Input " + std::to_string(i + 1) + ": " + icl.demos[i].input + ", Output " + std::to_string(i + 1) +
              ": " + icl.demos[i].output + "\n";
    want += "\nPlease infer the mapping function in python.\nYour response should strictly follow the JSON dict format:\n\n"
            "{\n    \"reasoning\":\"reasoning steps here\",\n    \"function\": \"python function here\"\n}";
    CHECK(text == want);
  }

  TEST_CASE("salt uses the translation field") {
    CHECK(answer_field(DatasetKind::salt) == "translation");
    CHECK(answer_field(DatasetKind::raven) == "answer");
    CHECK(reply_fields(DatasetKind::salt, Stage::abduction) == std::vector<std::string>{"vocabulary", "grammar"});
    CHECK(reply_fields(DatasetKind::listfn, Stage::refinement) == std::vector<std::string>{"function"});
  }

  TEST_CASE("dummy tokens") {
    CHECK(dummy_filler(0).empty());
    CHECK(dummy_filler(6) == "and so then next and so");
    const auto base = build_prompt(fixtures::ekar_instance(), Stage::induction);
    const auto injected = inject_dummy_tokens(base, 3);
    CHECK(injected[0].content.find("{\n    \"reasoning\":\"and so then\",\n    \"answer\": \"missing word here\"\n}") !=
          std::string::npos);
    CHECK(inject_dummy_tokens(base, 0) == base);
    const auto automatic = build_prompt(fixtures::ekar_instance(), Stage::automatic);
    const auto replaced = inject_dummy_tokens(automatic, 2);
    CHECK(replaced[0].content.find("\"reasoning\":\"and so\",") != std::string::npos);
    CHECK(replaced[0].content.find("reasoning steps here") == std::string::npos);
  }

  TEST_CASE("call-count laws") {
    const auto set = fixtures::listfn_set(12, 40);
    auto oracle = scripted::listfn_oracle(set, {});
    for (const auto& inst : set) {
      CHECK(run_pipeline(inst, *oracle, opts(PipelineKind::induction)).calls == 1);
      CHECK(run_pipeline(inst, *oracle, opts(PipelineKind::automatic)).calls == 1);
      CHECK(run_pipeline(inst, *oracle, opts(PipelineKind::abd_ded)).calls == 2);
      CHECK(run_pipeline(inst, *oracle, opts(PipelineKind::selection, 3)).calls == 5);
      CHECK(run_pipeline(inst, *oracle, opts(PipelineKind::selection, 1)).calls == 2);
      CHECK(run_pipeline(inst, *oracle, opts(PipelineKind::gold_deduction)).calls == 1);
      const auto a = run_pipeline(inst, *oracle, opts(PipelineKind::abd_ded));
      const auto r0 = run_pipeline(inst, *oracle, opts(PipelineKind::refinement, 1, 0));
      CHECK(r0.calls == a.calls);
      CHECK(r0.final_answer == a.final_answer);
      CHECK(r0.trail == a.trail);
      CHECK(r0.rounds_used == 0);
    }
  }

  TEST_CASE("ledger sums and labels") {
    const auto set = fixtures::listfn_set(3, 9);
    auto oracle = scripted::listfn_oracle(set, {});
    const auto r = run_pipeline(set[0], *oracle, opts(PipelineKind::selection, 3));
    REQUIRE(r.ledger.size() == 5);
    CHECK(r.ledger.entries()[0].label == "abduction_sample_1");
    CHECK(r.ledger.entries()[3].label == "selection");
    CHECK(r.ledger.entries()[4].label == "deduction");
    CHECK(r.ledger.completion_tokens() == sum_completion(r));
    CHECK(r.ledger.total_tokens() == r.ledger.prompt_tokens() + r.ledger.completion_tokens());
    for (std::size_t i = 0; i < r.ledger.size(); ++i) CHECK(r.ledger.entries()[i].call == static_cast<int>(i));
    CHECK(r.trail.size() == 4);
    CHECK(r.trail.back().origin == "selection");
  }

  TEST_CASE("refinement reaches the right rule at round two") {
    const auto set = fixtures::listfn_set(6, 21);
    scripted::Behaviour b;
    b.abduce_correct = false;
    auto oracle = scripted::listfn_oracle(set, b);
    for (const auto& inst : set) {
      const auto r0 = run_pipeline(inst, *oracle, opts(PipelineKind::refinement, 1, 0));
      const auto r1 = run_pipeline(inst, *oracle, opts(PipelineKind::refinement, 1, 1));
      const auto r2 = run_pipeline(inst, *oracle, opts(PipelineKind::refinement, 1, 2));
      const auto r5 = run_pipeline(inst, *oracle, opts(PipelineKind::refinement, 1, 5));
      CHECK(r0.final_answer != inst.gold());
      CHECK(r1.final_answer != inst.gold());
      CHECK(r2.final_answer == inst.gold());
      CHECK(r5.final_answer == inst.gold());
      CHECK(r2.rounds_used == 2);
      CHECK(r5.rounds_used == 3);  // round 3 verifies and stops
      CHECK(r2.calls == 1 + 2 * 2 + 1);
      CHECK(r5.calls == 1 + 2 * 2 + 1 + 1);
    }
  }

  TEST_CASE("adaptive budget caps the rounds") {
    const auto set = fixtures::listfn_set(4, 2);
    scripted::Behaviour b;
    b.never_valid = true;
    auto oracle = scripted::listfn_oracle(set, b);
    for (const auto& inst : set) {
      const auto lo = run_pipeline(inst, *oracle, opts(PipelineKind::adaptive, 1, 0, Budget::low));
      const auto hi = run_pipeline(inst, *oracle, opts(PipelineKind::adaptive, 1, 0, Budget::high));
      CHECK(lo.rounds_used == 3);
      CHECK(hi.rounds_used == 5);
      CHECK(lo.calls == 3 + 1 + 2 * 3 + 1);
      CHECK(hi.calls == 5 + 1 + 2 * 5 + 1);
    }
  }

  TEST_CASE("malformed replies are retried and then flagged") {
    const auto inst = fixtures::ekar_instance();
    ScriptedOracle oracle;
    oracle.add_rule({{"finish the second wordset"}, "", {"no json here", "{\"answer\": \"down\"}"}, false, nullptr});
    const auto r = run_pipeline(inst, oracle, opts(PipelineKind::induction));
    CHECK(r.calls == 2);
    CHECK(r.malformed_retries == 1);
    CHECK(r.final_answer == "down");
    CHECK(r.ledger.entries()[1].label == "induction_retry_1");

    ScriptedOracle bad;
    bad.add_rule({{"finish the second wordset"}, "", {"nope"}, true, nullptr});
    const auto f = run_pipeline(inst, bad, opts(PipelineKind::induction));
    CHECK(f.calls == 3);
    CHECK_FALSE(f.answered);
    CHECK(std::find(f.flags.begin(), f.flags.end(), "induction_malformed") != f.flags.end());
  }

  TEST_CASE("endpoint failures are recorded, auth failures propagate") {
    const auto inst = fixtures::ekar_instance();
    ScriptedOracle empty_script;
    empty_script.add_rule({{"never matches this"}, "", {"x"}, false, nullptr});
    const auto r = run_pipeline(inst, empty_script, opts(PipelineKind::abd_ded));
    CHECK_FALSE(r.answered);
    CHECK(r.error.find("unscripted") != std::string::npos);

    ScriptedOracle auth;
    ScriptedOracle::Rule rule;
    rule.responder = [](const ChatRequest&) -> std::optional<std::string> { fail(ErrorCode::auth, "denied"); };
    auth.add_rule(rule);
    CHECK_THROWS_AS(run_pipeline(inst, auth, opts(PipelineKind::induction)), Error);
  }

  TEST_CASE("gold hypothesis per dataset") {
    const auto inst = fixtures::listfn_set(1, 1).front();
    CHECK(gold_hypothesis(inst).text == inst.meta["program"].get<std::string>());
    CHECK(gold_hypothesis(fixtures::ekar_instance()).text == "antonyms");
  }

  TEST_CASE("batches are order-stable across worker counts") {
    const auto set = fixtures::listfn_set(20, 8);
    BatchOptions b;
    b.run = opts(PipelineKind::selection, 3);
    b.timestamp = "2024-01-01T00:00:00Z";
    b.parallelism = 1;
    auto o1 = scripted::listfn_oracle(set, {});
    const auto serial = run_batch(set, *o1, b);
    b.parallelism = 8;
    auto o8 = scripted::listfn_oracle(set, {});
    const auto parallel = run_batch(set, *o8, b);
    REQUIRE(serial.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      CHECK(serial[i].instance.id == set[i].id);
      CHECK(to_json(serial[i]).dump() == to_json(parallel[i]).dump());
    }
    auto unlabeled = set;
    unlabeled[3].difficulty.reset();
    CHECK_THROWS_AS(run_batch(unlabeled, *o1, b), Error);
  }
}
