#pragma once
// Prompt-aware scripted replies for list-function instances.

#include <map>
#include <memory>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualsys/gateway.hpp"
#include "dualsys/listfn.hpp"
#include "dualsys/task_model.hpp"

namespace scripted {

inline const char* const kWrong1 = "append 12345";
inline const char* const kWrong2 = "prepend 12345";

struct Behaviour {
  // abduction reply: true -> the instance's program, false -> kWrong1
  bool abduce_correct = true;
  // verification always answers "invalid"
  bool never_valid = false;
  // induction answers correctly on instances whose index is a multiple of this
  int induction_every = 2;
  // 1-based index returned by selection
  int choice = 1;
};

inline std::string reply(const nlohmann::json& j) { return j.dump(); }

inline std::string joined(const dualsys::ChatRequest& req) {
  std::string s;
  for (const auto& m : req.messages) s += m.content + "\n";
  return s;
}

inline std::string capture(const std::string& text, const std::string& pattern) {
  std::smatch m;
  if (!std::regex_search(text, m, std::regex(pattern))) return {};
  return m[1];
}

// Responder over `instances`; each instance is recognized by its first demo.
inline std::shared_ptr<dualsys::ScriptedOracle> listfn_oracle(const std::vector<dualsys::TaskInstance>& instances,
                                                              Behaviour b, int parallelism = 8) {
  struct Entry {
    std::string program;
    std::string gold;
    std::size_t index;
  };
  auto table = std::make_shared<std::map<std::string, Entry>>();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& icl = std::get<dualsys::IclInstance>(instances[i].body);
    const auto key = icl.demos.front().input;
    if (!table->emplace(key, Entry{instances[i].meta.at("program").get<std::string>(), icl.gold_output, i}).second)
      throw std::runtime_error("two instances share a first demo");
  }
  auto oracle = std::make_shared<dualsys::ScriptedOracle>("scripted-listfn", parallelism);
  dualsys::ScriptedOracle::Rule rule;
  rule.responder = [table, b](const dualsys::ChatRequest& req) -> std::optional<std::string> {
    const auto text = joined(req);
    const auto key = capture(text, R"(Input 1: (\[[^\]]*\]),)");
    const auto it = table->find(key);
    if (it == table->end()) return std::nullopt;
    const auto& e = it->second;
    const auto hyp = capture(text, R"(Candidate function: ([^\n]*)\n)");
    if (text.find("Please infer the mapping function in python.") != std::string::npos) {
      std::string prog = b.abduce_correct ? e.program : kWrong1;
      if (req.seed) prog = (*req.seed % 3 == 0) ? e.program : kWrong1;
      return reply({{"reasoning", "looked at the examples"}, {"function", prog}});
    }
    if (text.find("Please select the candidate") != std::string::npos)
      return reply({{"reasoning", "compared"}, {"choice", std::to_string(b.choice)}});
    if (text.find("Please verify whether") != std::string::npos) {
      const bool ok = !b.never_valid && hyp == e.program;
      return reply({{"reasoning", "checked"}, {"verdict", ok ? "valid" : "invalid"}});
    }
    if (text.find("Please revise it.") != std::string::npos) {
      std::string next = hyp == kWrong1 ? kWrong2 : e.program;
      return reply({{"reasoning", "revised"}, {"function", next}});
    }
    const auto input = capture(text, R"(New Input: (\[[^\]]*\]))");
    const auto code = capture(text, R"(The python code for the function is: ([^\n]*)\n)");
    if (!code.empty()) {
      std::string out = "[]";
      try {
        out = dualsys::listfn::format_list(
            dualsys::listfn::eval_program(dualsys::listfn::parse_program(code), dualsys::listfn::parse_list(input)));
      } catch (const std::exception&) {
      }
      return reply({{"reasoning", "applied"}, {"answer", out}});
    }
    const bool right = b.induction_every > 0 && e.index % static_cast<std::size_t>(b.induction_every) == 0;
    return reply({{"answer", right ? e.gold : std::string("[0]")}});
  };
  oracle->add_rule(std::move(rule));
  return oracle;
}

}  // namespace scripted
