#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dualsys/task_model.hpp"

namespace dualsys::listfn {

using List = std::vector<std::int64_t>;

inline constexpr std::size_t kMaxInputLength = 16;
inline constexpr std::int64_t kMaxElement = 99;

/// Predicate `(even)`, `(gt 50)`, or arithmetic `(add 3)`; plain integers
/// use op == "".
struct Arg {
  std::string op;
  std::int64_t n = 0;
};

struct Stage {
  std::string name;
  std::vector<Arg> args;
};

/// Left-to-right pipeline: `filter (even) | sort | take 3`.
struct Program {
  std::vector<Stage> stages;
  std::string text;
};

/// Throws Error{parse} on unknown primitives, wrong arity, bad operands
/// (division/modulo by zero, non-positive positions).
Program parse_program(std::string_view text);

/// Total on every list. Degenerate conventions: head/last/index/max/min of a
/// list without such an element give []; sum of [] is [0]; positional edits
/// out of range leave the list unchanged (insert_at appends).
List eval_program(const Program& program, const List& input);

struct ListFn {
  int id = 0;
  int rank = 0;
  Program program;
  bool surrogate = false;
};

class Registry {
 public:
  /// TSV rows `id<TAB>rank<TAB>program[<TAB>flag]`; `#` lines are comments.
  static Registry load(const std::string& path);
  static Registry from_text(std::string_view text);

  const std::vector<ListFn>& all() const { return fns_; }
  const ListFn& by_id(int id) const;
  std::size_t size() const { return fns_.size(); }

 private:
  std::vector<ListFn> fns_;
};

List eval_fn(const ListFn& fn, const List& input);

/// rank <= 84 easy, 85..169 medium, >= 170 hard.
Difficulty classify_listfn_difficulty(int rank);

/// "[1, 2, 3]"
std::string format_list(const List& l);
/// Accepts "[1, 2, 3]", "[1,2,3]", "1 2 3". Throws Error{parse}.
List parse_list(std::string_view text);

std::string function_id(const ListFn& fn);

TaskInstance make_instance(const ListFn& fn, std::size_t n_shots, std::uint64_t seed, std::string id = {});

/// Outputs of other registry functions on the test input, distinct from gold.
std::vector<std::string> make_distractors(const Registry& registry, const TaskInstance& instance, std::size_t k,
                                          std::uint64_t seed);

/// Instance i uses function i mod |registry|, in registry order.
std::vector<TaskInstance> generate_batch(const Registry& registry, std::size_t count, std::size_t n_shots,
                                         std::uint64_t seed, TaskFormat format = TaskFormat::ftg);

/// Recomputes demo outputs for `listfn:<id>` function ids.
DemoOracle make_oracle(const Registry& registry);

}  // namespace dualsys::listfn
