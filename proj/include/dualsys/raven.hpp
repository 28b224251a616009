#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dualsys/task_model.hpp"

namespace dualsys::raven {

enum class Configuration {
  center_single,
  distribute_four,
  distribute_nine,
  in_center_single_out_center_single,
  in_distribute_four_out_center_single,
  up_center_single_down_center_single,
  left_center_single_right_center_single,
};

inline constexpr std::array<Configuration, 7> kAllConfigurations{
    Configuration::center_single,
    Configuration::distribute_four,
    Configuration::distribute_nine,
    Configuration::in_center_single_out_center_single,
    Configuration::in_distribute_four_out_center_single,
    Configuration::up_center_single_down_center_single,
    Configuration::left_center_single_right_center_single,
};

// Attribute alphabets (RAVEN convention): entity values are indices into these.
inline constexpr int kTypeCount = 5;   // triangle square pentagon hexagon circle
inline constexpr int kSizeCount = 6;
inline constexpr int kColorCount = 10;

std::string_view to_string(Configuration c);
Configuration parse_configuration(std::string_view s);

/// A component of the layout. Slots are numbered globally across the panel;
/// a group owns [first_slot, first_slot + slot_count).
struct SlotGroup {
  int first_slot = 0;
  int slot_count = 1;

  bool is_grid() const { return slot_count > 1; }
};

std::vector<SlotGroup> slot_groups(Configuration c);
int slot_count(Configuration c);

enum class Attribute { number, position, type, size, color };
enum class RuleKind { constant, progression, arithmetic, distribute_three };

std::string_view to_string(Attribute a);
std::string_view to_string(RuleKind k);

/// Row-wise rule on one attribute of one slot group. For grid groups, an
/// active number rule leaves positions unconstrained and the rule set then
/// carries no position entry.
struct AttributeRule {
  int group = 0;
  Attribute attribute = Attribute::type;
  RuleKind kind = RuleKind::constant;
  int step = 0;  // progression only: one of -2, -1, +1, +2

  bool operator==(const AttributeRule&) const = default;
  std::string describe() const;
};

struct Entity {
  int type = 0;
  int size = 0;
  int color = 0;

  bool operator==(const Entity&) const = default;
};

struct SlotEntity {
  int slot = 0;
  Entity entity;

  bool operator==(const SlotEntity&) const = default;
};

/// One matrix cell: occupied slots in ascending order.
struct Panel {
  std::vector<SlotEntity> entities;

  bool operator==(const Panel&) const = default;
};

/// Canonical text `[slot:(type,size,color) ...]`, slots ascending, single
/// spaces between slot tokens.
std::string serialize_symbolic(const Panel& panel);
/// Inverse of serialize_symbolic; throws Error{parse} on malformed text.
Panel parse_symbolic(std::string_view text);

using Matrix = std::array<std::array<Panel, 3>, 3>;

struct RavenPuzzle {
  Configuration config = Configuration::center_single;
  std::vector<AttributeRule> rules;
  Matrix panels;  // panels[2][2] is blank
  std::vector<Panel> candidates;
  std::size_t gold_index = 0;
  int n_transitions = 0;

  const Panel& gold() const { return candidates.at(gold_index); }
};

/// Inclusive range of transition counts generate_matrix accepts for `c`.
std::pair<int, int> feasible_transitions(Configuration c);

/// Throws Error{infeasible} (message carries the feasible range) when the
/// target cannot be realized for the configuration.
RavenPuzzle generate_matrix(Configuration config, int n_transitions_target, std::uint64_t seed);

int count_transitions(const std::vector<AttributeRule>& rules);

Difficulty classify_raven_difficulty(Configuration config, int n_transitions);

/// True iff every row of `matrix` satisfies every rule.
bool satisfies_rules(Configuration config, const std::vector<AttributeRule>& rules, const Matrix& matrix);

/// `satisfies_rules` with `completion` placed into the blank cell.
bool completes(const RavenPuzzle& puzzle, const Panel& completion);

/// k distinct single/double attribute perturbations of puzzle.gold(), none
/// rule-consistent. Throws Error{infeasible} if fewer than k exist.
std::vector<Panel> make_distractors(const RavenPuzzle& puzzle, int k, std::uint64_t seed);

/// Incomplete matrix rendering used in prompts, e.g.
/// `row 1: [..], [..], [..]; row 2: ...; row 3: [..], [..], ?`.
std::string render_incomplete(const Matrix& panels);

/// Wraps a puzzle as a symbolic mcq TaskInstance. A/A' are rows 1 and 2, B is
/// the first two cells of row 3, each cell list joined by ", ".
TaskInstance to_task_instance(const RavenPuzzle& puzzle, std::string id);

/// Transition count per difficulty tier used by batch generation.
std::vector<int> tier_targets(Configuration c, Difficulty tier);

/// Batch generator behind `gen-raven`. `config` nullopt cycles through all
/// seven layouts; tiers rotate easy/medium/hard.
std::vector<TaskInstance> generate_batch(std::optional<Configuration> config, std::size_t count,
                                         std::uint64_t seed);

}  // namespace dualsys::raven
