#include "dualsys/raven.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <set>
#include <sstream>

#include "dualsys/error.hpp"
#include "dualsys/rng.hpp"

namespace dualsys::raven {

namespace {

constexpr std::array<std::string_view, 7> kConfigNames{
    "center_single",
    "distribute_four",
    "distribute_nine",
    "in_center_single_out_center_single",
    "in_distribute_four_out_center_single",
    "up_center_single_down_center_single",
    "left_center_single_right_center_single",
};
constexpr std::array<std::string_view, 5> kAttributeNames{"number", "position", "type", "size", "color"};
constexpr std::array<std::string_view, 4> kRuleNames{"constant", "progression", "arithmetic",
                                                     "distribute_three"};

// Per-group view of a panel: occupied slot mask (relative to the group) plus
// the entity attributes every occupant shares.
struct GroupState {
  std::uint32_t mask = 0;
  int type = 0;
  int size = 0;
  int color = 0;
  bool valid = false;

  bool operator==(const GroupState&) const = default;
};

using StateGrid = std::array<std::array<GroupState, 3>, 3>;

std::uint32_t rotate_mask(std::uint32_t mask, int step, int n) {
  std::uint32_t out = 0;
  for (int i = 0; i < n; ++i)
    if (mask & (1u << i)) out |= 1u << (((i + step) % n + n) % n);
  return out;
}

GroupState extract(const Panel& panel, const SlotGroup& g) {
  GroupState s;
  bool first = true;
  for (const auto& se : panel.entities) {
    if (se.slot < g.first_slot || se.slot >= g.first_slot + g.slot_count) continue;
    s.mask |= 1u << (se.slot - g.first_slot);
    if (first) {
      s.type = se.entity.type;
      s.size = se.entity.size;
      s.color = se.entity.color;
      first = false;
    } else if (se.entity != Entity{s.type, s.size, s.color}) {
      return GroupState{};
    }
  }
  s.valid = !first;
  return s;
}

void emit(Panel& panel, const SlotGroup& g, const GroupState& s) {
  for (int i = 0; i < g.slot_count; ++i)
    if (s.mask & (1u << i)) panel.entities.push_back({g.first_slot + i, {s.type, s.size, s.color}});
}

int attribute_value(const GroupState& s, Attribute a) {
  switch (a) {
    case Attribute::number: return std::popcount(s.mask);
    case Attribute::position: return static_cast<int>(s.mask);
    case Attribute::type: return s.type;
    case Attribute::size: return s.size;
    case Attribute::color: return s.color;
  }
  return 0;
}

// Sizes are 1-based magnitudes for arithmetic; the other attributes add as is.
int arithmetic_offset(Attribute a) { return a == Attribute::size ? 1 : 0; }

bool row_satisfies(const AttributeRule& rule, const std::array<GroupState, 3>& row, int slots) {
  for (const auto& s : row)
    if (!s.valid) return false;
  const int v0 = attribute_value(row[0], rule.attribute);
  const int v1 = attribute_value(row[1], rule.attribute);
  const int v2 = attribute_value(row[2], rule.attribute);
  switch (rule.kind) {
    case RuleKind::constant:
      return v0 == v1 && v1 == v2;
    case RuleKind::progression:
      if (rule.attribute == Attribute::position)
        return row[1].mask == rotate_mask(row[0].mask, rule.step, slots) &&
               row[2].mask == rotate_mask(row[1].mask, rule.step, slots);
      return v1 - v0 == rule.step && v2 - v1 == rule.step;
    case RuleKind::arithmetic: {
      const int off = arithmetic_offset(rule.attribute);
      return v2 + off == (v0 + off) + (v1 + off);
    }
    case RuleKind::distribute_three:
      return true;  // checked across rows
  }
  return false;
}

StateGrid states_of(const Matrix& m, const SlotGroup& g) {
  StateGrid grid;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) grid[r][c] = extract(m[r][c], g);
  return grid;
}

bool grid_satisfies(const AttributeRule& rule, const StateGrid& grid, int slots) {
  for (const auto& row : grid)
    if (!row_satisfies(rule, row, slots)) return false;
  if (rule.kind != RuleKind::distribute_three) return true;
  auto row_set = [&](int r) {
    std::array<int, 3> v{attribute_value(grid[r][0], rule.attribute), attribute_value(grid[r][1], rule.attribute),
                         attribute_value(grid[r][2], rule.attribute)};
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto base = row_set(0);
  if (base[0] == base[1] || base[1] == base[2]) return false;
  return row_set(1) == base && row_set(2) == base;
}

struct Domain {
  int lo;
  int hi;
};

Domain domain_of(Attribute a, const SlotGroup& g) {
  switch (a) {
    case Attribute::number: return {1, g.slot_count};
    case Attribute::type: return {0, kTypeCount - 1};
    case Attribute::size: return {0, kSizeCount - 1};
    case Attribute::color: return {0, kColorCount - 1};
    case Attribute::position: return {1, (1 << g.slot_count) - 1};
  }
  return {0, 0};
}

std::vector<RuleKind> allowed_kinds(Attribute a) {
  switch (a) {
    case Attribute::type:
    case Attribute::position:
      return {RuleKind::progression, RuleKind::distribute_three};
    default:
      return {RuleKind::progression, RuleKind::arithmetic, RuleKind::distribute_three};
  }
}

std::uint32_t random_mask(Rng& rng, int n, int bits) {
  std::vector<int> slots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) slots[static_cast<std::size_t>(i)] = i;
  rng.shuffle(slots);
  std::uint32_t m = 0;
  for (int i = 0; i < bits; ++i) m |= 1u << slots[static_cast<std::size_t>(i)];
  return m;
}

using ValueGrid = std::array<std::array<int, 3>, 3>;

// Row values for a scalar attribute under `rule`; nullopt if this draw failed.
std::optional<ValueGrid> sample_scalar(const AttributeRule& rule, Domain d, Rng& rng) {
  ValueGrid v{};
  switch (rule.kind) {
    case RuleKind::constant:
      for (auto& row : v) row.fill(static_cast<int>(rng.uniform(d.lo, d.hi)));
      return v;
    case RuleKind::progression: {
      const int lo = std::max(d.lo, d.lo - 2 * rule.step);
      const int hi = std::min(d.hi, d.hi - 2 * rule.step);
      if (lo > hi) return std::nullopt;
      for (auto& row : v) {
        const int start = static_cast<int>(rng.uniform(lo, hi));
        row = {start, start + rule.step, start + 2 * rule.step};
      }
      return v;
    }
    case RuleKind::arithmetic: {
      const int off = arithmetic_offset(rule.attribute);
      for (auto& row : v) {
        bool ok = false;
        for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
          const int a = static_cast<int>(rng.uniform(d.lo, d.hi));
          const int b = static_cast<int>(rng.uniform(std::max(d.lo, 1 - off), d.hi));
          const int c = a + b + off;
          if (c >= d.lo && c <= d.hi && c != a) {
            row = {a, b, c};
            ok = true;
          }
        }
        if (!ok) return std::nullopt;
      }
      return v;
    }
    case RuleKind::distribute_three: {
      if (d.hi - d.lo + 1 < 3) return std::nullopt;
      std::set<int> picked;
      while (picked.size() < 3) picked.insert(static_cast<int>(rng.uniform(d.lo, d.hi)));
      std::vector<int> base(picked.begin(), picked.end());
      rng.shuffle(base);
      const int dir = rng.coin() ? 1 : 2;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) v[r][c] = base[static_cast<std::size_t>((c + r * dir) % 3)];
      return v;
    }
  }
  return std::nullopt;
}

std::optional<std::array<std::array<std::uint32_t, 3>, 3>> sample_positions(const AttributeRule& rule, int n,
                                                                           Rng& rng) {
  std::array<std::array<std::uint32_t, 3>, 3> m{};
  if (rule.kind == RuleKind::constant) {
    for (auto& row : m) row.fill(random_mask(rng, n, static_cast<int>(rng.uniform(1, n))));
    return m;
  }
  if (rule.kind == RuleKind::progression) {
    for (auto& row : m) {
      bool ok = false;
      for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
        const auto start = random_mask(rng, n, static_cast<int>(rng.uniform(1, n - 1)));
        if (rotate_mask(start, rule.step, n) == start) continue;
        row = {start, rotate_mask(start, rule.step, n), rotate_mask(start, 2 * rule.step, n)};
        ok = true;
      }
      if (!ok) return std::nullopt;
    }
    return m;
  }
  if (rule.kind == RuleKind::distribute_three) {
    const int bits = static_cast<int>(rng.uniform(1, n - 1));
    std::set<std::uint32_t> picked;
    for (int attempt = 0; attempt < 256 && picked.size() < 3; ++attempt) picked.insert(random_mask(rng, n, bits));
    if (picked.size() < 3) return std::nullopt;
    std::vector<std::uint32_t> base(picked.begin(), picked.end());
    rng.shuffle(base);
    const int dir = rng.coin() ? 1 : 2;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] = base[static_cast<std::size_t>((c + r * dir) % 3)];
    return m;
  }
  return std::nullopt;
}

std::vector<int> feasible_steps(Attribute a, const SlotGroup& g) {
  std::vector<int> out;
  for (int step : {-2, -1, 1, 2}) {
    if (a == Attribute::position) {
      if (std::abs(step) < g.slot_count) out.push_back(step);
      continue;
    }
    const auto d = domain_of(a, g);
    if (d.hi - d.lo >= 2 * std::abs(step)) out.push_back(step);
  }
  return out;
}

// Fills one group's 3x3 states given its rules; nullopt if a draw failed.
std::optional<StateGrid> sample_group(const SlotGroup& g, const std::vector<AttributeRule>& rules, Rng& rng) {
  StateGrid grid{};
  auto find = [&](Attribute a) -> const AttributeRule* {
    for (const auto& r : rules)
      if (r.attribute == a) return &r;
    return nullptr;
  };

  if (!g.is_grid()) {
    for (auto& row : grid)
      for (auto& s : row) s.mask = 1;
  } else if (const auto* number = find(Attribute::number); number && number->kind != RuleKind::constant) {
    const auto counts = sample_scalar(*number, domain_of(Attribute::number, g), rng);
    if (!counts) return std::nullopt;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) grid[r][c].mask = random_mask(rng, g.slot_count, (*counts)[r][c]);
  } else {
    const auto* position = find(Attribute::position);
    const auto masks = sample_positions(*position, g.slot_count, rng);
    if (!masks) return std::nullopt;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) grid[r][c].mask = (*masks)[r][c];
  }

  for (Attribute a : {Attribute::type, Attribute::size, Attribute::color}) {
    const auto* rule = find(a);
    const auto values = sample_scalar(*rule, domain_of(a, g), rng);
    if (!values) return std::nullopt;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        auto& s = grid[r][c];
        (a == Attribute::type ? s.type : a == Attribute::size ? s.size : s.color) = (*values)[r][c];
      }
  }
  for (auto& row : grid)
    for (auto& s : row) s.valid = true;
  return grid;
}

// Group-level edits of the gold panel used to build distractors.
struct Edit {
  int group;
  Attribute attribute;
  int value;  // new attribute value, or new mask for number/position edits
};

std::vector<Edit> single_edits(const std::vector<SlotGroup>& groups, const std::vector<GroupState>& gold) {
  std::vector<Edit> out;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const auto& s = gold[gi];
    const int gid = static_cast<int>(gi);
    for (Attribute a : {Attribute::type, Attribute::size, Attribute::color}) {
      const auto d = domain_of(a, g);
      for (int v = d.lo; v <= d.hi; ++v)
        if (v != attribute_value(s, a)) out.push_back({gid, a, v});
    }
    if (!g.is_grid()) continue;
    for (int i = 0; i < g.slot_count; ++i) {
      const std::uint32_t bit = 1u << i;
      if (s.mask & bit) {
        if (std::popcount(s.mask) > 1) out.push_back({gid, Attribute::number, static_cast<int>(s.mask & ~bit)});
        for (int j = 0; j < g.slot_count; ++j)
          if (!(s.mask & (1u << j)))
            out.push_back({gid, Attribute::position, static_cast<int>((s.mask & ~bit) | (1u << j))});
      } else {
        out.push_back({gid, Attribute::number, static_cast<int>(s.mask | bit)});
      }
    }
  }
  return out;
}

void apply_edit(std::vector<GroupState>& states, const Edit& e) {
  auto& s = states[static_cast<std::size_t>(e.group)];
  switch (e.attribute) {
    case Attribute::type: s.type = e.value; break;
    case Attribute::size: s.size = e.value; break;
    case Attribute::color: s.color = e.value; break;
    case Attribute::number:
    case Attribute::position: s.mask = static_cast<std::uint32_t>(e.value); break;
  }
}

Panel panel_from(const std::vector<SlotGroup>& groups, const std::vector<GroupState>& states) {
  Panel p;
  for (std::size_t i = 0; i < groups.size(); ++i) emit(p, groups[i], states[i]);
  return p;
}

std::string join_row(const std::array<Panel, 3>& row, int cells) {
  std::string out;
  for (int c = 0; c < cells; ++c) {
    if (c) out += ", ";
    out += serialize_symbolic(row[static_cast<std::size_t>(c)]);
  }
  return out;
}

}  // namespace

std::string_view to_string(Configuration c) { return kConfigNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Attribute a) { return kAttributeNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(RuleKind k) { return kRuleNames[static_cast<std::size_t>(k)]; }

Configuration parse_configuration(std::string_view s) {
  for (std::size_t i = 0; i < kConfigNames.size(); ++i)
    if (kConfigNames[i] == s) return static_cast<Configuration>(i);
  fail(ErrorCode::invalid_argument, "unknown RAVEN configuration '" + std::string(s) + "'");
}

std::string AttributeRule::describe() const {
  std::string out = "group " + std::to_string(group) + " " + std::string(to_string(attribute)) + ": " +
                    std::string(to_string(kind));
  if (kind == RuleKind::progression) out += "(" + std::string(step > 0 ? "+" : "") + std::to_string(step) + ")";
  return out;
}

std::vector<SlotGroup> slot_groups(Configuration c) {
  switch (c) {
    case Configuration::center_single: return {{0, 1}};
    case Configuration::distribute_four: return {{0, 4}};
    case Configuration::distribute_nine: return {{0, 9}};
    case Configuration::in_center_single_out_center_single:
    case Configuration::up_center_single_down_center_single:
    case Configuration::left_center_single_right_center_single: return {{0, 1}, {1, 1}};
    case Configuration::in_distribute_four_out_center_single: return {{0, 1}, {1, 4}};
  }
  return {};
}

int slot_count(Configuration c) {
  int n = 0;
  for (const auto& g : slot_groups(c)) n += g.slot_count;
  return n;
}

std::string serialize_symbolic(const Panel& panel) {
  std::string out = "[";
  for (std::size_t i = 0; i < panel.entities.size(); ++i) {
    const auto& se = panel.entities[i];
    if (i) out += ' ';
    out += std::to_string(se.slot) + ":(" + std::to_string(se.entity.type) + "," + std::to_string(se.entity.size) +
           "," + std::to_string(se.entity.color) + ")";
  }
  out += "]";
  return out;
}

Panel parse_symbolic(std::string_view text) {
  auto bad = [&](const char* why) -> Panel {
    fail(ErrorCode::parse, std::string("malformed symbolic panel (") + why + "): '" + std::string(text) + "'");
  };
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && text[pos] == ' ') ++pos;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c) return false;
    ++pos;
    return true;
  };
  auto number = [&](int& out) {
    skip_ws();
    const auto* begin = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), out);
    if (ec != std::errc{} || ptr == begin) return false;
    pos += static_cast<std::size_t>(ptr - begin);
    return true;
  };

  Panel p;
  if (!expect('[')) return bad("missing '['");
  skip_ws();
  while (pos < text.size() && text[pos] != ']') {
    SlotEntity se;
    if (!number(se.slot) || !expect(':') || !expect('(') || !number(se.entity.type) || !expect(',') ||
        !number(se.entity.size) || !expect(',') || !number(se.entity.color) || !expect(')'))
      return bad("bad slot token");
    if (!p.entities.empty() && p.entities.back().slot >= se.slot) return bad("slots not ascending");
    p.entities.push_back(se);
    skip_ws();
  }
  if (!expect(']')) return bad("missing ']'");
  skip_ws();
  if (pos != text.size()) return bad("trailing text");
  return p;
}

std::pair<int, int> feasible_transitions(Configuration c) {
  int max = 0;
  for (const auto& g : slot_groups(c)) max += g.is_grid() ? 4 : 3;
  return {1, max};
}

int count_transitions(const std::vector<AttributeRule>& rules) {
  return static_cast<int>(
      std::count_if(rules.begin(), rules.end(), [](const AttributeRule& r) { return r.kind != RuleKind::constant; }));
}

Difficulty classify_raven_difficulty(Configuration config, int n_transitions) {
  if (n_transitions < 0) fail(ErrorCode::invalid_argument, "negative transition count");
  int easy_max = 0;
  switch (config) {
    case Configuration::center_single: easy_max = 1; break;
    case Configuration::distribute_four:
    case Configuration::distribute_nine: easy_max = 2; break;
    case Configuration::in_center_single_out_center_single:
    case Configuration::in_distribute_four_out_center_single:
    case Configuration::up_center_single_down_center_single: easy_max = 3; break;
    case Configuration::left_center_single_right_center_single: easy_max = 4; break;
  }
  if (n_transitions <= easy_max) return Difficulty::easy;
  if (n_transitions == easy_max + 1) return Difficulty::medium;
  return Difficulty::hard;
}

bool satisfies_rules(Configuration config, const std::vector<AttributeRule>& rules, const Matrix& matrix) {
  const auto groups = slot_groups(config);
  // Occupied slots outside every group make a panel malformed.
  const int total = slot_count(config);
  for (const auto& row : matrix)
    for (const auto& p : row)
      for (const auto& se : p.entities)
        if (se.slot < 0 || se.slot >= total) return false;

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto grid = states_of(matrix, groups[gi]);
    for (const auto& row : grid)
      for (const auto& s : row)
        if (!s.valid) return false;
    for (const auto& rule : rules)
      if (rule.group == static_cast<int>(gi) && !grid_satisfies(rule, grid, groups[gi].slot_count)) return false;
  }
  return true;
}

bool completes(const RavenPuzzle& puzzle, const Panel& completion) {
  Matrix m = puzzle.panels;
  m[2][2] = completion;
  return satisfies_rules(puzzle.config, puzzle.rules, m);
}

std::vector<Panel> make_distractors(const RavenPuzzle& puzzle, int k, std::uint64_t seed) {
  const auto groups = slot_groups(puzzle.config);
  const Panel& gold = puzzle.gold();
  std::vector<GroupState> gold_states;
  for (const auto& g : groups) gold_states.push_back(extract(gold, g));

  Rng rng(seed);
  auto singles = single_edits(groups, gold_states);
  std::vector<std::pair<Edit, Edit>> doubles;
  for (std::size_t i = 0; i < singles.size(); ++i)
    for (std::size_t j = i + 1; j < singles.size(); ++j) {
      const auto& a = singles[i];
      const auto& b = singles[j];
      const bool same_slot_attr = a.group == b.group &&
                                  (a.attribute == b.attribute ||
                                   ((a.attribute == Attribute::number || a.attribute == Attribute::position) &&
                                    (b.attribute == Attribute::number || b.attribute == Attribute::position)));
      if (!same_slot_attr) doubles.emplace_back(a, b);
    }
  rng.shuffle(singles);
  rng.shuffle(doubles);

  std::vector<Panel> out;
  std::set<std::string> seen{serialize_symbolic(gold)};
  auto consider = [&](const std::vector<GroupState>& states) {
    Panel p = panel_from(groups, states);
    if (!seen.insert(serialize_symbolic(p)).second) return;
    if (completes(puzzle, p)) return;
    out.push_back(std::move(p));
  };

  // Alternate single- and double-attribute perturbations.
  std::size_t si = 0, di = 0;
  while (static_cast<int>(out.size()) < k && (si < singles.size() || di < doubles.size())) {
    const bool take_single = (out.size() % 2 == 0 && si < singles.size()) || di >= doubles.size();
    auto states = gold_states;
    if (take_single) {
      apply_edit(states, singles[si++]);
    } else {
      apply_edit(states, doubles[di].first);
      apply_edit(states, doubles[di].second);
      ++di;
    }
    consider(states);
  }
  if (static_cast<int>(out.size()) < k)
    fail(ErrorCode::infeasible, "attribute space too small: only " + std::to_string(out.size()) +
                                    " distinct distractors, " + std::to_string(k) + " requested");
  return out;
}

RavenPuzzle generate_matrix(Configuration config, int n_transitions_target, std::uint64_t seed) {
  const auto [min_t, max_t] = feasible_transitions(config);
  if (n_transitions_target < min_t || n_transitions_target > max_t)
    fail(ErrorCode::infeasible, "transition target " + std::to_string(n_transitions_target) + " infeasible for " +
                                    std::string(to_string(config)) + "; feasible range is [" +
                                    std::to_string(min_t) + ", " + std::to_string(max_t) + "]");

  const auto groups = slot_groups(config);
  Rng rng(seed);

  for (int attempt = 0; attempt < 256; ++attempt) {
    // Choose which (group, attribute) pairs vary.
    std::vector<std::pair<int, Attribute>> eligible;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      if (groups[gi].is_grid()) {
        eligible.emplace_back(static_cast<int>(gi), Attribute::number);
        eligible.emplace_back(static_cast<int>(gi), Attribute::position);
      }
      for (Attribute a : {Attribute::type, Attribute::size, Attribute::color})
        eligible.emplace_back(static_cast<int>(gi), a);
    }
    rng.shuffle(eligible);
    std::set<std::pair<int, Attribute>> active;
    for (const auto& [g, a] : eligible) {
      if (static_cast<int>(active.size()) == n_transitions_target) break;
      if (a == Attribute::number && active.count({g, Attribute::position})) continue;
      if (a == Attribute::position && active.count({g, Attribute::number})) continue;
      active.insert({g, a});
    }

    std::vector<AttributeRule> rules;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const int g = static_cast<int>(gi);
      std::vector<Attribute> attrs;
      if (groups[gi].is_grid()) {
        attrs.push_back(Attribute::number);
        if (!active.count({g, Attribute::number})) attrs.push_back(Attribute::position);
      }
      attrs.insert(attrs.end(), {Attribute::type, Attribute::size, Attribute::color});
      for (Attribute a : attrs) {
        AttributeRule r{g, a, RuleKind::constant, 0};
        if (active.count({g, a})) {
          r.kind = rng.pick(allowed_kinds(a));
          if (r.kind == RuleKind::progression) {
            const auto steps = feasible_steps(a, groups[gi]);
            if (steps.empty())
              r.kind = RuleKind::distribute_three;
            else
              r.step = rng.pick(steps);
          }
        }
        rules.push_back(r);
      }
    }

    std::vector<StateGrid> grids;
    bool ok = true;
    for (std::size_t gi = 0; gi < groups.size() && ok; ++gi) {
      std::vector<AttributeRule> group_rules;
      for (const auto& r : rules)
        if (r.group == static_cast<int>(gi)) group_rules.push_back(r);
      auto grid = sample_group(groups[gi], group_rules, rng);
      if (!grid) ok = false;
      else grids.push_back(*grid);
    }
    if (!ok) continue;

    Matrix full;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        for (std::size_t gi = 0; gi < groups.size(); ++gi) emit(full[r][c], groups[gi], grids[gi][r][c]);
    if (!satisfies_rules(config, rules, full)) continue;

    RavenPuzzle puzzle;
    puzzle.config = config;
    puzzle.rules = rules;
    puzzle.panels = full;
    puzzle.panels[2][2] = Panel{};
    puzzle.candidates = {full[2][2]};
    puzzle.gold_index = 0;
    puzzle.n_transitions = count_transitions(rules);

    std::vector<Panel> distractors;
    try {
      distractors = make_distractors(puzzle, 7, rng.next());
    } catch (const Error&) {
      continue;
    }
    std::vector<Panel> candidates = std::move(distractors);
    const std::size_t gold_at = rng.index(candidates.size() + 1);
    candidates.insert(candidates.begin() + static_cast<std::ptrdiff_t>(gold_at), full[2][2]);
    puzzle.candidates = std::move(candidates);
    puzzle.gold_index = gold_at;
    return puzzle;
  }
  fail(ErrorCode::internal, "could not sample a puzzle for " + std::string(to_string(config)));
}

std::string render_incomplete(const Matrix& panels) {
  return "row 1: " + join_row(panels[0], 3) + "; row 2: " + join_row(panels[1], 3) +
         "; row 3: " + join_row(panels[2], 2) + ", ?";
}

TaskInstance to_task_instance(const RavenPuzzle& puzzle, std::string id) {
  AnalogyInstance body;
  body.a = join_row(puzzle.panels[0], 3);
  body.a_prime = join_row(puzzle.panels[1], 3);
  body.b = join_row(puzzle.panels[2], 2);
  body.gold = serialize_symbolic(puzzle.gold());
  for (const auto& c : puzzle.candidates) body.candidates.push_back(serialize_symbolic(c));

  TaskInstance t;
  t.id = std::move(id);
  t.dataset = DatasetKind::raven;
  t.modality = Modality::symbolic;
  t.format = TaskFormat::mcq;
  t.difficulty = classify_raven_difficulty(puzzle.config, puzzle.n_transitions);
  t.body = std::move(body);
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : puzzle.rules) {
    nlohmann::json jr{{"group", r.group}, {"attribute", to_string(r.attribute)}, {"rule", to_string(r.kind)}};
    if (r.kind == RuleKind::progression) jr["step"] = r.step;
    rules.push_back(std::move(jr));
  }
  t.meta = {{"config", to_string(puzzle.config)},
            {"n_transitions", puzzle.n_transitions},
            {"rules", std::move(rules)},
            {"gold_index", puzzle.gold_index}};
  return t;
}

std::vector<int> tier_targets(Configuration c, Difficulty tier) {
  const auto [lo, hi] = feasible_transitions(c);
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n)
    if (classify_raven_difficulty(c, n) == tier) out.push_back(n);
  return out;
}

std::vector<TaskInstance> generate_batch(std::optional<Configuration> config, std::size_t count,
                                         std::uint64_t seed) {
  std::vector<TaskInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Configuration c = config ? *config : kAllConfigurations[i % kAllConfigurations.size()];
    const std::size_t cycle = config ? i : i / kAllConfigurations.size();
    const auto tier = static_cast<Difficulty>(cycle % 3);
    char id[32];
    std::snprintf(id, sizeof id, "raven-%05zu", i);
    Rng pick(derive_seed(seed, id, 1));
    const int target = pick.pick(tier_targets(c, tier));
    out.push_back(to_task_instance(generate_matrix(c, target, derive_seed(seed, id)), id));
  }
  return out;
}

}  // namespace dualsys::raven
