#include "dualsys/listfn.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dualsys/dataset_io.hpp"
#include "dualsys/error.hpp"
#include "dualsys/rng.hpp"

namespace dualsys::listfn {

namespace {

enum class ArgKind { count, integer, position, predicate, function };

const std::map<std::string, std::vector<ArgKind>, std::less<>>& signatures() {
  using enum ArgKind;
  static const std::map<std::string, std::vector<ArgKind>, std::less<>> sigs{
      {"id", {}},          {"head", {}},         {"last", {}},           {"tail", {}},
      {"init", {}},        {"reverse", {}},      {"sort", {}},           {"sort_desc", {}},
      {"dedup", {}},       {"length", {}},       {"sum", {}},            {"max", {}},
      {"min", {}},         {"repeat", {}},       {"swap_ends", {}},      {"cumsum", {}},
      {"diffs", {}},       {"take", {count}},    {"drop", {count}},      {"take_last", {count}},
      {"drop_last", {count}}, {"rotate_left", {count}}, {"rotate_right", {count}},
      {"append", {integer}},  {"prepend", {integer}},   {"index", {position}},
      {"remove_at", {position}}, {"set", {position, integer}}, {"insert_at", {position, integer}},
      {"filter", {predicate}},   {"remove", {predicate}},      {"count", {predicate}},
      {"map", {function}},
  };
  return sigs;
}

const std::set<std::string, std::less<>> kPredicates{"even", "odd", "gt", "lt", "eq", "ne"};
const std::set<std::string, std::less<>> kFunctions{"add", "sub", "mul", "div", "mod"};

std::int64_t to_int(std::string_view s, std::string_view context) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    fail(ErrorCode::parse, "expected integer, got '" + std::string(s) + "' in '" + std::string(context) + "'");
  return v;
}

std::vector<std::string> split_words(std::string_view stage, std::string_view context) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < stage.size()) {
    if (std::isspace(static_cast<unsigned char>(stage[i]))) {
      ++i;
      continue;
    }
    if (stage[i] == '(') {
      const auto close = stage.find(')', i);
      if (close == std::string_view::npos) fail(ErrorCode::parse, "unbalanced '(' in '" + std::string(context) + "'");
      out.emplace_back(stage.substr(i, close - i + 1));
      i = close + 1;
    } else {
      std::size_t j = i;
      while (j < stage.size() && !std::isspace(static_cast<unsigned char>(stage[j])) && stage[j] != '(') ++j;
      out.emplace_back(stage.substr(i, j - i));
      i = j;
    }
  }
  return out;
}

Arg parse_operator(const std::string& word, ArgKind kind, std::string_view context) {
  if (word.size() < 2 || word.front() != '(')
    fail(ErrorCode::parse, "expected parenthesized operand, got '" + word + "' in '" + std::string(context) + "'");
  std::istringstream in(word.substr(1, word.size() - 2));
  Arg a;
  std::string num;
  in >> a.op >> num;
  const auto& names = kind == ArgKind::predicate ? kPredicates : kFunctions;
  if (!names.count(a.op)) fail(ErrorCode::parse, "unknown operator '" + a.op + "' in '" + std::string(context) + "'");
  const bool unary = a.op == "even" || a.op == "odd";
  if (unary != num.empty()) fail(ErrorCode::parse, "wrong operand count for '" + a.op + "'");
  if (!unary) a.n = to_int(num, context);
  if ((a.op == "div" || a.op == "mod") && a.n <= 0)
    fail(ErrorCode::parse, a.op + " needs a positive divisor in '" + std::string(context) + "'");
  return a;
}

bool test(const Arg& p, std::int64_t v) {
  if (p.op == "even") return v % 2 == 0;
  if (p.op == "odd") return v % 2 != 0;
  if (p.op == "gt") return v > p.n;
  if (p.op == "lt") return v < p.n;
  if (p.op == "eq") return v == p.n;
  return v != p.n;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t apply(const Arg& f, std::int64_t v) {
  if (f.op == "add") return v + f.n;
  if (f.op == "sub") return v - f.n;
  if (f.op == "mul") return v * f.n;
  if (f.op == "div") return floor_div(v, f.n);
  return v - floor_div(v, f.n) * f.n;
}

List run_stage(const Stage& s, List x) {
  const auto& n = s.name;
  const auto len = static_cast<std::int64_t>(x.size());
  auto arg = [&](std::size_t i) { return s.args[i].n; };
  auto begin = x.begin();
  if (n == "id") return x;
  if (n == "head") return x.empty() ? List{} : List{x.front()};
  if (n == "last") return x.empty() ? List{} : List{x.back()};
  if (n == "tail") return x.empty() ? x : List(begin + 1, x.end());
  if (n == "init") return x.empty() ? x : List(begin, x.end() - 1);
  if (n == "take") return List(begin, begin + std::min(arg(0), len));
  if (n == "drop") return List(begin + std::min(arg(0), len), x.end());
  if (n == "take_last") return List(x.end() - std::min(arg(0), len), x.end());
  if (n == "drop_last") return List(begin, x.end() - std::min(arg(0), len));
  if (n == "reverse") {
    std::reverse(x.begin(), x.end());
    return x;
  }
  if (n == "sort") {
    std::sort(x.begin(), x.end());
    return x;
  }
  if (n == "sort_desc") {
    std::sort(x.begin(), x.end(), std::greater<>());
    return x;
  }
  if (n == "dedup") {
    List out;
    std::set<std::int64_t> seen;
    for (auto v : x)
      if (seen.insert(v).second) out.push_back(v);
    return out;
  }
  if (n == "filter" || n == "remove") {
    const bool keep = n == "filter";
    List out;
    for (auto v : x)
      if (test(s.args[0], v) == keep) out.push_back(v);
    return out;
  }
  if (n == "count") return {static_cast<std::int64_t>(std::count_if(x.begin(), x.end(), [&](auto v) { return test(s.args[0], v); }))};
  if (n == "map") {
    for (auto& v : x) v = apply(s.args[0], v);
    return x;
  }
  if (n == "append") {
    x.push_back(arg(0));
    return x;
  }
  if (n == "prepend") {
    x.insert(x.begin(), arg(0));
    return x;
  }
  if (n == "index") return arg(0) <= len ? List{x[static_cast<std::size_t>(arg(0) - 1)]} : List{};
  if (n == "length") return {len};
  if (n == "sum") {
    std::int64_t t = 0;
    for (auto v : x) t += v;
    return {t};
  }
  if (n == "max") return x.empty() ? List{} : List{*std::max_element(x.begin(), x.end())};
  if (n == "min") return x.empty() ? List{} : List{*std::min_element(x.begin(), x.end())};
  if (n == "rotate_left" || n == "rotate_right") {
    if (x.empty()) return x;
    auto k = arg(0) % len;
    if (n == "rotate_right") k = (len - k) % len;
    std::rotate(x.begin(), x.begin() + k, x.end());
    return x;
  }
  if (n == "repeat") {
    List out = x;
    out.insert(out.end(), x.begin(), x.end());
    return out;
  }
  if (n == "swap_ends") {
    if (x.size() >= 2) std::swap(x.front(), x.back());
    return x;
  }
  if (n == "set") {
    if (arg(0) <= len) x[static_cast<std::size_t>(arg(0) - 1)] = arg(1);
    return x;
  }
  if (n == "remove_at") {
    if (arg(0) <= len) x.erase(x.begin() + (arg(0) - 1));
    return x;
  }
  if (n == "insert_at") {
    x.insert(x.begin() + std::min(arg(0) - 1, len), arg(1));
    return x;
  }
  if (n == "cumsum") {
    std::int64_t t = 0;
    for (auto& v : x) v = (t += v);
    return x;
  }
  if (n == "diffs") {
    List out;
    for (std::size_t i = 1; i < x.size(); ++i) out.push_back(x[i] - x[i - 1]);
    return out;
  }
  fail(ErrorCode::internal, "unhandled primitive " + n);
}

List random_list(Rng& rng) {
  List l(static_cast<std::size_t>(rng.uniform(3, 10)));
  for (auto& v : l) v = rng.uniform(0, kMaxElement);
  return l;
}

}  // namespace

Program parse_program(std::string_view text) {
  Program p;
  p.text = std::string(text);
  std::size_t start = 0;
  while (true) {
    const auto bar = text.find('|', start);
    const auto piece = text.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    const auto words = split_words(piece, text);
    if (words.empty()) fail(ErrorCode::parse, "empty stage in '" + std::string(text) + "'");
    const auto sig = signatures().find(words[0]);
    if (sig == signatures().end()) fail(ErrorCode::parse, "unknown primitive '" + words[0] + "'");
    if (words.size() - 1 != sig->second.size())
      fail(ErrorCode::parse, "'" + words[0] + "' takes " + std::to_string(sig->second.size()) + " argument(s)");
    Stage st{words[0], {}};
    for (std::size_t i = 0; i < sig->second.size(); ++i) {
      const auto kind = sig->second[i];
      if (kind == ArgKind::predicate || kind == ArgKind::function) {
        st.args.push_back(parse_operator(words[i + 1], kind, text));
        continue;
      }
      const auto v = to_int(words[i + 1], text);
      if ((kind == ArgKind::count && v < 0) || (kind == ArgKind::position && v < 1))
        fail(ErrorCode::parse, "argument out of range for '" + words[0] + "' in '" + std::string(text) + "'");
      st.args.push_back({"", v});
    }
    p.stages.push_back(std::move(st));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return p;
}

List eval_program(const Program& program, const List& input) {
  List x = input;
  for (const auto& s : program.stages) x = run_stage(s, std::move(x));
  return x;
}

List eval_fn(const ListFn& fn, const List& input) { return eval_program(fn.program, input); }

Registry Registry::from_text(std::string_view text) {
  Registry r;
  std::set<int> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, '\t');) cols.push_back(c);
    if (cols.size() < 3) fail(ErrorCode::parse, "registry line " + std::to_string(lineno) + ": expected id, rank, program");
    ListFn fn;
    try {
      fn.id = static_cast<int>(to_int(cols[0], line));
      fn.rank = static_cast<int>(to_int(cols[1], line));
      fn.program = parse_program(cols[2]);
    } catch (const Error& e) {
      fail(ErrorCode::parse, "registry line " + std::to_string(lineno) + ": " + e.what());
    }
    if (fn.rank < 1) fail(ErrorCode::parse, "registry line " + std::to_string(lineno) + ": rank must be >= 1");
    if (!ids.insert(fn.id).second) fail(ErrorCode::parse, "registry line " + std::to_string(lineno) + ": duplicate id");
    fn.surrogate = cols.size() > 3 && cols[3] == "surrogate";
    r.fns_.push_back(std::move(fn));
  }
  return r;
}

Registry Registry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open registry " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

const ListFn& Registry::by_id(int id) const {
  for (const auto& f : fns_)
    if (f.id == id) return f;
  fail(ErrorCode::invalid_argument, "no list function with id " + std::to_string(id));
}

Difficulty classify_listfn_difficulty(int rank) {
  if (rank <= 84) return Difficulty::easy;
  if (rank < 170) return Difficulty::medium;
  return Difficulty::hard;
}

std::string format_list(const List& l) {
  std::string out = "[";
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(l[i]);
  }
  return out + "]";
}

List parse_list(std::string_view text) {
  std::string s(text);
  for (auto& c : s)
    if (c == '[' || c == ']' || c == ',') c = ' ';
  std::istringstream in(s);
  List out;
  for (std::string tok; in >> tok;) out.push_back(to_int(tok, text));
  return out;
}

std::string function_id(const ListFn& fn) { return "listfn:" + std::to_string(fn.id); }

TaskInstance make_instance(const ListFn& fn, std::size_t n_shots, std::uint64_t seed, std::string id) {
  if (n_shots < 1) fail(ErrorCode::invalid_argument, "n_shots must be >= 1");
  Rng rng(seed);
  std::set<List> used;
  auto fresh = [&] {
    for (;;) {
      auto l = random_list(rng);
      if (used.insert(l).second) return l;
    }
  };
  IclInstance body;
  for (std::size_t i = 0; i < n_shots; ++i) {
    const auto in = fresh();
    body.demos.push_back({format_list(in), format_list(eval_fn(fn, in))});
  }
  const auto test = fresh();
  body.test_input = format_list(test);
  body.gold_output = format_list(eval_fn(fn, test));
  body.function_id = function_id(fn);

  TaskInstance t;
  t.id = id.empty() ? "listfn-" + std::to_string(fn.id) : std::move(id);
  t.dataset = DatasetKind::listfn;
  t.modality = Modality::math_code;
  t.format = TaskFormat::ftg;
  t.difficulty = classify_listfn_difficulty(fn.rank);
  t.body = std::move(body);
  t.meta = {{"function", fn.id}, {"rank", fn.rank}, {"program", fn.program.text}, {"surrogate", fn.surrogate}};
  return t;
}

std::vector<std::string> make_distractors(const Registry& registry, const TaskInstance& instance, std::size_t k,
                                          std::uint64_t seed) {
  const auto& icl = std::get<IclInstance>(instance.body);
  const auto input = parse_list(icl.test_input);
  std::vector<const ListFn*> others;
  for (const auto& f : registry.all())
    if (function_id(f) != icl.function_id) others.push_back(&f);
  Rng rng(seed);
  rng.shuffle(others);
  std::set<std::string> seen{icl.gold_output};
  std::vector<std::string> out;
  for (const auto* f : others) {
    if (out.size() >= k) break;
    auto s = format_list(eval_fn(*f, input));
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

std::vector<TaskInstance> generate_batch(const Registry& registry, std::size_t count, std::size_t n_shots,
                                         std::uint64_t seed, TaskFormat format) {
  if (registry.size() == 0) fail(ErrorCode::invalid_argument, "empty registry");
  std::vector<TaskInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& fn = registry.all()[i % registry.size()];
    char id[32];
    std::snprintf(id, sizeof id, "listfn-%05zu", i);
    auto inst = make_instance(fn, n_shots, derive_seed(seed, id), id);
    if (format == TaskFormat::mcq)
      inst = project_mcq(inst, make_distractors(registry, inst, 3, derive_seed(seed, id, 2)), seed);
    out.push_back(std::move(inst));
  }
  return out;
}

DemoOracle make_oracle(const Registry& registry) {
  return [&registry](const std::string& fid, const std::string& input) -> std::optional<std::string> {
    if (fid.rfind("listfn:", 0) != 0) return std::nullopt;
    int id = 0;
    try {
      id = std::stoi(fid.substr(7));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    for (const auto& f : registry.all())
      if (f.id == id) return format_list(eval_fn(f, parse_list(input)));
    return std::nullopt;
  };
}

}  // namespace dualsys::listfn
