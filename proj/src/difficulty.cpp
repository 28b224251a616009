#include "dualsys/difficulty.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dualsys/error.hpp"

namespace dualsys {

VectorStore VectorStore::parse(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  VectorStore store;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# source:";
      if (line.rfind(tag, 0) == 0) {
        auto s = line.substr(tag.size());
        s.erase(0, s.find_first_not_of(' '));
        store.source_ = s;
      }
      continue;
    }
    const auto where = origin + ":" + std::to_string(lineno);
    if (!have_header) {
      std::istringstream hs(line);
      std::string word;
      long long d = 0;
      if (!(hs >> word >> d) || word != "DIM" || d <= 0) fail(ErrorCode::parse, where + ": expected 'DIM <d>' header");
      store.dim_ = static_cast<std::size_t>(d);
      have_header = true;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) fail(ErrorCode::parse, where + ": expected key<TAB>values");
    const auto key = line.substr(0, tab);
    std::istringstream vs(line.substr(tab + 1));
    std::vector<double> v;
    std::string tok;
    while (vs >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail(ErrorCode::parse, where + ": bad number '" + tok + "' for key '" + key + "'");
      }
    }
    if (v.size() != store.dim_)
      fail(ErrorCode::schema, where + ": key '" + key + "' has " + std::to_string(v.size()) + " values, expected " +
                                  std::to_string(store.dim_));
    for (double x : v)
      if (!std::isfinite(x)) fail(ErrorCode::schema, where + ": non-finite value for key '" + key + "'");
    if (store.contains(key)) fail(ErrorCode::schema, where + ": duplicate key '" + key + "'");
    store.rows_.emplace(key, std::move(v));
  }
  if (!have_header) fail(ErrorCode::parse, origin + ": missing 'DIM <d>' header");
  return store;
}

VectorStore VectorStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open vector file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void VectorStore::add(const std::string& key, std::vector<double> v) {
  if (v.size() != dim_)
    fail(ErrorCode::schema, "key '" + key + "' has dimension " + std::to_string(v.size()) + ", store has " +
                                std::to_string(dim_));
  if (!rows_.emplace(key, std::move(v)).second) fail(ErrorCode::schema, "duplicate key '" + key + "'");
}

const std::vector<double>& VectorStore::at(const std::string& key) const {
  const auto it = rows_.find(key);
  if (it == rows_.end()) fail(ErrorCode::invalid_argument, "no vector for key '" + key + "'");
  return it->second;
}

std::vector<double> VectorStore::embed(const std::string& phrase) const {
  if (const auto it = rows_.find(phrase); it != rows_.end()) return it->second;
  std::istringstream in(phrase);
  std::vector<double> sum(dim_, 0.0);
  std::size_t n = 0;
  for (std::string w; in >> w; ++n) {
    const auto& v = at(w);
    for (std::size_t i = 0; i < dim_; ++i) sum[i] += v[i];
  }
  if (n == 0) fail(ErrorCode::invalid_argument, "no vector for key '" + phrase + "'");
  for (auto& x : sum) x /= static_cast<double>(n);
  return sum;
}

double cos_dist(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) fail(ErrorCode::invalid_argument, "dimension mismatch in cos_dist");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) fail(ErrorCode::invalid_argument, "zero vector in cos_dist");
  return 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
}

double sem_dist(const std::pair<std::string, std::string>& source, const std::pair<std::string, std::string>& target,
                const VectorStore& store) {
  const double d1 = cos_dist(store.embed(source.first), store.embed(target.first));
  const double d2 = cos_dist(store.embed(source.second), store.embed(target.second));
  return (d1 + d2) / 2.0;
}

Difficulty classify_threshold(double value, const ThresholdSpec& spec) {
  if (value < spec.low) return Difficulty::easy;
  if (value <= spec.high) return Difficulty::medium;
  return Difficulty::hard;
}

ThresholdSpec thresholds_for(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::ekar: return kEkarThresholds;
    case DatasetKind::vasr: return kVasrThresholds;
    default: fail(ErrorCode::invalid_argument, "no embedding thresholds for dataset " + std::string(to_string(kind)));
  }
}

void annotate(std::vector<TaskInstance>& instances, const VectorStore& store, const ThresholdSpec& spec) {
  for (auto& inst : instances) {
    const auto* a = std::get_if<AnalogyInstance>(&inst.body);
    if (!a) fail(ErrorCode::invalid_argument, "instance " + inst.id + " is not an analogy");
    double d = 0;
    try {
      d = sem_dist({a->a, a->a_prime}, {a->b, a->gold}, store);
    } catch (const Error& e) {
      fail(e.code(), "instance " + inst.id + ": " + e.what());
    }
    inst.difficulty = classify_threshold(d, spec);
    inst.meta["sem_dist"] = d;
  }
}

}  // namespace dualsys
