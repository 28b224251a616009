#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dualsys/task_model.hpp"

namespace dualsys {

/// Immutable key -> vector map of one fixed dimension.
class VectorStore {
 public:
  VectorStore() = default;
  explicit VectorStore(std::size_t dim, std::string source = {}) : dim_(dim), source_(std::move(source)) {}

  /// Portable format: `DIM <d>` header, `#` comment lines, then
  /// `key<TAB>v1 v2 ... vd`. A `# source: <tag>` comment sets the tag.
  static VectorStore load(const std::string& path);
  static VectorStore parse(std::string_view text, const std::string& origin = "<memory>");

  void add(const std::string& key, std::vector<double> v);
  bool contains(const std::string& key) const { return rows_.count(key) > 0; }
  const std::vector<double>& at(const std::string& key) const;

  /// Direct lookup, else the mean of the space-separated constituents.
  std::vector<double> embed(const std::string& phrase) const;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  const std::string& source() const { return source_; }

 private:
  std::size_t dim_ = 0;
  std::string source_;
  std::unordered_map<std::string, std::vector<double>> rows_;
};

/// 1 - cos(u, v). Throws invalid_argument on a zero vector or dimension mismatch.
double cos_dist(const std::vector<double>& u, const std::vector<double>& v);

/// (cos_dist(A, B) + cos_dist(A', B')) / 2, items resolved through embed().
double sem_dist(const std::pair<std::string, std::string>& source, const std::pair<std::string, std::string>& target,
                const VectorStore& store);

/// value < low easy; low <= value <= high medium; value > high hard.
struct ThresholdSpec {
  double low;
  double high;
};

inline constexpr ThresholdSpec kEkarThresholds{0.70, 0.80};
inline constexpr ThresholdSpec kVasrThresholds{0.70, 0.76};

Difficulty classify_threshold(double value, const ThresholdSpec& spec);

/// Sets difficulty and meta.sem_dist on every analogy instance.
void annotate(std::vector<TaskInstance>& instances, const VectorStore& store, const ThresholdSpec& spec);

ThresholdSpec thresholds_for(DatasetKind kind);

}  // namespace dualsys
