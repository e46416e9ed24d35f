#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "drtk/data.hpp"

namespace drtk {

enum class TechniqueId { pca, random_proj, tsne };

std::string to_string(TechniqueId id);
TechniqueId technique_from_string(const std::string& s);

struct Technique {
  TechniqueId id = TechniqueId::pca;
  std::size_t target_dim = 2;
  friend bool operator==(const Technique&, const Technique&) = default;
};

// Named hyperparameter values. Integer-valued parameters (iterations, seed)
// are stored exactly as doubles below 2^53.
class HyperParams {
 public:
  HyperParams() = default;
  HyperParams(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

  void set(const std::string& name, double v) { values_[name] = v; }
  bool has(const std::string& name) const { return values_.count(name) != 0; }
  double get(const std::string& name) const;
  double get_or(const std::string& name, double fallback) const;
  const std::map<std::string, double>& values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;

 private:
  std::map<std::string, double> values_;
};

enum class ParamScale { linear, log, integer, fixed };

struct ParamDomain {
  std::string name;
  double lower;
  double upper;
  ParamScale scale;
  // Sampled values are clipped to this ceiling (it may lie below `upper`).
  double clip_upper;
};

struct SearchSpace {
  TechniqueId technique;
  std::vector<ParamDomain> params;

  // An empty space holds exactly one configuration.
  bool degenerate() const noexcept { return params.empty(); }
  HyperParams sample(std::mt19937_64& rng) const;
};

// Default search space of a technique for a dataset of n points.
SearchSpace hp_space(const Technique& t, std::size_t n);

// Centers X and projects onto the top-d principal axes (descending variance).
// Each axis is signed so that its largest-magnitude loading is positive.
// Axes beyond the data rank are zero-filled with a warning. d = D is allowed
// here (a rotation); `project` requires d < D.
DataMatrix pca_project(const DataMatrix& X, std::size_t d, Warnings* warnings = nullptr);

// Coordinates on principal components start .. start + count - 1 (1-based).
DataMatrix pca_slice(const DataMatrix& X, std::size_t start, std::size_t count, Warnings* warnings = nullptr);

// D x d matrix with orthonormal columns, Haar-distributed, as a row-major DataMatrix.
DataMatrix random_frame(std::size_t D, std::size_t d, std::uint64_t seed);

DataMatrix random_orthogonal_project(const DataMatrix& X, std::size_t d, std::uint64_t seed);

// Exact t-SNE. Reads perplexity, learning_rate, iterations and seed from hp.
DataMatrix tsne_project(const DataMatrix& X, std::size_t d, const HyperParams& hp, Warnings* warnings = nullptr);

DataMatrix project(const DataMatrix& X, const Technique& t, const HyperParams& hp, Warnings* warnings = nullptr);

}  // namespace drtk
