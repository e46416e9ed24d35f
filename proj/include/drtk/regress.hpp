#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drtk/data.hpp"

namespace drtk {

enum class RegressorKind { linear, poly2, knn };

inline constexpr std::array<RegressorKind, 3> kRegressorKinds{RegressorKind::linear, RegressorKind::poly2,
                                                              RegressorKind::knn};

std::string to_string(RegressorKind kind);
RegressorKind regressor_from_string(const std::string& s);

using FeatureRows = std::vector<std::vector<double>>;

inline constexpr std::size_t kDefaultKnnNeighbors = 5;

// A fitted predictor of a scalar from a fixed-length feature vector.
// Immutable once built.
class RegressionModel {
 public:
  RegressorKind kind() const noexcept { return kind_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  bool bounded_unit() const noexcept { return bounded_unit_; }
  // True for the mean predictor used when the inputs carry no signal.
  bool constant() const noexcept { return constant_; }

  double predict(std::span<const double> feature) const;

  // Linear and poly2: intercept followed by one weight per (expanded) feature.
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  // kNN: retained training set and the standardization applied to it.
  const FeatureRows& train_features() const noexcept { return train_x_; }
  const std::vector<double>& train_targets() const noexcept { return train_y_; }
  std::size_t neighbors() const noexcept { return k_; }

  static RegressionModel constant_model(std::size_t feature_dim, double value, bool bounded_unit);

  // Rebuilds a model from serialized parts (see the CLI model-set file).
  static RegressionModel restore(RegressorKind kind, std::size_t feature_dim, bool bounded_unit, bool constant,
                                 std::vector<double> coefficients, FeatureRows train_x, std::vector<double> train_y,
                                 std::size_t neighbors = kDefaultKnnNeighbors);

  friend RegressionModel fit(RegressorKind, const FeatureRows&, const std::vector<double>&, bool, std::size_t);

 private:
  double raw_predict(std::span<const double> feature) const;

  RegressorKind kind_ = RegressorKind::linear;
  std::size_t feature_dim_ = 0;
  bool bounded_unit_ = false;
  bool constant_ = false;
  std::vector<double> coefficients_;
  FeatureRows train_x_;
  std::vector<double> train_y_;
  std::size_t k_ = 0;
  std::vector<double> center_;
  std::vector<double> scale_;
};

// Minimum training-set size for a kind on feature_dim inputs.
std::size_t min_samples(RegressorKind kind, std::size_t feature_dim);

// Degree-2 monomial expansion: x_1..x_p then x_i * x_j for i <= j.
std::vector<double> poly2_expand(std::span<const double> x);

// kNN averages min(knn_neighbors, n) neighbors.
RegressionModel fit(RegressorKind kind, const FeatureRows& features, const std::vector<double>& targets,
                    bool bounded_unit = false, std::size_t knn_neighbors = kDefaultKnnNeighbors);

// Mean out-of-fold R^2 over a seeded shuffle split into contiguous folds.
double kfold_r2(RegressorKind kind, const FeatureRows& features, const std::vector<double>& targets,
                std::size_t folds, std::uint64_t seed, Warnings* warnings = nullptr, bool bounded_unit = false);

struct ModelChoice {
  RegressorKind kind;
  // Cross-validated R^2 per kind in kRegressorKinds order; -inf when a kind
  // could not be fitted.
  std::array<double, 3> r2;
};

// Kind with the highest cross-validated R^2; ties go to the earlier kind.
ModelChoice select_regressor(const FeatureRows& features, const std::vector<double>& targets, std::size_t folds,
                             std::uint64_t seed, Warnings* warnings = nullptr, bool bounded_unit = false);

}  // namespace drtk
