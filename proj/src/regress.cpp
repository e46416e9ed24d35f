#include "drtk/regress.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "drtk/error.hpp"

namespace drtk {

std::string to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::linear: return "linear";
    case RegressorKind::poly2: return "poly2";
    case RegressorKind::knn: return "knn";
  }
  return "?";
}

RegressorKind regressor_from_string(const std::string& s) {
  for (auto k : kRegressorKinds)
    if (to_string(k) == s) return k;
  throw ParameterError("unknown regressor '" + s + "'");
}

std::vector<double> poly2_expand(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i; j < x.size(); ++j) out.push_back(x[i] * x[j]);
  return out;
}

std::size_t min_samples(RegressorKind kind, std::size_t feature_dim) {
  switch (kind) {
    case RegressorKind::linear: return feature_dim + 1;
    case RegressorKind::poly2: return feature_dim + feature_dim * (feature_dim + 1) / 2 + 1;
    case RegressorKind::knn: return 1;
  }
  return 1;
}

namespace {

constexpr double kRidge = 1e-8;

std::vector<double> least_squares(const FeatureRows& rows, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd A(n, p + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) A(i, j + 1) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd normal = A.transpose() * A;
  // Damp the weights, not the intercept.
  for (Eigen::Index j = 1; j <= p; ++j) normal(j, j) += kRidge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-15))
    throw FitError("least-squares design is singular beyond ridge damping");
  const Eigen::VectorXd beta = ldlt.solve(A.transpose() * b);
  if (!beta.allFinite()) throw FitError("least-squares solution is not finite");
  return {beta.data(), beta.data() + beta.size()};
}

void check_training(const FeatureRows& features, const std::vector<double>& targets) {
  if (features.empty()) throw FitError("no training samples");
  if (features.size() != targets.size()) throw ValidationError("feature/target count mismatch");
  const std::size_t dim = features.front().size();
  if (dim == 0) throw ValidationError("feature vectors are empty");
  for (const auto& f : features) {
    if (f.size() != dim) throw ValidationError("feature vectors differ in length");
    for (double v : f)
      if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
  }
  for (double t : targets)
    if (!std::isfinite(t)) throw ValidationError("non-finite target value");
}

}  // namespace

RegressionModel RegressionModel::constant_model(std::size_t feature_dim, double value, bool bounded_unit) {
  RegressionModel m;
  m.kind_ = RegressorKind::linear;
  m.feature_dim_ = feature_dim;
  m.bounded_unit_ = bounded_unit;
  m.constant_ = true;
  m.coefficients_.assign(feature_dim + 1, 0.0);
  m.coefficients_[0] = value;
  return m;
}

RegressionModel RegressionModel::restore(RegressorKind kind, std::size_t feature_dim, bool bounded_unit,
                                         bool constant, std::vector<double> coefficients, FeatureRows train_x,
                                         std::vector<double> train_y, std::size_t neighbors) {
  if (constant) {
    if (coefficients.empty()) throw ValidationError("constant model needs a value");
    return constant_model(feature_dim, coefficients.front(), bounded_unit);
  }
  if (kind == RegressorKind::knn) return fit(kind, train_x, train_y, bounded_unit, neighbors);
  const std::size_t expected = (kind == RegressorKind::poly2 ? min_samples(kind, feature_dim) - 1 : feature_dim) + 1;
  if (coefficients.size() != expected) throw ValidationError("coefficient count does not match the model kind");
  RegressionModel m;
  m.kind_ = kind;
  m.feature_dim_ = feature_dim;
  m.bounded_unit_ = bounded_unit;
  m.coefficients_ = std::move(coefficients);
  return m;
}

RegressionModel fit(RegressorKind kind, const FeatureRows& features, const std::vector<double>& targets,
                    bool bounded_unit, std::size_t knn_neighbors) {
  check_training(features, targets);
  if (knn_neighbors == 0) throw ParameterError("kNN regression needs at least one neighbor");
  const std::size_t dim = features.front().size();
  if (features.size() < min_samples(kind, dim))
    throw FitError(to_string(kind) + " regression needs at least " + std::to_string(min_samples(kind, dim)) +
                   " samples, got " + std::to_string(features.size()));
  RegressionModel m;
  m.kind_ = kind;
  m.feature_dim_ = dim;
  m.bounded_unit_ = bounded_unit;
  switch (kind) {
    case RegressorKind::linear:
      m.coefficients_ = least_squares(features, targets);
      break;
    case RegressorKind::poly2: {
      FeatureRows expanded;
      expanded.reserve(features.size());
      for (const auto& f : features) expanded.push_back(poly2_expand(f));
      m.coefficients_ = least_squares(expanded, targets);
      break;
    }
    case RegressorKind::knn: {
      m.k_ = std::min(knn_neighbors, features.size());
      m.train_x_ = features;
      m.train_y_ = targets;
      m.center_.assign(dim, 0.0);
      m.scale_.assign(dim, 1.0);
      for (std::size_t j = 0; j < dim; ++j) {
        std::vector<double> col;
        for (const auto& f : features) col.push_back(f[j]);
        m.center_[j] = mean(col);
        const double s = population_std(col);
        m.scale_[j] = s > 0.0 ? s : 1.0;
      }
      break;
    }
  }
  return m;
}

double RegressionModel::raw_predict(std::span<const double> x) const {
  if (constant_) return coefficients_.front();
  switch (kind_) {
    case RegressorKind::linear:
    case RegressorKind::poly2: {
      const std::vector<double> z =
          kind_ == RegressorKind::poly2 ? poly2_expand(x) : std::vector<double>(x.begin(), x.end());
      double y = coefficients_[0];
      for (std::size_t j = 0; j < z.size(); ++j) y += coefficients_[j + 1] * z[j];
      return y;
    }
    case RegressorKind::knn: {
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(train_x_.size());
      for (std::size_t i = 0; i < train_x_.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < feature_dim_; ++j) {
          const double diff = (x[j] - train_x_[i][j]) / scale_[j];
          s += diff * diff;
        }
        dist.emplace_back(s, i);
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
      double y = 0.0;
      for (std::size_t t = 0; t < k_; ++t) y += train_y_[dist[t].second];
      return y / static_cast<double>(k_);
    }
  }
  throw std::logic_error("unhandled regressor kind");
}

double RegressionModel::predict(std::span<const double> feature) const {
  if (feature.size() != feature_dim_)
    throw ParameterError("feature vector has length " + std::to_string(feature.size()) + ", model expects " +
                         std::to_string(feature_dim_));
  const double y = raw_predict(feature);
  return bounded_unit_ ? std::clamp(y, 0.0, 1.0) : y;
}

double kfold_r2(RegressorKind kind, const FeatureRows& features, const std::vector<double>& targets,
                std::size_t folds, std::uint64_t seed, Warnings* warnings, bool bounded_unit) {
  check_training(features, targets);
  const std::size_t n = features.size();
  if (folds < 2) throw ParameterError("k-fold needs at least 2 folds");
  if (n < folds) throw ParameterError("k-fold needs at least as many samples as folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  double sum = 0.0;
  std::size_t used = 0;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    const std::size_t end = begin + size;
    FeatureRows train_x, test_x;
    std::vector<double> train_y, test_y;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = order[t];
      if (t >= begin && t < end) {
        test_x.push_back(features[i]);
        test_y.push_back(targets[i]);
      } else {
        train_x.push_back(features[i]);
        train_y.push_back(targets[i]);
      }
    }
    begin = end;
    const double m = mean(test_y);
    double ss_tot = 0.0;
    for (double y : test_y) ss_tot += (y - m) * (y - m);
    if (!(ss_tot > 0.0)) {
      warn(warnings, "fold " + std::to_string(f) + " skipped: zero target variance");
      continue;
    }
    const auto model = fit(kind, train_x, train_y, bounded_unit);
    double ss_res = 0.0;
    for (std::size_t t = 0; t < test_x.size(); ++t) {
      const double r = test_y[t] - model.predict(test_x[t]);
      ss_res += r * r;
    }
    sum += 1.0 - ss_res / ss_tot;
    ++used;
  }
  if (used == 0) throw DegenerateInputError("every fold has zero target variance; R^2 undefined");
  return sum / static_cast<double>(used);
}

ModelChoice select_regressor(const FeatureRows& features, const std::vector<double>& targets, std::size_t folds,
                             std::uint64_t seed, Warnings* warnings, bool bounded_unit) {
  ModelChoice choice{RegressorKind::linear, {}};
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kRegressorKinds.size(); ++i) {
    double r2 = -std::numeric_limits<double>::infinity();
    try {
      r2 = kfold_r2(kRegressorKinds[i], features, targets, folds, seed, nullptr, bounded_unit);
    } catch (const FitError& e) {
      warn(warnings, to_string(kRegressorKinds[i]) + " regressor unavailable: " + e.what());
    }
    choice.r2[i] = r2;
    if (r2 > best) {
      best = r2;
      choice.kind = kRegressorKinds[i];
    }
  }
  if (best == -std::numeric_limits<double>::infinity()) throw FitError("no regressor kind could be fitted");
  return choice;
}

}  // namespace drtk
