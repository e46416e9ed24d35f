#include "drtk/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "drtk/error.hpp"
#include "drtk/parallel.hpp"

namespace drtk {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ < 1 || cols_ < 1) throw ValidationError("data matrix needs at least one row and one column");
  if (values_.size() != rows_ * cols_)
    throw ValidationError("data matrix has " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(rows_ * cols_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (!std::isfinite(values_[i * cols_ + j]))
        throw ValidationError("non-finite value at row " + std::to_string(i) + ", column " +
                              std::to_string(j));
}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols)
    : DataMatrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

DataMatrix DataMatrix::scaled(double alpha) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= alpha;
  return {rows_, cols_, std::move(v)};
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> idx) const {
  std::vector<double> v;
  v.reserve(idx.size() * cols_);
  for (std::size_t i : idx) {
    if (i >= rows_) throw ParameterError("row index " + std::to_string(i) + " out of range");
    auto r = row(i);
    v.insert(v.end(), r.begin(), r.end());
  }
  return {idx.size(), cols_, std::move(v)};
}

LabelPartition::LabelPartition(std::vector<int> assignments, int class_count)
    : labels_(std::move(assignments)), class_count_(class_count) {
  if (class_count_ < 1) throw ValidationError("class count must be positive");
  if (labels_.empty()) throw ValidationError("label partition is empty");
  members_.assign(static_cast<std::size_t>(class_count_), {});
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int c = labels_[i];
    if (c < 0 || c >= class_count_)
      throw ValidationError("label " + std::to_string(c) + " at point " + std::to_string(i) +
                            " outside [0, " + std::to_string(class_count_) + ")");
    members_[static_cast<std::size_t>(c)].push_back(i);
  }
  for (int c = 0; c < class_count_; ++c)
    if (members_[static_cast<std::size_t>(c)].empty())
      throw ValidationError("class " + std::to_string(c) + " is empty");
}

LabelPartition LabelPartition::from_ids(std::span<const long long> ids) {
  std::map<long long, int> dense;
  for (long long id : ids) dense.emplace(id, 0);
  int next = 0;
  for (auto& [id, slot] : dense) slot = next++;
  std::vector<int> out;
  out.reserve(ids.size());
  for (long long id : ids) out.push_back(dense.at(id));
  return {std::move(out), next};
}

LabelPartition LabelPartition::select(std::span<const std::size_t> idx) const {
  std::vector<long long> ids;
  ids.reserve(idx.size());
  for (std::size_t i : idx) ids.push_back(labels_.at(i));
  return from_ids(ids);
}

LabeledDataset validate_labeled(DataMatrix X, LabelPartition P) {
  if (X.rows() != P.size())
    throw ValidationError("data has " + std::to_string(X.rows()) + " points but " +
                          std::to_string(P.size()) + " labels");
  for (int c = 0; c < P.class_count(); ++c)
    if (P.members()[static_cast<std::size_t>(c)].size() < 2)
      throw ValidationError("class too small: class " + std::to_string(c) + " has fewer than 2 points");
  return {std::move(X), std::move(P)};
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

DistanceMatrix pairwise_distances(const DataMatrix& X, DistanceKind kind) {
  const std::size_t n = X.rows();
  if (n > kMaxDensePoints)
    throw ParameterError("dense distance matrix limited to " + std::to_string(kMaxDensePoints) + " points");
  std::vector<double> v(n * n, 0.0);
  // Each task fills the upper part of its own row; the mirror is copied after.
  parallel_for(n, [&](std::size_t i) {
    auto xi = X.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = squared_distance(xi, X.row(j));
      v[i * n + j] = kind == DistanceKind::euclidean ? std::sqrt(d2) : d2;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) v[i * n + j] = v[j * n + i];
  return {n, std::move(v), kind};
}

DistanceMatrix DistanceMatrix::from_dense(std::size_t n, std::vector<double> values, DistanceKind kind) {
  if (values.size() != n * n) throw ValidationError("distance matrix size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i * n + i] != 0.0) throw ValidationError("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double a = values[i * n + j];
      const double b = values[j * n + i];
      if (!std::isfinite(a) || a < 0.0)
        throw ValidationError("distance (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") is negative or non-finite");
      if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
        throw ValidationError("distance matrix is not symmetric");
    }
  }
  return {n, std::move(values), kind};
}

std::vector<double> DistanceMatrix::condensed() const {
  std::vector<double> out;
  out.reserve(n_ * (n_ - 1) / 2);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) out.push_back(values_[i * n_ + j]);
  return out;
}

std::vector<double> condensed_distances(const DataMatrix& X) {
  const std::size_t n = X.rows();
  std::vector<double> out(n * (n - 1) / 2);
  // Row i's block starts at offset i*n - i*(i+1)/2.
  parallel_for(n, [&](std::size_t i) {
    std::size_t off = i * n - i * (i + 1) / 2;
    auto xi = X.row(i);
    for (std::size_t j = i + 1; j < n; ++j) out[off++] = std::sqrt(squared_distance(xi, X.row(j)));
  });
  return out;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw DegenerateInputError("mean of an empty sequence");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace drtk
