#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace drtk {

// Collects non-fatal diagnostics. Passing nullptr wherever a Warnings* is
// accepted discards them.
struct Warnings {
  std::vector<std::string> messages;
  void add(std::string msg) { messages.push_back(std::move(msg)); }
  bool empty() const noexcept { return messages.empty(); }
};

inline void warn(Warnings* sink, std::string msg) {
  if (sink != nullptr) sink->add(std::move(msg));
}

// N x D table of finite reals, row-major. Shape is fixed at construction.
class DataMatrix {
 public:
  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  // rows x cols of zeros
  DataMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }

  std::span<const double> values() const noexcept { return values_; }

  DataMatrix scaled(double alpha) const;
  // Rows selected by index, in the given order.
  DataMatrix select_rows(std::span<const std::size_t> idx) const;

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

// Dense class assignment with ids in [0, class_count); every class non-empty.
class LabelPartition {
 public:
  LabelPartition(std::vector<int> assignments, int class_count);

  // Maps arbitrary integer ids onto 0..C-1 in ascending id order.
  static LabelPartition from_ids(std::span<const long long> ids);

  std::size_t size() const noexcept { return labels_.size(); }
  int class_count() const noexcept { return class_count_; }
  int operator[](std::size_t i) const noexcept { return labels_[i]; }
  std::span<const int> assignments() const noexcept { return labels_; }

  // Point indices of each class, ascending.
  const std::vector<std::vector<std::size_t>>& members() const noexcept { return members_; }

  LabelPartition select(std::span<const std::size_t> idx) const;

  friend bool operator==(const LabelPartition& a, const LabelPartition& b) {
    return a.class_count_ == b.class_count_ && a.labels_ == b.labels_;
  }

 private:
  std::vector<int> labels_;
  int class_count_;
  std::vector<std::vector<std::size_t>> members_;
};

// Data plus labels where every class has at least two points.
class LabeledDataset {
 public:
  const DataMatrix& data() const noexcept { return data_; }
  const LabelPartition& labels() const noexcept { return labels_; }

 private:
  friend LabeledDataset validate_labeled(DataMatrix X, LabelPartition P);
  LabeledDataset(DataMatrix X, LabelPartition P) : data_(std::move(X)), labels_(std::move(P)) {}
  DataMatrix data_;
  LabelPartition labels_;
};

LabeledDataset validate_labeled(DataMatrix X, LabelPartition P);

enum class DistanceKind { euclidean, squared_euclidean };

// Symmetric N x N matrix of nonnegative distances with a zero diagonal.
class DistanceMatrix {
 public:
  std::size_t size() const noexcept { return n_; }
  DistanceKind kind() const noexcept { return kind_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * n_, n_}; }

  // Wraps an existing dense matrix after checking the invariants.
  static DistanceMatrix from_dense(std::size_t n, std::vector<double> values, DistanceKind kind);

  // Entry-wise strictly monotone map (used for rank-invariance checks).
  template <class F>
  DistanceMatrix transformed(F&& f, DistanceKind kind) const {
    DistanceMatrix out = *this;
    out.kind_ = kind;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j) out.values_[i * n_ + j] = f(values_[i * n_ + j]);
    return out;
  }

  // Upper triangle (i < j) in row-major order.
  std::vector<double> condensed() const;

 private:
  friend DistanceMatrix pairwise_distances(const DataMatrix& X, DistanceKind kind);
  DistanceMatrix(std::size_t n, std::vector<double> values, DistanceKind kind)
      : n_(n), kind_(kind), values_(std::move(values)) {}
  std::size_t n_;
  DistanceKind kind_;
  std::vector<double> values_;
};

DistanceMatrix pairwise_distances(const DataMatrix& X, DistanceKind kind = DistanceKind::euclidean);

// Upper-triangle Euclidean distances without materializing the N x N matrix.
std::vector<double> condensed_distances(const DataMatrix& X);

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

// Population statistics (divide by N), sequential summation order.
double mean(std::span<const double> v);
double population_std(std::span<const double> v);

// Default upper bound on N for dense pairwise structures.
inline constexpr std::size_t kMaxDensePoints = 20000;

}  // namespace drtk
