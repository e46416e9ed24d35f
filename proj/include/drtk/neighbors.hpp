#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drtk/data.hpp"

namespace drtk {

// rank(i, j) = 1-based position of j in i's distance ordering (ties go to the
// smaller index). rank(i, i) = 0.
class RankMatrix {
 public:
  std::size_t size() const noexcept { return n_; }
  std::uint32_t rank(std::size_t i, std::size_t j) const noexcept { return ranks_[i * n_ + j]; }
  // The r-th nearest neighbor of i (r is 1-based), i.e. neighbors(i)[r - 1].
  std::span<const std::uint32_t> neighbors(std::size_t i) const noexcept {
    return {order_.data() + i * (n_ - 1), n_ - 1};
  }

 private:
  friend RankMatrix rank_matrix(const DistanceMatrix& D);
  std::size_t n_ = 0;
  std::vector<std::uint32_t> ranks_;
  std::vector<std::uint32_t> order_;
};

RankMatrix rank_matrix(const DistanceMatrix& D);

enum class WeightKind { knn, snn };

// Nonnegative integer weights stored as sorted sparse rows; absent entries are 0.
class WeightMatrix {
 public:
  struct Entry {
    std::uint32_t col;
    std::int64_t weight;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::size_t size() const noexcept { return rows_.size(); }
  WeightKind kind() const noexcept { return kind_; }
  std::size_t k() const noexcept { return k_; }
  std::span<const Entry> row(std::size_t i) const noexcept { return rows_[i]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const noexcept;
  std::vector<std::int64_t> dense_row(std::size_t i) const;

 private:
  friend WeightMatrix knn_weight_matrix(const RankMatrix&, std::size_t);
  friend WeightMatrix snn_weight_matrix(const RankMatrix&, std::size_t);
  WeightKind kind_ = WeightKind::knn;
  std::size_t k_ = 0;
  std::vector<std::vector<Entry>> rows_;
};

// w(i, j) = max(0, k - rank(i, j) + 1) for i != j.
WeightMatrix knn_weight_matrix(const RankMatrix& R, std::size_t k);

// w(i, j) = sum over shared neighbors l of (k + 1 - rank_i(l)) * (k + 1 - rank_j(l)),
// where l ranges over points in both k-neighborhoods.
WeightMatrix snn_weight_matrix(const RankMatrix& R, std::size_t k);

// Mean over rows of cos(A_i, B_i); a row pair with a zero row contributes 0.
double mean_row_cosine(const WeightMatrix& A, const WeightMatrix& B);

}  // namespace drtk
