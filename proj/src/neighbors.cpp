#include "drtk/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drtk/error.hpp"
#include "drtk/parallel.hpp"

namespace drtk {

RankMatrix rank_matrix(const DistanceMatrix& D) {
  const std::size_t n = D.size();
  if (n < 2) throw ParameterError("rank matrix needs at least 2 points");
  RankMatrix R;
  R.n_ = n;
  R.ranks_.assign(n * n, 0);
  R.order_.assign(n * (n - 1), 0);
  parallel_for(n, [&](std::size_t i) {
    auto d = D.row(i);
    std::uint32_t* ord = R.order_.data() + i * (n - 1);
    std::size_t pos = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) ord[pos++] = static_cast<std::uint32_t>(j);
    std::sort(ord, ord + (n - 1), [&](std::uint32_t a, std::uint32_t b) {
      return d[a] < d[b] || (d[a] == d[b] && a < b);
    });
    for (std::size_t r = 0; r < n - 1; ++r) R.ranks_[i * n + ord[r]] = static_cast<std::uint32_t>(r + 1);
  });
  return R;
}

std::int64_t WeightMatrix::operator()(std::size_t i, std::size_t j) const noexcept {
  const auto& r = rows_[i];
  auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, std::size_t c) { return e.col < c; });
  return (it != r.end() && it->col == j) ? it->weight : 0;
}

std::vector<std::int64_t> WeightMatrix::dense_row(std::size_t i) const {
  std::vector<std::int64_t> out(size(), 0);
  for (const auto& e : rows_[i]) out[e.col] = e.weight;
  return out;
}

namespace {

void check_k(const RankMatrix& R, std::size_t k) {
  if (k < 1 || k > R.size() - 1)
    throw ParameterError("k = " + std::to_string(k) + " outside [1, " + std::to_string(R.size() - 1) + "]");
}

}  // namespace

WeightMatrix knn_weight_matrix(const RankMatrix& R, std::size_t k) {
  check_k(R, k);
  const std::size_t n = R.size();
  WeightMatrix W;
  W.kind_ = WeightKind::knn;
  W.k_ = k;
  W.rows_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto nb = R.neighbors(i);
    auto& row = W.rows_[i];
    row.reserve(k);
    for (std::size_t r = 1; r <= k; ++r)
      row.push_back({nb[r - 1], static_cast<std::int64_t>(k - r + 1)});
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
  }
  return W;
}

WeightMatrix snn_weight_matrix(const RankMatrix& R, std::size_t k) {
  check_k(R, k);
  const std::size_t n = R.size();
  // reverse[l] lists (j, k + 1 - rank_j(l)) for every j having l among its k nearest.
  struct Holder {
    std::uint32_t point;
    std::int64_t weight;
  };
  std::vector<std::vector<Holder>> reverse(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto nb = R.neighbors(j);
    for (std::size_t r = 1; r <= k; ++r)
      reverse[nb[r - 1]].push_back({static_cast<std::uint32_t>(j), static_cast<std::int64_t>(k + 1 - r)});
  }

  WeightMatrix W;
  W.kind_ = WeightKind::snn;
  W.k_ = k;
  W.rows_.resize(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::int64_t> acc(n, 0);
    std::vector<std::uint32_t> touched;
    auto nb = R.neighbors(i);
    for (std::size_t m = 1; m <= k; ++m) {
      const std::int64_t wi = static_cast<std::int64_t>(k + 1 - m);
      for (const Holder& h : reverse[nb[m - 1]]) {
        if (h.point == i) continue;
        if (acc[h.point] == 0) touched.push_back(h.point);
        acc[h.point] += wi * h.weight;
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& row = W.rows_[i];
    row.reserve(touched.size());
    for (std::uint32_t j : touched) row.push_back({j, acc[j]});
  });
  return W;
}

double mean_row_cosine(const WeightMatrix& A, const WeightMatrix& B) {
  if (A.size() != B.size())
    throw ParameterError("weight matrices differ in size: " + std::to_string(A.size()) + " vs " +
                         std::to_string(B.size()));
  const std::size_t n = A.size();
  if (n == 0) throw ParameterError("empty weight matrices");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = A.row(i);
    auto b = B.row(i);
    double na = 0.0, nb = 0.0, dot = 0.0;
    for (const auto& e : a) na += static_cast<double>(e.weight) * static_cast<double>(e.weight);
    for (const auto& e : b) nb += static_cast<double>(e.weight) * static_cast<double>(e.weight);
    if (na == 0.0 || nb == 0.0) continue;
    // merge on sorted columns
    std::size_t p = 0, q = 0;
    while (p < a.size() && q < b.size()) {
      if (a[p].col < b[q].col) {
        ++p;
      } else if (b[q].col < a[p].col) {
        ++q;
      } else {
        dot += static_cast<double>(a[p].weight) * static_cast<double>(b[q].weight);
        ++p;
        ++q;
      }
    }
    total += std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
  }
  return total / static_cast<double>(n);
}

}  // namespace drtk
