#include "drtk/cvm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <vector>

#include "drtk/error.hpp"

namespace drtk {

void CvmConfig::validate() const {
  if (!(growth_rate > 0.0) || !std::isfinite(growth_rate))
    throw ParameterError("CVM growth rate must be a positive finite number");
}

namespace {

std::vector<double> centroid(const DataMatrix& X, std::span<const std::size_t> idx) {
  std::vector<double> c(X.cols(), 0.0);
  for (std::size_t i : idx) {
    auto r = X.row(i);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += r[k];
  }
  for (double& v : c) v /= static_cast<double>(idx.size());
  return c;
}

std::vector<double> centroid_of_union(const DataMatrix& X, std::span<const std::size_t> a,
                                      std::span<const std::size_t> b) {
  std::vector<double> c(X.cols(), 0.0);
  for (auto part : {a, b})
    for (std::size_t i : part) {
      auto r = X.row(i);
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += r[k];
    }
  for (double& v : c) v /= static_cast<double>(a.size() + b.size());
  return c;
}

// Largest double strictly below one: the adjusted score is half-open.
const double kBelowOne = std::nextafter(1.0, 0.0);

}  // namespace

double ch_index(const LabeledDataset& L) {
  const auto& X = L.data();
  const auto& members = L.labels().members();
  const std::size_t n_classes = members.size();
  if (n_classes < 2) throw ParameterError("CH index needs at least 2 classes");
  std::vector<std::size_t> all(X.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto c = centroid(X, all);
  double between = 0.0, within = 0.0;
  for (const auto& m : members) {
    const auto ci = centroid(X, m);
    between += static_cast<double>(m.size()) * squared_distance(ci, c);
    for (std::size_t i : m) within += squared_distance(X.row(i), ci);
  }
  if (within <= 0.0) throw DegenerateInputError("CH index undefined: zero within-class scatter");
  const double n = static_cast<double>(X.rows());
  const double k = static_cast<double>(n_classes);
  return (n - k) / (k - 1.0) * between / within;
}

ChAdjustedTerms ch_adjusted_terms(const DataMatrix& X, std::span<const std::size_t> a,
                                  std::span<const std::size_t> b, double growth_rate) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("class too small: adjusted CH needs 2 points per class");
  const auto c = centroid_of_union(X, a, b);
  const auto ca = centroid(X, a);
  const auto cb = centroid(X, b);
  const double n = static_cast<double>(a.size() + b.size());

  std::vector<double> to_global;
  to_global.reserve(a.size() + b.size());
  double within = 0.0;
  for (std::size_t i : a) {
    to_global.push_back(squared_distance(X.row(i), c));
    within += squared_distance(X.row(i), ca);
  }
  for (std::size_t i : b) {
    to_global.push_back(squared_distance(X.row(i), c));
    within += squared_distance(X.row(i), cb);
  }
  double total = 0.0;
  for (double v : to_global) total += v;
  const double sigma = population_std(to_global);
  if (!(sigma > 0.0))
    throw DegenerateInputError("adjusted CH undefined: squared distances to the centroid have zero spread");

  const double between = static_cast<double>(a.size()) * squared_distance(ca, c) +
                         static_cast<double>(b.size()) * squared_distance(cb, c);
  const double norm = sigma * n;
  // Two classes, so the (|C| - 1) factor is 1.
  const double ch3 = std::exp(total / norm - within / norm) * (between / norm);
  const double ch4 = 1.0 / (1.0 + std::exp(-growth_rate * ch3));
  // (ch4 - 1/2) / (1 - 1/2), evaluated without cancellation.
  const double ch5 = std::min(std::tanh(0.5 * growth_rate * ch3), kBelowOne);
  return {ch3, ch4, std::max(ch5, 0.0)};
}

double dsc_pair(const DataMatrix& X, std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) throw ValidationError("DSC needs at least one point per class");
  const auto ca = centroid(X, a);
  const auto cb = centroid(X, b);
  std::size_t defect = 0;
  for (std::size_t i : a)
    if (squared_distance(X.row(i), cb) < squared_distance(X.row(i), ca)) ++defect;
  for (std::size_t i : b)
    if (squared_distance(X.row(i), ca) < squared_distance(X.row(i), cb)) ++defect;
  const double m = static_cast<double>(defect) / static_cast<double>(a.size() + b.size());
  return std::clamp(1.0 - 2.0 * m, 0.0, 1.0);
}

double pair_score(const DataMatrix& X, std::span<const std::size_t> a, std::span<const std::size_t> b,
                  const CvmConfig& cfg) {
  cfg.validate();
  return cfg.kind == CvmKind::dsc ? dsc_pair(X, a, b) : ch_adjusted_terms(X, a, b, cfg.growth_rate).ch5;
}

PairScore ch_adjusted_pair(const LabeledDataset& L2, const CvmConfig& cfg) {
  cfg.validate();
  const auto& m = L2.labels().members();
  if (m.size() != 2) throw ParameterError("pairwise adjusted CH needs exactly 2 classes");
  return {ch_adjusted_terms(L2.data(), m[0], m[1], cfg.growth_rate).ch5, CvmKind::ch_adjusted};
}

double ch_adjusted(const LabeledDataset& L, const CvmConfig& cfg) {
  cfg.validate();
  const auto& m = L.labels().members();
  if (m.size() < 2) throw ParameterError("adjusted CH needs at least 2 classes");
  // Pairs are oriented by first member and summed in sorted order, so
  // renaming the classes leaves the result bit-identical.
  std::vector<double> scores;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      const bool swap = m[j].front() < m[i].front();
      try {
        scores.push_back(ch_adjusted_terms(L.data(), swap ? m[j] : m[i], swap ? m[i] : m[j], cfg.growth_rate).ch5);
      } catch (const DegenerateInputError& e) {
        throw DegenerateInputError("class pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                   "): " + e.what());
      }
    }
  std::sort(scores.begin(), scores.end());
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double dsc_pair_score(const DataMatrix& X, const LabelPartition& P) {
  if (X.rows() != P.size()) throw ValidationError("data/label length mismatch");
  if (P.class_count() != 2) throw ParameterError("DSC pair score needs exactly 2 classes");
  return dsc_pair(X, P.members()[0], P.members()[1]);
}

}  // namespace drtk
