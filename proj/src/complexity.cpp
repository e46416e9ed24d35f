#include "drtk/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "drtk/error.hpp"
#include "drtk/neighbors.hpp"

namespace drtk {

double pds(const DataMatrix& X) {
  if (X.rows() < 3) throw ParameterError("PDS needs at least 3 points");
  const auto d = condensed_distances(X);
  const double m = mean(d);
  const double s = population_std(d);
  if (!(m > 0.0) || !(s > 0.0))
    throw DegenerateInputError("PDS undefined: pairwise distances have zero mean or zero spread");
  return std::log(s / m);
}

double mnc(const DataMatrix& X, std::size_t k) {
  if (X.rows() < 2 || k < 1 || k > X.rows() - 1)
    throw ParameterError("MNC: k = " + std::to_string(k) + " outside [1, N - 1] for N = " + std::to_string(X.rows()));
  const auto R = rank_matrix(pairwise_distances(X));
  return mean_row_cosine(knn_weight_matrix(R, k), snn_weight_matrix(R, k));
}

std::vector<double> ComplexityFeatures::as_vector() const {
  std::vector<double> v{pds};
  for (std::size_t k : ks) v.push_back(mnc_by_k.at(k));
  return v;
}

std::vector<std::size_t> valid_complexity_ks(std::size_t n, std::vector<std::size_t> ks, Warnings* warnings) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<std::size_t> kept;
  for (std::size_t k : ks) {
    if (k >= 1 && k + 1 <= n)
      kept.push_back(k);
    else
      warn(warnings, "MNC k = " + std::to_string(k) + " dropped: needs k <= N - 1 = " + std::to_string(n - 1));
  }
  if (kept.empty()) throw ParameterError("no valid MNC neighborhood size for N = " + std::to_string(n));
  return kept;
}

ComplexityFeatures complexity_features(const DataMatrix& X, const std::vector<std::size_t>& ks, Warnings* warnings) {
  ComplexityFeatures f;
  f.ks = valid_complexity_ks(X.rows(), ks, warnings);
  f.pds = pds(X);
  // One rank matrix serves every k.
  const auto R = rank_matrix(pairwise_distances(X));
  for (std::size_t k : f.ks) f.mnc_by_k[k] = mean_row_cosine(knn_weight_matrix(R, k), snn_weight_matrix(R, k));
  return f;
}

}  // namespace drtk
