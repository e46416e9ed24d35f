#pragma once

#include <map>
#include <vector>

#include "drtk/data.hpp"

namespace drtk {

// Pairwise distance shift: ln(std / mean) of all pairwise Euclidean distances.
// Lower means stronger distance concentration.
double pds(const DataMatrix& X);

// Mutual neighbor consistency: mean row cosine between the kNN and SNN weight
// matrices of X. In [0, 1]; lower means less consistent neighborhoods.
double mnc(const DataMatrix& X, std::size_t k);

struct ComplexityFeatures {
  double pds;
  std::vector<std::size_t> ks;             // ascending
  std::map<std::size_t, double> mnc_by_k;  // one entry per ks value

  // [pds, mnc(ks[0]), mnc(ks[1]), ...]
  std::vector<double> as_vector() const;
};

inline const std::vector<std::size_t> kDefaultComplexityKs{25, 50, 75};

// Keeps the requested ks that are valid for N (k <= N - 1), warning about the
// ones dropped. Throws when none remain.
std::vector<std::size_t> valid_complexity_ks(std::size_t n, std::vector<std::size_t> ks, Warnings* warnings);

ComplexityFeatures complexity_features(const DataMatrix& X, const std::vector<std::size_t>& ks = kDefaultComplexityKs,
                                       Warnings* warnings = nullptr);

}  // namespace drtk
