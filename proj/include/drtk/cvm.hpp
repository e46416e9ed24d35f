#pragma once

#include <span>

#include "drtk/data.hpp"

namespace drtk {

enum class CvmKind { ch_adjusted, dsc };

struct CvmConfig {
  CvmKind kind = CvmKind::ch_adjusted;
  // Logistic growth rate applied to CH_3 before min-max scaling.
  double growth_rate = 1.0;

  void validate() const;
  friend bool operator==(const CvmConfig&, const CvmConfig&) = default;
};

struct PairScore {
  double value;
  CvmKind kind;
};

// Intermediate quantities of the adjusted Calinski-Harabasz chain for one
// class pair. ch5 is the reported score.
struct ChAdjustedTerms {
  double ch3;
  double ch4;
  double ch5;
};

// Classic Calinski-Harabasz index with squared Euclidean distances.
double ch_index(const LabeledDataset& L);

// Adjusted CH for a dataset holding exactly two classes.
PairScore ch_adjusted_pair(const LabeledDataset& L2, const CvmConfig& cfg);

// Mean of the pairwise adjusted CH over all unordered class pairs.
double ch_adjusted(const LabeledDataset& L, const CvmConfig& cfg);

// Distance-consistency score for a dataset holding exactly two classes:
// clamp(1 - 2m, 0, 1) with m the fraction of points strictly closer to the
// other class's centroid.
double dsc_pair_score(const DataMatrix& X, const LabelPartition& P);

// Index-based kernels: the pair is the union of rows `a` and `b` of X.
ChAdjustedTerms ch_adjusted_terms(const DataMatrix& X, std::span<const std::size_t> a,
                                  std::span<const std::size_t> b, double growth_rate);
double dsc_pair(const DataMatrix& X, std::span<const std::size_t> a, std::span<const std::size_t> b);
double pair_score(const DataMatrix& X, std::span<const std::size_t> a, std::span<const std::size_t> b,
                  const CvmConfig& cfg);

}  // namespace drtk
