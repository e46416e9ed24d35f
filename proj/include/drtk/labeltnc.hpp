#pragma once

#include <vector>

#include "drtk/cvm.hpp"
#include "drtk/data.hpp"

namespace drtk {

// Symmetric class-by-class matrix with a zero diagonal.
class ClmMatrix {
 public:
  ClmMatrix(std::size_t classes, CvmKind kind) : k_(classes), kind_(kind), cells_(classes * classes, 0.0) {}

  std::size_t classes() const noexcept { return k_; }
  CvmKind kind() const noexcept { return kind_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return cells_[i * k_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    cells_[i * k_ + j] = v;
    cells_[j * k_ + i] = v;
  }
  // Mean over the k(k-1)/2 unordered off-diagonal cells.
  double upper_mean() const;

 private:
  std::size_t k_;
  CvmKind kind_;
  std::vector<double> cells_;
};

struct LabelTncResult {
  double label_t;
  double label_c;
  ClmMatrix fg_matrix;  // max(M(X) - M(Z), 0)
  ClmMatrix mg_matrix;  // max(M(Z) - M(X), 0)
};

// Class-pairwise cluster-label matching of partition P in space S.
ClmMatrix clm_matrix(const DataMatrix& S, const LabelPartition& P, const CvmConfig& cfg);

// Label-Trustworthiness / Label-Continuity from precomputed CLM matrices.
// Both matrices must come from the same CVM kind.
LabelTncResult label_tnc_from(const ClmMatrix& original, const ClmMatrix& projected);

LabelTncResult label_tnc(const DataMatrix& X, const DataMatrix& Z, const LabelPartition& P,
                         const CvmConfig& cfg);

}  // namespace drtk
