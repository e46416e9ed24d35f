#include "drtk/labeltnc.hpp"

#include <algorithm>

#include "drtk/error.hpp"

namespace drtk {

double ClmMatrix::upper_mean() const {
  if (k_ < 2) throw ParameterError("CLM matrix needs at least 2 classes");
  double s = 0.0;
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = i + 1; j < k_; ++j) s += cells_[i * k_ + j];
  return s / static_cast<double>(k_ * (k_ - 1) / 2);
}

ClmMatrix clm_matrix(const DataMatrix& S, const LabelPartition& P, const CvmConfig& cfg) {
  cfg.validate();
  if (S.rows() != P.size())
    throw ValidationError("space has " + std::to_string(S.rows()) + " points but " + std::to_string(P.size()) +
                          " labels");
  const auto& m = P.members();
  if (m.size() < 2) throw ParameterError("CLM matrix needs at least 2 classes");
  ClmMatrix M(m.size(), cfg.kind);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      try {
        M.set(i, j, pair_score(S, m[i], m[j], cfg));
      } catch (const Error& e) {
        throw DegenerateInputError("class pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                   "): " + e.what());
      }
    }
  return M;
}

LabelTncResult label_tnc_from(const ClmMatrix& original, const ClmMatrix& projected) {
  const std::size_t k = original.classes();
  if (projected.classes() != k) throw ValidationError("CLM matrices differ in class count");
  if (projected.kind() != original.kind())
    throw ParameterError("CLM matrices were computed with different CVM kinds");
  ClmMatrix fg(k, original.kind()), mg(k, original.kind());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double diff = original(i, j) - projected(i, j);
      fg.set(i, j, std::max(diff, 0.0));
      mg.set(i, j, std::max(-diff, 0.0));
    }
  const double t = 1.0 - fg.upper_mean();
  const double c = 1.0 - mg.upper_mean();
  return {t, c, std::move(fg), std::move(mg)};
}

LabelTncResult label_tnc(const DataMatrix& X, const DataMatrix& Z, const LabelPartition& P,
                         const CvmConfig& cfg) {
  if (X.rows() != Z.rows())
    throw ValidationError("original space has " + std::to_string(X.rows()) + " points, projection has " +
                          std::to_string(Z.rows()));
  return label_tnc_from(clm_matrix(X, P, cfg), clm_matrix(Z, P, cfg));
}

}  // namespace drtk
