#include "drtk/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drtk/error.hpp"

namespace drtk {

namespace {

void check_rank_pair(const RankMatrix& RX, const RankMatrix& RZ, std::size_t k) {
  if (RX.size() != RZ.size())
    throw ValidationError("original and projected spaces differ in point count");
  const double n = static_cast<double>(RX.size());
  const double kk = static_cast<double>(k);
  if (k < 1 || k > RX.size() - 1 || !(n * kk * (2.0 * n - 3.0 * kk - 1.0) > 0.0))
    throw ParameterError("neighborhood size k = " + std::to_string(k) + " requires 1 <= k and 3k < 2N - 1 (N = " +
                         std::to_string(RX.size()) + ")");
}

}  // namespace

TrustCont trust_cont(const RankMatrix& RX, const RankMatrix& RZ, std::size_t k) {
  check_rank_pair(RX, RZ, k);
  const std::size_t n = RX.size();
  double t_sum = 0.0, c_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto nz = RZ.neighbors(i);
    auto nx = RX.neighbors(i);
    for (std::size_t r = 0; r < k; ++r) {
      const std::uint32_t rx = RX.rank(i, nz[r]);
      if (rx > k) t_sum += static_cast<double>(rx - k);
      const std::uint32_t rz = RZ.rank(i, nx[r]);
      if (rz > k) c_sum += static_cast<double>(rz - k);
    }
  }
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double norm = 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0));
  return {std::clamp(1.0 - norm * t_sum, 0.0, 1.0), std::clamp(1.0 - norm * c_sum, 0.0, 1.0)};
}

TrustCont trust_cont(const DistanceMatrix& DX, const DistanceMatrix& DZ, std::size_t k) {
  if (DX.size() != DZ.size()) throw ValidationError("original and projected spaces differ in point count");
  return trust_cont(rank_matrix(DX), rank_matrix(DZ), k);
}

Mrre mrre(const RankMatrix& RX, const RankMatrix& RZ, std::size_t k) {
  check_rank_pair(RX, RZ, k);
  const std::size_t n = RX.size();
  double false_sum = 0.0, missing_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto nz = RZ.neighbors(i);
    auto nx = RX.neighbors(i);
    for (std::size_t r = 0; r < k; ++r) {
      {
        const double rx = RX.rank(i, nz[r]);
        const double rz = RZ.rank(i, nz[r]);
        false_sum += std::abs(rx - rz) / rz;
      }
      {
        const double rx = RX.rank(i, nx[r]);
        const double rz = RZ.rank(i, nx[r]);
        missing_sum += std::abs(rx - rz) / rx;
      }
    }
  }
  const double nn = static_cast<double>(n);
  double h = 0.0;
  for (std::size_t l = 1; l <= k; ++l) h += std::abs(nn - 2.0 * static_cast<double>(l) + 1.0) / static_cast<double>(l);
  h *= nn;
  return {std::clamp(1.0 - missing_sum / h, 0.0, 1.0), std::clamp(1.0 - false_sum / h, 0.0, 1.0)};
}

Mrre mrre(const DistanceMatrix& DX, const DistanceMatrix& DZ, std::size_t k) {
  if (DX.size() != DZ.size()) throw ValidationError("original and projected spaces differ in point count");
  return mrre(rank_matrix(DX), rank_matrix(DZ), k);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("correlation needs two equal-length vectors");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DegenerateInputError("correlation undefined: zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

GlobalCorr global_corr(const DistanceMatrix& DX, const DistanceMatrix& DZ) {
  if (DX.size() != DZ.size()) throw ValidationError("original and projected spaces differ in point count");
  if (DX.size() < 3) throw ParameterError("global correlation needs at least 3 points");
  const auto a = DX.condensed();
  const auto b = DZ.condensed();
  return {spearman(a, b), pearson(a, b)};
}

double f1(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::tnc: return "tnc";
    case MetricKind::mrre: return "mrre";
    case MetricKind::label_tnc: return "label_tnc";
    case MetricKind::spearman: return "spearman";
    case MetricKind::pearson: return "pearson";
  }
  return "?";
}

MetricKind metric_kind_from_string(const std::string& s) {
  for (auto k : {MetricKind::tnc, MetricKind::mrre, MetricKind::label_tnc, MetricKind::spearman, MetricKind::pearson})
    if (to_string(k) == s) return k;
  throw ParameterError("unknown metric '" + s + "'");
}

std::string to_string(CvmKind kind) { return kind == CvmKind::dsc ? "dsc" : "ch_adjusted"; }

CvmKind cvm_kind_from_string(const std::string& s) {
  if (s == "dsc") return CvmKind::dsc;
  if (s == "ch_adjusted") return CvmKind::ch_adjusted;
  throw ParameterError("unknown CVM '" + s + "'");
}

void MetricSpec::validate(std::size_t n) const {
  cvm.validate();
  if (kind == MetricKind::tnc || kind == MetricKind::mrre) {
    if (k_list.empty()) throw ParameterError("metric " + name() + " needs at least one k");
    const double nn = static_cast<double>(n);
    for (std::size_t k : k_list) {
      const double kk = static_cast<double>(k);
      if (k < 1 || k + 1 > n || !(nn * kk * (2.0 * nn - 3.0 * kk - 1.0) > 0.0))
        throw ParameterError("metric " + name() + ": k = " + std::to_string(k) + " requires 3k < 2N - 1 (N = " +
                             std::to_string(n) + ")");
    }
  }
  if ((kind == MetricKind::spearman || kind == MetricKind::pearson) && n < 3)
    throw ParameterError("metric " + name() + " needs at least 3 points");
}

std::string MetricSpec::name() const {
  if (kind == MetricKind::label_tnc) return "label_tnc[" + to_string(cvm.kind) + "]";
  return to_string(kind);
}

MetricEvaluator::MetricEvaluator(const DataMatrix& X, std::optional<LabelPartition> labels, MetricSpec spec)
    : spec_(std::move(spec)), n_(X.rows()), labels_(std::move(labels)) {
  spec_.validate(n_);
  switch (spec_.kind) {
    case MetricKind::tnc:
    case MetricKind::mrre:
      ranks_ = rank_matrix(pairwise_distances(X));
      break;
    case MetricKind::spearman:
    case MetricKind::pearson:
      condensed_ = condensed_distances(X);
      break;
    case MetricKind::label_tnc:
      if (!labels_) throw ParameterError("metric " + spec_.name() + " requires class labels");
      clm_ = clm_matrix(X, *labels_, spec_.cvm);
      break;
  }
}

QualityScore MetricEvaluator::operator()(const DataMatrix& Z) const {
  if (Z.rows() != n_)
    throw ValidationError("projection has " + std::to_string(Z.rows()) + " points, data has " + std::to_string(n_));
  switch (spec_.kind) {
    case MetricKind::tnc:
    case MetricKind::mrre: {
      const auto rz = rank_matrix(pairwise_distances(Z));
      double a = 0.0, b = 0.0;
      for (std::size_t k : spec_.k_list) {
        if (spec_.kind == MetricKind::tnc) {
          const auto tc = trust_cont(*ranks_, rz, k);
          a += tc.trustworthiness;
          b += tc.continuity;
        } else {
          const auto m = mrre(*ranks_, rz, k);
          a += m.false_;
          b += m.missing;
        }
      }
      a /= static_cast<double>(spec_.k_list.size());
      b /= static_cast<double>(spec_.k_list.size());
      return {f1(a, b), std::make_pair(a, b)};
    }
    case MetricKind::spearman:
      return {spearman(condensed_, condensed_distances(Z)), std::nullopt};
    case MetricKind::pearson:
      return {pearson(condensed_, condensed_distances(Z)), std::nullopt};
    case MetricKind::label_tnc: {
      const auto r = label_tnc_from(*clm_, clm_matrix(Z, *labels_, spec_.cvm));
      return {f1(r.label_t, r.label_c), std::make_pair(r.label_t, r.label_c)};
    }
  }
  throw std::logic_error("unhandled metric kind");
}

QualityScore metric_eval(const DataMatrix& X, const DataMatrix& Z, const LabelPartition* P, const MetricSpec& spec) {
  if (X.rows() != Z.rows())
    throw ValidationError("projection has " + std::to_string(Z.rows()) + " points, data has " + std::to_string(X.rows()));
  if (spec.needs_labels() && P == nullptr) throw ParameterError("metric " + spec.name() + " requires class labels");
  std::optional<LabelPartition> labels;
  if (P != nullptr) labels = *P;
  return MetricEvaluator(X, std::move(labels), spec)(Z);
}

}  // namespace drtk
