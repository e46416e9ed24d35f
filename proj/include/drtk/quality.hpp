#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drtk/cvm.hpp"
#include "drtk/data.hpp"
#include "drtk/labeltnc.hpp"
#include "drtk/neighbors.hpp"

namespace drtk {

struct TrustCont {
  double trustworthiness;
  double continuity;
};

struct Mrre {
  double missing;  // data-side neighborhoods
  double false_;   // projection-side neighborhoods
};

struct GlobalCorr {
  double spearman;
  double pearson;
};

// Trustworthiness & Continuity for neighborhood size k, both clamped to [0, 1].
// Requires N * k * (2N - 3k - 1) > 0.
TrustCont trust_cont(const RankMatrix& RX, const RankMatrix& RZ, std::size_t k);
TrustCont trust_cont(const DistanceMatrix& DX, const DistanceMatrix& DZ, std::size_t k);

// Mean relative rank errors, reported as 1 - normalized error (higher is better).
Mrre mrre(const RankMatrix& RX, const RankMatrix& RZ, std::size_t k);
Mrre mrre(const DistanceMatrix& DX, const DistanceMatrix& DZ, std::size_t k);

// Correlations between the upper-triangle distance vectors. Spearman uses
// average ranks for ties.
GlobalCorr global_corr(const DistanceMatrix& DX, const DistanceMatrix& DZ);
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);
std::vector<double> average_ranks(std::span<const double> v);

// Harmonic mean; 0 whenever either side is 0.
double f1(double a, double b);

enum class MetricKind { tnc, mrre, label_tnc, spearman, pearson };

struct MetricSpec {
  MetricKind kind = MetricKind::tnc;
  std::vector<std::size_t> k_list{5, 10, 15, 20, 25};
  CvmConfig cvm{};

  // Checks the neighborhood sizes against a dataset of n points.
  void validate(std::size_t n) const;
  // True when every score of this metric lies in [0, 1].
  bool bounded_unit() const noexcept { return kind != MetricKind::spearman && kind != MetricKind::pearson; }
  bool needs_labels() const noexcept { return kind == MetricKind::label_tnc; }
  // Stable identifier, e.g. "tnc", "label_tnc[dsc]".
  std::string name() const;

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(const std::string& s);
std::string to_string(CvmKind kind);
CvmKind cvm_kind_from_string(const std::string& s);

struct QualityScore {
  double value;
  // The two scores combined into value, for paired metrics.
  std::optional<std::pair<double, double>> components;
};

// Caches everything that depends only on the original space so that many
// projections of the same data can be scored cheaply.
class MetricEvaluator {
 public:
  MetricEvaluator(const DataMatrix& X, std::optional<LabelPartition> labels, MetricSpec spec);

  QualityScore operator()(const DataMatrix& Z) const;
  const MetricSpec& spec() const noexcept { return spec_; }
  std::size_t points() const noexcept { return n_; }

 private:
  MetricSpec spec_;
  std::size_t n_;
  std::optional<LabelPartition> labels_;
  std::optional<RankMatrix> ranks_;
  std::vector<double> condensed_;
  std::optional<ClmMatrix> clm_;
};

QualityScore metric_eval(const DataMatrix& X, const DataMatrix& Z, const LabelPartition* P,
                         const MetricSpec& spec);

}  // namespace drtk
