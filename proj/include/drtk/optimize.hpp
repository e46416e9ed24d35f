#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drtk/data.hpp"
#include "drtk/quality.hpp"
#include "drtk/regress.hpp"
#include "drtk/techniques.hpp"

namespace drtk {

struct Trial {
  HyperParams params;
  double score;  // -inf when the trial failed
  bool failed = false;
  std::string error;
};

struct SearchTrace {
  Technique technique;
  std::vector<Trial> trials;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  std::size_t evaluations_used = 0;
  bool terminated_early = false;
  std::optional<double> stop_at;
  std::optional<DataMatrix> best_projection;
};

// Proposes the next configuration from the trial history. Implementations
// must be deterministic given their construction seed.
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual HyperParams propose(const SearchSpace& space, std::span<const Trial> history) = 0;
};

// Independent seeded draws: uniform, log-uniform or integer per parameter.
class RandomProposer final : public Proposer {
 public:
  explicit RandomProposer(std::uint64_t seed) : rng_(seed) {}
  HyperParams propose(const SearchSpace& space, std::span<const Trial> history) override;

 private:
  std::mt19937_64 rng_;
};

using ProposerFactory = std::function<std::unique_ptr<Proposer>(std::uint64_t seed)>;

struct SearchOptions {
  std::size_t budget = 50;
  std::uint64_t seed = 0;
  // Stop as soon as the running best reaches this value.
  std::optional<double> stop_at;
  // Defaults to RandomProposer.
  ProposerFactory proposer;
};

// Searches one technique's hyperparameters against a prepared evaluator.
SearchTrace optimize_technique(const DataMatrix& X, const MetricEvaluator& evaluator, const Technique& t,
                               const SearchOptions& options);

SearchTrace optimize_technique(const DataMatrix& X, const LabelPartition* labels, const Technique& t,
                               const MetricSpec& spec, std::size_t budget, std::uint64_t seed,
                               std::optional<double> stop_at = std::nullopt);

// Seed of technique t's search within a workflow run with `seed`; shared by the
// conventional and adaptive workflows so both see the same proposal stream.
std::uint64_t technique_seed(std::uint64_t seed, TechniqueId t) noexcept;

struct WorkflowResult {
  Technique chosen;
  HyperParams best_params;
  DataMatrix best_projection;
  double best_score;
  std::size_t total_evaluations;
  double wall_seconds;
  std::vector<SearchTrace> traces;
  // Adaptive workflow only: predicted best score per technique, in model order.
  std::vector<std::pair<Technique, double>> predictions;
};

WorkflowResult conventional_workflow(const DataMatrix& X, const LabelPartition* labels,
                                     const std::vector<Technique>& techniques, const MetricSpec& spec,
                                     std::size_t budget_per_technique, std::uint64_t seed,
                                     const ProposerFactory& proposer = {});

struct TechniqueModel {
  Technique technique;
  RegressionModel model;
  RegressorKind chosen;
  std::array<double, 3> r2;  // cross-validated R^2 per kRegressorKinds entry
  bool r2_undefined = false;  // zero-variance targets: R^2 not computable
  bool constant_fallback = false;
  std::vector<double> targets;  // best score reached on each training dataset
};

struct AdaptiveModelSet {
  MetricSpec spec;
  std::vector<std::size_t> ks;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::vector<TechniqueModel> models;
  FeatureRows features;  // one row per training dataset

  const TechniqueModel& model_for(TechniqueId id) const;
};

struct TrainingDataset {
  DataMatrix data;
  std::optional<LabelPartition> labels;
  std::string name;
};

inline constexpr std::size_t kMinPretrainDatasets = 4;

AdaptiveModelSet pretrain(const std::vector<TrainingDataset>& datasets, const std::vector<Technique>& techniques,
                          const MetricSpec& spec, const std::vector<std::size_t>& ks, std::size_t budget,
                          std::uint64_t seed, Warnings* warnings = nullptr);

struct AdaptiveOptions {
  std::size_t top_m = 1;
  std::size_t budget_per_technique = 50;
  std::uint64_t seed = 0;
  // When false every kept search runs its full budget.
  bool early_stop = true;
  ProposerFactory proposer;
};

WorkflowResult adaptive_workflow(const DataMatrix& X, const LabelPartition* labels, const AdaptiveModelSet& models,
                                 const AdaptiveOptions& options, Warnings* warnings = nullptr);

}  // namespace drtk
