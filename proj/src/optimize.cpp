#include "drtk/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "drtk/complexity.hpp"
#include "drtk/error.hpp"
#include "drtk/random.hpp"

namespace drtk {

HyperParams RandomProposer::propose(const SearchSpace& space, std::span<const Trial>) { return space.sample(rng_); }

std::uint64_t technique_seed(std::uint64_t seed, TechniqueId t) noexcept {
  return derive_seed(seed, {static_cast<std::uint64_t>(t) + 1});
}

SearchTrace optimize_technique(const DataMatrix& X, const MetricEvaluator& evaluator, const Technique& t,
                               const SearchOptions& options) {
  if (options.budget < 1) throw ParameterError("search budget must be at least 1");
  if (t.target_dim < 1 || t.target_dim >= X.cols())
    throw ParameterError("target dimension " + std::to_string(t.target_dim) + " must lie in [1, " +
                         std::to_string(X.cols() - 1) + "]");
  const SearchSpace space = hp_space(t, X.rows());
  auto proposer = options.proposer ? options.proposer(options.seed) : std::make_unique<RandomProposer>(options.seed);

  SearchTrace trace;
  trace.technique = t;
  trace.stop_at = options.stop_at;
  const std::size_t budget = space.degenerate() ? 1 : options.budget;
  for (std::size_t i = 0; i < budget; ++i) {
    Trial trial{proposer->propose(space, trace.trials), -std::numeric_limits<double>::infinity(), false, {}};
    std::optional<DataMatrix> Z;
    try {
      Z = project(X, t, trial.params);
      trial.score = evaluator(*Z).value;
      if (!std::isfinite(trial.score)) throw DegenerateInputError("metric returned a non-finite score");
    } catch (const Error& e) {
      trial.failed = true;
      trial.score = -std::numeric_limits<double>::infinity();
      trial.error = e.what();
    }
    trace.trials.push_back(std::move(trial));
    ++trace.evaluations_used;
    const auto& last = trace.trials.back();
    if (!last.failed && (trace.best_projection == std::nullopt || last.score > trace.best_score)) {
      trace.best_score = last.score;
      trace.best_index = trace.trials.size() - 1;
      trace.best_projection = std::move(Z);
    }
    if (options.stop_at && trace.best_score >= *options.stop_at) {
      trace.terminated_early = true;
      break;
    }
  }
  return trace;
}

SearchTrace optimize_technique(const DataMatrix& X, const LabelPartition* labels, const Technique& t,
                               const MetricSpec& spec, std::size_t budget, std::uint64_t seed,
                               std::optional<double> stop_at) {
  if (spec.needs_labels() && labels == nullptr) throw ParameterError("metric " + spec.name() + " requires class labels");
  std::optional<LabelPartition> l;
  if (labels != nullptr) l = *labels;
  const MetricEvaluator evaluator(X, std::move(l), spec);
  SearchOptions options;
  options.budget = budget;
  options.seed = seed;
  options.stop_at = stop_at;
  return optimize_technique(X, evaluator, t, options);
}

namespace {

MetricEvaluator make_evaluator(const DataMatrix& X, const LabelPartition* labels, const MetricSpec& spec) {
  if (spec.needs_labels() && labels == nullptr) throw ParameterError("metric " + spec.name() + " requires class labels");
  std::optional<LabelPartition> l;
  if (labels != nullptr) l = *labels;
  return {X, std::move(l), spec};
}

WorkflowResult assemble(std::vector<SearchTrace> traces, std::chrono::steady_clock::time_point start) {
  std::optional<std::size_t> best;
  std::size_t total = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    total += traces[i].evaluations_used;
    if (!traces[i].best_projection) continue;
    if (!best || traces[i].best_score > traces[*best].best_score) best = i;
  }
  if (!best) throw WorkflowError("every technique failed on every trial");
  auto& winner = traces[*best];
  WorkflowResult r{winner.technique,
                   winner.trials[winner.best_index].params,
                   *winner.best_projection,
                   winner.best_score,
                   total,
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
                   std::move(traces),
                   {}};
  return r;
}

}  // namespace

WorkflowResult conventional_workflow(const DataMatrix& X, const LabelPartition* labels,
                                     const std::vector<Technique>& techniques, const MetricSpec& spec,
                                     std::size_t budget_per_technique, std::uint64_t seed,
                                     const ProposerFactory& proposer) {
  if (techniques.empty()) throw ParameterError("conventional workflow needs at least one technique");
  const auto start = std::chrono::steady_clock::now();
  const auto evaluator = make_evaluator(X, labels, spec);
  std::vector<SearchTrace> traces;
  for (const auto& t : techniques) {
    SearchOptions options{budget_per_technique, technique_seed(seed, t.id), std::nullopt, proposer};
    traces.push_back(optimize_technique(X, evaluator, t, options));
  }
  return assemble(std::move(traces), start);
}

const TechniqueModel& AdaptiveModelSet::model_for(TechniqueId id) const {
  for (const auto& m : models)
    if (m.technique.id == id) return m;
  throw ParameterError("model set has no model for technique " + to_string(id));
}

AdaptiveModelSet pretrain(const std::vector<TrainingDataset>& datasets, const std::vector<Technique>& techniques,
                          const MetricSpec& spec, const std::vector<std::size_t>& ks, std::size_t budget,
                          std::uint64_t seed, Warnings* warnings) {
  if (datasets.size() < kMinPretrainDatasets)
    throw ParameterError("pretraining needs at least " + std::to_string(kMinPretrainDatasets) + " datasets, got " +
                         std::to_string(datasets.size()));
  if (techniques.empty()) throw ParameterError("pretraining needs at least one technique");

  std::size_t min_n = datasets.front().data.rows();
  for (const auto& d : datasets) min_n = std::min(min_n, d.data.rows());

  AdaptiveModelSet set;
  set.spec = spec;
  set.ks = valid_complexity_ks(min_n, ks, warnings);
  set.budget = budget;
  set.seed = seed;

  std::vector<std::vector<double>> targets(techniques.size());
  for (std::size_t di = 0; di < datasets.size(); ++di) {
    const auto& ds = datasets[di];
    const std::string label = ds.name.empty() ? "dataset " + std::to_string(di) : ds.name;
    try {
      set.features.push_back(complexity_features(ds.data, set.ks).as_vector());
      const auto evaluator = make_evaluator(ds.data, ds.labels ? &*ds.labels : nullptr, spec);
      for (std::size_t ti = 0; ti < techniques.size(); ++ti) {
        SearchOptions options{budget, derive_seed(seed, {di, static_cast<std::uint64_t>(techniques[ti].id) + 1}),
                              std::nullopt, {}};
        const auto trace = optimize_technique(ds.data, evaluator, techniques[ti], options);
        if (!trace.best_projection)
          throw WorkflowError("technique " + to_string(techniques[ti].id) + " failed on every trial");
        targets[ti].push_back(trace.best_score);
      }
    } catch (const Error& e) {
      throw WorkflowError(label + ": " + e.what());
    }
  }

  const std::size_t folds = std::min<std::size_t>(5, datasets.size());
  const std::size_t dim = set.features.front().size();
  bool features_constant = true;
  for (std::size_t j = 0; j < dim && features_constant; ++j)
    for (const auto& row : set.features)
      if (row[j] != set.features.front()[j]) {
        features_constant = false;
        break;
      }

  for (std::size_t ti = 0; ti < techniques.size(); ++ti) {
    const auto& y = targets[ti];
    const double y_mean = mean(y);
    const bool targets_constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    TechniqueModel tm{techniques[ti],
                      RegressionModel::constant_model(dim, y_mean, spec.bounded_unit()),
                      RegressorKind::linear,
                      {nan, nan, nan},
                      false,
                      false,
                      y};
    if (targets_constant || features_constant) {
      tm.constant_fallback = true;
      tm.r2_undefined = true;
      warn(warnings, to_string(techniques[ti].id) + ": " +
                         (targets_constant ? "best scores are identical" : "complexity features are constant") +
                         " across datasets; predicting their mean");
    } else {
      const auto choice =
          select_regressor(set.features, y, folds, derive_seed(seed, {0xF01D, ti}), warnings, spec.bounded_unit());
      tm.chosen = choice.kind;
      tm.r2 = choice.r2;
      tm.model = fit(choice.kind, set.features, y, spec.bounded_unit());
    }
    set.models.push_back(std::move(tm));
  }
  return set;
}

WorkflowResult adaptive_workflow(const DataMatrix& X, const LabelPartition* labels, const AdaptiveModelSet& models,
                                 const AdaptiveOptions& options, Warnings* warnings) {
  if (options.top_m < 1) throw ParameterError("top_m must be at least 1");
  if (models.models.empty()) throw ParameterError("model set is empty");
  const auto start = std::chrono::steady_clock::now();
  const auto features = complexity_features(X, models.ks, warnings);
  if (features.ks != models.ks)
    throw ParameterError("dataset too small for the model set's MNC neighborhood sizes");
  const auto f = features.as_vector();

  std::vector<std::pair<Technique, double>> predictions;
  for (const auto& m : models.models) predictions.emplace_back(m.technique, m.model.predict(f));

  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predictions[a].second > predictions[b].second; });
  order.resize(std::min(options.top_m, order.size()));

  const auto evaluator = make_evaluator(X, labels, models.spec);
  std::vector<SearchTrace> traces;
  for (std::size_t idx : order) {
    const auto& [t, predicted] = predictions[idx];
    SearchOptions so{options.budget_per_technique, technique_seed(options.seed, t.id),
                     options.early_stop ? std::optional<double>(predicted) : std::nullopt, options.proposer};
    traces.push_back(optimize_technique(X, evaluator, t, so));
  }
  auto result = assemble(std::move(traces), start);
  result.predictions = std::move(predictions);
  return result;
}

}  // namespace drtk
