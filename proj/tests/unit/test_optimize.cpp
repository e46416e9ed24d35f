#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "drtk/complexity.hpp"
#include "drtk/error.hpp"
#include "drtk/optimize.hpp"
#include "drtk/synth.hpp"

using namespace drtk;

namespace {

const std::vector<Technique> kAll{{TechniqueId::pca, 2}, {TechniqueId::random_proj, 2}, {TechniqueId::tsne, 2}};

MetricSpec tnc_spec() {
  MetricSpec s;
  s.k_list = {5, 10};
  return s;
}

// Three clusters living in a plane, embedded in 20-D with faint noise.
DataMatrix planar_blobs(std::uint64_t seed) {
  const auto base = gaussian_blobs(3, 30, 2, 1.0, 12.0, seed);
  std::mt19937_64 rng(seed + 1000);
  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<double> v;
  for (std::size_t i = 0; i < base.data.rows(); ++i) {
    v.push_back(base.data(i, 0));
    v.push_back(base.data(i, 1));
    for (int c = 2; c < 20; ++c) v.push_back(g(rng));
  }
  return {base.data.rows(), 20, std::move(v)};
}

AdaptiveModelSet constant_models(const MetricSpec& spec, std::vector<double> predictions) {
  AdaptiveModelSet set;
  set.spec = spec;
  set.ks = {5};
  set.budget = 0;
  for (std::size_t i = 0; i < kAll.size(); ++i)
    set.models.push_back({kAll[i], RegressionModel::constant_model(2, predictions[i], true), RegressorKind::linear,
                          {0, 0, 0}, true, true, {}});
  return set;
}

void check_trace(const SearchTrace& tr, std::size_t budget) {
  CHECK(tr.evaluations_used == tr.trials.size());
  CHECK(tr.evaluations_used <= budget);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : tr.trials) best = std::max(best, t.score);
  CHECK(tr.best_score == best);
  CHECK(tr.trials[tr.best_index].score == best);
  if (tr.terminated_early) CHECK(tr.best_score >= *tr.stop_at);
}

}  // namespace

TEST_CASE("pca runs exactly one evaluation") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 1);
  const auto tr = optimize_technique(blobs.data, nullptr, {TechniqueId::pca, 2}, tnc_spec(), 50, 1);
  CHECK(tr.evaluations_used == 1);
  check_trace(tr, 50);
}

TEST_CASE("stop_at -inf stops after the first trial") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 1);
  const auto tr = optimize_technique(blobs.data, nullptr, {TechniqueId::random_proj, 2}, tnc_spec(), 50, 1,
                                     -std::numeric_limits<double>::infinity());
  CHECK(tr.evaluations_used == 1);
  CHECK(tr.terminated_early);
}

TEST_CASE("t-SNE search equals an independent replay of the seeded samples") {
  const auto blobs = gaussian_blobs(3, 30, 6, 1.0, 8.0, 2);
  const auto spec = tnc_spec();
  const Technique t{TechniqueId::tsne, 2};
  const auto tr = optimize_technique(blobs.data, nullptr, t, spec, 20, 77);
  check_trace(tr, 20);
  std::mt19937_64 rng(77);
  const auto space = hp_space(t, blobs.data.rows());
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const auto hp = space.sample(rng);
    CHECK(hp == tr.trials[i].params);
    best = std::max(best, metric_eval(blobs.data, tsne_project(blobs.data, 2, hp), nullptr, spec).value);
  }
  CHECK(tr.best_score == best);
}

TEST_CASE("failed trials score -inf and the search continues") {
  const auto X = iid_gaussian(20, 3, 1);
  MetricSpec spec;
  spec.k_list = {5};
  // A proposer that always asks for an out-of-range perplexity.
  SearchOptions opt;
  opt.budget = 4;
  opt.proposer = [](std::uint64_t) {
    struct Bad final : Proposer {
      HyperParams propose(const SearchSpace&, std::span<const Trial>) override {
        return {{"perplexity", 100}, {"learning_rate", 100}, {"iterations", 10}, {"seed", 1}};
      }
    };
    return std::make_unique<Bad>();
  };
  const MetricEvaluator ev(X, std::nullopt, spec);
  const auto tr = optimize_technique(X, ev, {TechniqueId::tsne, 2}, opt);
  CHECK(tr.evaluations_used == 4);
  for (const auto& t : tr.trials) {
    CHECK(t.failed);
    CHECK(t.score == -std::numeric_limits<double>::infinity());
    CHECK_FALSE(t.error.empty());
  }
  CHECK_FALSE(tr.best_projection.has_value());
  CHECK_THROWS_AS(conventional_workflow(X, nullptr, {{TechniqueId::tsne, 2}}, spec, 2, 1, opt.proposer), WorkflowError);
}

TEST_CASE("search preconditions") {
  const auto X = iid_gaussian(20, 3, 1);
  CHECK_THROWS_AS(optimize_technique(X, nullptr, {TechniqueId::pca, 2}, tnc_spec(), 0, 1), ParameterError);
  CHECK_THROWS_AS(optimize_technique(X, nullptr, {TechniqueId::pca, 3}, tnc_spec(), 5, 1), ParameterError);
  MetricSpec lt{MetricKind::label_tnc};
  CHECK_THROWS_AS(optimize_technique(X, nullptr, {TechniqueId::pca, 2}, lt, 5, 1), ParameterError);
  CHECK_THROWS_AS(conventional_workflow(X, nullptr, {}, tnc_spec(), 5, 1), ParameterError);
}

TEST_CASE("conventional workflow accounting and single technique") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 3);
  const auto spec = tnc_spec();
  const auto r = conventional_workflow(blobs.data, nullptr, kAll, spec, 6, 9);
  CHECK(r.total_evaluations == 1 + 6 + 6);
  CHECK(r.traces.size() == 3);
  for (const auto& tr : r.traces) check_trace(tr, 6);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& tr : r.traces) best = std::max(best, tr.best_score);
  CHECK(r.best_score == best);
  CHECK(metric_eval(blobs.data, r.best_projection, nullptr, spec).value == r.best_score);

  const auto single = conventional_workflow(blobs.data, nullptr, {kAll[1]}, spec, 6, 9);
  CHECK(single.best_score == r.traces[1].best_score);
  CHECK(single.chosen.id == TechniqueId::random_proj);

  const auto again = conventional_workflow(blobs.data, nullptr, kAll, spec, 6, 9);
  CHECK(again.best_projection == r.best_projection);
  CHECK(again.best_params == r.best_params);
}

TEST_CASE("PCA dominates random projections on planar data") {
  int pca_wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto X = planar_blobs(seed);
    const auto r = conventional_workflow(X, nullptr, {kAll[0], kAll[1]}, tnc_spec(), 10, seed);
    pca_wins += r.chosen.id == TechniqueId::pca;
  }
  CHECK(pca_wins >= 9);
}

TEST_CASE("adaptive workflow reduces to conventional without early stopping") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 4);
  const auto spec = tnc_spec();
  const auto conv = conventional_workflow(blobs.data, nullptr, kAll, spec, 5, 21);
  const auto set = constant_models(spec, {0.2, 0.9, 0.5});
  AdaptiveOptions opt;
  opt.top_m = 3;
  opt.budget_per_technique = 5;
  opt.seed = 21;
  opt.early_stop = false;
  const auto ad = adaptive_workflow(blobs.data, nullptr, set, opt);
  CHECK(ad.best_score == conv.best_score);
  CHECK(ad.total_evaluations == conv.total_evaluations);
  REQUIRE(ad.predictions.size() == 3);
  CHECK(ad.traces.front().technique.id == TechniqueId::random_proj);
}

TEST_CASE("low predictions stop every kept search after one trial") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 5);
  const auto spec = tnc_spec();
  const auto set = constant_models(spec, {0.0, 0.0, 0.0});
  for (std::size_t m : {1, 2, 3}) {
    AdaptiveOptions opt;
    opt.top_m = m;
    opt.budget_per_technique = 10;
    opt.seed = 5;
    const auto r = adaptive_workflow(blobs.data, nullptr, set, opt);
    CHECK(r.total_evaluations == m);
    for (const auto& tr : r.traces) CHECK(tr.terminated_early);
    CHECK(r.traces.front().technique.id == TechniqueId::pca);
  }
}

TEST_CASE("adaptive never beats conventional under shared seeds") {
  const auto spec = tnc_spec();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto blobs = gaussian_blobs(3, 20, 6, 1.0, 5.0, seed);
    const auto conv = conventional_workflow(blobs.data, nullptr, kAll, spec, 8, seed);
    const auto set = constant_models(spec, {0.5, 0.95, 0.97});
    AdaptiveOptions opt;
    opt.top_m = 2;
    opt.budget_per_technique = 8;
    opt.seed = seed;
    const auto ad = adaptive_workflow(blobs.data, nullptr, set, opt);
    CHECK(ad.best_score <= conv.best_score);
    bool any_early = false;
    for (const auto& tr : ad.traces) {
      check_trace(tr, 8);
      any_early = any_early || tr.terminated_early;
    }
    if (any_early) CHECK(ad.total_evaluations < 16);
  }
  AdaptiveOptions bad;
  bad.top_m = 0;
  const auto blobs = gaussian_blobs(3, 20, 6, 1.0, 5.0, 0);
  CHECK_THROWS_AS(adaptive_workflow(blobs.data, nullptr, constant_models(spec, {0, 0, 0}), bad), ParameterError);
}

TEST_CASE("pretraining on identical datasets yields constant predictors") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 1);
  std::vector<TrainingDataset> corpus(4, TrainingDataset{blobs.data, blobs.labels, "same"});
  Warnings w;
  const auto set = pretrain(corpus, {kAll[0]}, tnc_spec(), {5, 10}, 3, 1, &w);
  REQUIRE(set.models.size() == 1);
  CHECK(set.models[0].constant_fallback);
  CHECK(set.models[0].r2_undefined);
  CHECK(set.models[0].model.constant());
  CHECK_FALSE(w.empty());
  CHECK_THROWS_AS(pretrain({corpus.begin(), corpus.begin() + 3}, {kAll[0]}, tnc_spec(), {5}, 3, 1), ParameterError);
}

TEST_CASE("pretraining on a blob corpus is finite and deterministic") {
  std::vector<TrainingDataset> corpus;
  for (std::uint64_t i = 0; i < 8; ++i) {
    const auto b = gaussian_blobs(3, 20, 3 + 2 * i, 1.0, 2.0 + i, 100 + i);
    corpus.push_back({b.data, b.labels, "blobs" + std::to_string(i)});
  }
  const std::vector<Technique> techs{kAll[0], kAll[1]};
  const auto a = pretrain(corpus, techs, tnc_spec(), {5, 10}, 4, 3);
  const auto b = pretrain(corpus, techs, tnc_spec(), {5, 10}, 4, 3);
  REQUIRE(a.models.size() == 2);
  CHECK(a.features == b.features);
  CHECK(a.features.size() == 8);
  CHECK(a.features[0].size() == 3);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(a.models[t].targets == b.models[t].targets);
    CHECK(a.models[t].chosen == b.models[t].chosen);
    CHECK(a.models[t].model.coefficients() == b.models[t].model.coefficients());
    for (double v : a.models[t].targets) CHECK(std::isfinite(v));
    if (!a.models[t].r2_undefined) {
      bool any_finite = false;
      for (double v : a.models[t].r2) any_finite = any_finite || std::isfinite(v);
      CHECK(any_finite);
    }
  }
  CHECK(a.model_for(TechniqueId::random_proj).technique.id == TechniqueId::random_proj);
  CHECK_THROWS_AS(a.model_for(TechniqueId::tsne), ParameterError);
}
