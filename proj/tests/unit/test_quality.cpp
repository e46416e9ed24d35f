#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "drtk/error.hpp"
#include "drtk/quality.hpp"
#include "drtk/synth.hpp"
#include "oracles.hpp"

using namespace drtk;

namespace {

DataMatrix rotate_translate(const DataMatrix& X, double angle, double dx, double dy) {
  std::vector<double> v;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    v.push_back(std::cos(angle) * X(i, 0) - std::sin(angle) * X(i, 1) + dx);
    v.push_back(std::sin(angle) * X(i, 0) + std::cos(angle) * X(i, 1) + dy);
  }
  return {X.rows(), 2, std::move(v)};
}

DataMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n * d);
  for (double& x : v) x = g(rng);
  return {n, d, std::move(v)};
}

}  // namespace

TEST_CASE("rigid motion preserves T and C") {
  const auto X = random_matrix(30, 2, 1);
  const auto Z = rotate_translate(X, 0.7, 3.0, -2.0);
  for (std::size_t k : {1, 5, 10}) {
    const auto tc = trust_cont(pairwise_distances(X), pairwise_distances(Z), k);
    CHECK(tc.trustworthiness == 1.0);
    CHECK(tc.continuity == 1.0);
  }
}

TEST_CASE("six-point instance matches the oracle") {
  const DataMatrix X(6, 2, {0, 0, 1, 0, 0, 1, 3, 3, 4, 3, 3, 5});
  const DataMatrix Z(6, 2, {0, 0, 3, 3, 0, 1, 1, 0, 4, 3, 3, 5});
  const auto OX = oracle::distances(X), OZ = oracle::distances(Z);
  for (std::size_t k : {1, 2, 3}) {
    const auto tc = trust_cont(pairwise_distances(X), pairwise_distances(Z), k);
    const auto o = oracle::trust_cont(OX, OZ, k);
    CHECK(std::abs(tc.trustworthiness - o.first) <= 1e-12);
    CHECK(std::abs(tc.continuity - o.second) <= 1e-12);
    const auto m = mrre(pairwise_distances(X), pairwise_distances(Z), k);
    const auto om = oracle::mrre(OX, OZ, k);
    CHECK(std::abs(m.missing - om.first) <= 1e-12);
    CHECK(std::abs(m.false_ - om.second) <= 1e-12);
  }
}

TEST_CASE("two swapped points lower both T and C") {
  std::vector<double> xs;
  for (int i = 0; i < 12; ++i) xs.push_back(i * i * 0.1 + i);
  auto zs = xs;
  std::swap(zs[2], zs[9]);
  const auto tc = trust_cont(pairwise_distances(DataMatrix(12, 1, xs)), pairwise_distances(DataMatrix(12, 1, zs)), 3);
  CHECK(tc.trustworthiness < 1.0);
  CHECK(tc.continuity < 1.0);
  CHECK(tc.trustworthiness >= 0.0);
  CHECK(tc.continuity >= 0.0);
}

TEST_CASE("MRRE identity and reversed ordering") {
  const DataMatrix X(6, 1, {0, 1, 3, 6, 10, 15});
  const auto D = pairwise_distances(X);
  const auto id = mrre(D, D, 2);
  CHECK(id.missing == 1.0);
  CHECK(id.false_ == 1.0);
  const DataMatrix rev(6, 1, {15, 10, 6, 3, 1, 0});
  const auto r = mrre(D, pairwise_distances(rev), 2);
  CHECK(r.missing < 1.0);
  CHECK(r.false_ < 1.0);
}

TEST_CASE("neighborhood size bound is enforced") {
  const auto D = pairwise_distances(random_matrix(6, 2, 3));
  CHECK_NOTHROW(trust_cont(D, D, 3));
  CHECK_THROWS_AS(trust_cont(D, D, 4), ParameterError);
  CHECK_THROWS_AS(trust_cont(D, D, 0), ParameterError);
  CHECK_THROWS_AS(mrre(D, D, 4), ParameterError);
}

TEST_CASE("global correlations") {
  const auto X = random_matrix(20, 3, 4);
  const auto D = pairwise_distances(X);
  const auto self = global_corr(D, D);
  CHECK(self.spearman == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(self.pearson == doctest::Approx(1.0).epsilon(1e-14));
  const auto tripled = global_corr(D, pairwise_distances(X.scaled(3.0)));
  CHECK(tripled.spearman == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tripled.pearson == doctest::Approx(1.0).epsilon(1e-14));
  const auto Y = random_matrix(5, 2, 8), W = random_matrix(5, 2, 9);
  const auto g = global_corr(pairwise_distances(Y), pairwise_distances(W));
  const auto o = oracle::global_corr(oracle::distances(Y), oracle::distances(W));
  CHECK(std::abs(g.spearman - o.first) <= 1e-12);
  CHECK(std::abs(g.pearson - o.second) <= 1e-12);
  const DataMatrix flat(3, 1, {0, 1, 2});
  CHECK_THROWS_AS(global_corr(pairwise_distances(flat), pairwise_distances(DataMatrix(3, 1, {0, 0, 0}))),
                  DegenerateInputError);
}

TEST_CASE("average ranks handle ties") {
  const std::vector<double> v{3, 1, 3, 2};
  CHECK(average_ranks(v) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("f1 arithmetic") {
  CHECK(f1(0.8, 0.4) == doctest::Approx(8.0 / 15.0).epsilon(1e-15));
  CHECK(f1(0.0, 0.7) == 0.0);
  CHECK(f1(1.0, 1.0) == 1.0);
}

TEST_CASE("rank metrics ignore monotone distance transforms") {
  const auto X = random_matrix(25, 4, 5), Z = random_matrix(25, 2, 6);
  const auto DX = pairwise_distances(X), DZ = pairwise_distances(Z);
  const auto DX2 = DX.transformed([](double d) { return std::exp(d); }, DistanceKind::euclidean);
  const auto DZ2 = DZ.transformed([](double d) { return d * d * d; }, DistanceKind::euclidean);
  for (std::size_t k : {2, 7}) {
    const auto a = trust_cont(DX, DZ, k), b = trust_cont(DX2, DZ2, k);
    CHECK(a.trustworthiness == b.trustworthiness);
    CHECK(a.continuity == b.continuity);
    const auto m = mrre(DX, DZ, k), n = mrre(DX2, DZ2, k);
    CHECK(m.missing == n.missing);
    CHECK(m.false_ == n.false_);
  }
  CHECK(global_corr(DX, DZ).spearman == doctest::Approx(global_corr(DX2, DZ2).spearman).epsilon(1e-14));
}

TEST_CASE("metric_eval dispatch") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 2);
  const auto& X = blobs.data;
  const auto Z = random_matrix(60, 2, 7);
  MetricSpec tnc;
  CHECK(metric_eval(X, X, nullptr, tnc).value == 1.0);

  const auto s = metric_eval(X, Z, nullptr, tnc);
  double t = 0, c = 0;
  for (std::size_t k : tnc.k_list) {
    const auto tc = trust_cont(pairwise_distances(X), pairwise_distances(Z), k);
    t += tc.trustworthiness / 5;
    c += tc.continuity / 5;
  }
  REQUIRE(s.components);
  CHECK(s.components->first == doctest::Approx(t).epsilon(1e-14));
  CHECK(s.components->second == doctest::Approx(c).epsilon(1e-14));
  CHECK(s.value == doctest::Approx(f1(t, c)).epsilon(1e-14));

  MetricSpec sp{MetricKind::spearman};
  CHECK(metric_eval(X, Z, nullptr, sp).value == global_corr(pairwise_distances(X), pairwise_distances(Z)).spearman);
  MetricSpec pe{MetricKind::pearson};
  CHECK(metric_eval(X, Z, nullptr, pe).value == global_corr(pairwise_distances(X), pairwise_distances(Z)).pearson);

  MetricSpec lt{MetricKind::label_tnc};
  CHECK_THROWS_AS(metric_eval(X, Z, nullptr, lt), ParameterError);
  const auto l = metric_eval(X, Z, &blobs.labels, lt);
  const auto direct = label_tnc(X, Z, blobs.labels, {});
  CHECK(l.value == f1(direct.label_t, direct.label_c));
  CHECK(l.components->first == direct.label_t);

  MetricSpec mr{MetricKind::mrre};
  const auto ms = metric_eval(X, Z, nullptr, mr);
  REQUIRE(ms.components);
  CHECK(ms.value == doctest::Approx(f1(ms.components->first, ms.components->second)).epsilon(1e-15));
}

TEST_CASE("evaluator reuse matches one-shot evaluation and is deterministic") {
  const auto blobs = gaussian_blobs(3, 20, 5, 1.0, 6.0, 2);
  for (auto kind : {MetricKind::tnc, MetricKind::mrre, MetricKind::label_tnc, MetricKind::spearman}) {
    MetricSpec spec{kind};
    const MetricEvaluator ev(blobs.data, blobs.labels, spec);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto Z = random_matrix(60, 2, seed);
      const auto a = ev(Z);
      const auto b = metric_eval(blobs.data, Z, &blobs.labels, spec);
      CHECK(a.value == b.value);
      CHECK(ev(Z).value == a.value);
    }
  }
}

TEST_CASE("metric spec validation and names") {
  MetricSpec spec;
  CHECK_NOTHROW(spec.validate(100));
  CHECK_THROWS_AS(spec.validate(20), ParameterError);
  spec.k_list.clear();
  CHECK_THROWS_AS(spec.validate(100), ParameterError);
  MetricSpec lt{MetricKind::label_tnc};
  lt.cvm.kind = CvmKind::dsc;
  CHECK(lt.name() == "label_tnc[dsc]");
  CHECK(metric_kind_from_string("mrre") == MetricKind::mrre);
  CHECK_THROWS_AS(metric_kind_from_string("nope"), ParameterError);
  CHECK(cvm_kind_from_string("ch_adjusted") == CvmKind::ch_adjusted);
}
