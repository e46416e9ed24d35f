#include "drtk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "drtk/complexity.hpp"
#include "drtk/error.hpp"
#include "drtk/random.hpp"
#include "drtk/techniques.hpp"

namespace drtk {

namespace {

std::vector<double> unit_direction(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

LabeledMatrix gaussian_blobs(std::size_t n_clusters, std::size_t per_cluster, std::size_t dim, double spread,
                             double separation, std::uint64_t seed) {
  if (n_clusters < 1 || per_cluster < 1 || dim < 1) throw ParameterError("blob counts must be at least 1");
  if (!(spread > 0.0)) throw ParameterError("blob spread must be positive");
  if (!(separation >= 0.0)) throw ParameterError("blob separation must be nonnegative");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centers;
  constexpr int kMaxTries = 1000;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxTries && !placed; ++attempt) {
      auto cand = unit_direction(dim, rng);
      for (double& x : cand) x *= separation;
      placed = std::all_of(centers.begin(), centers.end(), [&](const auto& other) {
        return std::sqrt(squared_distance(cand, other)) >= separation;
      });
      if (placed) centers.push_back(std::move(cand));
    }
    if (!placed)
      throw GenerationError("could not place " + std::to_string(n_clusters) + " centers at mutual distance " +
                            std::to_string(separation) + " in " + std::to_string(dim) +
                            " dimensions; use a larger dimension or a smaller separation");
  }
  std::normal_distribution<double> normal(0.0, spread);
  std::vector<double> values;
  values.reserve(n_clusters * per_cluster * dim);
  std::vector<int> labels;
  for (std::size_t c = 0; c < n_clusters; ++c)
    for (std::size_t i = 0; i < per_cluster; ++i) {
      for (std::size_t k = 0; k < dim; ++k) values.push_back(centers[c][k] + normal(rng));
      labels.push_back(static_cast<int>(c));
    }
  return {DataMatrix(n_clusters * per_cluster, dim, std::move(values)),
          LabelPartition(std::move(labels), static_cast<int>(n_clusters))};
}

DataMatrix iid_gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 2 || d < 1) throw ParameterError("i.i.d. Gaussian needs N >= 2 and d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n * d);
  for (double& x : v) x = normal(rng);
  return {n, d, std::move(v)};
}

DataMatrix uniform_ball(std::size_t n, std::size_t d, double radius, std::uint64_t seed) {
  if (n < 1 || d < 1 || !(radius > 0.0)) throw ParameterError("ball sampling needs n, d >= 1 and radius > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v;
  v.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dir = unit_direction(d, rng);
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
    for (double x : dir) v.push_back(r * x);
  }
  return {n, d, std::move(v)};
}

std::vector<double> ball_disc_sweep(BallDiscMode mode) {
  std::vector<double> out;
  for (int i = 0; i < 25; ++i)
    out.push_back(mode == BallDiscMode::pair_angle ? 60.0 - 2.4 * i : 4.0 - 0.16 * i);
  return out;
}

BallDiscConfig ball_disc_config(const BallDiscParams& p) {
  constexpr std::size_t kGroups = 6;
  if (p.points_per_group < 2) throw ParameterError("ball/disc groups need at least 2 points");
  if (p.data_dim < kGroups) throw ParameterError("ball/disc data dimension must be at least 6");
  const double upper = p.mode == BallDiscMode::pair_angle ? 60.0 : 4.0;
  if (!(p.sweep_value >= 0.0 && p.sweep_value <= upper + 1e-12))
    throw ParameterError("sweep value " + std::to_string(p.sweep_value) + " outside [0, " + std::to_string(upper) + "]");

  const std::size_t n = kGroups * p.points_per_group;
  std::vector<double> x, z;
  x.reserve(n * p.data_dim);
  z.reserve(n * 2);
  std::vector<int> labels;
  const double ball_norm = p.mode == BallDiscMode::ball_distance ? p.sweep_value : p.ball_center_norm;
  for (std::size_t g = 0; g < kGroups; ++g) {
    const auto ball = uniform_ball(p.points_per_group, p.data_dim, p.ball_radius, derive_seed(p.seed, {1, g}));
    const auto disc = uniform_ball(p.points_per_group, 2, p.disc_radius, derive_seed(p.seed, {2, g}));

    // Hyperball centers on orthogonal axes, all at the same norm.
    for (std::size_t i = 0; i < p.points_per_group; ++i) {
      auto r = ball.row(i);
      for (std::size_t k = 0; k < p.data_dim; ++k) x.push_back(r[k] + (k == g ? ball_norm : 0.0));
    }

    double angle_deg = 60.0 * static_cast<double>(g);
    double disc_norm = p.disc_center_norm;
    if (p.mode == BallDiscMode::pair_angle) {
      // Pairs (0,1), (2,3), (4,5) close symmetrically about their mid angle.
      const double mid = 120.0 * static_cast<double>(g / 2) + 30.0;
      angle_deg = mid + (g % 2 == 0 ? -0.5 : 0.5) * p.sweep_value;
    } else if (p.mode == BallDiscMode::disc_distance) {
      disc_norm = p.sweep_value;
    }
    const double a = angle_deg * std::numbers::pi / 180.0;
    for (std::size_t i = 0; i < p.points_per_group; ++i) {
      z.push_back(disc(i, 0) + disc_norm * std::cos(a));
      z.push_back(disc(i, 1) + disc_norm * std::sin(a));
      labels.push_back(static_cast<int>(g));
    }
  }
  return {DataMatrix(n, p.data_dim, std::move(x)), DataMatrix(n, 2, std::move(z)),
          LabelPartition(std::move(labels), static_cast<int>(kGroups))};
}

DataMatrix randomize_positions(const DataMatrix& M, double prob, std::uint64_t seed) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw ParameterError("randomization probability must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> draws(M.rows());
  for (double& u : draws) u = unit(rng);
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < M.rows(); ++i)
    if (draws[i] < prob) selected.push_back(i);
  std::vector<std::size_t> target = selected;
  std::shuffle(target.begin(), target.end(), rng);
  std::vector<double> v(M.values().begin(), M.values().end());
  for (std::size_t t = 0; t < selected.size(); ++t) {
    auto src = M.row(target[t]);
    std::copy(src.begin(), src.end(), v.begin() + static_cast<std::ptrdiff_t>(selected[t] * M.cols()));
  }
  return {M.rows(), M.cols(), std::move(v)};
}

std::vector<double> randomization_sweep() {
  std::vector<double> out;
  for (int i = 0; i <= 20; ++i) out.push_back(0.05 * i);
  return out;
}

std::string to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::A: return "A";
    case ExperimentId::B1: return "B1";
    case ExperimentId::B2: return "B2";
    case ExperimentId::C: return "C";
    case ExperimentId::D: return "D";
    case ExperimentId::E: return "E";
    case ExperimentId::F: return "F";
    case ExperimentId::theorem_pds: return "theorem_pds";
    case ExperimentId::theorem_mnc: return "theorem_mnc";
  }
  return "?";
}

ExperimentId experiment_from_string(const std::string& s) {
  for (auto id : {ExperimentId::A, ExperimentId::B1, ExperimentId::B2, ExperimentId::C, ExperimentId::D,
                  ExperimentId::E, ExperimentId::F, ExperimentId::theorem_pds, ExperimentId::theorem_mnc})
    if (to_string(id) == s) return id;
  throw ParameterError("unknown experiment '" + s + "'");
}

std::vector<std::string> metric_columns(const MetricSpec& spec) {
  const std::string base = spec.name();
  switch (spec.kind) {
    case MetricKind::tnc: return {base, base + ":trustworthiness", base + ":continuity"};
    case MetricKind::mrre: return {base, base + ":false", base + ":missing"};
    case MetricKind::label_tnc: return {base, base + ":label_t", base + ":label_c"};
    default: return {base};
  }
}

std::vector<double> ExperimentCurve::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ParameterError("curve has no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string ExperimentCurve::to_csv() const {
  std::ostringstream out;
  out << parameter_name;
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    out << format_number(parameters[i]);
    for (double v : rows[i]) out << ',' << format_number(v);
    out << '\n';
  }
  return out.str();
}

ExperimentCurve ExperimentCurve::from_csv(const std::string& text) {
  ExperimentCurve curve;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw ParseError("empty curve file");
  auto header = split(line);
  if (header.empty()) throw ParseError("curve header is empty", 1, 1);
  curve.parameter_name = header.front();
  curve.columns.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("curve row has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(header.size()),
                       lineno, 1);
    std::vector<double> values;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (cells[c] != "NA") {
        try {
          std::size_t used = 0;
          v = std::stod(cells[c], &used);
          if (used != cells[c].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw ParseError("invalid number '" + cells[c] + "'", lineno, c + 1);
        }
      }
      values.push_back(v);
    }
    const auto& ps = curve.parameters;
    if (!ps.empty()) {
      const bool ok = ps.size() == 1 ? values.front() != ps.back()
                                     : (ps[1] > ps[0] ? values.front() > ps.back() : values.front() < ps.back());
      if (!ok) throw ParseError("curve parameters are not strictly monotone", lineno, 1);
    }
    curve.parameters.push_back(values.front());
    curve.rows.emplace_back(values.begin() + 1, values.end());
  }
  return curve;
}

namespace {

struct Defaults {
  std::size_t clusters, per_cluster, dim;
  double spread, separation;
};

LabeledMatrix base_blobs(const ExperimentParams& p, const Defaults& d, std::uint64_t seed) {
  return gaussian_blobs(p.clusters.value_or(d.clusters), p.per_cluster.value_or(d.per_cluster), p.dim.value_or(d.dim),
                        p.spread.value_or(d.spread), p.separation.value_or(d.separation), derive_seed(seed, {10}));
}

// Fixed 2-D layout of the blob data used by experiments A and D.
DataMatrix tsne_layout(const DataMatrix& X, std::uint64_t seed) {
  const double perplexity = std::min(30.0, (static_cast<double>(X.rows()) - 1.0) / 3.0);
  HyperParams hp{{"perplexity", perplexity}, {"learning_rate", 200.0}, {"iterations", 500.0},
                 {"seed", static_cast<double>(derive_seed(seed, {11}) % 2147483647ULL)}};
  return tsne_project(X, 2, hp);
}

class CurveBuilder {
 public:
  CurveBuilder(std::string parameter_name, const std::vector<MetricSpec>& metrics) : metrics_(metrics) {
    curve_.parameter_name = std::move(parameter_name);
    for (const auto& m : metrics) {
      auto cols = metric_columns(m);
      curve_.columns.insert(curve_.columns.end(), cols.begin(), cols.end());
    }
  }

  void add(double parameter, const DataMatrix& X, const DataMatrix& Z, const LabelPartition& labels) {
    std::vector<double> row;
    for (const auto& m : metrics_) {
      const auto width = metric_columns(m).size();
      try {
        const auto s = metric_eval(X, Z, &labels, m);
        row.push_back(s.value);
        if (width == 3) {
          row.push_back(s.components->first);
          row.push_back(s.components->second);
        }
      } catch (const Error& e) {
        row.insert(row.end(), width, std::numeric_limits<double>::quiet_NaN());
        curve_.notes.push_back(curve_.parameter_name + "=" + format_number(parameter) + " " + m.name() + ": " +
                               e.what());
      }
    }
    curve_.parameters.push_back(parameter);
    curve_.rows.push_back(std::move(row));
  }

  ExperimentCurve take() { return std::move(curve_); }

 private:
  const std::vector<MetricSpec>& metrics_;
  ExperimentCurve curve_;
};

ExperimentCurve theorem_curve(ExperimentId id, const ExperimentParams& p, std::uint64_t seed) {
  const bool is_pds = id == ExperimentId::theorem_pds;
  const std::size_t n = p.theorem_points != 0 ? p.theorem_points : (is_pds ? 2000 : 1000);
  const std::size_t seeds = p.theorem_seeds != 0 ? p.theorem_seeds : (is_pds ? 5 : 1);
  std::vector<std::size_t> dims = p.theorem_dims;
  if (dims.empty()) {
    if (is_pds)
      for (std::size_t d = 2; d <= 1024; d *= 2) dims.push_back(d);
    else
      dims = {2, 16, 128, 1024};
  }
  if (!std::is_sorted(dims.begin(), dims.end()) || std::adjacent_find(dims.begin(), dims.end()) != dims.end())
    throw ParameterError("theorem dimensions must be strictly increasing");

  ExperimentCurve curve;
  curve.parameter_name = "dim";
  if (is_pds) {
    curve.columns = {"pds"};
  } else {
    for (std::size_t k : p.theorem_ks) curve.columns.push_back("mnc_k" + std::to_string(k));
  }
  for (std::size_t d : dims) {
    std::vector<double> row(curve.columns.size(), 0.0);
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto X = iid_gaussian(n, d, derive_seed(seed, {d, s}));
      if (is_pds) {
        row[0] += pds(X);
      } else {
        const auto f = complexity_features(X, p.theorem_ks);
        if (f.ks.size() != p.theorem_ks.size()) throw ParameterError("MNC k too large for the sample size");
        for (std::size_t c = 0; c < p.theorem_ks.size(); ++c) row[c] += f.mnc_by_k.at(p.theorem_ks[c]);
      }
    }
    for (double& v : row) v /= static_cast<double>(seeds);
    curve.parameters.push_back(static_cast<double>(d));
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

}  // namespace

ExperimentCurve run_experiment(ExperimentId id, const ExperimentParams& p, const std::vector<MetricSpec>& metrics,
                               std::uint64_t seed) {
  if (id == ExperimentId::theorem_pds || id == ExperimentId::theorem_mnc) return theorem_curve(id, p, seed);
  if (metrics.empty()) throw ParameterError("experiment needs at least one metric");

  switch (id) {
    case ExperimentId::A:
    case ExperimentId::D: {
      const auto base = base_blobs(p, {5, 60, 20, 1.0, 10.0}, seed);
      const auto layout = tsne_layout(base.data, seed);
      CurveBuilder b("probability", metrics);
      for (double prob : randomization_sweep()) {
        const auto seed_r = derive_seed(seed, {12});
        if (id == ExperimentId::A)
          b.add(prob, base.data, randomize_positions(layout, prob, seed_r), base.labels);
        else
          b.add(prob, randomize_positions(base.data, prob, seed_r), layout, base.labels);
      }
      return b.take();
    }
    case ExperimentId::B1:
    case ExperimentId::B2:
    case ExperimentId::E: {
      const BallDiscMode mode = id == ExperimentId::B1   ? BallDiscMode::pair_angle
                                : id == ExperimentId::B2 ? BallDiscMode::disc_distance
                                                         : BallDiscMode::ball_distance;
      CurveBuilder b(mode == BallDiscMode::pair_angle ? "pair_angle" : "center_distance", metrics);
      for (double v : ball_disc_sweep(mode)) {
        BallDiscParams bp;
        bp.mode = mode;
        bp.sweep_value = v;
        bp.points_per_group = p.points_per_group;
        bp.seed = derive_seed(seed, {13});
        const auto cfg = ball_disc_config(bp);
        b.add(v, cfg.data, cfg.projection, cfg.labels);
      }
      return b.take();
    }
    case ExperimentId::C: {
      const auto base = base_blobs(p, {10, 30, 20, 1.0, 10.0}, seed);
      if (base.data.cols() < 11) throw ParameterError("experiment C needs at least 11 dimensions");
      CurveBuilder b("components", metrics);
      for (std::size_t c = 10; c >= 1; --c) b.add(static_cast<double>(c), base.data, pca_slice(base.data, 1, c), base.labels);
      return b.take();
    }
    case ExperimentId::F: {
      const auto base = base_blobs(p, {10, 30, 40, 1.0, 10.0}, seed);
      if (base.data.cols() < 30) throw ParameterError("experiment F needs at least 30 dimensions");
      const auto layout = pca_project(base.data, 2);
      CurveBuilder b("start_component", metrics);
      for (std::size_t i = 1; i <= 10; ++i) b.add(static_cast<double>(i), pca_slice(base.data, i, 20), layout, base.labels);
      return b.take();
    }
    default:
      break;
  }
  throw std::logic_error("unhandled experiment");
}

}  // namespace drtk
