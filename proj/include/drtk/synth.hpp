#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drtk/data.hpp"
#include "drtk/quality.hpp"

namespace drtk {

struct LabeledMatrix {
  DataMatrix data;
  LabelPartition labels;
};

// Isotropic Gaussian clusters. Centers are drawn as separation * (random unit
// direction) and accepted once every pairwise center distance is at least
// `separation` (up to 1000 rejection rounds per center).
LabeledMatrix gaussian_blobs(std::size_t n_clusters, std::size_t per_cluster, std::size_t dim, double spread,
                             double separation, std::uint64_t seed);

// N x d standard normal entries.
DataMatrix iid_gaussian(std::size_t n, std::size_t d, std::uint64_t seed);

// Uniform samples from the d-ball of the given radius, centered at the origin.
DataMatrix uniform_ball(std::size_t n, std::size_t d, double radius, std::uint64_t seed);

// Six labeled groups: hyperballs in the original space, discs in the projection.
enum class BallDiscMode {
  pair_angle,         // discs overlap in adjacent pairs; sweep = pair angle in degrees (60 -> 0)
  disc_distance,      // all discs move toward the origin; sweep = disc center norm (4 -> 0)
  ball_distance,      // all hyperballs move toward the origin; sweep = ball center norm (4 -> 0)
};

struct BallDiscParams {
  BallDiscMode mode = BallDiscMode::disc_distance;
  double sweep_value = 4.0;
  std::size_t points_per_group = 300;
  std::size_t data_dim = 100;
  double ball_radius = 5.0;
  double ball_center_norm = 10.0;
  double disc_radius = 1.5;
  double disc_center_norm = 4.0;
  std::uint64_t seed = 0;
};

struct BallDiscConfig {
  DataMatrix data;        // X
  DataMatrix projection;  // Z
  LabelPartition labels;
};

// Point samples depend only on the seed; sweep values translate them rigidly.
BallDiscConfig ball_disc_config(const BallDiscParams& params);

// The 25 sweep values of a mode, in sweep order.
std::vector<double> ball_disc_sweep(BallDiscMode mode);

// Selects each row with probability prob and permutes the selected rows among
// themselves; unselected rows are untouched. Selection draws are shared across
// prob values for a fixed seed, so selected sets are nested as prob grows.
DataMatrix randomize_positions(const DataMatrix& M, double prob, std::uint64_t seed);

// 0, 0.05, ..., 1.
std::vector<double> randomization_sweep();

enum class ExperimentId { A, B1, B2, C, D, E, F, theorem_pds, theorem_mnc };

std::string to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& s);

// Unset fields take per-experiment defaults (see run_experiment).
struct ExperimentParams {
  std::optional<std::size_t> clusters;
  std::optional<std::size_t> per_cluster;
  std::optional<std::size_t> dim;
  std::optional<double> spread;
  std::optional<double> separation;
  std::size_t points_per_group = 300;
  std::size_t theorem_points = 0;  // 0: 2000 for theorem_pds, 1000 for theorem_mnc
  std::vector<std::size_t> theorem_dims;
  std::vector<std::size_t> theorem_ks{5, 10, 20};
  std::size_t theorem_seeds = 0;  // 0: 5 for theorem_pds, 1 for theorem_mnc
};

struct ExperimentCurve {
  std::string parameter_name;
  std::vector<double> parameters;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // NaN marks a missing cell
  std::vector<std::string> notes;         // one line per missing cell

  std::vector<double> column(const std::string& name) const;
  std::string to_csv() const;
  static ExperimentCurve from_csv(const std::string& text);
};

// Column names produced for one metric: the combined score, then components.
std::vector<std::string> metric_columns(const MetricSpec& spec);

// Builds each sweep value's (X, Z) pair, evaluates every metric on it and
// collects one row per sweep value. A, B1, B2 and C vary the projection over a
// fixed original space; D, E and F vary the original space under a fixed
// projection. theorem_pds / theorem_mnc sweep the dimension of i.i.d.
// Gaussians and ignore `metrics`.
ExperimentCurve run_experiment(ExperimentId id, const ExperimentParams& params, const std::vector<MetricSpec>& metrics,
                               std::uint64_t seed);

}  // namespace drtk
