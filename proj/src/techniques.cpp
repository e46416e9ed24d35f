#include "drtk/techniques.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "drtk/error.hpp"

namespace drtk {

std::string to_string(TechniqueId id) {
  switch (id) {
    case TechniqueId::pca: return "pca";
    case TechniqueId::random_proj: return "random_proj";
    case TechniqueId::tsne: return "tsne";
  }
  return "?";
}

TechniqueId technique_from_string(const std::string& s) {
  for (auto id : {TechniqueId::pca, TechniqueId::random_proj, TechniqueId::tsne})
    if (to_string(id) == s) return id;
  throw ParameterError("unknown technique '" + s + "'");
}

double HyperParams::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ParameterError("missing hyperparameter '" + name + "'");
  return it->second;
}

double HyperParams::get_or(const std::string& name, double fallback) const {
  auto it = values_.find(name);
  return it == values_.end() ? fallback : it->second;
}

HyperParams SearchSpace::sample(std::mt19937_64& rng) const {
  HyperParams hp;
  for (const auto& p : params) {
    double v = p.lower;
    switch (p.scale) {
      case ParamScale::fixed:
        break;
      case ParamScale::linear:
        v = std::uniform_real_distribution<double>(p.lower, p.upper)(rng);
        break;
      case ParamScale::log:
        v = std::exp(std::uniform_real_distribution<double>(std::log(p.lower), std::log(p.upper))(rng));
        break;
      case ParamScale::integer:
        v = static_cast<double>(std::uniform_int_distribution<std::int64_t>(static_cast<std::int64_t>(p.lower),
                                                                            static_cast<std::int64_t>(p.upper))(rng));
        break;
    }
    hp.set(p.name, std::min(v, p.clip_upper));
  }
  return hp;
}

namespace {

constexpr double kSeedUpper = 2147483647.0;

}  // namespace

SearchSpace hp_space(const Technique& t, std::size_t n) {
  SearchSpace s{t.id, {}};
  switch (t.id) {
    case TechniqueId::pca:
      break;
    case TechniqueId::random_proj:
      s.params.push_back({"seed", 0.0, kSeedUpper, ParamScale::integer, kSeedUpper});
      break;
    case TechniqueId::tsne: {
      const double nn = static_cast<double>(n);
      const double upper = std::max(3.0, nn / 3.0);
      // The bandwidth search needs perplexity <= (N - 1) / 3.
      const double cap = (nn - 1.0) / 3.0;
      s.params.push_back({"perplexity", 2.0, upper, ParamScale::log, cap});
      s.params.push_back({"learning_rate", 10.0, 1000.0, ParamScale::log, 1000.0});
      s.params.push_back({"iterations", 500.0, 500.0, ParamScale::fixed, 500.0});
      s.params.push_back({"seed", 0.0, kSeedUpper, ParamScale::integer, kSeedUpper});
      break;
    }
  }
  return s;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_eigen(const DataMatrix& X) {
  return {X.values().data(), static_cast<Eigen::Index>(X.rows()), static_cast<Eigen::Index>(X.cols())};
}

DataMatrix from_eigen(const RowMatrix& M) {
  std::vector<double> v(M.data(), M.data() + M.size());
  return {static_cast<std::size_t>(M.rows()), static_cast<std::size_t>(M.cols()), std::move(v)};
}

RowMatrix centered(const DataMatrix& X) {
  RowMatrix C = as_eigen(X);
  const Eigen::RowVectorXd mu = C.colwise().mean();
  C.rowwise() -= mu;
  return C;
}

struct PrincipalAxes {
  RowMatrix centered;
  Eigen::MatrixXd axes;  // D x D, columns in descending eigenvalue order
  Eigen::VectorXd eigenvalues;
};

PrincipalAxes principal_axes(const DataMatrix& X) {
  PrincipalAxes pa;
  pa.centered = centered(X);
  const Eigen::MatrixXd cov =
      (pa.centered.transpose() * pa.centered) / static_cast<double>(X.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Eigen::Index D = cov.rows();
  pa.axes.resize(D, D);
  pa.eigenvalues.resize(D);
  // Eigen returns ascending eigenvalues.
  for (Eigen::Index c = 0; c < D; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(D - 1 - c);
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < D; ++r)
      if (std::abs(v(r)) > std::abs(v(arg))) arg = r;
    if (v(arg) < 0) v = -v;
    pa.axes.col(c) = v;
    pa.eigenvalues(c) = solver.eigenvalues()(D - 1 - c);
  }
  return pa;
}

}  // namespace

DataMatrix pca_slice(const DataMatrix& X, std::size_t start, std::size_t count, Warnings* warnings) {
  if (X.rows() < 2) throw ParameterError("PCA needs at least 2 points");
  if (start < 1 || count < 1 || start + count - 1 > X.cols())
    throw ParameterError("principal component window [" + std::to_string(start) + ", " +
                         std::to_string(start + count - 1) + "] outside [1, " + std::to_string(X.cols()) + "]");
  const auto pa = principal_axes(X);
  const double top = std::max(pa.eigenvalues(0), 0.0);
  RowMatrix out(static_cast<Eigen::Index>(X.rows()), static_cast<Eigen::Index>(count));
  for (std::size_t c = 0; c < count; ++c) {
    const Eigen::Index axis = static_cast<Eigen::Index>(start - 1 + c);
    if (!(pa.eigenvalues(axis) > 1e-12 * top)) {
      out.col(static_cast<Eigen::Index>(c)).setZero();
      warn(warnings, "principal component " + std::to_string(axis + 1) + " has no variance; filled with zeros");
    } else {
      out.col(static_cast<Eigen::Index>(c)) = pa.centered * pa.axes.col(axis);
    }
  }
  return from_eigen(out);
}

DataMatrix pca_project(const DataMatrix& X, std::size_t d, Warnings* warnings) {
  if (d < 1 || d > X.cols())
    throw ParameterError("PCA target dimension " + std::to_string(d) + " must lie in [1, " +
                         std::to_string(X.cols()) + "]");
  return pca_slice(X, 1, d, warnings);
}

DataMatrix random_frame(std::size_t D, std::size_t d, std::uint64_t seed) {
  if (d < 1 || d > D) throw ParameterError("frame dimension must lie in [1, D]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd G(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < G.rows(); ++r)
    for (Eigen::Index c = 0; c < G.cols(); ++c) G(r, c) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(G.rows(), G.cols());
  // Fix column signs by diag(R) so the frame is Haar-distributed.
  const Eigen::MatrixXd& R = qr.matrixQR();
  for (Eigen::Index c = 0; c < Q.cols(); ++c)
    if (R(c, c) < 0) Q.col(c) = -Q.col(c);
  RowMatrix out = Q;
  return from_eigen(out);
}

DataMatrix random_orthogonal_project(const DataMatrix& X, std::size_t d, std::uint64_t seed) {
  if (d < 1 || d >= X.cols())
    throw ParameterError("projection dimension " + std::to_string(d) + " must lie in [1, " +
                         std::to_string(X.cols() - 1) + "]");
  const DataMatrix frame = random_frame(X.cols(), d, seed);
  RowMatrix out = centered(X) * as_eigen(frame);
  return from_eigen(out);
}

namespace {

// Row-normalized Gaussian affinities whose entropy matches log(perplexity).
std::vector<double> conditional_affinities(const std::vector<double>& d2, std::size_t n, double perplexity,
                                           Warnings* warnings) {
  constexpr double kTolerance = 1e-5;
  constexpr int kMaxSteps = 50;
  const double target = std::log(perplexity);
  std::vector<double> P(n * n, 0.0);
  std::size_t unconverged = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = d2.data() + i * n;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, row[j]);
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool converged = false;
    double* p = P.data() + i * n;
    for (int step = 0; step < kMaxSteps; ++step) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          p[j] = 0.0;
          continue;
        }
        p[j] = std::exp(-beta * (row[j] - dmin));
        sum += p[j];
        weighted += (row[j] - dmin) * p[j];
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < kTolerance) {
        converged = true;
        break;
      }
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    if (!converged) ++unconverged;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += p[j];
    for (std::size_t j = 0; j < n; ++j) p[j] /= sum;
  }
  if (unconverged > 0)
    warn(warnings, "t-SNE bandwidth search did not converge for " + std::to_string(unconverged) +
                       " points; using the last bracketed bandwidth");
  return P;
}

// Gradient split as attraction (P q) and repulsion (q^2), accumulated over
// each unordered pair once. Returns the normalizer sum of q over i != j.
// Dim = 0 selects a runtime dimension.
template <std::size_t Dim>
double tsne_forces(const std::vector<double>& Y, const std::vector<double>& P, std::size_t n, double exaggeration,
                   std::vector<double>& attract, std::vector<double>& repel, std::size_t runtime_d = Dim) {
  const std::size_t d = Dim == 0 ? runtime_d : Dim;
  std::fill(attract.begin(), attract.end(), 0.0);
  std::fill(repel.begin(), repel.end(), 0.0);
  double sum_q = 0.0;
  if constexpr (Dim == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = Y[2 * i], yi = Y[2 * i + 1];
      const double* pi = &P[i * n];
      double ax = 0.0, ay = 0.0, rx = 0.0, ry = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = xi - Y[2 * j], dy = yi - Y[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        sum_q += q;
        const double a = exaggeration * pi[j] * q;
        const double r = q * q;
        ax += a * dx;
        ay += a * dy;
        rx += r * dx;
        ry += r * dy;
        attract[2 * j] -= a * dx;
        attract[2 * j + 1] -= a * dy;
        repel[2 * j] -= r * dx;
        repel[2 * j + 1] -= r * dy;
      }
      attract[2 * i] += ax;
      attract[2 * i + 1] += ay;
      repel[2 * i] += rx;
      repel[2 * i + 1] += ry;
    }
    return 2.0 * sum_q;
  }
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* yi = &Y[i * d];
    const double* pi = &P[i * n];
    double* ai = &attract[i * d];
    double* ri = &repel[i * d];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* yj = &Y[j * d];
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        diff[c] = yi[c] - yj[c];
        dist += diff[c] * diff[c];
      }
      const double q = 1.0 / (1.0 + dist);
      sum_q += q;
      const double a = exaggeration * pi[j] * q;
      const double r = q * q;
      double* aj = &attract[j * d];
      double* rj = &repel[j * d];
      for (std::size_t c = 0; c < d; ++c) {
        ai[c] += a * diff[c];
        aj[c] -= a * diff[c];
        ri[c] += r * diff[c];
        rj[c] -= r * diff[c];
      }
    }
  }
  return 2.0 * sum_q;
}

}  // namespace

DataMatrix tsne_project(const DataMatrix& X, std::size_t d, const HyperParams& hp, Warnings* warnings) {
  const std::size_t n = X.rows();
  const double perplexity = hp.get("perplexity");
  const double eta = hp.get("learning_rate");
  const double iters_raw = hp.get_or("iterations", 500.0);
  const auto seed = static_cast<std::uint64_t>(hp.get_or("seed", 0.0));
  if (d < 1) throw ParameterError("t-SNE target dimension must be positive");
  if (n < 4) throw ParameterError("t-SNE needs at least 4 points");
  if (!(perplexity >= 1.0) || perplexity > (static_cast<double>(n) - 1.0) / 3.0)
    throw ParameterError("perplexity " + std::to_string(perplexity) + " must lie in [1, (N - 1) / 3]");
  if (!(eta > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(iters_raw >= 1.0)) throw ParameterError("iterations must be at least 1");
  const auto iterations = static_cast<std::size_t>(iters_raw);

  constexpr std::size_t kExaggerationIters = 100;
  constexpr double kExaggeration = 12.0;
  constexpr std::size_t kMomentumSwitch = 250;

  // Squared distances scaled by their maximum; the bandwidth search is scale free.
  std::vector<double> d2(n * n, 0.0);
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = squared_distance(X.row(i), X.row(j));
      d2[i * n + j] = d2[j * n + i] = v;
      dmax = std::max(dmax, v);
    }
  if (!(dmax > 0.0)) throw DegenerateInputError("t-SNE undefined: all points coincide");
  for (double& v : d2) v /= dmax;

  const auto cond = conditional_affinities(d2, n, perplexity, warnings);
  std::vector<double> P(n * n, 0.0);
  const double inv = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) P[i * n + j] = P[j * n + i] = (cond[i * n + j] + cond[j * n + i]) * inv;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> Y(n * d), update(n * d, 0.0), gains(n * d, 1.0), grad(n * d);
  for (double& y : Y) y = 1e-4 * normal(rng);

  std::vector<double> attract(n * d), repel(n * d);
  for (std::size_t it = 0; it < iterations; ++it) {
    const double exaggeration = it < kExaggerationIters ? kExaggeration : 1.0;
    const double momentum = it < kMomentumSwitch ? 0.5 : 0.8;
    const double sum_q = d == 2 ? tsne_forces<2>(Y, P, n, exaggeration, attract, repel)
                                : tsne_forces<0>(Y, P, n, exaggeration, attract, repel, d);
    for (std::size_t t = 0; t < grad.size(); ++t) grad[t] = 4.0 * (attract[t] - repel[t] / sum_q);

    for (std::size_t t = 0; t < Y.size(); ++t) {
      const bool same_sign = (grad[t] > 0.0) == (update[t] > 0.0);
      gains[t] = same_sign ? std::max(gains[t] * 0.8, 0.01) : gains[t] + 0.2;
      update[t] = momentum * update[t] - eta * gains[t] * grad[t];
      Y[t] += update[t];
    }
    for (std::size_t c = 0; c < d; ++c) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += Y[i * d + c];
      m /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) Y[i * d + c] -= m;
    }
  }
  return {n, d, std::move(Y)};
}

DataMatrix project(const DataMatrix& X, const Technique& t, const HyperParams& hp, Warnings* warnings) {
  if (t.target_dim < 1 || t.target_dim >= X.cols())
    throw ParameterError(to_string(t.id) + " target dimension " + std::to_string(t.target_dim) + " must lie in [1, " +
                         std::to_string(X.cols() - 1) + "]");
  switch (t.id) {
    case TechniqueId::pca:
      return pca_project(X, t.target_dim, warnings);
    case TechniqueId::random_proj:
      return random_orthogonal_project(X, t.target_dim, static_cast<std::uint64_t>(hp.get_or("seed", 0.0)));
    case TechniqueId::tsne:
      return tsne_project(X, t.target_dim, hp, warnings);
  }
  throw std::logic_error("unhandled technique");
}

}  // namespace drtk
