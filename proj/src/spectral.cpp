#include "activeclust/spectral.hpp"

#include "activeclust/error.hpp"
#include "activeclust/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace activeclust {

Laplacian build_laplacian(const SimilarityMatrix& w) {
  Laplacian lap;
  lap.degrees = w.matrix().rowwise().sum();
  lap.l = -w.matrix();
  lap.l.diagonal() += lap.degrees;
  return lap;
}

namespace {

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

// Appends the columns of `block` to `basis` after two rounds of Gram-Schmidt,
// dropping columns that are numerically inside the current span.
int extend_basis(Eigen::MatrixXd& basis, Eigen::MatrixXd block) {
  int added = 0;
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    Eigen::VectorXd v = block.col(c);
    const double original = v.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) v -= basis * (basis.transpose() * v);
    const double norm = v.norm();
    if (norm <= 1e-10 * original) continue;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v / norm;
    ++added;
  }
  return added;
}

// Unpreconditioned block Davidson with thick restart for the smallest eigenpairs.
SpectralEmbedding iterative_smallest(const Eigen::MatrixXd& a, int k, const EigenOptions& options) {
  const auto n = a.rows();
  const int block = static_cast<int>(std::min<Eigen::Index>(n, k + 2));
  const auto max_basis = std::min<Eigen::Index>(n, std::max(6 * block, block + 40));
  const auto keep = std::min<Eigen::Index>(max_basis - block, 2 * block);

  Rng rng(0x9e3779b97f4a7c15ULL);
  Eigen::MatrixXd start(n, block);
  for (Eigen::Index i = 0; i < start.size(); ++i) start.data()[i] = standard_normal(rng);

  Eigen::MatrixXd basis(n, 0);
  extend_basis(basis, start);
  Eigen::MatrixXd abasis = a * basis;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd t = basis.transpose() * abasis;
    t = (0.5 * (t + t.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    if (small.info() != Eigen::Success) throw Error(ErrorCode::NumericalError, "projected eigensolve failed");

    const Eigen::Index wanted = std::min<Eigen::Index>(block, basis.cols());
    const Eigen::MatrixXd y = small.eigenvectors().leftCols(wanted);
    const Eigen::VectorXd theta = small.eigenvalues().head(wanted);
    const Eigen::MatrixXd x = basis * y;
    const Eigen::MatrixXd residual = abasis * y - x * theta.asDiagonal();

    bool converged = true;
    for (int c = 0; c < k; ++c) {
      if (residual.col(c).norm() > options.tolerance * std::max(1.0, std::abs(theta(c)))) converged = false;
    }
    if (converged) {
      SpectralEmbedding emb;
      emb.vectors = x.leftCols(k);
      emb.values = theta.head(k);
      return emb;
    }

    if (basis.cols() + block > max_basis) {
      const Eigen::Index kept = std::min(keep, basis.cols());
      const Eigen::MatrixXd ritz = small.eigenvectors().leftCols(kept);
      basis = (basis * ritz).eval();
      abasis = (abasis * ritz).eval();
    }
    const auto before = basis.cols();
    if (extend_basis(basis, residual) == 0 && basis.cols() < n) {
      Eigen::MatrixXd fresh(n, 1);
      for (Eigen::Index i = 0; i < n; ++i) fresh(i, 0) = standard_normal(rng);
      extend_basis(basis, fresh);
    }
    if (basis.cols() == before) {
      throw Error(ErrorCode::NumericalError, "iterative eigensolver stagnated");
    }
    abasis.conservativeResize(Eigen::NoChange, basis.cols());
    abasis.rightCols(basis.cols() - before) = a * basis.rightCols(basis.cols() - before);
  }
  throw Error(ErrorCode::NumericalError, "iterative eigensolver did not converge in " +
                                             std::to_string(options.max_iterations) + " iterations");
}

}  // namespace

SpectralEmbedding smallest_eigenpairs(const Eigen::MatrixXd& l, int n_c, const EigenOptions& options) {
  const auto n = l.rows();
  if (l.cols() != n) throw Error(ErrorCode::ShapeError, "Laplacian must be square");
  if (n_c < 1 || n_c > n) throw Error(ErrorCode::InvalidParameter, "n_c must lie in [1, n]");
  if (!l.allFinite()) throw Error(ErrorCode::NumericalError, "non-finite Laplacian entry");

  SpectralEmbedding emb;
  if (n <= options.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericalError, "eigensolver did not converge");
    emb.vectors = solver.eigenvectors().leftCols(n_c);
    emb.values = solver.eigenvalues().head(n_c);
  } else {
    emb = iterative_smallest(l, n_c, options);
  }
  fix_signs(emb.vectors);

  for (int c = 0; c < n_c; ++c) {
    const double res = (l * emb.vectors.col(c) - emb.values(c) * emb.vectors.col(c)).norm();
    if (!(res <= 1e-6 * std::max(1.0, std::abs(emb.values(c))))) {
      throw Error(ErrorCode::NumericalError, "eigenpair residual " + std::to_string(res));
    }
  }
  return emb;
}

double within_cluster_sum_of_squares(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.row(labels[i]) += points.row(static_cast<Eigen::Index>(i));
    counts(labels[i]) += 1.0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    total += (points.row(static_cast<Eigen::Index>(i)) - sums.row(c) / counts(c)).squaredNorm();
  }
  return total;
}

namespace {

struct LloydResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  double inertia = 0.0;
};

Eigen::Index sample_by_weight(const Eigen::VectorXd& d2, Rng& rng) {
  const auto n = d2.size();
  const double total = d2.sum();
  if (!(total > 0.0)) return static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  Eigen::Index last = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d2(i) <= 0.0) continue;
    acc += d2(i);
    last = i;
    if (acc > target) return i;
  }
  return last;
}

// Greedy k-means++: each new center is the best of several D^2-weighted draws.
Eigen::MatrixXd plus_plus_init(const Eigen::MatrixXd& points, int k, int trials, Rng& rng) {
  const auto n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    Eigen::Index pick = -1;
    Eigen::VectorXd best_d2;
    double best_potential = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
      const auto candidate = sample_by_weight(d2, rng);
      Eigen::VectorXd next = d2.cwiseMin((points.rowwise() - points.row(candidate)).rowwise().squaredNorm());
      const double potential = next.sum();
      if (potential < best_potential) {
        best_potential = potential;
        pick = candidate;
        best_d2 = std::move(next);
      }
    }
    centers.row(c) = points.row(pick);
    d2 = std::move(best_d2);
  }
  return centers;
}

LloydResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers, const KMeansOptions& options) {
  const auto n = points.rows();
  const auto k = centers.rows();
  LloydResult r;
  r.labels.assign(static_cast<std::size_t>(n), -1);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      const double d = (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      inertia += d;
      if (r.labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        r.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(r.labels[static_cast<std::size_t>(i)]) += points.row(i);
      counts(r.labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    }
    const bool settled = std::abs(previous - inertia) <= options.tolerance * std::max(previous, 0.0);
    previous = inertia;
    if (!changed || settled) break;
  }
  r.centers = std::move(centers);
  r.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r.inertia += (points.row(i) - r.centers.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return r;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw Error(ErrorCode::InvalidParameter, "k must be positive");
  if (points.rows() < k) {
    throw Error(ErrorCode::InvalidParameter, "fewer points (" + std::to_string(points.rows()) +
                                                 ") than clusters (" + std::to_string(k) + ")");
  }
  Rng rng(seed);
  LloydResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  const int trials = options.local_trials > 0 ? options.local_trials
                                              : 2 + static_cast<int>(std::floor(std::log(static_cast<double>(k))));
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    auto run = lloyd(points, plus_plus_init(points, k, trials, rng), options);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  ClusterAssignment out;
  out.n_c = k;
  out.labels = std::move(best.labels);
  out.centers = std::move(best.centers);
  out.inertia = best.inertia;
  out.empty.assign(static_cast<std::size_t>(k), true);
  for (int label : out.labels) out.empty[static_cast<std::size_t>(label)] = false;
  return out;
}

SimilarityMatrix apply_constraints(const SimilarityMatrix& w, const ConstraintSet& q) {
  SimilarityMatrix out = w;
  for (const auto& c : q.entries()) {
    if (c.i >= w.size() || c.j >= w.size()) {
      throw Error(ErrorCode::InvalidConstraint, "constraint index out of range");
    }
    out.set_pair(c.i, c.j, c.kind == LinkKind::MustLink ? 1.0 : -1.0);
  }
  return out;
}

SpectralResult spectral_learning_cluster(const SimilarityMatrix& w, const ConstraintSet& q, int n_c,
                                         std::uint64_t seed, const EigenOptions& eigen,
                                         const KMeansOptions& km) {
  SpectralResult r;
  r.edited = apply_constraints(w, q);
  r.embedding = smallest_eigenpairs(build_laplacian(r.edited).l, n_c, eigen);
  r.assignment = kmeans_assign(r.embedding, n_c, seed, km);
  return r;
}

}  // namespace activeclust
