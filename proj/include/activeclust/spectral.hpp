#pragma once

#include "activeclust/constraints.hpp"
#include "activeclust/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace activeclust {

struct Laplacian {
  Eigen::MatrixXd l;
  Eigen::VectorXd degrees;  // diagonal of D

  Eigen::MatrixXd degree_matrix() const { return degrees.asDiagonal(); }
};

// L = D - W with D_ii = sum_k W_ik. Negative entries (cannot-links) are allowed.
Laplacian build_laplacian(const SimilarityMatrix& w);

struct SpectralEmbedding {
  Eigen::MatrixXd vectors;  // n x n_c, column i is the eigenvector of values[i]
  Eigen::VectorXd values;   // ascending

  int count() const { return static_cast<int>(values.size()); }
  int samples() const { return static_cast<int>(vectors.rows()); }
};

struct EigenOptions {
  // Dense self-adjoint decomposition up to this order, iterative above it.
  int dense_limit = 2000;
  double tolerance = 1e-8;
  int max_iterations = 2000;
};

// The n_c smallest eigenpairs of a symmetric matrix, ascending, each
// eigenvector signed so that its largest-magnitude entry is positive.
SpectralEmbedding smallest_eigenpairs(const Eigen::MatrixXd& l, int n_c, const EigenOptions& options = {});

struct ClusterAssignment {
  std::vector<int> labels;
  int n_c = 0;
  Eigen::MatrixXd centers;   // n_c x embedding dimension
  std::vector<bool> empty;   // empty[c] when no sample landed in cluster c
  double inertia = 0.0;      // within-cluster sum of squares
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-8;
  int local_trials = 0;  // seeding draws per center; 0 means 2 + floor(ln k)
};

// Greedy k-means++ seeded Lloyd iterations on the rows of `points`, best of
// `restarts` by within-cluster sum of squares. Deterministic for a seed.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                         const KMeansOptions& options = {});

inline ClusterAssignment kmeans_assign(const SpectralEmbedding& emb, int n_c, std::uint64_t seed,
                                       const KMeansOptions& options = {}) {
  return kmeans(emb.vectors, n_c, seed, options);
}

double within_cluster_sum_of_squares(const Eigen::MatrixXd& points, const std::vector<int>& labels);

// Spectral-learning edit: must-link pairs set to 1, cannot-link pairs to -1.
SimilarityMatrix apply_constraints(const SimilarityMatrix& w, const ConstraintSet& q);

struct SpectralResult {
  ClusterAssignment assignment;
  SpectralEmbedding embedding;
  SimilarityMatrix edited;
};

SpectralResult spectral_learning_cluster(const SimilarityMatrix& w, const ConstraintSet& q, int n_c,
                                         std::uint64_t seed, const EigenOptions& eigen = {},
                                         const KMeansOptions& km = {});

}  // namespace activeclust
