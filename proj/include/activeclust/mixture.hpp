#pragma once

#include "activeclust/spectral.hpp"

#include <Eigen/Dense>

#include <vector>

namespace activeclust {

// Full-covariance Gaussian mixture over the rows of a spectral embedding.
struct MixtureModel {
  Eigen::VectorXd weights;                 // mixing proportions, sum to 1
  Eigen::MatrixXd means;                   // components x dimension
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<double> log_likelihood;      // one entry per EM iteration
  int iterations = 0;

  int components() const { return static_cast<int>(weights.size()); }

  // Caches Cholesky factors of the covariances; fit_mixture calls it.
  void factorize();

  // log(alpha_c) + log N(point; mean_c, cov_c) for every component.
  Eigen::VectorXd log_joint(const Eigen::RowVectorXd& point) const;

 private:
  std::vector<Eigen::MatrixXd> lower_;
  std::vector<double> log_det_;
};

struct MixtureOptions {
  double regularization = 1e-6;
  double tolerance = 1e-7;   // relative change of the log-likelihood
  int max_iterations = 200;
};

// EM started from the hard clusters of `asg`.
MixtureModel fit_mixture(const SpectralEmbedding& emb, const ClusterAssignment& asg, int n_c,
                         const MixtureOptions& options = {});
MixtureModel fit_mixture(const Eigen::MatrixXd& points, const std::vector<int>& labels, int n_c,
                         const MixtureOptions& options = {});

}  // namespace activeclust
