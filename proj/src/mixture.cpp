#include "activeclust/mixture.hpp"

#include "activeclust/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace activeclust {
namespace {

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;
};

Factor factorize(const Eigen::MatrixXd& cov) {
  Factor f;
  f.llt.compute(cov);
  if (f.llt.info() != Eigen::Success) throw Error(ErrorCode::NumericalError, "covariance not positive definite");
  f.log_det = 2.0 * f.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return f;
}

double log_gaussian(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& mean, const Factor& f) {
  const auto d = static_cast<double>(x.size());
  const Eigen::VectorXd z = f.llt.matrixL().solve((x - mean).transpose());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + f.log_det + z.squaredNorm());
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

}  // namespace

void MixtureModel::factorize() {
  lower_.clear();
  log_det_.clear();
  for (const auto& cov : covariances) {
    auto f = activeclust::factorize(cov);
    lower_.push_back(f.llt.matrixL());
    log_det_.push_back(f.log_det);
  }
}

Eigen::VectorXd MixtureModel::log_joint(const Eigen::RowVectorXd& point) const {
  if (lower_.size() != static_cast<std::size_t>(components())) {
    MixtureModel copy = *this;
    copy.factorize();
    return copy.log_joint(point);
  }
  const auto d = static_cast<double>(point.size());
  Eigen::VectorXd out(components());
  for (int c = 0; c < components(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    const Eigen::VectorXd z =
        lower_[k].triangularView<Eigen::Lower>().solve((point - means.row(c)).transpose());
    out(c) = std::log(weights(c)) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det_[k] + z.squaredNorm());
  }
  return out;
}

MixtureModel fit_mixture(const SpectralEmbedding& emb, const ClusterAssignment& asg, int n_c,
                         const MixtureOptions& options) {
  return fit_mixture(emb.vectors, asg.labels, n_c, options);
}

MixtureModel fit_mixture(const Eigen::MatrixXd& points, const std::vector<int>& labels, int n_c,
                         const MixtureOptions& options) {
  const auto n = points.rows();
  const auto d = points.cols();
  if (n_c < 1) throw Error(ErrorCode::InvalidParameter, "need at least one component");
  if (n_c > n) throw Error(ErrorCode::InvalidParameter, "more components than samples");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw Error(ErrorCode::ShapeError, "label count mismatch");

  const Eigen::MatrixXd reg = options.regularization * Eigen::MatrixXd::Identity(d, d);
  const Eigen::RowVectorXd global_mean = points.colwise().mean();
  const Eigen::MatrixXd centered_all = points.rowwise() - global_mean;
  const Eigen::MatrixXd global_cov = centered_all.transpose() * centered_all / static_cast<double>(n);

  // Hard initialization. Components with no members start at the global
  // moments with a single sample's weight.
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, n_c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l < 0 || l >= n_c) throw Error(ErrorCode::InvalidParameter, "cluster label out of range");
    resp(i, l) = 1.0;
  }

  MixtureModel mm;
  mm.weights.resize(n_c);
  mm.means.resize(n_c, d);
  mm.covariances.assign(static_cast<std::size_t>(n_c), Eigen::MatrixXd());

  auto m_step = [&](const Eigen::MatrixXd& r) {
    for (int c = 0; c < n_c; ++c) {
      const double mass = r.col(c).sum();
      auto& cov = mm.covariances[static_cast<std::size_t>(c)];
      if (mass < 1e-10) {
        mm.weights(c) = 1.0 / static_cast<double>(n);
        mm.means.row(c) = global_mean;
        cov = global_cov + reg;
        continue;
      }
      mm.weights(c) = mass;
      mm.means.row(c) = (r.col(c).transpose() * points) / mass;
      const Eigen::MatrixXd centered = points.rowwise() - mm.means.row(c);
      cov = centered.transpose() * r.col(c).asDiagonal() * centered / mass + reg;
      cov = (0.5 * (cov + cov.transpose())).eval();
    }
    mm.weights /= mm.weights.sum();
  };

  m_step(resp);
  Eigen::VectorXd joint(n_c);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::vector<Factor> factors;
    factors.reserve(static_cast<std::size_t>(n_c));
    for (const auto& cov : mm.covariances) factors.push_back(factorize(cov));

    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < n_c; ++c) {
        joint(c) = std::log(mm.weights(c)) + log_gaussian(points.row(i), mm.means.row(c), factors[static_cast<std::size_t>(c)]);
      }
      const double norm = log_sum_exp(joint);
      ll += norm;
      resp.row(i) = (joint.array() - norm).exp().transpose();
    }
    if (!std::isfinite(ll)) throw Error(ErrorCode::NumericalError, "mixture log-likelihood is not finite");
    mm.log_likelihood.push_back(ll);
    mm.iterations = iter + 1;
    if (iter > 0) {
      const double prev = mm.log_likelihood[mm.log_likelihood.size() - 2];
      if (std::abs(ll - prev) < options.tolerance * std::abs(prev)) break;
    }
    if (iter + 1 == options.max_iterations) break;
    m_step(resp);
  }
  mm.factorize();
  return mm;
}

}  // namespace activeclust
