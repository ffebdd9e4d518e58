#include "activeclust/uncertainty.hpp"

#include "activeclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace activeclust {

double degeneracy_threshold(const SpectralEmbedding& emb) {
  const double top = emb.count() > 0 ? emb.values.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * std::max(1.0, top);
}

std::vector<Eigen::VectorXd> eigvec_derivative(const SpectralEmbedding& emb, int j, int k) {
  if (j == k) throw Error(ErrorCode::InvalidPair, "derivative needs two distinct samples");
  if (j < 0 || k < 0 || j >= emb.samples() || k >= emb.samples()) {
    throw Error(ErrorCode::InvalidPair, "sample index out of range");
  }
  const auto& v = emb.vectors;
  const double delta = degeneracy_threshold(emb);
  const Eigen::RowVectorXd diff = v.row(j) - v.row(k);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(emb.count()));
  for (int i = 0; i < emb.count(); ++i) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(emb.samples());
    for (int p = 0; p < emb.count(); ++p) {
      const double gap = emb.values(i) - emb.values(p);
      if (p == i || std::abs(gap) < delta) continue;
      d += (diff(i) * diff(p) / gap) * v.col(p);
    }
    out.push_back(std::move(d));
  }
  return out;
}

double gradient_score(int x, const SpectralEmbedding& emb, std::span<const int> references) {
  if (references.empty()) throw Error(ErrorCode::NoCertainSets, "no certain samples to perturb toward");
  const auto& v = emb.vectors;
  const int nc = emb.count();
  // Summed over references, the coefficient of v_p in dv_i is
  // outer(i, p) / (lambda_i - lambda_p); the v_p are orthonormal, so the norm
  // of dv_i is the norm of its coefficient vector.
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(nc, nc);
  for (int r : references) {
    if (r == x) throw Error(ErrorCode::InvalidPair, "reference equals the candidate");
    const Eigen::VectorXd diff = (v.row(x) - v.row(r)).transpose();
    outer.noalias() += diff * diff.transpose();
  }
  const double delta = degeneracy_threshold(emb);
  double score = 0.0;
  for (int i = 0; i < nc; ++i) {
    double sq = 0.0;
    for (int p = 0; p < nc; ++p) {
      const double gap = emb.values(i) - emb.values(p);
      if (p == i || std::abs(gap) < delta) continue;
      const double coef = outer(i, p) / gap;
      sq += coef * coef;
    }
    score += std::sqrt(sq);
  }
  return score;
}

double gradient_score(int x, const SpectralEmbedding& emb, const CertainSets& z, const SimilarityMatrix& w) {
  if (z.set_count() == 0) throw Error(ErrorCode::NoCertainSets, "no certain sets");
  std::vector<int> refs;
  for (const auto& r : representatives(x, z, w)) refs.push_back(r.sample);
  return gradient_score(x, emb, refs);
}

KnnIndex::KnnIndex(const SimilarityMatrix& w, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidParameter, "neighbor count must be positive");
  const int n = w.size();
  k_ = std::min(k, n - 1);
  ids_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(k_));
  std::vector<int> order;
  for (int x = 0; x < n; ++x) {
    order.clear();
    for (int l = 0; l < n; ++l) {
      if (l != x) order.push_back(l);
    }
    auto closer = [&](int a, int b) {
      if (w(x, a) != w(x, b)) return w(x, a) > w(x, b);
      return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + k_, order.end(), closer);
    std::copy_n(order.begin(), k_, ids_.begin() + static_cast<std::ptrdiff_t>(x) * k_);
  }
}

namespace {

ClusterDistribution neighbor_vote(int x, const SimilarityMatrix& w, const ClusterAssignment& asg,
                                  std::span<const int> neighbors) {
  ClusterDistribution d;
  d.probs.assign(static_cast<std::size_t>(asg.n_c), 0.0);
  double total = 0.0;
  for (int l : neighbors) {
    const double s = std::max(w(x, l), 0.0);
    d.probs[static_cast<std::size_t>(asg.labels[static_cast<std::size_t>(l)])] += s;
    total += s;
  }
  if (total > 0.0) {
    for (auto& p : d.probs) p /= total;
  } else {
    std::fill(d.probs.begin(), d.probs.end(), 1.0 / asg.n_c);
  }
  return d;
}

}  // namespace

ClusterDistribution nonparametric_probs(int x, const SimilarityMatrix& w, const ClusterAssignment& asg, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidParameter, "neighbor count must be positive");
  const int n = w.size();
  std::vector<int> order;
  for (int l = 0; l < n; ++l) {
    if (l != x) order.push_back(l);
  }
  const auto kk = static_cast<std::ptrdiff_t>(std::min(k, n - 1));
  std::partial_sort(order.begin(), order.begin() + kk, order.end(), [&](int a, int b) {
    if (w(x, a) != w(x, b)) return w(x, a) > w(x, b);
    return a < b;
  });
  return neighbor_vote(x, w, asg, std::span<const int>(order.data(), static_cast<std::size_t>(kk)));
}

ClusterDistribution nonparametric_probs(int x, const SimilarityMatrix& w, const ClusterAssignment& asg,
                                        const KnnIndex& knn) {
  return neighbor_vote(x, w, asg, knn.neighbors(x));
}

ClusterDistribution parametric_probs(int x, const MixtureModel& mm, const SpectralEmbedding& emb) {
  const Eigen::VectorXd joint = mm.log_joint(emb.vectors.row(x));
  ClusterDistribution d;
  d.probs.assign(static_cast<std::size_t>(mm.components()), 1.0 / mm.components());
  const double top = joint.maxCoeff();
  if (!std::isfinite(top)) return d;  // every density underflowed
  const Eigen::ArrayXd scaled = (joint.array() - top).exp();
  const double total = scaled.sum();
  for (int c = 0; c < mm.components(); ++c) d.probs[static_cast<std::size_t>(c)] = scaled(c) / total;
  return d;
}

double entropy(const ClusterDistribution& d) {
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

double step_scale(int x, const SelectionContext& ctx, SelectionMode model, const MixtureModel* mixture) {
  if (model == SelectionMode::P || model == SelectionMode::PO) {
    const MixtureModel* mm = mixture ? mixture : ctx.mixture;
    if (!mm) throw Error(ErrorCode::InvalidParameter, "parametric step scale needs a mixture model");
    return entropy(parametric_probs(x, *mm, ctx.emb));
  }
  if (ctx.knn) return entropy(nonparametric_probs(x, ctx.w, ctx.asg, *ctx.knn));
  return entropy(nonparametric_probs(x, ctx.w, ctx.asg, ctx.knn_k));
}

Selection select_informative(std::span<const int> candidates, const SelectionContext& ctx, SelectionMode mode, int b) {
  if (candidates.empty()) throw Error(ErrorCode::AllSamplesCertain, "no uncertain samples left");
  if (b < 1) throw Error(ErrorCode::InvalidParameter, "candidate budget must be positive");
  for (int x : candidates) {
    if (ctx.z.is_certain(x)) throw Error(ErrorCode::AlreadyCertain, "candidate " + std::to_string(x) + " is certain");
  }

  const bool uses_gradient = mode == SelectionMode::N || mode == SelectionMode::P || mode == SelectionMode::GO;
  const bool uses_step = mode != SelectionMode::GO;
  const bool parametric = mode == SelectionMode::P || mode == SelectionMode::PO;

  std::optional<KnnIndex> local_knn;
  std::optional<MixtureModel> local_mixture;
  SelectionContext view = ctx;
  if (uses_step && !parametric && !view.knn) {
    local_knn.emplace(ctx.w, ctx.knn_k);
    view.knn = &*local_knn;
  }
  if (parametric && !view.mixture) {
    local_mixture = fit_mixture(ctx.emb, ctx.asg, ctx.emb.count());
    view.mixture = &*local_mixture;
  }

  Selection sel;
  sel.scores.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto& s = sel.scores[c];
    s.sample = candidates[c];
    if (uses_step) s.step_scale = step_scale(s.sample, view, parametric ? SelectionMode::P : SelectionMode::N);
  }

  std::vector<std::size_t> to_grade;
  if (mode == SelectionMode::GO) {
    to_grade.resize(candidates.size());
    std::iota(to_grade.begin(), to_grade.end(), std::size_t{0});
  } else if (uses_gradient) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto keep = std::min(order.size(), static_cast<std::size_t>(b));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t c) {
                        const auto& sa = sel.scores[a];
                        const auto& sc = sel.scores[c];
                        if (sa.step_scale != sc.step_scale) return sa.step_scale > sc.step_scale;
                        return sa.sample < sc.sample;
                      });
    order.resize(keep);
    to_grade = std::move(order);
    for (auto& s : sel.scores) s.gradient = 0.0;  // excluded unless graded below
  }

  std::vector<int> refs;
  for (std::size_t c : to_grade) {
    auto& s = sel.scores[c];
    refs.clear();
    for (const auto& r : representatives(s.sample, ctx.z, ctx.w)) refs.push_back(r.sample);
    s.gradient = gradient_score(s.sample, ctx.emb, refs);
    s.gradient_evaluated = true;
  }

  for (auto& s : sel.scores) s.product = s.gradient * s.step_scale;

  const UncertaintyScore* best = nullptr;
  for (const auto& s : sel.scores) {
    if (uses_gradient && !s.gradient_evaluated) continue;
    if (!best || s.product > best->product || (s.product == best->product && s.sample < best->sample)) best = &s;
  }
  sel.chosen = best->sample;
  return sel;
}

}  // namespace activeclust
