#pragma once

#include "activeclust/certain_sets.hpp"
#include "activeclust/mixture.hpp"
#include "activeclust/spectral.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace activeclust {

// Eigenvalue pairs closer than this are skipped in the perturbation sum.
double degeneracy_threshold(const SpectralEmbedding& emb);

// First-order change of each computed eigenvector v_i when the symmetric
// similarity w_jk = w_kj grows: sum over p != i of
//   (v_i[j] - v_i[k]) (v_p[j] - v_p[k]) / (lambda_i - lambda_p) * v_p.
// The sum runs over the computed eigenpairs only.
std::vector<Eigen::VectorXd> eigvec_derivative(const SpectralEmbedding& emb, int j, int k);

// Sum over eigenvectors of the Euclidean norm of the summed derivative toward
// the reference samples (one representative per certain set).
double gradient_score(int x, const SpectralEmbedding& emb, std::span<const int> references);
double gradient_score(int x, const SpectralEmbedding& emb, const CertainSets& z, const SimilarityMatrix& w);

struct ClusterDistribution {
  std::vector<double> probs;
};

// k most similar other samples of every sample, fixed for a session.
class KnnIndex {
 public:
  KnnIndex() = default;
  KnnIndex(const SimilarityMatrix& w, int k);

  int k() const { return k_; }
  std::span<const int> neighbors(int x) const {
    return {ids_.data() + static_cast<std::size_t>(x) * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }

 private:
  int k_ = 0;
  std::vector<int> ids_;
};

inline constexpr int kDefaultNeighbors = 20;

// Share of x's (nonnegative) similarity mass held by each cluster among its k
// nearest neighbors; uniform when that mass is zero.
ClusterDistribution nonparametric_probs(int x, const SimilarityMatrix& w, const ClusterAssignment& asg,
                                        int k = kDefaultNeighbors);
ClusterDistribution nonparametric_probs(int x, const SimilarityMatrix& w, const ClusterAssignment& asg,
                                        const KnnIndex& knn);

// Posterior responsibilities of the mixture components at x's embedding row.
ClusterDistribution parametric_probs(int x, const MixtureModel& mm, const SpectralEmbedding& emb);

// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const ClusterDistribution& d);

enum class SelectionMode { N, P, GO, NO, PO };

struct UncertaintyScore {
  int sample = 0;
  double gradient = 1.0;    // left at 1 when the mode does not use it
  double step_scale = 1.0;  // left at 1 when the mode does not use it
  double product = 1.0;     // gradient * step_scale
  bool gradient_evaluated = false;
};

// Read-only view of the state one selection needs.
struct SelectionContext {
  const SimilarityMatrix& w;
  const SpectralEmbedding& emb;
  const ClusterAssignment& asg;
  const CertainSets& z;
  const KnnIndex* knn = nullptr;          // built on demand when absent
  const MixtureModel* mixture = nullptr;  // fitted on demand when absent
  int knn_k = kDefaultNeighbors;
};

// Entropy of x's cluster distribution under the nonparametric (N) or
// parametric (P) model; this is the expected ambiguity reduction.
double step_scale(int x, const SelectionContext& ctx, SelectionMode model,
                  const MixtureModel* mixture = nullptr);

struct Selection {
  int chosen = -1;
  std::vector<UncertaintyScore> scores;  // one per candidate, candidate order
};

inline constexpr int kDefaultCandidateBudget = 20;

// N / P: step scale for every candidate, gradient for the b largest step
// scales, argmax of the product. GO: gradient only. NO / PO: step scale only.
// Ties go to the lowest sample index.
Selection select_informative(std::span<const int> candidates, const SelectionContext& ctx, SelectionMode mode,
                             int b = kDefaultCandidateBudget);

}  // namespace activeclust
