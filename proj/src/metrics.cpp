#include "activeclust/metrics.hpp"

#include "activeclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace activeclust {
namespace {

std::vector<std::size_t> densify(std::span<const int> labels, std::size_t& count) {
  std::unordered_map<int, std::size_t> index;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(index.try_emplace(l, index.size()).first->second);
  count = index.size();
  return out;
}

std::uint64_t choose2(std::uint64_t k) { return k * (k - (k > 0 ? 1 : 0)) / 2; }

// -sum (x / n) log(x / denom) over nonzero x.
double entropy_term(double x, double denom, double n) { return x > 0.0 ? -(x / n) * std::log(x / denom) : 0.0; }

}  // namespace

ContingencyTable contingency(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::ShapeError, "prediction and truth lengths differ");
  std::size_t clusters = 0;
  std::size_t classes = 0;
  const auto k = densify(pred, clusters);
  const auto c = densify(truth, classes);
  ContingencyTable t;
  t.n = pred.size();
  t.a.assign(classes, std::vector<std::uint64_t>(clusters, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++t.a[c[i]][k[i]];
  return t;
}

PairCounts pair_counts(std::span<const int> pred, std::span<const int> truth) {
  const auto t = contingency(pred, truth);
  std::vector<std::uint64_t> cluster_sizes(t.clusters(), 0);
  std::uint64_t same_truth = 0;
  PairCounts pc;
  for (const auto& row : t.a) {
    std::uint64_t class_size = 0;
    for (std::size_t p = 0; p < row.size(); ++p) {
      pc.ss += choose2(row[p]);
      class_size += row[p];
      cluster_sizes[p] += row[p];
    }
    same_truth += choose2(class_size);
  }
  std::uint64_t same_pred = 0;
  for (auto s : cluster_sizes) same_pred += choose2(s);
  pc.sd = same_pred - pc.ss;
  pc.ds = same_truth - pc.ss;
  pc.dd = choose2(t.n) - pc.ss - pc.sd - pc.ds;
  if (pc.total() != choose2(t.n)) throw Error(ErrorCode::NumericalError, "pair counts do not sum to n(n-1)/2");
  return pc;
}

double jaccard(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::ShapeError, "prediction and truth lengths differ");
  if (pred.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  const auto pc = pair_counts(pred, truth);
  const auto denom = pc.ss + pc.sd + pc.ds;
  if (denom == 0) return 1.0;
  return static_cast<double>(pc.ss) / static_cast<double>(denom);
}

VMeasure v_measure(std::span<const int> pred, std::span<const int> truth, double beta) {
  const auto t = contingency(pred, truth);
  const double n = static_cast<double>(t.n);
  VMeasure out;
  if (t.n == 0) return out;

  std::vector<double> class_size(t.classes(), 0.0);
  std::vector<double> cluster_size(t.clusters(), 0.0);
  for (std::size_t q = 0; q < t.classes(); ++q) {
    for (std::size_t p = 0; p < t.clusters(); ++p) {
      class_size[q] += static_cast<double>(t.a[q][p]);
      cluster_size[p] += static_cast<double>(t.a[q][p]);
    }
  }

  double h_c = 0.0, h_k = 0.0, h_c_given_k = 0.0, h_k_given_c = 0.0;
  for (double s : class_size) h_c += entropy_term(s, n, n);
  for (double s : cluster_size) h_k += entropy_term(s, n, n);
  for (std::size_t q = 0; q < t.classes(); ++q) {
    for (std::size_t p = 0; p < t.clusters(); ++p) {
      const double a = static_cast<double>(t.a[q][p]);
      h_c_given_k += entropy_term(a, cluster_size[p], n);
      h_k_given_c += entropy_term(a, class_size[q], n);
    }
  }

  // A zero marginal entropy forces the matching conditional entropy to zero;
  // that side is then perfect by definition.
  out.homogeneity = h_c == 0.0 ? 1.0 : std::clamp(1.0 - h_c_given_k / h_c, 0.0, 1.0);
  out.completeness = h_k == 0.0 ? 1.0 : std::clamp(1.0 - h_k_given_c / h_k, 0.0, 1.0);
  const double denom = beta * out.homogeneity + out.completeness;
  out.v = denom == 0.0 ? 0.0 : (1.0 + beta) * out.homogeneity * out.completeness / denom;
  return out;
}

}  // namespace activeclust
