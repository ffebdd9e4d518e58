#include "activeclust/metrics.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace activeclust;
using fixtures::error_code;

namespace {

// Direct pair enumeration.
double brute_jaccard(const std::vector<int>& pred, const std::vector<int>& truth) {
  long ss = 0, sd = 0, ds = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = i + 1; j < pred.size(); ++j) {
      const bool p = pred[i] == pred[j];
      const bool t = truth[i] == truth[j];
      ss += p && t;
      sd += p && !t;
      ds += !p && t;
    }
  }
  if (ss + sd + ds == 0) return 1.0;
  return static_cast<double>(ss) / static_cast<double>(ss + sd + ds);
}

double entropy_of(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c > 0) h -= c / n * std::log(c / n);
  }
  return h;
}

// H(A|B) from the joint distribution, without a contingency table.
double conditional_entropy(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> marginal_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    marginal_b[b[i]] += 1.0;
  }
  double h = 0.0;
  for (const auto& [key, c] : joint) h -= c / n * std::log(c / marginal_b[key.second]);
  return h;
}

VMeasure brute_v(const std::vector<int>& pred, const std::vector<int>& truth) {
  const double n = static_cast<double>(pred.size());
  std::map<int, double> cc, kk;
  for (int t : truth) cc[t] += 1.0;
  for (int p : pred) kk[p] += 1.0;
  const double hc = entropy_of(cc, n);
  const double hk = entropy_of(kk, n);
  VMeasure out;
  out.homogeneity = hc == 0.0 ? 1.0 : 1.0 - conditional_entropy(truth, pred) / hc;
  out.completeness = hk == 0.0 ? 1.0 : 1.0 - conditional_entropy(pred, truth) / hk;
  const double sum = out.homogeneity + out.completeness;
  out.v = sum == 0.0 ? 0.0 : 2.0 * out.homogeneity * out.completeness / sum;
  return out;
}

}  // namespace

TEST_CASE("jaccard examples") {
  const std::vector<int> truth = {0, 0, 1, 1};
  CHECK(jaccard(truth, truth) == 1.0);
  const std::vector<int> pred = {0, 1, 1, 1};
  const auto pc = pair_counts(pred, truth);
  CHECK(pc.ss == 1);
  CHECK(pc.sd == 2);
  CHECK(pc.ds == 1);
  CHECK(pc.total() == 6);
  CHECK(jaccard(pred, truth) == 0.25);
  CHECK(jaccard(std::vector<int>{0, 1, 2, 3}, truth) == 0.0);
  CHECK(jaccard(std::vector<int>{0, 1, 2}, std::vector<int>{5, 6, 7}) == 1.0);
}

TEST_CASE("metric argument checks") {
  const std::vector<int> a = {0, 1, 1};
  const std::vector<int> b = {0, 1};
  CHECK(error_code([&] { jaccard(a, b); }) == ErrorCode::ShapeError);
  CHECK(error_code([&] { v_measure(a, b); }) == ErrorCode::ShapeError);
}

TEST_CASE("v-measure examples") {
  const std::vector<int> truth = {0, 0, 1, 1, 2};
  const auto same = v_measure(truth, truth);
  CHECK(same.v == doctest::Approx(1.0).epsilon(1e-15));
  const auto one = v_measure(std::vector<int>{4, 4, 4, 4, 4}, truth);
  CHECK(one.completeness == 1.0);
  CHECK(one.homogeneity < 1.0);
}

TEST_CASE("contingency table counts every sample once") {
  const std::vector<int> pred = {5, 5, 9, 9, 9, 1};
  const std::vector<int> truth = {0, 1, 0, 1, 1, 1};
  const auto t = contingency(pred, truth);
  std::uint64_t total = 0;
  for (const auto& row : t.a) {
    for (auto v : row) total += v;
  }
  CHECK(total == 6);
  CHECK(t.n == 6);
  CHECK(t.classes() == 2);
  CHECK(t.clusters() == 3);
}

TEST_CASE("metrics match brute-force oracles on random partitions") {
  Rng rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 11));
    const auto pred = fixtures::random_partition(n, 5, rng);
    const auto truth = fixtures::random_partition(n, 5, rng);
    CHECK(std::abs(jaccard(pred, truth) - brute_jaccard(pred, truth)) <= 1e-12);
    const auto v = v_measure(pred, truth);
    const auto b = brute_v(pred, truth);
    CHECK(std::abs(v.v - b.v) <= 1e-12);
    CHECK(std::abs(v.homogeneity - b.homogeneity) <= 1e-12);
    CHECK(std::abs(v.completeness - b.completeness) <= 1e-12);
  }
}

TEST_CASE("metric invariants") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 20));
    const auto pred = fixtures::random_partition(n, 6, rng);
    const auto truth = fixtures::random_partition(n, 6, rng);

    const auto pc = pair_counts(pred, truth);
    CHECK(pc.total() == static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2);

    // Relabeling clusters changes nothing.
    std::vector<int> renamed;
    for (int p : pred) renamed.push_back(100 - 3 * p);
    CHECK(jaccard(renamed, truth) == jaccard(pred, truth));
    const auto v = v_measure(pred, truth);
    const auto vr = v_measure(renamed, truth);
    CHECK(std::abs(v.v - vr.v) <= 1e-14);

    // Swapping the roles swaps homogeneity and completeness.
    const auto swapped = v_measure(truth, pred);
    CHECK(std::abs(swapped.homogeneity - v.completeness) <= 1e-14);
    CHECK(std::abs(swapped.completeness - v.homogeneity) <= 1e-14);

    for (double m : {jaccard(pred, truth), v.v, v.homogeneity, v.completeness}) {
      CHECK(m >= 0.0);
      CHECK(m <= 1.0);
    }
  }
}
