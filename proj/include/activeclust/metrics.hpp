#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace activeclust {

// Pair agreement between a clustering and ground truth. The first letter is the
// clustering (Same/Different cluster), the second the ground truth.
struct PairCounts {
  std::uint64_t ss = 0;
  std::uint64_t sd = 0;
  std::uint64_t ds = 0;
  std::uint64_t dd = 0;

  std::uint64_t total() const { return ss + sd + ds + dd; }
};

// a[q][p]: samples of class q placed in cluster p. Labels of either side may be
// arbitrary integers; they are densified in order of first appearance.
struct ContingencyTable {
  std::vector<std::vector<std::uint64_t>> a;
  std::uint64_t n = 0;

  std::size_t classes() const { return a.size(); }
  std::size_t clusters() const { return a.empty() ? 0 : a.front().size(); }
};

ContingencyTable contingency(std::span<const int> pred, std::span<const int> truth);
PairCounts pair_counts(std::span<const int> pred, std::span<const int> truth);

// SS / (SS + SD + DS); 1 when both partitions are all singletons.
double jaccard(std::span<const int> pred, std::span<const int> truth);

struct VMeasure {
  double v = 0.0;
  double homogeneity = 0.0;
  double completeness = 0.0;
};

VMeasure v_measure(std::span<const int> pred, std::span<const int> truth, double beta = 1.0);

}  // namespace activeclust
