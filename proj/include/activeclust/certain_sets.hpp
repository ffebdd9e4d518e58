#pragma once

#include "activeclust/constraints.hpp"
#include "activeclust/dataset.hpp"
#include "activeclust/oracle.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace activeclust {

// Disjoint groups of resolved samples. Members of one set are pairwise
// must-linked, members of different sets are cannot-linked.
class CertainSets {
 public:
  explicit CertainSets(int sample_count = 0);

  void init_first_sample(int x);

  int sample_count() const { return static_cast<int>(membership_.size()); }
  int set_count() const { return static_cast<int>(sets_.size()); }
  const std::vector<std::vector<int>>& sets() const { return sets_; }
  const std::vector<int>& set(int index) const { return sets_.at(static_cast<std::size_t>(index)); }
  std::optional<int> membership(int x) const;
  bool is_certain(int x) const { return membership(x).has_value(); }
  int certain_count() const { return certain_; }
  // All certain samples, ascending.
  std::vector<int> certain_samples() const;
  std::vector<int> uncertain_samples() const;

  void join(int x, int set_index);
  int create_set(int x);

  // Rebuilds from stored groups, validating disjointness.
  static CertainSets from_sets(int sample_count, std::vector<std::vector<int>> sets);

 private:
  void check_index(int x) const;

  std::vector<std::vector<int>> sets_;
  std::vector<int> membership_;  // -1 when uncertain
  int certain_ = 0;
};

struct Representative {
  int set = 0;
  int sample = 0;
  double similarity = 0.0;

  friend bool operator==(const Representative&, const Representative&) = default;
};

// One representative per certain set (the member most similar to x), sorted by
// similarity descending, ties by set index then sample index.
std::vector<Representative> representatives(int x, const CertainSets& z, const SimilarityMatrix& w);

struct QueryRecord {
  enum class Outcome { JoinedSet, NewSet };

  int sample = 0;
  std::vector<std::pair<int, LinkKind>> asked;  // (representative, answer) in query order
  Outcome outcome = Outcome::NewSet;
  int set = 0;  // index of the set x ended up in

  int queries_used() const { return static_cast<int>(asked.size()); }
  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

// Query sequence for one selected sample, driven one answer at a time so that
// a caller can park between questions.
class Resolution {
 public:
  Resolution() = default;
  Resolution(int x, const CertainSets& z, const SimilarityMatrix& w);
  Resolution(int x, std::vector<Representative> reps, std::vector<std::pair<int, LinkKind>> asked);

  int sample() const { return sample_; }
  const std::vector<Representative>& order() const { return reps_; }
  const std::vector<std::pair<int, LinkKind>>& asked() const { return asked_; }

  bool done() const;
  // (sample, representative) for the next question; nullopt once done.
  std::optional<std::pair<int, int>> next_pair() const;
  void record(LinkKind answer);
  // Applies the outcome to z. Must be done().
  QueryRecord finish(CertainSets& z) const;

 private:
  int sample_ = -1;
  std::vector<Representative> reps_;
  std::vector<std::pair<int, LinkKind>> asked_;
};

struct ResolveResult {
  QueryRecord record;
  ConstraintSet constraints;
};

// Runs the full query sequence against the oracle. z is untouched on failure
// (OracleUnavailable).
ResolveResult resolve_sample(int x, CertainSets& z, const SimilarityMatrix& w, Oracle& oracle);

// Must-links from x to the rest of its set, cannot-links to every other certain sample.
ConstraintSet expand_constraints(int x, const CertainSets& z);

}  // namespace activeclust
