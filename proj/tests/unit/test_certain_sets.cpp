#include "activeclust/certain_sets.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

using namespace activeclust;
using fixtures::error_code;

namespace {

SimilarityMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd m(n, n);
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return SimilarityMatrix::symmetrized(m);
}

// Exhaustive representative ordering: every member scored, best per set, sorted.
std::vector<Representative> brute_representatives(int x, const CertainSets& z, const SimilarityMatrix& w) {
  std::vector<Representative> out;
  for (int s = 0; s < z.set_count(); ++s) {
    Representative best{s, -1, -std::numeric_limits<double>::infinity()};
    for (int l : z.set(s)) {
      if (w(x, l) > best.similarity || (w(x, l) == best.similarity && l < best.sample)) best = {s, l, w(x, l)};
    }
    out.push_back(best);
  }
  for (std::size_t a = 0; a < out.size(); ++a) {
    for (std::size_t b = a + 1; b < out.size(); ++b) {
      const bool swap = out[b].similarity > out[a].similarity ||
                        (out[b].similarity == out[a].similarity && out[b].set < out[a].set);
      if (swap) std::swap(out[a], out[b]);
    }
  }
  return out;
}

void check_disjoint(const CertainSets& z) {
  std::set<int> seen;
  int total = 0;
  for (int s = 0; s < z.set_count(); ++s) {
    for (int x : z.set(s)) {
      CHECK(seen.insert(x).second);
      CHECK(z.membership(x) == s);
      ++total;
    }
  }
  CHECK(total == z.certain_count());
  for (int x = 0; x < z.sample_count(); ++x) CHECK(z.is_certain(x) == (seen.count(x) == 1));
}

}  // namespace

TEST_CASE("first sample starts the first set") {
  CertainSets z(10);
  z.init_first_sample(4);
  CHECK(z.set_count() == 1);
  CHECK(z.set(0) == std::vector<int>{4});
  CHECK(z.membership(4) == 0);
  CHECK(z.certain_samples() == std::vector<int>{4});
  CHECK(z.uncertain_samples().size() == 9);
  CHECK(error_code([&] { z.init_first_sample(2); }) == ErrorCode::AlreadyInitialized);
}

TEST_CASE("join and create reject certain samples") {
  CertainSets z(5);
  z.init_first_sample(0);
  z.join(1, 0);
  CHECK(z.create_set(2) == 1);
  CHECK(error_code([&] { z.join(1, 1); }) == ErrorCode::AlreadyCertain);
  CHECK(error_code([&] { z.create_set(2); }) == ErrorCode::AlreadyCertain);
  check_disjoint(z);
}

TEST_CASE("rebuild from stored sets") {
  const auto z = CertainSets::from_sets(6, {{0, 3}, {5}});
  CHECK(z.set_count() == 2);
  CHECK(z.membership(3) == 0);
  CHECK(z.membership(5) == 1);
  CHECK_FALSE(z.is_certain(1));
  CHECK(error_code([&] { CertainSets::from_sets(6, {{0, 3}, {3}}); }).has_value());
}

TEST_CASE("representatives are ordered by similarity") {
  SUBCASE("one per singleton set") {
    const auto w = from_rows({{0, 0.9, 0.2}, {0.9, 0, 0.1}, {0.2, 0.1, 0}});
    CertainSets z(3);
    z.init_first_sample(1);
    z.create_set(2);
    const auto reps = representatives(0, z, w);
    REQUIRE(reps.size() == 2);
    CHECK(reps[0] == Representative{0, 1, 0.9});
    CHECK(reps[1] == Representative{1, 2, 0.2});
  }
  SUBCASE("most similar member represents its set") {
    const auto w = from_rows({{0, 0.3, 0.7}, {0.3, 0, 0.5}, {0.7, 0.5, 0}});
    CertainSets z(3);
    z.init_first_sample(1);
    z.join(2, 0);
    const auto reps = representatives(0, z, w);
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].sample == 2);
  }
  SUBCASE("certain candidate") {
    const auto w = from_rows({{0, 1}, {1, 0}});
    CertainSets z(2);
    z.init_first_sample(0);
    CHECK(error_code([&] { representatives(0, z, w); }) == ErrorCode::AlreadyCertain);
  }
  SUBCASE("ties go to the lower set index") {
    const auto w = from_rows({{0, 0.5, 0.5}, {0.5, 0, 0}, {0.5, 0, 0}});
    CertainSets z(3);
    z.init_first_sample(2);
    z.create_set(1);
    const auto reps = representatives(0, z, w);
    CHECK(reps[0].set == 0);
    CHECK(reps[1].set == 1);
  }
}

TEST_CASE("representatives agree with exhaustive enumeration") {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(uniform_index(rng, 20));
    auto w = fixtures::random_similarity(n, rng);
    // Coarse values force ties.
    Eigen::MatrixXd m = (w.matrix() * 4.0).array().round() / 4.0;
    w = SimilarityMatrix::symmetrized(m);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    CertainSets z(n);
    z.init_first_sample(order[0]);
    const int certain = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - 1)));
    for (int t = 1; t < certain; ++t) {
      const int x = order[static_cast<std::size_t>(t)];
      const auto s = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(z.set_count() + 1)));
      if (s == z.set_count()) {
        z.create_set(x);
      } else {
        z.join(x, s);
      }
    }
    const int x = order[static_cast<std::size_t>(certain)];
    CHECK(representatives(x, z, w) == brute_representatives(x, z, w));
  }
}

TEST_CASE("resolution protocol") {
  // Sample 0 is the candidate; sets {1}, {2}, {3} with descending similarity.
  const auto w = from_rows({{0, 0.9, 0.6, 0.3}, {0.9, 0, 0, 0}, {0.6, 0, 0, 0}, {0.3, 0, 0, 0}});

  SUBCASE("one set, must-link joins it with one query") {
    CertainSets z(4);
    z.init_first_sample(1);
    auto oracle = Oracle::ground_truth({0, 0, 1, 2});
    const auto r = resolve_sample(0, z, w, oracle);
    CHECK(r.record.queries_used() == 1);
    CHECK(r.record.outcome == QueryRecord::Outcome::JoinedSet);
    CHECK(z.membership(0) == 0);
    CHECK(r.constraints.size() == 1);
    CHECK(r.constraints.find(0, 1) == LinkKind::MustLink);
  }

  auto three_sets = [] {
    CertainSets z(4);
    z.init_first_sample(1);
    z.create_set(2);
    z.create_set(3);
    return z;
  };

  SUBCASE("cannot then must joins the second-ranked set") {
    auto z = three_sets();
    auto oracle = Oracle::ground_truth({7, 8, 7, 9});
    const auto r = resolve_sample(0, z, w, oracle);
    CHECK(r.record.queries_used() == 2);
    CHECK(r.record.asked[0] == std::pair{1, LinkKind::CannotLink});
    CHECK(r.record.asked[1] == std::pair{2, LinkKind::MustLink});
    CHECK(r.record.set == 1);
    CHECK(z.membership(0) == 1);
    CHECK(r.constraints.size() == 3);
  }

  SUBCASE("all cannot-links open a new set") {
    auto z = three_sets();
    auto oracle = Oracle::ground_truth({0, 1, 2, 3});
    const auto r = resolve_sample(0, z, w, oracle);
    CHECK(r.record.queries_used() == 3);
    CHECK(r.record.outcome == QueryRecord::Outcome::NewSet);
    CHECK(z.set_count() == 4);
    CHECK(z.membership(0) == 3);
  }

  SUBCASE("no answer leaves the sets untouched") {
    auto z = three_sets();
    auto oracle = Oracle::interactive();
    CHECK(error_code([&] { resolve_sample(0, z, w, oracle); }) == ErrorCode::OracleUnavailable);
    CHECK_FALSE(z.is_certain(0));
    CHECK(z.set_count() == 3);
  }

  SUBCASE("stepwise resolution parks between answers") {
    auto z = three_sets();
    Resolution res(0, z, w);
    CHECK(res.next_pair() == std::pair{0, 1});
    res.record(LinkKind::CannotLink);
    CHECK(res.next_pair() == std::pair{0, 2});
    CHECK_FALSE(res.done());
    res.record(LinkKind::MustLink);
    CHECK(res.done());
    CHECK_FALSE(res.next_pair().has_value());
    const auto rec = res.finish(z);
    CHECK(rec.set == 1);
  }

  SUBCASE("no certain sets") {
    CertainSets z(4);
    CHECK(error_code([&] { Resolution(0, z, w); }) == ErrorCode::NoCertainSets);
  }
}

TEST_CASE("constraint expansion") {
  SUBCASE("must to set-mates, cannot to everyone else") {
    const auto z = CertainSets::from_sets(6, {{0, 3}, {5}});
    const auto q = expand_constraints(3, z);
    CHECK(q.size() == 2);
    CHECK(q.find(3, 0) == LinkKind::MustLink);
    CHECK(q.find(3, 5) == LinkKind::CannotLink);
  }
  SUBCASE("lone sample gives nothing") {
    CertainSets z(3);
    z.init_first_sample(1);
    CHECK(expand_constraints(1, z).empty());
  }
  SUBCASE("uncertain sample") {
    CertainSets z(3);
    z.init_first_sample(1);
    CHECK(error_code([&] { expand_constraints(0, z); }) == ErrorCode::NotCertain);
  }
}

TEST_CASE("random resolutions keep the certain-set invariants") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 7 + static_cast<int>(uniform_index(rng, 30));
    const int classes = 1 + static_cast<int>(uniform_index(rng, 5));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(classes)));
    const auto w = fixtures::random_similarity(n, rng);
    auto oracle = Oracle::ground_truth(labels);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    CertainSets z(n);
    z.init_first_sample(order[0]);
    std::size_t answered = 0;
    for (int t = 1; t < n; ++t) {
      const int x = order[static_cast<std::size_t>(t)];
      const int m = z.set_count();
      const auto r = resolve_sample(x, z, w, oracle);
      answered += r.record.asked.size();
      CHECK(r.record.queries_used() <= m);
      CHECK(static_cast<int>(r.constraints.size()) == z.certain_count() - 1);
      for (int member : z.set(*z.membership(x))) {
        CHECK(labels[static_cast<std::size_t>(member)] == labels[static_cast<std::size_t>(x)]);
      }
      check_disjoint(z);
    }
    CHECK(oracle.log().size() == answered);
    CHECK(z.set_count() == static_cast<int>(std::set<int>(labels.begin(), labels.end()).size()));
  }
}

TEST_CASE("a query record replays from the answer log") {
  Rng rng(5);
  const int n = 12;
  const auto w = fixtures::random_similarity(n, rng);
  std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  auto oracle = Oracle::ground_truth(labels);
  CertainSets live(n);
  live.init_first_sample(0);
  std::vector<QueryRecord> records;
  for (int x = 1; x < n; ++x) records.push_back(resolve_sample(x, live, w, oracle).record);

  auto replayer = Oracle::replaying(oracle.log());
  CertainSets again(n);
  again.init_first_sample(0);
  for (int x = 1; x < n; ++x) {
    CHECK(resolve_sample(x, again, w, replayer).record == records[static_cast<std::size_t>(x - 1)]);
  }
  CHECK(again.sets() == live.sets());
}
