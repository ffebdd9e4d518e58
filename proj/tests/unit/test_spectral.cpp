#include "activeclust/spectral.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <set>

using namespace activeclust;
using fixtures::error_code;

namespace {

// Fraction-free check that two labelings induce the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

void check_eigen_block(const Eigen::MatrixXd& l, const SpectralEmbedding& e) {
  const auto k = e.count();
  CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-6);
  for (int i = 0; i < k; ++i) {
    const double residual = (l * e.vectors.col(i) - e.values(i) * e.vectors.col(i)).norm();
    CHECK(residual <= 1e-6 * std::max(1.0, std::abs(e.values(i))));
    if (i > 0) CHECK(e.values(i) >= e.values(i - 1));
    Eigen::Index at = 0;
    e.vectors.col(i).cwiseAbs().maxCoeff(&at);
    CHECK(e.vectors(at, i) > 0.0);
  }
}

// Random weighted graph Laplacian with a few cannot-link style negative edges.
Eigen::MatrixXd random_laplacian(int n, Rng& rng) {
  auto w = fixtures::random_similarity(n, rng);
  for (int t = 0; t < n / 4; ++t) {
    const int i = static_cast<int>(uniform_index(rng, n));
    const int j = static_cast<int>(uniform_index(rng, n));
    if (i != j) w.set_pair(i, j, -1.0);
  }
  return build_laplacian(w).l;
}

}  // namespace

TEST_CASE("laplacian of a single edge") {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  const auto lap = build_laplacian(SimilarityMatrix::symmetrized(m));
  CHECK(lap.degrees(0) == 1.0);
  CHECK(lap.degrees(1) == 1.0);
  Eigen::MatrixXd expect(2, 2);
  expect << 1, -1, -1, 1;
  CHECK(lap.l == expect);
  CHECK(lap.degree_matrix() == Eigen::MatrixXd::Identity(2, 2));
}

TEST_CASE("laplacian of the zero matrix is zero") {
  const auto lap = build_laplacian(SimilarityMatrix(4));
  CHECK(lap.l.isZero(0.0));
}

TEST_CASE("laplacian rows sum to zero and the matrix is symmetric") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 20));
    auto w = fixtures::random_similarity(n, rng);
    w.set_pair(0, n - 1, -1.0);
    const auto lap = build_laplacian(w);
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      double direct = 0.0;
      for (int j = 0; j < n; ++j) {
        row += lap.l(i, j);
        direct += w(i, j);
        CHECK(lap.l(i, j) == lap.l(j, i));
      }
      CHECK(std::abs(row) <= 1e-10);
      CHECK(lap.degrees(i) == doctest::Approx(direct).epsilon(1e-14));
    }
  }
}

TEST_CASE("two disconnected components give a two-dimensional null space") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      m(i, j) = 0.5 + 0.1 * (i + j);
      m(i + 3, j + 3) = 0.9 - 0.1 * (i + j);
    }
  }
  const auto l = build_laplacian(SimilarityMatrix::symmetrized(m)).l;
  const auto e = smallest_eigenpairs(l, 2);
  CHECK(std::abs(e.values(0)) <= 1e-10);
  CHECK(std::abs(e.values(1)) <= 1e-10);
  // Projecting the component indicators onto the span loses nothing.
  Eigen::VectorXd a = Eigen::VectorXd::Zero(6), b = Eigen::VectorXd::Zero(6);
  a.head(3).setOnes();
  b.tail(3).setOnes();
  for (const auto& ind : {a, b}) {
    const Eigen::VectorXd proj = e.vectors * (e.vectors.transpose() * ind);
    CHECK((proj - ind).norm() <= 1e-8);
  }
}

TEST_CASE("identity matrix has all eigenvalues one") {
  const auto e = smallest_eigenpairs(Eigen::MatrixXd::Identity(5, 5), 3);
  for (int i = 0; i < 3; ++i) CHECK(e.values(i) == doctest::Approx(1.0).epsilon(1e-14));
  check_eigen_block(Eigen::MatrixXd::Identity(5, 5), e);
}

TEST_CASE("smallest eigenpairs agree with a full decomposition") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a(10, 10);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) a(i, j) = 2.0 * uniform01(rng) - 1.0;
    }
    const Eigen::MatrixXd s = (a + a.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(s);
    const int k = 1 + trial % 5;
    const auto e = smallest_eigenpairs(s, k);
    for (int i = 0; i < k; ++i) {
      CHECK(std::abs(e.values(i) - full.eigenvalues()(i)) <= 1e-8);
      // Unit vectors for a simple eigenvalue agree up to sign.
      const double overlap = std::abs(e.vectors.col(i).dot(full.eigenvectors().col(i)));
      CHECK(overlap == doctest::Approx(1.0).epsilon(1e-8));
    }
    check_eigen_block(s, e);
  }
}

TEST_CASE("iterative path matches the dense path") {
  Rng rng(101);
  for (int n : {40, 90, 150}) {
    const auto l = random_laplacian(n, rng);
    EigenOptions iterative;
    iterative.dense_limit = 10;
    for (int k : {1, 3, 6}) {
      const auto dense = smallest_eigenpairs(l, k);
      const auto iter = smallest_eigenpairs(l, k, iterative);
      check_eigen_block(l, iter);
      for (int i = 0; i < k; ++i) CHECK(std::abs(dense.values(i) - iter.values(i)) <= 1e-7 * std::max(1.0, std::abs(dense.values(i))));
      // Compare spans, which stay well defined for clustered eigenvalues.
      const Eigen::MatrixXd cross = dense.vectors.transpose() * iter.vectors;
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
      CHECK(svd.singularValues().minCoeff() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("eigen block invariants on random laplacians") {
  Rng rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 40));
    const auto l = random_laplacian(n, rng);
    const int k = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(std::min(n, 6))));
    check_eigen_block(l, smallest_eigenpairs(l, k));
  }
}

TEST_CASE("eigen argument checks") {
  const Eigen::MatrixXd l = Eigen::MatrixXd::Identity(3, 3);
  CHECK(error_code([&] { smallest_eigenpairs(l, 0); }) == ErrorCode::InvalidParameter);
  CHECK(error_code([&] { smallest_eigenpairs(l, 4); }) == ErrorCode::InvalidParameter);
  Eigen::MatrixXd bad = l;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_code([&] { smallest_eigenpairs(bad, 1); }) == ErrorCode::NumericalError);
}

TEST_CASE("k-means on separable clouds recovers the split") {
  Rng rng(3);
  Eigen::MatrixXd pts(40, 2);
  std::vector<int> truth(40);
  for (int i = 0; i < 40; ++i) {
    truth[static_cast<std::size_t>(i)] = i < 20 ? 0 : 1;
    pts(i, 0) = (i < 20 ? -5.0 : 5.0) + 0.3 * standard_normal(rng);
    pts(i, 1) = 0.3 * standard_normal(rng);
  }
  const auto a = kmeans(pts, 2, 42);
  CHECK(same_partition(a.labels, truth));
  CHECK(a.n_c == 2);
  CHECK_FALSE(a.empty[0]);
  CHECK_FALSE(a.empty[1]);
  CHECK(a.inertia == doctest::Approx(within_cluster_sum_of_squares(pts, a.labels)).epsilon(1e-12));
}

TEST_CASE("k-means on identical rows flags an empty cluster") {
  const Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(6, 2);
  const auto a = kmeans(pts, 2, 1);
  CHECK(std::set<int>(a.labels.begin(), a.labels.end()).size() == 1);
  CHECK(std::count(a.empty.begin(), a.empty.end(), true) == 1);
  CHECK(a.inertia == 0.0);
}

TEST_CASE("k-means is deterministic for a seed and checks its arguments") {
  Rng rng(8);
  Eigen::MatrixXd pts(30, 3);
  for (int i = 0; i < 30; ++i) {
    for (int c = 0; c < 3; ++c) pts(i, c) = standard_normal(rng);
  }
  const auto a = kmeans(pts, 4, 99);
  const auto b = kmeans(pts, 4, 99);
  CHECK(a.labels == b.labels);
  CHECK(a.centers == b.centers);
  CHECK(error_code([&] { kmeans(pts.topRows(3), 4, 1); }) == ErrorCode::InvalidParameter);
  CHECK(error_code([&] { kmeans(pts, 0, 1); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("within-cluster sum of squares ignores label names") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd pts(20, 2);
    for (int i = 0; i < 20; ++i) pts.row(i) << standard_normal(rng), standard_normal(rng);
    const auto a = kmeans(pts, 3, static_cast<std::uint64_t>(trial));
    std::vector<int> perm = {2, 0, 1};
    std::vector<int> relabeled;
    for (int l : a.labels) relabeled.push_back(perm[static_cast<std::size_t>(l)]);
    CHECK(within_cluster_sum_of_squares(pts, relabeled) ==
          doctest::Approx(within_cluster_sum_of_squares(pts, a.labels)).epsilon(1e-12));
  }
}

TEST_CASE("constraint edits") {
  Rng rng(2);
  const auto w = fixtures::random_similarity(3, rng);

  SUBCASE("empty set is the identity") { CHECK(apply_constraints(w, ConstraintSet{}) == w); }
  SUBCASE("must-link writes 1") {
    ConstraintSet q;
    q.add(0, 1, LinkKind::MustLink);
    const auto e = apply_constraints(w, q);
    CHECK(e(0, 1) == 1.0);
    CHECK(e(1, 0) == 1.0);
    CHECK(e(0, 2) == w(0, 2));
    CHECK(e(1, 2) == w(1, 2));
  }
  SUBCASE("cannot-link writes -1") {
    ConstraintSet q;
    q.add(0, 2, LinkKind::CannotLink);
    const auto e = apply_constraints(w, q);
    CHECK(e(0, 2) == -1.0);
    CHECK(e(2, 0) == -1.0);
  }
  SUBCASE("out of range") {
    ConstraintSet q;
    q.add(0, 7, LinkKind::CannotLink);
    CHECK(error_code([&] { apply_constraints(w, q); }) == ErrorCode::InvalidConstraint);
  }
}

TEST_CASE("constraint edits are idempotent and touch exactly 2|Q| cells") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(uniform_index(rng, 12));
    const auto w = fixtures::random_similarity(n, rng);
    ConstraintSet q;
    for (int t = 0; t < n; ++t) {
      const int i = static_cast<int>(uniform_index(rng, n));
      const int j = static_cast<int>(uniform_index(rng, n));
      if (i != j) q.add(i, j, uniform01(rng) < 0.5 ? LinkKind::MustLink : LinkKind::CannotLink);
    }
    const auto once = apply_constraints(w, q);
    CHECK(apply_constraints(once, q) == once);
    const auto changed = (once.matrix().array() != w.matrix().array()).count();
    CHECK(changed == static_cast<Eigen::Index>(2 * q.size()));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(once(i, j) == once(j, i));
        CHECK(once(i, j) >= -1.0);
        CHECK(once(i, j) <= 1.0);
      }
    }
  }
}

TEST_CASE("a must-link never lowers a similarity") {
  Rng rng(23);
  const auto w = fixtures::random_similarity(6, rng);
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      ConstraintSet q;
      q.add(i, j, LinkKind::MustLink);
      const auto e = apply_constraints(w, q);
      if (w(i, j) < 1.0) CHECK(e(i, j) > w(i, j));
    }
  }
}

TEST_CASE("spectral learning on two separable blobs without constraints") {
  const auto ds = fixtures::blobs(2, 15, 6.0, 0.5, 4);
  const auto w = gaussian_similarity(ds, 1.0);
  const auto r = spectral_learning_cluster(w, ConstraintSet{}, 2, 1);
  CHECK(same_partition(r.assignment.labels, *ds.labels));
  CHECK(r.edited == w);
  CHECK(r.embedding.count() == 2);
}

TEST_CASE("spectral learning with every pair constrained recovers the truth") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> truth = {0, 0, 0, 0, 1, 1, 1, 1};
    std::shuffle(truth.begin(), truth.end(), rng);
    const auto w = fixtures::random_similarity(8, rng);
    ConstraintSet q;
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        q.add(i, j, truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)] ? LinkKind::MustLink
                                                                                               : LinkKind::CannotLink);
      }
    }
    const auto r = spectral_learning_cluster(w, q, 2, static_cast<std::uint64_t>(trial));
    CHECK(same_partition(r.assignment.labels, truth));
  }
}
