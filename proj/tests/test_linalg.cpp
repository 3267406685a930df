#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "expander/errors.hpp"
#include "expander/linalg.hpp"
#include "expander/rng.hpp"
#include "oracles.hpp"

using namespace expander;

namespace {

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

}  // namespace

TEST(DenseMatrix, RejectsWrongLengthAndNonFinite) {
  EXPECT_THROW(DenseMatrix(2, 2, {1, 2, 3}), ShapeError);
  EXPECT_THROW(DenseMatrix(1, 2, {1, NAN}), DomainError);
  EXPECT_THROW(DenseMatrix(1, 1, {INFINITY}), DomainError);
  EXPECT_THROW(DenseMatrix::from_rows({{1, 2}, {3}}), ShapeError);
}

TEST(DenseMatrix, TransposeAndSymmetry) {
  DenseMatrix m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  DenseMatrix t = m.transposed();
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t(2, 1), 6.0);
  EXPECT_EQ(t.transposed(), m);
  EXPECT_TRUE(DenseMatrix::identity(3).is_symmetric(0.0));
  EXPECT_FALSE(m.is_symmetric(1.0));
  EXPECT_EQ(m.max_abs_row_sum(), 15.0);
}

TEST(OracleSelfCheck, JacobiMatchesCubicOnHandCases) {
  const std::vector<oracle::Mat> cases = {
      {{2, 0, 0}, {0, 3, 0}, {0, 0, 1}},
      {{0, 1, 0}, {1, 0, 1}, {0, 1, 0}},
      {{4, 1, 2}, {1, 3, 0}, {2, 0, 5}},
      {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}},
  };
  for (const auto& c : cases) expect_close(oracle::jacobi_eigenvalues(c), oracle::cubic_eigenvalues_3x3(c), 1e-12);
  expect_close(oracle::jacobi_eigenvalues(cases[1]), {-std::sqrt(2.0), 0.0, std::sqrt(2.0)}, 1e-14);
  expect_close(oracle::jacobi_eigenvalues(cases[3]), {0.0, 0.0, 3.0}, 1e-14);
}

TEST(SymEigenvalues, TwoCycle) {
  auto s = sym_eigenvalues(DenseMatrix::from_rows({{0, 1}, {1, 0}}));
  expect_close(s.eigenvalues, {1.0, -1.0}, 1e-15);
}

TEST(SymEigenvalues, PathGraphP3) {
  auto s = sym_eigenvalues(DenseMatrix::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}));
  expect_close(s.eigenvalues, {std::sqrt(2.0), 0.0, -std::sqrt(2.0)}, 1e-14);
}

TEST(SymEigenvalues, RandomMatchesJacobiOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix m = oracle::random_symmetric(8, rng);
    auto got = sym_eigenvalues_ascending(m);
    expect_close(got, oracle::jacobi_eigenvalues(oracle::to_mat(m)), 1e-8);
  }
}

TEST(SymEigenvalues, SortedDescendingAndSized) {
  Rng rng(3);
  DenseMatrix m = oracle::random_symmetric(12, rng);
  auto s = sym_eigenvalues(m);
  ASSERT_EQ(s.size(), 12u);
  EXPECT_TRUE(std::is_sorted(s.eigenvalues.rbegin(), s.eigenvalues.rend()));
}

TEST(SymEigenvalues, Errors) {
  EXPECT_THROW(sym_eigenvalues(DenseMatrix(2, 3)), ShapeError);
  EXPECT_THROW(sym_eigenvalues(DenseMatrix::from_rows({{0, 1}, {1 + 1e-9, 0}})), ShapeError);
  // Asymmetry inside the tolerance is accepted.
  EXPECT_NO_THROW(sym_eigenvalues(DenseMatrix::from_rows({{0, 1}, {1 + 1e-13, 0}})));
}

TEST(SymEigenvalues, BitDeterministic) {
  Rng rng(11);
  DenseMatrix m = oracle::random_symmetric(20, rng);
  auto a = sym_eigenvalues(m).eigenvalues;
  auto b = sym_eigenvalues(m).eigenvalues;
  EXPECT_EQ(a, b);
}

TEST(SymEigenvalues, WithinGershgorinBound) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    DenseMatrix m = oracle::random_symmetric(10, rng);
    auto s = sym_eigenvalues(m);
    EXPECT_LE(std::max(std::abs(s[0]), std::abs(s[s.size() - 1])), m.max_abs_row_sum() + 1e-12);
  }
}

TEST(TopTwoSingularValues, Identity) {
  auto p = top_two_singular_values(DenseMatrix::identity(2));
  EXPECT_NEAR(p.sigma1, 1.0, 1e-15);
  EXPECT_NEAR(p.sigma2, 1.0, 1e-15);
  EXPECT_FALSE(p.degenerate);
}

TEST(TopTwoSingularValues, RankOneAllOnes) {
  auto p = top_two_singular_values(DenseMatrix::from_rows({{1, 1}, {1, 1}}));
  EXPECT_NEAR(p.sigma1, 2.0, 1e-14);
  EXPECT_NEAR(p.sigma2, 0.0, 1e-14);
}

TEST(TopTwoSingularValues, ZeroMatrixIsDegenerate) {
  auto p = top_two_singular_values(DenseMatrix(3, 4));
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.sigma1, 0.0);
  EXPECT_EQ(p.sigma2, 0.0);
}

TEST(TopTwoSingularValues, SingleColumnPadsSecondWithZero) {
  auto p = top_two_singular_values(DenseMatrix::from_rows({{3}, {4}}));
  EXPECT_NEAR(p.sigma1, 5.0, 1e-14);
  EXPECT_EQ(p.sigma2, 0.0);
}

TEST(TopTwoSingularValues, SparseRandom50MatchesDenseEigensolve) {
  Rng rng(21);
  DenseMatrix b = oracle::random_matrix(50, 50, rng, 0.1, true);
  auto p = top_two_singular_values(b);
  auto ev = oracle::jacobi_eigenvalues(oracle::to_mat(bipartite_adjacency(b)));
  EXPECT_NEAR(p.sigma1, ev[ev.size() - 1], 1e-7);
  EXPECT_NEAR(p.sigma2, ev[ev.size() - 2], 1e-7);
}

TEST(TopTwoSingularValues, IterativePathMatchesDenseOn80x100) {
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    DenseMatrix b = oracle::random_matrix(80, 100, rng, 0.2, true);
    auto p = top_two_singular_values(b);
    EXPECT_NE(p.path, SvdPath::dense);
    auto ref = oracle::singular_values(b);
    EXPECT_NEAR(p.sigma1, ref[0], 1e-8 * ref[0]);
    EXPECT_NEAR(p.sigma2, ref[1], 1e-8 * ref[1]);
  }
}

TEST(TopTwoSingularValues, IterativeHandlesTiesAndRankOne) {
  // sigma1 == sigma2 exactly.
  auto tie = top_two_singular_values_iterative(DenseMatrix::identity(5));
  EXPECT_NEAR(tie.sigma1, 1.0, 1e-10);
  EXPECT_NEAR(tie.sigma2, 1.0, 1e-10);
  // Rank one: deflated operator is numerically zero.
  DenseMatrix ones(6, 4);
  for (double& x : ones.data()) x = 1.0;
  auto r1 = top_two_singular_values_iterative(ones);
  EXPECT_NEAR(r1.sigma1, std::sqrt(24.0), 1e-12);
  EXPECT_NEAR(r1.sigma2, 0.0, 1e-7);
}

TEST(TopTwoSingularValues, IterationCapFallsBackToDense) {
  Rng rng(9);
  DenseMatrix b = oracle::random_matrix(10, 10, rng);
  PowerIterationOptions opts;
  opts.max_iterations = 2;
  auto p = top_two_singular_values_iterative(b, opts);
  EXPECT_EQ(p.path, SvdPath::dense_fallback);
  auto ref = oracle::singular_values(b);
  EXPECT_NEAR(p.sigma1, ref[0], 1e-10);
  EXPECT_NEAR(p.sigma2, ref[1], 1e-10);
}

TEST(TopTwoSingularValues, NonFiniteRejectedAtConstruction) {
  std::vector<double> v = {1.0, NAN};
  EXPECT_THROW(DenseMatrix(1, 2, v), DomainError);
  EXPECT_THROW(top_two_singular_values(DenseMatrix()), ShapeError);
}

TEST(BipartiteSymmetry, SpectrumIsPlusMinusSingularValues) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng.below(9);
    const std::size_t n = 1 + rng.below(9);
    DenseMatrix b = oracle::random_matrix(m, n, rng);
    auto ev = sym_eigenvalues_ascending(bipartite_adjacency(b));
    auto sv = oracle::singular_values(b);
    std::vector<double> expected;
    for (double s : sv) {
      expected.push_back(s);
      expected.push_back(-s);
    }
    while (expected.size() < m + n) expected.push_back(0.0);
    std::sort(expected.begin(), expected.end());
    expect_close(ev, expected, 1e-8);
  }
}

TEST(TopTwoSingularValues, BitDeterministicOnBothPaths) {
  Rng rng(17);
  DenseMatrix small = oracle::random_matrix(30, 20, rng);
  DenseMatrix large = oracle::random_matrix(70, 90, rng, 0.3, true);
  auto a = top_two_singular_values(small);
  auto b = top_two_singular_values(small);
  EXPECT_EQ(a.sigma1, b.sigma1);
  EXPECT_EQ(a.sigma2, b.sigma2);
  auto c = top_two_singular_values(large);
  auto d = top_two_singular_values(large);
  EXPECT_EQ(c.sigma1, d.sigma1);
  EXPECT_EQ(c.sigma2, d.sigma2);
}
