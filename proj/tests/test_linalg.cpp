#include "mcdr/fantope.hpp"
#include "mcdr/linalg.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace mcdr;

TEST(SymEig, DescendingAndReconstructs) {
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_symmetric(7, rng);
  const SymEigen e = sym_eig(a);
  const auto ref = oracle::jacobi_eigenvalues(a);
  for (int i = 0; i < 7; ++i) {
    EXPECT_NEAR(e.values[i], ref[static_cast<std::size_t>(i)], 1e-10);
    if (i) EXPECT_GE(e.values[i - 1], e.values[i]);
  }
  EXPECT_LT(max_abs(compose(e.vectors, e.values) - a), 1e-10);
  EXPECT_LT(max_abs(e.vectors.transpose() * e.vectors - Matrix::Identity(7, 7)), 1e-12);
}

TEST(SymEig, TiesAreCanonical) {
  const SymEigen e = sym_eig(Matrix::Identity(3, 3));
  EXPECT_LT(max_abs(e.vectors - Matrix::Identity(3, 3)), 1e-12);

  // same cluster under a rotation of the input basis
  const double c = std::cos(0.3), s = std::sin(0.3);
  Matrix q = Matrix::Identity(3, 3);
  q.topLeftCorner(2, 2) << c, -s, s, c;
  const Matrix a = q * Vector(Vector::Constant(3, 2.0)).asDiagonal() * q.transpose();
  EXPECT_LT(max_abs(sym_eig(a).vectors - Matrix::Identity(3, 3)), 1e-10);
}

TEST(SymEig, SignConvention) {
  Matrix a(2, 2);
  a << 2, -1, -1, 2;
  const SymEigen e = sym_eig(a);
  for (int j = 0; j < 2; ++j) EXPECT_GT(e.vectors(0, j), 0.0);
}

TEST(Svec, InnerProductPreserved) {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_symmetric(5, rng), b = oracle::random_symmetric(5, rng);
  EXPECT_NEAR(svec(a).dot(svec(b)), inner(a, b), 1e-12);
  EXPECT_EQ(svec(a).size(), 15);
  EXPECT_LT(max_abs(smat(svec(a), 5) - a), 1e-14);
}

TEST(Nullspace, OrthonormalAndAnnihilated) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Matrix rows(3, 6);
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = g(rng);
  const Matrix k = nullspace(rows);
  EXPECT_EQ(k.cols(), 3);
  EXPECT_LT(max_abs(rows * k), 1e-12);
  EXPECT_LT(max_abs(k.transpose() * k - Matrix::Identity(3, 3)), 1e-12);
  EXPECT_EQ(nullspace(Matrix::Identity(4, 4)).cols(), 0);
}

TEST(TopSingularSum, MatchesAbsEigenvalues) {
  std::mt19937_64 rng(9);
  const Matrix a = oracle::random_symmetric(6, rng);
  for (int c = 1; c <= 6; ++c) EXPECT_NEAR(top_singular_sum(a, c), oracle::top_abs_sum(a, c), 1e-10);
}

TEST(PrincipalAngle, SameSpanIsZero) {
  std::mt19937_64 rng(1);
  const Matrix v = oracle::random_frame(5, 2, rng);
  Matrix r(2, 2);
  r << 0, 1, -1, 0;
  EXPECT_LT(max_principal_angle(v, v * r), 1e-7);
}

TEST(Fantope, ClampsAndCounts) {
  Matrix x = Matrix::Zero(3, 3);
  x.diagonal() << 1.0 + 5e-9, 0.5, -5e-9;
  const FantopePoint p(x, 2.0);
  EXPECT_EQ(p.rank(), 2);
  EXPECT_EQ(p.ones(), 1);
  EXPECT_EQ(p.fractional(), 1);
  EXPECT_LE(p.eigenvalues().maxCoeff(), 1.0);
  EXPECT_GE(p.eigenvalues().minCoeff(), 0.0);
}

TEST(Fantope, RejectsOutside) {
  EXPECT_THROW(FantopePoint(Matrix::Identity(3, 3), 2.0), InvariantError);
  EXPECT_THROW(FantopePoint(2.0 * Matrix::Identity(2, 2), 4.0), InvariantError);
  Matrix a(2, 2);
  a << 0.5, 0.1, 0.0, 0.5;
  EXPECT_THROW(FantopePoint(a, 1.0), InvariantError);
}

TEST(Fantope, ProjectionOfFrame) {
  std::mt19937_64 rng(4);
  const Matrix v = oracle::random_frame(6, 3, rng);
  const FantopePoint p = FantopePoint::projection(v);
  EXPECT_EQ(p.rank(), 3);
  EXPECT_EQ(p.ones(), 3);
  EXPECT_NEAR(p.trace(), 3.0, 1e-12);
}
