#include "mcdr/data_model.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mcdr;

namespace {
const std::string kCredit = std::string(MCDR_DATA_DIR) + "/credit_small.csv";

GroupedDataset parse(const std::string& text, const IngestOptions& o = {}) {
  std::istringstream in(text);
  return ingest_csv(in, "g", o);
}
}  // namespace

TEST(Ingest, FourRowsTwoGroups) {
  const auto ds = parse("x,y,g\n1,2,a\n3,4,a\n5,6,b\n7,8,b\n");
  EXPECT_EQ(ds.k(), 2u);
  EXPECT_EQ(ds.n, 2);
  EXPECT_EQ(ds.groups[0].rows.rows(), 2);
  EXPECT_EQ(ds.groups[1].rows.rows(), 2);
  EXPECT_EQ(ds.groups[1].rows(1, 0), 7.0);
}

TEST(Ingest, CenterGivesZeroMeans) {
  IngestOptions o;
  o.center = true;
  const auto ds = ingest_csv(kCredit, "sex", o);
  Vector sum = Vector::Zero(ds.n);
  double rows = 0;
  for (const auto& g : ds.groups) {
    sum += g.rows.colwise().sum().transpose();
    rows += static_cast<double>(g.rows.rows());
  }
  EXPECT_LT((sum / rows).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ingest, CreditGroupSizesMatchHistogram) {
  const auto ds = ingest_csv(kCredit, "sex");
  const auto hist = oracle::label_histogram(kCredit, 2);
  ASSERT_EQ(ds.k(), hist.size());
  for (const auto& g : ds.groups) EXPECT_EQ(g.rows.rows(), hist.at(g.label)) << g.label;
  EXPECT_EQ(ds.n, 4);
}

TEST(Ingest, ScaleGivesUnitVarianceAndReportsConstantColumns) {
  IngestOptions o;
  o.center = o.scale = true;
  const auto ds = parse("x,c,g\n1,5,a\n2,5,a\n4,5,b\n9,5,b\n", o);
  ASSERT_EQ(ds.unscaled_columns.size(), 1u);
  EXPECT_EQ(ds.unscaled_columns[0], "c");
  Matrix all(4, 2);
  all << ds.groups[0].rows, ds.groups[1].rows;
  EXPECT_NEAR(all.col(0).squaredNorm() / 4.0, 1.0, 1e-12);
}

TEST(Ingest, Errors) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("x,y\n1,2\n"), ParseError);
  EXPECT_THROW(parse("x,g\nfoo,a\n"), ParseError);
  EXPECT_THROW(parse("x,g\n"), ParseError);
  IngestOptions o;
  o.drop_missing = true;
  EXPECT_THROW(parse("x,g\nfoo,a\n,b\n", o), ParseError);
  const auto ds = parse("x,g\nfoo,a\n2,b\n1\n", o);
  EXPECT_EQ(ds.dropped_rows, 2u);
  EXPECT_EQ(ds.k(), 1u);
}

TEST(Covariances, OrthonormalRows) {
  GroupedDataset ds;
  ds.n = 2;
  ds.groups.push_back({"a", Matrix::Identity(2, 2), {}});
  EXPECT_LT(max_abs(covariances(ds, false).B[0] - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(covariances(ds, true).B[0] - 0.5 * Matrix::Identity(2, 2)), 1e-15);
}

TEST(Covariances, MatchesNaiveGram) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Matrix a(10, 4);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  GroupedDataset ds;
  ds.n = 4;
  ds.groups.push_back({"a", a, {}});
  const CovarianceSet cs = covariances(ds, false);
  EXPECT_LT(max_abs(cs.B[0] - oracle::gram(a)), 1e-10);
  EXPECT_NEAR(cs.trace[0], a.squaredNorm(), 1e-10 * a.squaredNorm());
  const CovarianceSet cn = covariances(ds, true);
  EXPECT_LT(max_abs(cn.B[0] - oracle::gram(a) / 10.0), 1e-10);
}

TEST(Covariances, PermutationInvariantExactly) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  Matrix a(9, 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  Matrix b = a;
  std::vector<int> perm{4, 0, 8, 2, 6, 1, 7, 3, 5};
  for (int r = 0; r < 9; ++r) b.row(r) = a.row(perm[static_cast<std::size_t>(r)]);
  GroupedDataset d1, d2;
  d1.n = d2.n = 3;
  d1.groups.push_back({"a", a, {}});
  d2.groups.push_back({"a", b, {}});
  EXPECT_TRUE(covariances(d1).B[0] == covariances(d2).B[0]);
}

TEST(Covariances, WeightsComposeWithNormalization) {
  GroupedDataset ds;
  ds.n = 1;
  Matrix rows(2, 1);
  rows << 1.0, 2.0;
  Vector w(2);
  w << 1.0, 3.0;
  ds.groups.push_back({"a", rows, w});
  const CovarianceSet cs = covariances(ds, true, {2.0});
  EXPECT_NEAR(cs.B[0](0, 0), 2.0 * (1.0 + 12.0) / 4.0, 1e-14);
  EXPECT_NEAR(cs.scale[0], 0.5, 1e-15);
}

TEST(Covariances, CenterScaleTraceBound) {
  IngestOptions o;
  o.center = o.scale = true;
  const auto ds = ingest_csv(kCredit, "sex", o);
  const CovarianceSet cs = covariances(ds, true);
  double total = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < cs.k(); ++i) {
    total += cs.m[i];
    mass += cs.m[i] * cs.trace[i];
  }
  // unit-variance columns: the pooled trace is exactly n per row
  EXPECT_NEAR(mass / total, static_cast<double>(ds.n), 1e-10);
  for (std::size_t i = 0; i < cs.k(); ++i) {
    EXPECT_LE(cs.trace[i] * cs.m[i] / total, static_cast<double>(ds.n) + 1e-12);
    EXPECT_GE(oracle::jacobi_eigenvalues(cs.B[i]).back(), -1e-12);
  }
}

TEST(CovarianceSet, ValidationAndClamp) {
  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  EXPECT_THROW(CovarianceSet::from_matrices({bad}), InvariantError);
  Matrix tiny(2, 2);
  tiny << 1, 0, 0, -1e-12;
  const auto cs = CovarianceSet::from_matrices({tiny});
  EXPECT_GE(oracle::jacobi_eigenvalues(cs.B[0]).back(), 0.0);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(CovarianceSet::from_matrices({asym}), InvariantError);
}
