#pragma once

#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/linalg.hpp"

#include <string>

namespace mcdr {

struct OracleAnswer {
  Matrix V;       // n x d, top eigenvectors
  Matrix X;       // V V^T
  double value;   // <C, X> = sum of the top-d eigenvalues

  FantopePoint point() const { return FantopePoint::projection(V); }
};

/// argmax of <C, X> over rank-d projections (and over the fantope).
inline OracleAnswer pca_oracle(const Matrix& c, Eigen::Index d) {
  if (d < 1 || d > c.rows())
    throw ParameterError("d = " + std::to_string(d) + " outside [1, " + std::to_string(c.rows()) + "]");
  const SymEigen eig = sym_eig(c);
  OracleAnswer a;
  a.V = eig.vectors.leftCols(d);
  a.X = a.V * a.V.transpose();
  a.value = eig.values.head(d).sum();
  return a;
}

}  // namespace mcdr
