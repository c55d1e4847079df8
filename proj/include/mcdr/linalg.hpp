#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mcdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Frobenius inner product <A, B> = tr(A^T B).
inline double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double scale = max_abs(m);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * std::max(scale, 1e-300);
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
///
/// Eigenvalues closer than 1e-12 (relative to the spectral scale) form a
/// cluster. Inside a cluster the basis is rebuilt by Gram-Schmidt over the
/// projected unit vectors e_1, e_2, ..., so the result does not depend on
/// the rotation the underlying solver happened to pick. Every vector is then
/// signed so that its first nonzero coordinate is positive.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

namespace detail {

inline void normalize_sign(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

inline Matrix canonical_cluster_basis(const Matrix& basis) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index c = basis.cols();
  Matrix out(n, c);
  Eigen::Index accepted = 0;
  for (Eigen::Index j = 0; j < n && accepted < c; ++j) {
    Vector v = basis * basis.row(j).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index a = 0; a < accepted; ++a) v -= out.col(a).dot(v) * out.col(a);
    }
    const double norm = v.norm();
    if (norm > 1e-6) out.col(accepted++) = v / norm;
  }
  // Numerically impossible unless basis is rank deficient; keep the input then.
  if (accepted < c) return basis;
  return out;
}

}  // namespace detail

inline SymEigen sym_eig(const Matrix& m) {
  const Eigen::Index n = m.rows();
  SymEigen out;
  if (n == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
  // Eigen returns ascending order.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();

  const double scale = std::max(out.values.cwiseAbs().maxCoeff(), 1e-300);
  const double tie_tol = 1e-12 * scale;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && out.values[end - 1] - out.values[end] <= tie_tol) ++end;
    if (end - start > 1) {
      out.vectors.middleCols(start, end - start) =
          detail::canonical_cluster_basis(out.vectors.middleCols(start, end - start));
    }
    start = end;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector col = out.vectors.col(j);
    detail::normalize_sign(col);
    out.vectors.col(j) = col;
  }
  return out;
}

/// n x d matrix of the top-d eigenvectors of a symmetric matrix.
inline Matrix top_frame(const Matrix& c, Eigen::Index d) {
  const SymEigen eig = sym_eig(c);
  return eig.vectors.leftCols(d);
}

/// Scaled vectorization of the lower triangle; <A, B> == svec(A).dot(svec(B)).
inline Vector svec(const Matrix& m) {
  const Eigen::Index n = m.rows();
  Vector v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    v[k++] = m(j, j);
    for (Eigen::Index i = j + 1; i < n; ++i) v[k++] = r2 * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

inline Matrix smat(const Vector& v, Eigen::Index n) {
  Matrix m(n, n);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) = v[k++];
    for (Eigen::Index i = j + 1; i < n; ++i) {
      m(i, j) = v[k++] / r2;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

/// Orthonormal basis of the null space of `rows`, computed by full-pivot
/// elimination with the given relative threshold.
inline Matrix nullspace(const Matrix& rows, double rel_threshold = 1e-10) {
  const Eigen::Index dim = rows.cols();
  if (rows.rows() == 0) return Matrix::Identity(dim, dim);
  Eigen::FullPivLU<Matrix> lu(rows);
  lu.setThreshold(rel_threshold);
  if (lu.dimensionOfKernel() == 0) return Matrix(dim, 0);
  const Matrix kernel = lu.kernel();
  Eigen::HouseholderQR<Matrix> qr(kernel);
  return qr.householderQ() * Matrix::Identity(dim, kernel.cols());
}

inline Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

/// Largest principal angle (radians) between the column spaces of two
/// matrices with orthonormal columns and equal column count.
inline double max_principal_angle(const Matrix& u, const Matrix& v) {
  if (u.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * v);
  const double smallest = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smallest);
}

/// Sum of the `count` largest singular values.
inline double top_singular_sum(const Matrix& m, Eigen::Index count) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const Eigen::Index take = std::min<Eigen::Index>(count, s.size());
  return take <= 0 ? 0.0 : s.head(take).sum();
}

/// Rebuild V diag(values) V^T.
inline Matrix compose(const Matrix& vectors, const Vector& values) {
  return vectors * values.asDiagonal() * vectors.transpose();
}

}  // namespace mcdr
