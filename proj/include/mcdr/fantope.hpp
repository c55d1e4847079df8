#pragma once

#include "mcdr/error.hpp"
#include "mcdr/linalg.hpp"

#include <string>

namespace mcdr {

/// Eigenvalues within this distance of 0 or 1 count as integral.
inline constexpr double kTauInt = 1e-7;

/// A point of the fantope {0 <= X <= I, tr X <= d}.
class FantopePoint {
 public:
  FantopePoint() = default;

  /// Validates X; eigenvalues within 1e-8 outside [0, 1] are clamped.
  FantopePoint(const Matrix& x, double d) : d_(d) {
    if (x.rows() != x.cols()) throw InvariantError("fantope point must be square");
    if (!x.allFinite()) throw InvariantError("fantope point is not finite");
    if (!is_symmetric(x, 1e-10)) throw InvariantError("fantope point is not symmetric");
    eig_ = sym_eig(x);
    const double tau = 1e-8;
    bool clamp = false;
    for (Eigen::Index i = 0; i < eig_.values.size(); ++i) {
      const double v = eig_.values[i];
      if (v < -tau || v > 1.0 + tau)
        throw InvariantError("fantope point eigenvalue " + std::to_string(v) + " outside [0, 1]");
      if (v < 0.0 || v > 1.0) clamp = true;
    }
    if (clamp) {
      eig_.values = eig_.values.cwiseMax(0.0).cwiseMin(1.0);
      x_ = compose(eig_.vectors, eig_.values);
    } else {
      x_ = symmetrize(x);
    }
    const double tr = eig_.values.sum();
    if (tr > d + 1e-8 * std::max(d, 1.0))
      throw InvariantError("fantope point trace " + std::to_string(tr) + " exceeds " + std::to_string(d));
  }

  /// The projection V V^T onto the span of orthonormal columns V.
  static FantopePoint projection(const Matrix& v) {
    return FantopePoint(v * v.transpose(), static_cast<double>(v.cols()));
  }

  const Matrix& X() const { return x_; }
  double d() const { return d_; }
  Eigen::Index n() const { return x_.rows(); }
  const Vector& eigenvalues() const { return eig_.values; }
  const Matrix& eigenvectors() const { return eig_.vectors; }
  double trace() const { return eig_.values.sum(); }

  int rank(double tau = kTauInt) const { return static_cast<int>((eig_.values.array() > tau).count()); }
  int ones(double tau = kTauInt) const {
    return static_cast<int>((eig_.values.array() > 1.0 - tau).count());
  }
  int fractional(double tau = kTauInt) const {
    return static_cast<int>(
        ((eig_.values.array() > tau) && (eig_.values.array() <= 1.0 - tau)).count());
  }

 private:
  Matrix x_;
  SymEigen eig_;
  double d_ = 0.0;
};

}  // namespace mcdr
