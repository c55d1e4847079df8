#pragma once

#include "mcdr/error.hpp"
#include "mcdr/linalg.hpp"

#include <string>
#include <vector>

namespace mcdr {

enum class Relation { LE, GE, EQ };
enum class Sense { MINIMIZE, MAXIMIZE };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::LE: return "<=";
    case Relation::GE: return ">=";
    case Relation::EQ: return "=";
  }
  return "?";
}

inline Relation relation_from_string(const std::string& s) {
  if (s == "<=" || s == "le") return Relation::LE;
  if (s == ">=" || s == "ge") return Relation::GE;
  if (s == "=" || s == "==" || s == "eq") return Relation::EQ;
  throw ParseError("unknown relation '" + s + "'");
}

struct Constraint {
  Matrix A;
  Relation rel = Relation::GE;
  double b = 0.0;
};

/// Optimize <C, X> over the fantope of trace bound d intersected with the
/// affine constraints <A_i, X> rel_i b_i.
struct ConstraintSystem {
  Sense sense = Sense::MINIMIZE;
  Matrix C;
  double d = 1.0;
  std::vector<Constraint> constraints;

  Eigen::Index n() const { return C.rows(); }
  std::size_t m() const { return constraints.size(); }

  /// Objective matrix in minimization form.
  Matrix min_objective() const { return sense == Sense::MINIMIZE ? C : Matrix(-C); }

  void validate() const {
    const Eigen::Index n = C.rows();
    if (C.cols() != n) throw InvariantError("objective matrix is not square");
    if (!is_symmetric(C)) throw InvariantError("objective matrix is not symmetric");
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const Matrix& a = constraints[i].A;
      if (a.rows() != n || a.cols() != n)
        throw InvariantError("constraint " + std::to_string(i) + " has the wrong size");
      if (!is_symmetric(a)) throw InvariantError("constraint " + std::to_string(i) + " is not symmetric");
      if (!std::isfinite(constraints[i].b)) throw InvariantError("constraint " + std::to_string(i) + " rhs not finite");
    }
    if (!(d >= 0.0)) throw InvariantError("trace bound must be nonnegative");
  }

  /// Amount by which X violates constraint i (0 when satisfied).
  double violation(std::size_t i, const Matrix& x) const {
    const Constraint& c = constraints[i];
    const double v = inner(c.A, x);
    switch (c.rel) {
      case Relation::LE: return std::max(0.0, v - c.b);
      case Relation::GE: return std::max(0.0, c.b - v);
      case Relation::EQ: return std::abs(v - c.b);
    }
    return 0.0;
  }

  /// Largest violation scaled by 1 + |b_i|.
  double max_scaled_violation(const Matrix& x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < constraints.size(); ++i)
      worst = std::max(worst, violation(i, x) / (1.0 + std::abs(constraints[i].b)));
    return worst;
  }
};

}  // namespace mcdr
