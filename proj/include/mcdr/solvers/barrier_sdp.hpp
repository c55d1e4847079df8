#pragma once

#include "mcdr/constraint_system.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/linalg.hpp"
#include "mcdr/report.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mcdr {

inline constexpr Eigen::Index kSdpMaxDim = 256;

/// minimize <C,X> + c.y over 0 < X < I and free y subject to
///   <A,X> + a.y <= rhs  (ineq)   and   <A,X> + a.y == rhs  (eq).
struct BarrierProblem {
  struct Row {
    Matrix A;
    Vector a;
    double rhs = 0.0;
  };
  Eigen::Index n = 0;
  Eigen::Index q = 0;
  Matrix C;
  Vector c;
  std::vector<Row> ineq;
  std::vector<Row> eq;
};

struct BarrierOptions {
  double tol = 1e-9;  // stop when nu / t <= tol * max(1, |objective|)
  double mu = 8.0;
  int max_newton = 2000;
};

struct BarrierResult {
  Matrix X;
  Vector y;
  double objective = 0.0;
  double gap = 0.0;
  int newton_steps = 0;
  double relaxed = 0.0;  // amount added to every inequality rhs, 0 if none
  bool converged = false;
};

namespace detail {

// Equilibrated full-pivot LU with one refinement step; falls back to a
// least-squares solve when the system is numerically rank deficient.
inline Vector solve_kkt(const Matrix& K, const Vector& rhs) {
  const Eigen::Index m = K.rows();
  Vector r(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double big = K.row(a).cwiseAbs().maxCoeff();
    r[a] = big > 0.0 ? 1.0 / std::sqrt(big) : 1.0;
  }
  const Matrix ks = r.asDiagonal() * K * r.asDiagonal();
  const Vector bs = r.cwiseProduct(rhs);
  Eigen::FullPivLU<Matrix> lu(ks);
  Vector u;
  if (lu.isInvertible()) {
    u = lu.solve(bs);
    u += lu.solve(Vector(bs - ks * u));
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(ks);
    u = cod.solve(bs);
    u += cod.solve(Vector(bs - ks * u));
  }
  return r.cwiseProduct(u);
}

class Barrier {
 public:
  Barrier(const BarrierProblem& p, const BarrierOptions& o) : p_(p), o_(o) {}

  // Center repeatedly, raising t, until the gap target or `stop` fires.
  BarrierResult run(Matrix x, Vector y, const std::function<bool(const Matrix&, const Vector&)>& stop) {
    const double nu = 2.0 * static_cast<double>(p_.n) + static_cast<double>(p_.ineq.size());
    const double scale = p_.C.norm() + (p_.q ? p_.c.norm() : 0.0);
    BarrierResult r;
    if (scale == 0.0) {
      t_ = 1.0;
      center(x, y, r.newton_steps, stop);
      r.X = x;
      r.y = y;
      r.objective = 0.0;
      r.gap = 0.0;
      r.converged = eq_residual(x, y).lpNorm<Eigen::Infinity>() <= eq_tol();
      return r;
    }
    t_ = 1.0 / scale;
    while (true) {
      bool stopped = center(x, y, r.newton_steps, stop);
      if (!stopped && restore(x, y)) stopped = stop && stop(x, y);
      r.X = x;
      r.y = y;
      r.objective = objective(x, y);
      r.gap = nu / t_;
      if (stopped) {
        r.converged = true;
        return r;
      }
      if (r.gap <= o_.tol * std::max(1.0, std::abs(r.objective))) {
        r.converged = eq_residual(x, y).lpNorm<Eigen::Infinity>() <= eq_tol();
        return r;
      }
      if (r.newton_steps >= o_.max_newton) return r;
      t_ *= o_.mu;
    }
  }

 private:
  double objective(const Matrix& x, const Vector& y) const {
    double v = inner(p_.C, x);
    if (p_.q) v += p_.c.dot(y);
    return v;
  }

  double row_value(const BarrierProblem::Row& row, const Matrix& x, const Vector& y) const {
    double v = inner(row.A, x);
    if (p_.q) v += row.a.dot(y);
    return v;
  }

  Vector eq_residual(const Matrix& x, const Vector& y) const {
    Vector r(static_cast<Eigen::Index>(p_.eq.size()));
    for (std::size_t i = 0; i < p_.eq.size(); ++i)
      r[static_cast<Eigen::Index>(i)] = p_.eq[i].rhs - row_value(p_.eq[i], x, y);
    return r;
  }

  double eq_tol() const {
    double s = 1.0;
    for (const auto& row : p_.eq) s = std::max(s, std::abs(row.rhs));
    return 1e-9 * s;
  }

  // +inf outside the domain.
  double phi(const Matrix& x, const Vector& y) const {
    const double inf = std::numeric_limits<double>::infinity();
    double v = t_ * objective(x, y);
    for (const auto& row : p_.ineq) {
      const double s = row.rhs - row_value(row, x, y);
      if (!(s > 0.0)) return inf;
      v -= std::log(s);
    }
    Eigen::LLT<Matrix> l1(x);
    if (l1.info() != Eigen::Success) return inf;
    const Matrix ix = Matrix::Identity(p_.n, p_.n) - x;
    Eigen::LLT<Matrix> l2(ix);
    if (l2.info() != Eigen::Success) return inf;
    const Vector d1 = Matrix(l1.matrixL()).diagonal();
    const Vector d2 = Matrix(l2.matrixL()).diagonal();
    if ((d1.array() <= 0.0).any() || (d2.array() <= 0.0).any()) return inf;
    v -= 2.0 * (d1.array().log().sum() + d2.array().log().sum());
    return std::isfinite(v) ? v : inf;
  }

  // Pull X back onto the equality constraints along H^{-1}-weighted
  // directions when rounding error has let the residual drift.
  bool restore(Matrix& x, const Vector& y) {
    if (p_.eq.empty()) return false;
    bool moved = false;
    for (int it = 0; it < 8; ++it) {
      const Vector rp = eq_residual(x, y);
      if (rp.lpNorm<Eigen::Infinity>() <= 0.1 * eq_tol()) break;
      Eigen::SelfAdjointEigenSolver<Matrix> es(x);
      const Matrix& Q = es.eigenvectors();
      const Vector lam = es.eigenvalues();
      const Eigen::Index n = p_.n;
      Matrix W(n, n);
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
          W(a, b) = 1.0 / (1.0 / (lam[a] * lam[b]) + 1.0 / ((1.0 - lam[a]) * (1.0 - lam[b])));
      const auto me = static_cast<Eigen::Index>(p_.eq.size());
      std::vector<Matrix> ht;
      for (const auto& row : p_.eq) ht.push_back(Q * (Q.transpose() * row.A * Q).cwiseProduct(W) * Q.transpose());
      Matrix K(me, me);
      for (Eigen::Index a = 0; a < me; ++a)
        for (Eigen::Index b = 0; b < me; ++b) K(a, b) = inner(p_.eq[static_cast<std::size_t>(a)].A, ht[static_cast<std::size_t>(b)]);
      const Vector w = solve_kkt(K, rp);
      Matrix dX = Matrix::Zero(n, n);
      for (Eigen::Index a = 0; a < me; ++a) dX += w[a] * ht[static_cast<std::size_t>(a)];
      dX = symmetrize(dX);
      double alpha = 1.0;
      while (!std::isfinite(phi(x + alpha * dX, y)) && alpha > 1e-6) alpha *= 0.5;
      if (!std::isfinite(phi(x + alpha * dX, y))) break;
      const Matrix xn = symmetrize(x + alpha * dX);
      if (eq_residual(xn, y).lpNorm<Eigen::Infinity>() >= rp.lpNorm<Eigen::Infinity>()) break;
      x = xn;
      moved = true;
    }
    return moved;
  }

  // Newton centering at the current t. Returns true if `stop` fired.
  bool center(Matrix& x, Vector& y, int& steps,
              const std::function<bool(const Matrix&, const Vector&)>& stop) {
    const Eigen::Index n = p_.n;
    const std::size_t mi = p_.ineq.size();
    const std::size_t me = p_.eq.size();
    const Eigen::Index q = p_.q;
    const Eigen::Index sys = static_cast<Eigen::Index>(mi + me) + q;
    for (int it = 0; it < 200 && steps < o_.max_newton; ++it) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(x);
      const Matrix& Q = es.eigenvectors();
      const Vector lam = es.eigenvalues();
      Matrix W(n, n);
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
          W(a, b) = 1.0 / (1.0 / (lam[a] * lam[b]) + 1.0 / ((1.0 - lam[a]) * (1.0 - lam[b])));
      auto hinv = [&](const Matrix& m) -> Matrix {
        return Q * (Q.transpose() * m * Q).cwiseProduct(W) * Q.transpose();
      };

      Vector s(static_cast<Eigen::Index>(mi));
      for (std::size_t j = 0; j < mi; ++j)
        s[static_cast<Eigen::Index>(j)] = p_.ineq[j].rhs - row_value(p_.ineq[j], x, y);

      Matrix rX = t_ * p_.C;
      rX += Q * (lam.array().inverse() * -1.0 + (1.0 - lam.array()).inverse()).matrix().asDiagonal() *
            Q.transpose();
      Vector ry = q ? Vector(t_ * p_.c) : Vector(0);
      for (std::size_t j = 0; j < mi; ++j) {
        const double inv = 1.0 / s[static_cast<Eigen::Index>(j)];
        rX += inv * p_.ineq[j].A;
        if (q) ry += inv * p_.ineq[j].a;
      }
      const Vector rp = eq_residual(x, y);
      const bool eq_ok = rp.size() == 0 || rp.lpNorm<Eigen::Infinity>() <= eq_tol();

      std::vector<const BarrierProblem::Row*> rows;
      for (const auto& row : p_.ineq) rows.push_back(&row);
      for (const auto& row : p_.eq) rows.push_back(&row);
      std::vector<Matrix> ht;
      ht.reserve(rows.size());
      for (const auto* row : rows) ht.push_back(hinv(row->A));
      const Matrix hr = hinv(rX);

      Matrix K = Matrix::Zero(sys, sys);
      Vector rhs = Vector::Zero(sys);
      const Eigen::Index mt = static_cast<Eigen::Index>(rows.size());
      for (Eigen::Index a = 0; a < mt; ++a) {
        for (Eigen::Index b = a; b < mt; ++b) {
          K(a, b) = inner(rows[static_cast<std::size_t>(a)]->A, ht[static_cast<std::size_t>(b)]);
          K(b, a) = K(a, b);
        }
        rhs[a] = -inner(rows[static_cast<std::size_t>(a)]->A, hr);
        for (Eigen::Index c = 0; c < q; ++c) {
          K(a, mt + c) = -rows[static_cast<std::size_t>(a)]->a[c];
          K(mt + c, a) = rows[static_cast<std::size_t>(a)]->a[c];
        }
      }
      for (std::size_t j = 0; j < mi; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        K(jj, jj) += s[jj] * s[jj];
      }
      for (std::size_t i = 0; i < me; ++i) rhs[static_cast<Eigen::Index>(mi + i)] -= rp[static_cast<Eigen::Index>(i)];
      for (Eigen::Index c = 0; c < q; ++c) rhs[mt + c] = -ry[c];

      Vector sol = sys ? solve_kkt(K, rhs) : Vector(0);
      Matrix dX = hr;
      for (Eigen::Index a = 0; a < mt; ++a) dX += sol[a] * ht[static_cast<std::size_t>(a)];
      dX = -symmetrize(dX);
      Vector dy = q ? Vector(sol.tail(q)) : Vector(0);

      double slope = inner(rX, dX);
      if (q) slope += ry.dot(dy);
      const double dec = -slope;
      ++steps;

      const double phi0 = phi(x, y);
      double alpha = 1.0;
      double phi1 = phi(x + alpha * dX, q ? Vector(y + alpha * dy) : y);
      while (!std::isfinite(phi1) && alpha > 1e-14) {
        alpha *= 0.5;
        phi1 = phi(x + alpha * dX, q ? Vector(y + alpha * dy) : y);
      }
      if (!std::isfinite(phi1)) return false;
      if (eq_ok) {
        if (dec <= 0.0 || dec * 0.5 <= 1e-14) return stop && stop(x, y);
        // inside the quadratic region take the damped-free step; phi is too
        // large relative to dec there for a reliable Armijo test
        const bool quadratic = dec < 0.1 && alpha == 1.0;
        while (!quadratic && phi1 > phi0 - 0.2 * alpha * dec && alpha > 1e-14) {
          alpha *= 0.5;
          phi1 = phi(x + alpha * dX, q ? Vector(y + alpha * dy) : y);
        }
        if (alpha <= 1e-14) return stop && stop(x, y);
      }
      x = symmetrize(x + alpha * dX);
      if (q) y += alpha * dy;
      if (stop && stop(x, y)) return true;
    }
    return false;
  }

  const BarrierProblem& p_;
  BarrierOptions o_;
  double t_ = 1.0;
};

}  // namespace detail

/// Interior-point solve. X0 must satisfy 0 < X0 < I; a phase-one problem
/// finds a strictly feasible start when (X0, y0) is not one.
/// Throws Infeasible when the phase-one optimum certifies infeasibility.
inline BarrierResult barrier_solve(const BarrierProblem& prob, Matrix x0, Vector y0,
                                   const BarrierOptions& opts = {}) {
  if (prob.n > kSdpMaxDim)
    throw ParameterError("dimension " + std::to_string(prob.n) + " exceeds the dense SDP limit " +
                         std::to_string(kSdpMaxDim));
  const Eigen::Index q = prob.q;
  if (y0.size() != q) y0 = Vector::Zero(q);

  double worst = -std::numeric_limits<double>::infinity();
  double rhs_scale = 1.0;
  for (const auto& row : prob.ineq) {
    double v = inner(row.A, x0) - row.rhs;
    if (q) v += row.a.dot(y0);
    worst = std::max(worst, v);
    rhs_scale = std::max(rhs_scale, std::abs(row.rhs));
  }
  for (const auto& row : prob.eq) rhs_scale = std::max(rhs_scale, std::abs(row.rhs));

  BarrierProblem work = prob;
  double relaxed = 0.0;
  int phase1_steps = 0;
  if (worst >= -1e-12 * rhs_scale || !prob.eq.empty()) {
    // Phase one over (X, y, sigma): minimize sigma with every inequality relaxed by sigma.
    BarrierProblem p1;
    p1.n = prob.n;
    p1.q = q + 1;
    p1.C = Matrix::Zero(prob.n, prob.n);
    p1.c = Vector::Zero(q + 1);
    p1.c[q] = 1.0;
    for (const auto& row : prob.ineq) {
      BarrierProblem::Row r{row.A, Vector::Zero(q + 1), row.rhs};
      if (q) r.a.head(q) = row.a;
      r.a[q] = -1.0;
      p1.ineq.push_back(std::move(r));
    }
    {
      BarrierProblem::Row floor{Matrix::Zero(prob.n, prob.n), Vector::Zero(q + 1), 1.0};
      floor.a[q] = -1.0;
      p1.ineq.push_back(std::move(floor));
    }
    for (const auto& row : prob.eq) {
      BarrierProblem::Row r{row.A, Vector::Zero(q + 1), row.rhs};
      if (q) r.a.head(q) = row.a;
      p1.eq.push_back(std::move(r));
    }
    Vector y1(q + 1);
    if (q) y1.head(q) = y0;
    y1[q] = std::max(worst, 0.0) + 1.0;
    BarrierOptions o1 = opts;
    o1.tol = std::min(opts.tol, 1e-10);
    detail::Barrier b1(p1, o1);
    const double eqtol = 1e-9 * rhs_scale;
    auto feasible = [&](const Matrix& x, const Vector& y) {
      if (!(y[q] < 0.0)) return false;
      for (const auto& row : p1.eq) {
        double v = inner(row.A, x) + row.a.dot(y) - row.rhs;
        if (std::abs(v) > eqtol) return false;
      }
      return true;
    };
    BarrierResult r1 = b1.run(x0, y1, feasible);
    phase1_steps = r1.newton_steps;
    const double sigma = r1.y[q];
    x0 = r1.X;
    y0 = q ? Vector(r1.y.head(q)) : Vector(0);
    if (!feasible(r1.X, r1.y)) {
      const double lower = sigma - r1.gap;
      if (lower > 1e-7 * rhs_scale) throw Infeasible("constraint system is infeasible (phase-one optimum " +
                                                     std::to_string(sigma) + ")");
      bool eq_bad = false;
      for (const auto& row : p1.eq)
        if (std::abs(inner(row.A, r1.X) + row.a.dot(r1.y) - row.rhs) > 1e-7 * rhs_scale) eq_bad = true;
      if (eq_bad) throw Infeasible("equality constraints cannot be met inside the fantope");
      relaxed = std::max(sigma, 0.0) + 1e-9 * rhs_scale;
      for (auto& row : work.ineq) row.rhs += relaxed;
    }
  }

  detail::Barrier b2(work, opts);
  BarrierResult r = b2.run(x0, y0, nullptr);
  r.newton_steps += phase1_steps;
  r.relaxed = relaxed;
  return r;
}

struct SdpResult {
  FantopePoint X;
  double value = 0.0;  // <C, X> in the system's own sense
  SolveReport report;
  double relaxed = 0.0;
};

/// Dense interior-point solve of a ConstraintSystem over the fantope.
inline SdpResult solve_sdp(const ConstraintSystem& sys, double tol = 1e-9) {
  Stopwatch clock;
  sys.validate();
  const Eigen::Index n = sys.n();
  if (n < 1) throw ParameterError("empty system");
  if (n > kSdpMaxDim)
    throw ParameterError("dimension " + std::to_string(n) + " exceeds the dense SDP limit " +
                         std::to_string(kSdpMaxDim));
  BarrierProblem p;
  p.n = n;
  p.C = sys.min_objective();
  for (const auto& c : sys.constraints) {
    const double norm = c.A.norm();
    const double btol = 1e-12 * (1.0 + std::abs(c.b));
    if (norm <= 1e-14) {
      // constant constraint 0 rel b
      const bool ok = c.rel == Relation::LE ? c.b >= -btol : c.rel == Relation::GE ? c.b <= btol : std::abs(c.b) <= btol;
      if (!ok) throw Infeasible("constant constraint 0 " + std::string(to_string(c.rel)) + " " + std::to_string(c.b));
      continue;
    }
    switch (c.rel) {
      case Relation::LE: p.ineq.push_back({c.A, Vector(0), c.b}); break;
      case Relation::GE: p.ineq.push_back({-c.A, Vector(0), -c.b}); break;
      case Relation::EQ: p.eq.push_back({c.A, Vector(0), c.b}); break;
    }
  }
  p.ineq.push_back({Matrix::Identity(n, n), Vector(0), sys.d});

  const double alpha = std::min(0.5, 0.5 * sys.d / static_cast<double>(n));
  BarrierOptions opts;
  opts.tol = tol;
  BarrierResult br = barrier_solve(p, alpha * Matrix::Identity(n, n), Vector(0), opts);

  SdpResult out;
  out.X = FantopePoint(br.X, sys.d + br.relaxed);
  out.value = inner(sys.C, out.X.X());
  out.relaxed = br.relaxed;
  out.report.solver = "sdp";
  out.report.value = out.value;
  out.report.gap = br.gap;
  out.report.iterations = br.newton_steps;
  out.report.rank = out.X.rank();
  out.report.fractional = out.X.fractional();
  out.report.certificate = Certificate::SDP_GAP;
  out.report.status = br.converged ? Status::CONVERGED : Status::UNCONVERGED;
  out.report.wall_seconds = clock.seconds();
  return out;
}

}  // namespace mcdr
