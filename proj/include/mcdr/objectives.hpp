#pragma once

#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mcdr {

enum class ObjectiveKind { MM_VAR, MM_LOSS, NSW, NSW_SMOOTHED, P_POWER_MEAN };

inline const char* to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::MM_VAR: return "mm-var";
    case ObjectiveKind::MM_LOSS: return "mm-loss";
    case ObjectiveKind::NSW: return "nsw";
    case ObjectiveKind::NSW_SMOOTHED: return "nsw-smoothed";
    case ObjectiveKind::P_POWER_MEAN: return "power-mean";
  }
  return "?";
}

inline ObjectiveKind objective_from_string(const std::string& s) {
  if (s == "mm-var") return ObjectiveKind::MM_VAR;
  if (s == "mm-loss") return ObjectiveKind::MM_LOSS;
  if (s == "nsw") return ObjectiveKind::NSW;
  if (s == "nsw-smoothed") return ObjectiveKind::NSW_SMOOTHED;
  if (s == "power-mean") return ObjectiveKind::P_POWER_MEAN;
  throw ParameterError("unknown objective '" + s + "'");
}

inline bool is_minmax(ObjectiveKind k) { return k == ObjectiveKind::MM_VAR || k == ObjectiveKind::MM_LOSS; }

/// Accumulation function g over group utilities z (always maximized).
struct Objective {
  ObjectiveKind kind = ObjectiveKind::MM_VAR;
  double lambda = 1e-3;     // NSW_SMOOTHED
  double p = 1.0;           // P_POWER_MEAN; p == 0 is the geometric mean
  std::vector<double> beta;  // MM_LOSS offsets

  static Objective mm_var() { return {}; }
  static Objective mm_loss(std::vector<double> b) {
    Objective o;
    o.kind = ObjectiveKind::MM_LOSS;
    o.beta = std::move(b);
    return o;
  }
  static Objective nsw() {
    Objective o;
    o.kind = ObjectiveKind::NSW;
    return o;
  }
  static Objective nsw_smoothed(double lambda = 1e-3) {
    Objective o;
    o.kind = ObjectiveKind::NSW_SMOOTHED;
    o.lambda = lambda;
    return o;
  }
  static Objective power_mean(double p) {
    Objective o;
    o.kind = ObjectiveKind::P_POWER_MEAN;
    o.p = p;
    return o;
  }

  void validate(std::size_t k) const {
    if (kind == ObjectiveKind::NSW_SMOOTHED && !(lambda > 0.0))
      throw ParameterError("smoothed NSW needs lambda > 0");
    if (kind == ObjectiveKind::P_POWER_MEAN && !(p <= 1.0))
      throw ParameterError("power mean needs p <= 1");
    if (kind == ObjectiveKind::MM_LOSS && beta.size() != k)
      throw ParameterError("marginal loss needs one beta per group");
  }
};

/// beta_i = best d-dimensional variance of group i alone.
inline std::vector<double> beta(const CovarianceSet& cov, Eigen::Index d) {
  if (d < 1 || d > cov.n())
    throw ParameterError("d = " + std::to_string(d) + " outside [1, " + std::to_string(cov.n()) + "]");
  std::vector<double> out;
  for (const auto& b : cov.B) out.push_back(sym_eig(b).values.head(d).sum());
  return out;
}

/// z_i = <B_i, X>.
inline Vector utilities(const CovarianceSet& cov, const Matrix& x) {
  Vector z(static_cast<Eigen::Index>(cov.k()));
  for (std::size_t i = 0; i < cov.k(); ++i) z[static_cast<Eigen::Index>(i)] = inner(cov.B[i], x);
  return z;
}

/// lambda * ||B_i||_F, the smoothing offsets.
inline Vector smoothing_offsets(const CovarianceSet& cov, double lambda) {
  Vector c(static_cast<Eigen::Index>(cov.k()));
  for (std::size_t i = 0; i < cov.k(); ++i) c[static_cast<Eigen::Index>(i)] = lambda * cov.B[i].norm();
  return c;
}

/// g(z). Throws DegenerateUtility for plain NSW with a nonpositive entry.
inline double objective_value(const Objective& obj, const Vector& z, const CovarianceSet& cov) {
  const Eigen::Index k = z.size();
  switch (obj.kind) {
    case ObjectiveKind::MM_VAR:
      return z.minCoeff();
    case ObjectiveKind::MM_LOSS: {
      double v = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < k; ++i) v = std::min(v, z[i] - obj.beta[static_cast<std::size_t>(i)]);
      return v;
    }
    case ObjectiveKind::NSW: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (!(z[i] > 0.0)) throw DegenerateUtility(static_cast<std::size_t>(i), z[i]);
        s += std::log(z[i]);
      }
      return s;
    }
    case ObjectiveKind::NSW_SMOOTHED: {
      const Vector c = smoothing_offsets(cov, obj.lambda);
      double s = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double u = z[i] + c[i];
        if (!(u > 0.0)) throw DegenerateUtility(static_cast<std::size_t>(i), z[i]);
        s += std::log(u);
      }
      return s;
    }
    case ObjectiveKind::P_POWER_MEAN: {
      const Vector zp = z.cwiseMax(0.0);
      if (obj.p == 0.0) {
        if ((zp.array() <= 0.0).any()) return 0.0;
        return std::exp(zp.array().log().mean());
      }
      if (obj.p < 0.0 && (zp.array() <= 0.0).any()) return 0.0;
      return std::pow(zp.array().pow(obj.p).sum(), 1.0 / obj.p);
    }
  }
  return 0.0;
}

struct GroupUtilities {
  Vector z;
  Vector losses;  // beta_i - z_i, empty when beta is unknown
  double value = 0.0;
  double max_loss = std::numeric_limits<double>::quiet_NaN();
  double nsw_score = std::numeric_limits<double>::quiet_NaN();  // exp(mean log z)
};

inline GroupUtilities evaluate(const Objective& obj, const CovarianceSet& cov, const Matrix& x) {
  obj.validate(cov.k());
  GroupUtilities u;
  u.z = utilities(cov, x);
  u.value = objective_value(obj, u.z, cov);
  const std::vector<double>* b = !obj.beta.empty() ? &obj.beta : (cov.beta ? &*cov.beta : nullptr);
  if (b && b->size() == cov.k()) {
    u.losses = Eigen::Map<const Vector>(b->data(), static_cast<Eigen::Index>(b->size())) - u.z;
    u.max_loss = u.losses.maxCoeff();
  }
  if ((u.z.array() > 0.0).all()) u.nsw_score = std::exp(u.z.array().log().mean());
  return u;
}

inline GroupUtilities evaluate(const Objective& obj, const CovarianceSet& cov, const FantopePoint& x) {
  return evaluate(obj, cov, x.X());
}

/// Concave conjugate g_*(w) = inf_z (w.z - g(z)); -infinity outside its domain.
/// `cov` is needed only for the smoothed NSW offsets.
inline double conjugate(const Objective& obj, const Vector& w, const CovarianceSet* cov = nullptr) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const Eigen::Index k = w.size();
  if (!w.allFinite()) return ninf;
  auto on_simplex = [&] {
    return (w.array() >= -1e-12).all() && std::abs(w.sum() - 1.0) <= 1e-12 * std::max<double>(1.0, k);
  };
  switch (obj.kind) {
    case ObjectiveKind::MM_VAR:
      return on_simplex() ? 0.0 : ninf;
    case ObjectiveKind::MM_LOSS: {
      if (!on_simplex()) return ninf;
      double s = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) s += w[i] * obj.beta.at(static_cast<std::size_t>(i));
      return s;
    }
    case ObjectiveKind::NSW:
    case ObjectiveKind::NSW_SMOOTHED: {
      if (!(w.array() > 0.0).all()) return ninf;
      double s = (1.0 + w.array().log()).sum();
      if (obj.kind == ObjectiveKind::NSW_SMOOTHED) {
        if (!cov) throw ParameterError("smoothed NSW conjugate needs the covariance set");
        s -= w.dot(smoothing_offsets(*cov, obj.lambda));
      }
      return s;
    }
    case ObjectiveKind::P_POWER_MEAN: {
      if (!(w.array() > 0.0).all()) return ninf;
      double norm;
      if (obj.p == 1.0) {
        norm = w.minCoeff();
      } else if (obj.p == 0.0) {
        norm = static_cast<double>(k) * std::exp(w.array().log().mean());
      } else {
        const double q = obj.p / (obj.p - 1.0);
        norm = std::pow(w.array().pow(q).sum(), 1.0 / q);
      }
      return norm >= 1.0 - 1e-12 ? 0.0 : ninf;
    }
  }
  return ninf;
}

/// dg/dz at z (a supergradient selection for the min-max kinds: the lowest
/// index attaining the minimum gets weight 1).
inline Vector utility_gradient(const Objective& obj, const Vector& z, const CovarianceSet& cov) {
  const Eigen::Index k = z.size();
  Vector g = Vector::Zero(k);
  switch (obj.kind) {
    case ObjectiveKind::MM_VAR:
    case ObjectiveKind::MM_LOSS: {
      Eigen::Index best = 0;
      double bv = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < k; ++i) {
        const double v = z[i] - (obj.kind == ObjectiveKind::MM_LOSS ? obj.beta[static_cast<std::size_t>(i)] : 0.0);
        if (v < bv) {
          bv = v;
          best = i;
        }
      }
      g[best] = 1.0;
      return g;
    }
    case ObjectiveKind::NSW:
      for (Eigen::Index i = 0; i < k; ++i) {
        if (!(z[i] > 0.0)) throw DegenerateUtility(static_cast<std::size_t>(i), z[i]);
        g[i] = 1.0 / z[i];
      }
      return g;
    case ObjectiveKind::NSW_SMOOTHED: {
      const Vector c = smoothing_offsets(cov, obj.lambda);
      for (Eigen::Index i = 0; i < k; ++i) {
        const double u = z[i] + c[i];
        if (!(u > 0.0)) throw DegenerateUtility(static_cast<std::size_t>(i), z[i]);
        g[i] = 1.0 / u;
      }
      return g;
    }
    case ObjectiveKind::P_POWER_MEAN: {
      if (obj.p == 1.0) return Vector::Ones(k);
      for (Eigen::Index i = 0; i < k; ++i)
        if (!(z[i] > 0.0)) throw DegenerateUtility(static_cast<std::size_t>(i), z[i]);
      const double val = objective_value(obj, z, cov);
      if (obj.p == 0.0) return (val / static_cast<double>(k)) * z.cwiseInverse();
      const double s = z.array().pow(obj.p).sum();
      return (std::pow(s, 1.0 / obj.p - 1.0) * z.array().pow(obj.p - 1.0)).matrix();
    }
  }
  return g;
}

/// Supergradient of X -> g(<B_1,X>, ..., <B_k,X>).
inline Matrix subgradient(const Objective& obj, const CovarianceSet& cov, const Matrix& x) {
  obj.validate(cov.k());
  const Vector gz = utility_gradient(obj, utilities(cov, x), cov);
  Matrix g = Matrix::Zero(cov.n(), cov.n());
  for (std::size_t i = 0; i < cov.k(); ++i)
    if (gz[static_cast<Eigen::Index>(i)] != 0.0) g += gz[static_cast<Eigen::Index>(i)] * cov.B[i];
  return g;
}

inline Matrix subgradient(const Objective& obj, const CovarianceSet& cov, const FantopePoint& x) {
  return subgradient(obj, cov, x.X());
}

}  // namespace mcdr
