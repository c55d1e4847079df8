#pragma once

#include "mcdr/constraint_system.hpp"
#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/linalg.hpp"
#include "mcdr/objectives.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace mcdr {

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  Matrix adjacency() const {
    Matrix a = Matrix::Zero(n, n);
    for (const auto& [u, v] : edges) {
      a(u, v) = 1.0;
      a(v, u) = 1.0;
    }
    return a;
  }
};

/// Edge list: one "u v" pair per line, 0-indexed; '#' starts a comment.
/// The vertex count is 1 + the largest index unless `n` is given.
inline Graph read_edge_list(std::istream& in, int n = 0) {
  Graph g;
  std::string line;
  int top = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u)) continue;
    if (!(ls >> v)) throw ParseError("edge list line " + std::to_string(line_no) + ": expected two vertices");
    if (u < 0 || v < 0) throw ParseError("edge list line " + std::to_string(line_no) + ": negative vertex");
    if (u == v) throw ParseError("edge list line " + std::to_string(line_no) + ": self loop");
    g.edges.emplace_back(std::min(u, v), std::max(u, v));
    top = std::max({top, u, v});
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.n = std::max(n, top + 1);
  return g;
}

inline Graph read_edge_list(const std::string& path, int n = 0) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_edge_list(in, n);
}

struct KnownValue {
  std::string name;
  double value = 0.0;
  std::string source;  // "published" or "derived"
};

/// A generated problem with the values it is known to attain.
struct InstanceBundle {
  std::string kind;
  std::uint64_t seed = 0;
  double d = 1.0;
  std::optional<CovarianceSet> covariances;
  std::optional<ConstraintSystem> system;
  std::optional<Graph> graph;
  std::vector<KnownValue> known;

  std::optional<double> known_value(const std::string& name) const {
    for (const auto& k : known)
      if (k.name == name) return k.value;
    return std::nullopt;
  }
};

/// Three 2x2 groups where the relaxation (7/4) beats every rank-1 solution (26/17).
inline InstanceBundle gap_instance() {
  Matrix b1(2, 2), b2(2, 2), b3(2, 2);
  b1 << 2, 1, 1, 1;
  b2 << 1, 1, 1, 2;
  b3 << 2, -1, -1, 2;
  InstanceBundle ib;
  ib.kind = "gap";
  ib.d = 1;
  ib.covariances = CovarianceSet::from_matrices({b1, b2, b3});
  ib.known = {{"relaxed_mm_var", 7.0 / 4.0, "published"},
              {"exact_mm_var", 26.0 / 17.0, "published"},
              {"exact_mm_loss", 1.298, "published"},
              {"relaxed_mm_loss", 1.060, "published"}};
  return ib;
}

/// 2n+1 groups whose d = 1 Fair-PCA value reaches b exactly when G has a cut
/// of size at least b.
inline InstanceBundle maxcut_instance(const Graph& g, double b) {
  const int n = g.n;
  if (n < 2) throw ParameterError("max-cut instance needs at least two vertices");
  if (!(b > 0.0)) throw ParameterError("b must be positive");
  const double e = static_cast<double>(g.edges.size());
  const double denom = 2.0 * b - e + static_cast<double>(n) * n;
  if (!(denom > 0.0)) throw ParameterError("2b - |E| + n^2 must be positive");
  for (const auto& [u, v] : g.edges)
    if (u >= n || v >= n) throw ParameterError("edge endpoint outside the vertex range");
  const double bn = b * n;
  std::vector<Matrix> mats;
  for (int j = 0; j < n; ++j) {
    Matrix odd = Matrix::Zero(n, n);
    odd(j, j) = bn;
    Matrix even = (bn / (n - 1.0)) * Matrix::Identity(n, n);
    even(j, j) = 0.0;
    mats.push_back(odd);
    mats.push_back(even);
  }
  mats.push_back((bn / denom) * (static_cast<double>(n) * Matrix::Identity(n, n) - 0.5 * g.adjacency()));
  InstanceBundle ib;
  ib.kind = "maxcut";
  ib.d = 1;
  ib.covariances = CovarianceSet::from_matrices(std::move(mats));
  ib.graph = g;
  ib.known = {{"target", b, "derived"}};
  return ib;
}

/// Largest cut by enumeration (vertex 0 fixed on one side).
inline int brute_force_max_cut(const Graph& g) {
  if (g.n > 24) throw ParameterError("graph too large for enumeration");
  int best = 0;
  for (std::uint32_t mask = 0; mask < (1U << (g.n - 1)); ++mask) {
    const std::uint32_t side = mask << 1;
    int cut = 0;
    for (const auto& [u, v] : g.edges) cut += ((side >> u) & 1U) != ((side >> v) & 1U);
    best = std::max(best, cut);
  }
  return best;
}

/// max over u in {+-1/sqrt(n)}^n of min_i <B_i, u u^T>.
inline double hypercube_fair_pca(const CovarianceSet& cov) {
  const auto n = static_cast<int>(cov.n());
  if (n > 24) throw ParameterError("dimension too large for enumeration");
  double best = -std::numeric_limits<double>::infinity();
  Vector u(n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::uint32_t mask = 0; mask < (1U << (n - 1)); ++mask) {
    u[0] = s;
    for (int j = 1; j < n; ++j) u[j] = ((mask >> (j - 1)) & 1U) ? -s : s;
    double v = std::numeric_limits<double>::infinity();
    for (const auto& b : cov.B) v = std::min(v, u.dot(b * u));
    best = std::max(best, v);
  }
  return best;
}

/// Fantope system whose optimal solutions all have rank at least d + s:
/// maximize the sum of diagonal entries s .. s+d-1 with the leading
/// (s+1)x(s+1) block forced to a multiple of the identity.
inline InstanceBundle tightness_instance(int n, int d, int s) {
  if (d < 1 || s < 1 || s + d > n) throw ParameterError("tightness instance needs d >= 1, s >= 1, s + d <= n");
  ConstraintSystem sys;
  sys.sense = Sense::MAXIMIZE;
  sys.d = d;
  sys.C = Matrix::Zero(n, n);
  for (int j = s; j < s + d; ++j) sys.C(j, j) = 1.0;
  for (int a = 0; a <= s; ++a) {
    for (int b = a + 1; b <= s; ++b) {
      Matrix e = Matrix::Zero(n, n);
      e(a, b) = e(b, a) = 0.5;
      sys.constraints.push_back({e, Relation::EQ, 0.0});
    }
  }
  for (int j = 1; j <= s; ++j) {
    Matrix e = Matrix::Zero(n, n);
    e(0, 0) = 1.0;
    e(j, j) = -1.0;
    sys.constraints.push_back({e, Relation::EQ, 0.0});
  }
  InstanceBundle ib;
  ib.kind = "tightness";
  ib.d = d;
  ib.system = std::move(sys);
  ib.known = {{"optimum", (d - 1) + 1.0 / (s + 1), "derived"}, {"min_rank", static_cast<double>(d + s), "derived"}};
  return ib;
}

/// The optimal point of tightness_instance: 1/(s+1) on the leading block, 1 on
/// the remaining d-1 objective coordinates.
inline Matrix tightness_optimum(int n, int d, int s) {
  Matrix x = Matrix::Zero(n, n);
  for (int j = 0; j <= s; ++j) x(j, j) = 1.0 / (s + 1);
  for (int j = s + 1; j < s + d; ++j) x(j, j) = 1.0;
  return x;
}

struct OrthogonalGroupsOptions {
  int rows = 60;
  double spread = 0.1;  // relative perturbation of the two variances
  double noise = 0.02;
  bool equal = false;   // identical variances, no perturbation
};

/// Two groups of rows concentrated on axes 0 and 1 with seed-dependent
/// variances, normalized covariances.
inline InstanceBundle orthogonal_groups_instance(int n, std::uint64_t seed, const OrthogonalGroupsOptions& o = {}) {
  if (n < 2) throw ParameterError("orthogonal groups need n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  const double s1 = o.equal ? 1.0 : 1.0 + o.spread * unif(rng);
  const double s2 = o.equal ? 1.0 : 1.0 + o.spread * unif(rng);
  GroupedDataset ds;
  ds.n = n;
  for (int gidx = 0; gidx < 2; ++gidx) {
    Group g;
    g.label = gidx == 0 ? "a" : "b";
    g.rows = Matrix::Zero(o.rows, n);
    const double sd = std::sqrt(gidx == 0 ? s1 : s2);
    for (int r = 0; r < o.rows; ++r) {
      if (o.equal) {
        // deterministic +-1 pattern keeps the two groups exactly symmetric
        g.rows(r, gidx) = (r % 2 == 0) ? sd : -sd;
      } else {
        g.rows(r, gidx) = sd * gauss(rng);
        for (int c = 0; c < n; ++c) g.rows(r, c) += o.noise * gauss(rng);
      }
    }
    ds.groups.push_back(std::move(g));
  }
  InstanceBundle ib;
  ib.kind = "orthogonal";
  ib.seed = seed;
  ib.d = 1;
  ib.covariances = covariances(ds, true);
  return ib;
}

/// k random normalized covariances: B_i = (1/m) A_i^T A_i with Gaussian rows
/// and random per-column scales.
inline CovarianceSet random_covariances(std::size_t k, int n, std::uint64_t seed, int rows = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  const int m = rows > 0 ? rows : 2 * n;
  GroupedDataset ds;
  ds.n = n;
  for (std::size_t i = 0; i < k; ++i) {
    Group g;
    g.label = "g" + std::to_string(i + 1);
    g.rows.resize(m, n);
    Vector scale(n);
    for (int c = 0; c < n; ++c) scale[c] = unif(rng);
    Matrix mix(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) mix(a, b) = gauss(rng);
    for (int r = 0; r < m; ++r) {
      Vector row(n);
      for (int c = 0; c < n; ++c) row[c] = gauss(rng) * scale[c];
      g.rows.row(r) = (mix * row).transpose() / std::sqrt(static_cast<double>(n));
    }
    ds.groups.push_back(std::move(g));
  }
  return covariances(ds, true);
}

struct RankOneSearch {
  double theta = 0.0;
  double value = 0.0;  // g at v(theta) v(theta)^T
  Matrix X;
};

/// Global optimum of g over rank-1 projections of R^2: grid over theta in
/// [0, pi) at 1e-4 spacing, then trisection around the best grid points.
inline RankOneSearch exact_rank_one_2d(const CovarianceSet& cov, Objective obj) {
  if (cov.n() != 2) throw ParameterError("exact rank-one search needs n = 2");
  if (obj.kind == ObjectiveKind::MM_LOSS && obj.beta.empty()) obj.beta = beta(cov, 1);
  obj.validate(cov.k());
  auto eval = [&](double th) {
    Vector v(2);
    v << std::cos(th), std::sin(th);
    Vector z(static_cast<Eigen::Index>(cov.k()));
    for (std::size_t i = 0; i < cov.k(); ++i) z[static_cast<Eigen::Index>(i)] = v.dot(cov.B[i] * v);
    try {
      return objective_value(obj, z, cov);
    } catch (const DegenerateUtility&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const double h = 1e-4;
  const auto steps = static_cast<int>(std::ceil(std::numbers::pi / h));
  std::vector<double> vals(static_cast<std::size_t>(steps));
  for (int j = 0; j < steps; ++j) vals[static_cast<std::size_t>(j)] = eval(j * h);
  // refine every grid point that is a (periodic) local maximum
  RankOneSearch best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < steps; ++j) {
    const double prev = vals[static_cast<std::size_t>((j + steps - 1) % steps)];
    const double next = vals[static_cast<std::size_t>((j + 1) % steps)];
    const double cur = vals[static_cast<std::size_t>(j)];
    if (cur < prev || cur < next) continue;
    double lo = (j - 1) * h, hi = (j + 1) * h;
    while (hi - lo > 1e-9) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (eval(m1) < eval(m2)) lo = m1;
      else hi = m2;
    }
    const double th = 0.5 * (lo + hi);
    const double v = eval(th);
    if (v > best.value) {
      best.value = v;
      best.theta = th;
    }
  }
  best.theta = std::fmod(best.theta + std::numbers::pi, std::numbers::pi);
  Vector v(2);
  v << std::cos(best.theta), std::sin(best.theta);
  best.X = v * v.transpose();
  return best;
}

/// Best g over `trials` random rank-d projections (orthonormalized Gaussian frames).
inline double random_frame_oracle(const CovarianceSet& cov, const Objective& obj, Eigen::Index d, long trials,
                                  std::uint64_t seed) {
  if (trials < 1) throw ParameterError("trials must be positive");
  const Eigen::Index n = cov.n();
  if (d < 1 || d > n) throw ParameterError("d outside [1, n]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = -std::numeric_limits<double>::infinity();
  Matrix g(n, d);
  Vector z(static_cast<Eigen::Index>(cov.k()));
  for (long t = 0; t < trials; ++t) {
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < d; ++b) g(a, b) = gauss(rng);
    const Matrix q = orthonormalize(g);
    for (std::size_t i = 0; i < cov.k(); ++i) z[static_cast<Eigen::Index>(i)] = (q.transpose() * cov.B[i] * q).trace();
    try {
      best = std::max(best, objective_value(obj, z, cov));
    } catch (const DegenerateUtility&) {
    }
  }
  return best;
}

}  // namespace mcdr
