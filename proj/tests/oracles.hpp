#pragma once

// Reference computations for the tests. Nothing here calls into the
// library's numerics; plain loops and a Jacobi eigensolver only.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat gram(const Mat& a) {
  const auto n = a.cols();
  Mat g = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index r = 0; r < a.rows(); ++r) g(i, j) += a(r, i) * a(r, j);
  return g;
}

// cyclic Jacobi; returns eigenvalues sorted descending
inline std::vector<double> jacobi_eigenvalues(Mat a) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

inline double top_sum(const Mat& a, int d) {
  const auto ev = jacobi_eigenvalues(a);
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += ev[static_cast<std::size_t>(i)];
  return s;
}

inline double top_abs_sum(const Mat& a, int count) {
  auto ev = jacobi_eigenvalues(a);
  for (auto& v : ev) v = std::abs(v);
  std::sort(ev.rbegin(), ev.rend());
  double s = 0.0;
  for (int i = 0; i < std::min<int>(count, static_cast<int>(ev.size())); ++i) s += ev[static_cast<std::size_t>(i)];
  return s;
}

// Gram-Schmidt on a Gaussian matrix
inline Mat random_frame(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat v(n, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) v(i, j) = g(rng);
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < j; ++k) v.col(j) -= v.col(k).dot(v.col(j)) * v.col(k);
    v.col(j) /= v.col(j).norm();
  }
  return v;
}

inline Mat random_psd(int n, std::mt19937_64& rng, int rows = 0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(rows ? rows : n + 2, n);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  return gram(a) / static_cast<double>(a.rows());
}

inline Mat random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

// best <C, V V^T> over random frames
inline double frame_search(const Mat& c, int d, long trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double best = -1e300;
  for (long t = 0; t < trials; ++t) {
    const Mat v = random_frame(static_cast<int>(c.rows()), d, rng);
    best = std::max(best, (v.transpose() * c * v).trace());
  }
  return best;
}

inline double central_difference(const std::function<double(const Mat&)>& f, const Mat& x, int i, int j,
                                  double h = 1e-5) {
  Mat e = Mat::Zero(x.rows(), x.cols());
  e(i, j) = 1.0;
  if (i != j) e(j, i) = 1.0;
  const double scale = i == j ? 1.0 : 2.0;
  return (f(x + h * e) - f(x - h * e)) / (2.0 * h * scale);
}

// max over x in [0,1] of f(diag(x, 1-x))
inline std::pair<double, double> scan_diag2(const std::function<double(double)>& f, int steps = 200000) {
  double best = -1e300, arg = 0.0;
  for (int s = 0; s <= steps; ++s) {
    const double x = static_cast<double>(s) / steps;
    const double v = f(x);
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  return {best, arg};
}

inline int max_cut(int n, const std::vector<std::pair<int, int>>& edges) {
  int best = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    int cut = 0;
    for (const auto& [u, v] : edges) cut += ((mask >> u) & 1u) != ((mask >> v) & 1u);
    best = std::max(best, cut);
  }
  return best;
}

// max over u in {+-1/sqrt(n)}^n of min_i u^T B_i u
inline double hypercube_maxmin(const std::vector<Mat>& b) {
  const auto n = b.front().rows();
  double best = -1e300;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Vec u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = ((mask >> i) & 1u ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
    double v = 1e300;
    for (const auto& m : b) v = std::min(v, u.dot(m * u));
    best = std::max(best, v);
  }
  return best;
}

// Delta over every nonempty subset, eigenvalues by Jacobi
inline double delta_enumerate(const std::vector<Mat>& mats) {
  const std::size_t m = mats.size();
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    Mat avg = Mat::Zero(mats[0].rows(), mats[0].cols());
    int size = 0;
    for (std::size_t i = 0; i < m; ++i)
      if ((mask >> i) & 1u) {
        avg += mats[i];
        ++size;
      }
    avg /= size;
    const int count = static_cast<int>(std::floor(std::sqrt(2.0 * size) + 1.0));
    best = std::max(best, top_abs_sum(avg, count));
  }
  return best;
}

// tightness optimum: diagonal X, top (s+1) entries equal to lam, budget d
inline double tightness_lp(int n, int d, int s, int steps = 100000) {
  double best = -1e300;
  for (int t = 0; t <= steps; ++t) {
    const double lam = static_cast<double>(t) / steps;
    double budget = d - (s + 1) * lam;
    if (budget < -1e-12) break;
    double v = lam;  // coordinate s carries weight 1 and sits in the top block
    for (int j = s + 1; j < std::min(n, s + d); ++j) {
      const double x = std::clamp(budget, 0.0, 1.0);
      v += x;
      budget -= x;
    }
    best = std::max(best, v);
  }
  return best;
}

// count of rows per label in a CSV, by scanning lines
inline std::map<std::string, int> label_histogram(const std::string& path, int column) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::map<std::string, int> h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int col = 0;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        if (col == column) break;
        ++col;
        cur.clear();
      } else {
        cur += ch;
      }
    }
    ++h[cur];
  }
  return h;
}

}  // namespace oracle
