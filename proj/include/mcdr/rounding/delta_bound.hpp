#pragma once

#include "mcdr/error.hpp"
#include "mcdr/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mcdr {

struct DeltaBound {
  double value = 0.0;
  bool exact = true;  // false when subsets were sampled
};

inline constexpr std::size_t kDeltaExactLimit = 20;

namespace detail {

// Sum of the top floor(sqrt(2|S|) + 1) singular values of the mean of the subset.
inline double subset_score(const std::vector<Matrix>& mats, const std::vector<std::size_t>& idx) {
  Matrix avg = Matrix::Zero(mats.front().rows(), mats.front().cols());
  for (std::size_t i : idx) avg += mats[i];
  avg /= static_cast<double>(idx.size());
  const auto count = static_cast<Eigen::Index>(std::floor(std::sqrt(2.0 * static_cast<double>(idx.size())) + 1.0 + 1e-12));
  Vector sv = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrize(avg), Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs();
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<double>());
  const Eigen::Index take = std::min<Eigen::Index>(count, sv.size());
  return sv.head(take).sum();
}

}  // namespace detail

/// Delta(A): max over nonempty subsets S of the sum of the top
/// floor(sqrt(2|S|) + 1) singular values of the average of A_S.
/// Exact for at most 20 matrices; otherwise singletons, the full set and
/// `samples` random subsets are scored and the result is flagged.
inline DeltaBound delta_bound(const std::vector<Matrix>& mats, std::uint64_t seed = 0, int samples = 4096) {
  if (mats.empty()) throw ParameterError("delta bound needs at least one matrix");
  DeltaBound out;
  const std::size_t m = mats.size();
  std::vector<std::size_t> idx;
  if (m <= kDeltaExactLimit) {
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
      idx.clear();
      for (std::size_t i = 0; i < m; ++i)
        if (mask >> i & 1U) idx.push_back(i);
      out.value = std::max(out.value, detail::subset_score(mats, idx));
    }
    return out;
  }
  out.exact = false;
  for (std::size_t i = 0; i < m; ++i) out.value = std::max(out.value, detail::subset_score(mats, {i}));
  idx.resize(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  out.value = std::max(out.value, detail::subset_score(mats, idx));
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int s = 0; s < samples; ++s) {
    idx.clear();
    for (std::size_t i = 0; i < m; ++i)
      if (coin(rng)) idx.push_back(i);
    if (!idx.empty()) out.value = std::max(out.value, detail::subset_score(mats, idx));
  }
  return out;
}

}  // namespace mcdr
