#pragma once

#include "mcdr/instances.hpp"

#include <random>
#include <vector>

namespace corpus {

inline mcdr::Graph make(int n, std::vector<std::pair<int, int>> e) { return mcdr::Graph{n, std::move(e)}; }

inline mcdr::Graph cycle(int n) {
  mcdr::Graph g{n, {}};
  for (int i = 0; i < n; ++i) g.edges.emplace_back(i, (i + 1) % n);
  return g;
}

inline mcdr::Graph complete(int n) {
  mcdr::Graph g{n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  return g;
}

inline mcdr::Graph erdos_renyi(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  mcdr::Graph g{n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) g.edges.emplace_back(i, j);
  if (g.edges.empty()) g.edges.emplace_back(0, n - 1);
  return g;
}

// 30 small graphs: named families plus seeded random ones, all on <= 8 vertices
inline std::vector<mcdr::Graph> small_graphs() {
  std::vector<mcdr::Graph> out;
  out.push_back(make(2, {{0, 1}}));
  out.push_back(make(3, {{0, 1}, {1, 2}}));
  out.push_back(complete(3));
  out.push_back(make(4, {{0, 1}, {1, 2}, {2, 3}}));
  out.push_back(cycle(4));
  out.push_back(complete(4));
  out.push_back(make(4, {{0, 1}, {0, 2}, {0, 3}}));
  out.push_back(cycle(5));
  out.push_back(complete(5));
  out.push_back(make(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 2}, {1, 3}}));
  out.push_back(cycle(6));
  out.push_back(complete(6));
  out.push_back(make(6, {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}}));
  out.push_back(cycle(7));
  out.push_back(complete(7));
  out.push_back(cycle(8));
  out.push_back(make(8, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}));
  for (int i = 0; out.size() < 30; ++i) out.push_back(erdos_renyi(4 + i % 5, 0.3 + 0.1 * (i % 4), 9000 + i));
  return out;
}

// larger graphs for the PSD check only
inline std::vector<mcdr::Graph> psd_graphs() {
  std::vector<mcdr::Graph> out = small_graphs();
  out.push_back(complete(9));
  out.push_back(complete(10));
  out.push_back(make(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
                          {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}}));
  out.push_back(erdos_renyi(10, 0.5, 77));
  return out;
}

}  // namespace corpus
