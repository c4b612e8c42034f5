#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "potts/rng.hpp"

namespace potts {

// m x n grid of K_{l,l} cells. Within a cell, shore 0 and shore 1 are fully
// coupled; shore-0 qubits couple to the same position in the cell below,
// shore-1 qubits to the same position in the cell to the right. Defect
// qubits keep their index but lose every coupler.
struct ChimeraGraph {
  int m = 1;
  int n = 1;
  int l = 1;
  std::vector<char> defect;
  std::vector<std::vector<int>> adj;

  int num_nodes() const { return 2 * m * n * l; }
  int node(int row, int col, int shore, int k) const {
    return ((row * n + col) * 2 + shore) * l + k;
  }
};

inline ChimeraGraph make_chimera(int m, int n, int l, const std::vector<int>& defects = {}) {
  if (m < 1 || n < 1 || l < 1) throw std::invalid_argument("chimera dimensions must be positive");
  ChimeraGraph g;
  g.m = m;
  g.n = n;
  g.l = l;
  g.defect.assign(static_cast<std::size_t>(g.num_nodes()), 0);
  for (int d : defects) {
    if (d < 0 || d >= g.num_nodes()) throw std::invalid_argument("defect index out of range");
    g.defect[static_cast<std::size_t>(d)] = 1;
  }
  g.adj.resize(static_cast<std::size_t>(g.num_nodes()));
  auto link = [&](int a, int b) {
    if (g.defect[static_cast<std::size_t>(a)] || g.defect[static_cast<std::size_t>(b)]) return;
    g.adj[static_cast<std::size_t>(a)].push_back(b);
    g.adj[static_cast<std::size_t>(b)].push_back(a);
  };
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) {
      for (int a = 0; a < l; ++a)
        for (int b = 0; b < l; ++b) link(g.node(r, c, 0, a), g.node(r, c, 1, b));
      if (r + 1 < m)
        for (int k = 0; k < l; ++k) link(g.node(r, c, 0, k), g.node(r + 1, c, 0, k));
      if (c + 1 < n)
        for (int k = 0; k < l; ++k) link(g.node(r, c, 1, k), g.node(r, c + 1, 1, k));
    }
  return g;
}

inline std::int64_t chimera_edge_count(const ChimeraGraph& g) {
  std::int64_t twice = 0;
  for (const auto& nbrs : g.adj) twice += static_cast<std::int64_t>(nbrs.size());
  return twice / 2;
}

// Distinct random defect indices.
inline std::vector<int> random_defects(int m, int n, int l, int count, std::uint64_t seed) {
  int total = 2 * m * n * l;
  if (count < 0 || count > total) throw std::invalid_argument("defect count out of range");
  Rng rng(seed);
  std::vector<int> all(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) all[static_cast<std::size_t>(i)] = i;
  rng.shuffle(all);
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace potts
