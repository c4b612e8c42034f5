#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "potts/rng.hpp"

namespace potts {

// One weighted shifted-delta interaction: the edge contributes `coupling`
// to the energy exactly when S_i == S_j + shift (mod q).
struct Edge {
  int i = 0;
  int j = 0;
  double coupling = 0.0;
  int shift = 0;
};

// Components take values 1..q.
using Assignment = std::vector<int>;

struct PottsInstance {
  int num_vars = 0;
  int q = 2;
  std::vector<Edge> edges;
  // free-form, order-preserving; round-trips through the instance file
  std::vector<std::pair<std::string, std::string>> metadata;
};

enum class ModelKind { ferromagnetic, anti_ferromagnetic, potts_glass, potts_gauge_glass };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ferromagnetic: return "ferromagnetic";
    case ModelKind::anti_ferromagnetic: return "anti-ferromagnetic";
    case ModelKind::potts_glass: return "potts-glass";
    case ModelKind::potts_gauge_glass: return "potts-gauge-glass";
  }
  throw std::invalid_argument("unknown model kind");
}

struct LatticeSpec {
  int lx = 1;
  int ly = 1;
  int lz = 1;
  bool periodic = true;
  int volume() const { return lx * ly * lz; }
};

// Maps an arbitrary integer onto the component range 1..q.
inline int wrap_component(int c, int q) {
  int r = (c - 1) % q;
  if (r < 0) r += q;
  return r + 1;
}

// delta(a, b + shift mod q) for components a, b in 1..q.
inline bool shifted_match(int a, int b, int shift, int q) {
  int d = (a - b - shift) % q;
  if (d < 0) d += q;
  return d == 0;
}

// Contribution of edge e given the components of its two endpoints.
inline double edge_value(const Edge& e, int ci, int cj, int q) {
  return shifted_match(ci, cj, e.shift, q) ? e.coupling : 0.0;
}

inline void check_assignment(const PottsInstance& inst, const Assignment& a) {
  if (static_cast<int>(a.size()) != inst.num_vars)
    throw std::invalid_argument("assignment length does not match num_vars");
  for (int c : a)
    if (c < 1 || c > inst.q)
      throw std::invalid_argument("assignment component out of range 1..q");
}

inline void validate_instance(const PottsInstance& inst) {
  if (inst.num_vars < 0) throw std::invalid_argument("negative num_vars");
  if (inst.q < 2) throw std::invalid_argument("q must be at least 2");
  for (const Edge& e : inst.edges) {
    if (e.i < 0 || e.i >= inst.num_vars || e.j < 0 || e.j >= inst.num_vars)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.i == e.j) throw std::invalid_argument("self-loop edge");
  }
}

inline double energy(const PottsInstance& inst, const Assignment& a) {
  check_assignment(inst, a);
  double h = 0.0;
  for (const Edge& e : inst.edges)
    h += edge_value(e, a[static_cast<std::size_t>(e.i)], a[static_cast<std::size_t>(e.j)], inst.q);
  return h;
}

// Per-variable adjacency: for each variable, the (edge index, other endpoint)
// pairs of its incident edges, in edge order.
using VarAdjacency = std::vector<std::vector<std::pair<int, int>>>;

inline VarAdjacency var_adjacency(const PottsInstance& inst) {
  VarAdjacency adj(static_cast<std::size_t>(inst.num_vars));
  for (int k = 0; k < static_cast<int>(inst.edges.size()); ++k) {
    const Edge& e = inst.edges[static_cast<std::size_t>(k)];
    adj[static_cast<std::size_t>(e.i)].emplace_back(k, e.j);
    adj[static_cast<std::size_t>(e.j)].emplace_back(k, e.i);
  }
  return adj;
}

namespace detail {

// Sum of the incident edge terms of variable v if it held component c,
// everything else as in `a`. Orientation of the shift matters.
inline double local_energy_at(const PottsInstance& inst, const VarAdjacency& adj,
                              const Assignment& a, int v, int c) {
  double h = 0.0;
  for (auto [k, other] : adj[static_cast<std::size_t>(v)]) {
    const Edge& e = inst.edges[static_cast<std::size_t>(k)];
    int co = a[static_cast<std::size_t>(other)];
    h += (v == e.i) ? edge_value(e, c, co, inst.q) : edge_value(e, co, c, inst.q);
  }
  return h;
}

}  // namespace detail

// Sum of the edge terms incident to variable v. Summing over all v counts
// every edge twice.
inline double local_energy(const PottsInstance& inst, const Assignment& a, int v) {
  check_assignment(inst, a);
  if (v < 0 || v >= inst.num_vars) throw std::invalid_argument("variable index out of range");
  double h = 0.0;
  for (const Edge& e : inst.edges) {
    if (e.i != v && e.j != v) continue;
    h += edge_value(e, a[static_cast<std::size_t>(e.i)], a[static_cast<std::size_t>(e.j)], inst.q);
  }
  return h;
}

// Single-variable descent: sweeps variables in a fresh random order until a
// full sweep changes nothing. Ties keep the current component, otherwise the
// lowest component index wins. Deterministic given the seed.
inline Assignment greedy_refine(const PottsInstance& inst, Assignment a, std::uint64_t seed) {
  check_assignment(inst, a);
  VarAdjacency adj = var_adjacency(inst);
  Rng rng(seed);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> order = rng.permutation(inst.num_vars);
    for (int v : order) {
      int cur = a[static_cast<std::size_t>(v)];
      double e_cur = detail::local_energy_at(inst, adj, a, v, cur);
      int best_c = 0;
      double best_e = 0.0;
      for (int c = 1; c <= inst.q; ++c) {
        double e = detail::local_energy_at(inst, adj, a, v, c);
        if (best_c == 0 || e < best_e) {
          best_c = c;
          best_e = e;
        }
      }
      if (best_e < e_cur) {  // keep current on ties
        a[static_cast<std::size_t>(v)] = best_c;
        changed = true;
      }
    }
  }
  return a;
}

namespace detail {

inline int lattice_site(const LatticeSpec& s, int x, int y, int z) {
  return x + s.lx * (y + s.ly * z);
}

}  // namespace detail

// Cubic-lattice instance of one of the four stock models. Site order is
// x-fastest; per site the +x, +y, +z bonds are emitted in that order, so the
// edge list and every coupling draw are reproducible from the seed.
inline PottsInstance generate_instance(ModelKind kind, const LatticeSpec& lat, int q,
                                       std::uint64_t seed) {
  if (lat.lx < 1 || lat.ly < 1 || lat.lz < 1)
    throw std::invalid_argument("lattice dimensions must be positive");
  if (q < 2) throw std::invalid_argument("q must be at least 2");
  if (lat.periodic && (lat.lx == 2 || lat.ly == 2 || lat.lz == 2))
    throw std::invalid_argument("periodic length-2 direction would double bonds");

  PottsInstance inst;
  inst.num_vars = lat.volume();
  inst.q = q;
  Rng rng(seed);

  auto draw = [&](void) -> std::pair<double, int> {
    switch (kind) {
      case ModelKind::ferromagnetic:
        return {-1.0, 0};
      case ModelKind::anti_ferromagnetic:
        return {+1.0, 0};
      case ModelKind::potts_glass:
        return {rng.coin() ? +1.0 : -1.0, 0};
      case ModelKind::potts_gauge_glass: {
        int u = rng.uniform_int(4);  // shifts 0,0,+1,-1
        return {-1.0, u < 2 ? 0 : (u == 2 ? +1 : -1)};
      }
    }
    throw std::invalid_argument("unknown model kind");
  };

  const int dims[3] = {lat.lx, lat.ly, lat.lz};
  for (int z = 0; z < lat.lz; ++z)
    for (int y = 0; y < lat.ly; ++y)
      for (int x = 0; x < lat.lx; ++x) {
        int i = detail::lattice_site(lat, x, y, z);
        const int coord[3] = {x, y, z};
        for (int d = 0; d < 3; ++d) {
          if (dims[d] == 1) continue;
          if (!lat.periodic && coord[d] == dims[d] - 1) continue;
          int nx = x, ny = y, nz = z;
          (d == 0 ? nx : d == 1 ? ny : nz) = (coord[d] + 1) % dims[d];
          int j = detail::lattice_site(lat, nx, ny, nz);
          auto [coupling, shift] = draw();
          inst.edges.push_back({i, j, coupling, shift});
        }
      }

  inst.metadata.emplace_back("kind", to_string(kind));
  inst.metadata.emplace_back("dims", std::to_string(lat.lx) + "x" + std::to_string(lat.ly) +
                                         "x" + std::to_string(lat.lz));
  inst.metadata.emplace_back("periodic", lat.periodic ? "1" : "0");
  inst.metadata.emplace_back("seed", std::to_string(seed));
  return inst;
}

// Uniform random feasible assignment.
inline Assignment random_assignment(const PottsInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  Assignment a(static_cast<std::size_t>(inst.num_vars));
  for (int& c : a) c = 1 + rng.uniform_int(inst.q);
  return a;
}

}  // namespace potts
