#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "potts/instance.hpp"
#include "potts/onehot.hpp"
#include "potts/qubo.hpp"
#include "potts/rng.hpp"

namespace potts {

using Region = std::vector<int>;  // variable indices, growth order

// Random connected region: start from a random variable, repeatedly pick a
// uniform random neighbor of the region. Stops early if the connected
// component is exhausted.
inline Region grow_region(const PottsInstance& inst, int target_size, Rng& rng) {
  if (target_size < 1) throw std::invalid_argument("region size must be at least 1");
  if (inst.num_vars == 0) throw std::invalid_argument("empty instance");
  VarAdjacency adj = var_adjacency(inst);
  std::vector<char> chosen(static_cast<std::size_t>(inst.num_vars), 0);
  std::vector<char> fringe(static_cast<std::size_t>(inst.num_vars), 0);
  Region region;
  std::vector<int> frontier;
  auto add = [&](int v) {
    chosen[static_cast<std::size_t>(v)] = 1;
    region.push_back(v);
    for (auto [k, other] : adj[static_cast<std::size_t>(v)]) {
      (void)k;
      if (!chosen[static_cast<std::size_t>(other)] && !fringe[static_cast<std::size_t>(other)]) {
        fringe[static_cast<std::size_t>(other)] = 1;
        frontier.push_back(other);
      }
    }
  };
  add(rng.uniform_int(inst.num_vars));
  while (static_cast<int>(region.size()) < target_size && !frontier.empty()) {
    int pick = rng.uniform_int(static_cast<int>(frontier.size()));
    int v = frontier[static_cast<std::size_t>(pick)];
    frontier[static_cast<std::size_t>(pick)] = frontier.back();
    frontier.pop_back();
    fringe[static_cast<std::size_t>(v)] = 0;
    add(v);
  }
  return region;
}

// --- random method ---------------------------------------------------------

struct RandomPartition {
  std::vector<int> chosen_bits;  // growth order
  ClampedQubo sub;
};

// Connected random set of bits on the QUBO adjacency graph (interaction and
// penalty couplings alike), everything else clamped at `current`. If a
// connected component runs dry before the budget is met, growth restarts
// from a fresh random unchosen bit.
inline RandomPartition random_partition(const Qubo& q, const BitState& current, int bit_budget,
                                        Rng& rng) {
  if (bit_budget < 1) throw std::invalid_argument("bit budget must be at least 1");
  if (q.num_bits == 0) throw std::invalid_argument("empty qubo");
  check_state(q, current);
  int budget = std::min(bit_budget, q.num_bits);
  QuboView view = make_view(q);
  std::vector<char> chosen(static_cast<std::size_t>(q.num_bits), 0);
  std::vector<char> fringe(static_cast<std::size_t>(q.num_bits), 0);
  std::vector<int> bits;
  std::vector<int> frontier;
  auto add = [&](int b) {
    chosen[static_cast<std::size_t>(b)] = 1;
    bits.push_back(b);
    for (int k = view.start[static_cast<std::size_t>(b)];
         k < view.start[static_cast<std::size_t>(b) + 1]; ++k) {
      int other = view.adj[static_cast<std::size_t>(k)].first;
      if (!chosen[static_cast<std::size_t>(other)] && !fringe[static_cast<std::size_t>(other)]) {
        fringe[static_cast<std::size_t>(other)] = 1;
        frontier.push_back(other);
      }
    }
  };
  auto fresh_start = [&]() {
    int skip = rng.uniform_int(q.num_bits - static_cast<int>(bits.size()));
    for (int b = 0; b < q.num_bits; ++b) {
      if (chosen[static_cast<std::size_t>(b)]) continue;
      if (skip-- == 0) {
        if (fringe[static_cast<std::size_t>(b)]) {
          fringe[static_cast<std::size_t>(b)] = 0;
          auto it = std::find(frontier.begin(), frontier.end(), b);
          if (it != frontier.end()) frontier.erase(it);
        }
        add(b);
        return;
      }
    }
  };
  fresh_start();
  while (static_cast<int>(bits.size()) < budget) {
    if (frontier.empty()) {
      fresh_start();
      continue;
    }
    int pick = rng.uniform_int(static_cast<int>(frontier.size()));
    int b = frontier[static_cast<std::size_t>(pick)];
    frontier[static_cast<std::size_t>(pick)] = frontier.back();
    frontier.pop_back();
    fringe[static_cast<std::size_t>(b)] = 0;
    add(b);
  }
  RandomPartition p;
  p.chosen_bits = bits;
  p.sub = clamp_keep(q, bits, current);
  return p;
}

// --- multivalued method ----------------------------------------------------

// Per region variable: which components stay free. The current component is
// always selected (and listed first), so the incoming solution remains a
// feasible completion of the sub-QUBO.
struct MultivaluedSelection {
  Region vars;
  std::vector<std::vector<int>> components;
};

struct MultivaluedPartition {
  MultivaluedSelection selection;
  ClampedQubo sub;
};

inline MultivaluedSelection multivalued_select(const PottsInstance& inst,
                                               const Assignment& current, const Region& region,
                                               int components_per_var, Rng& rng) {
  check_assignment(inst, current);
  if (components_per_var < 2) throw std::invalid_argument("need at least two components per variable");
  if (components_per_var > inst.q)
    throw std::invalid_argument("components per variable exceeds q");
  MultivaluedSelection sel;
  sel.vars = region;
  sel.components.reserve(region.size());
  std::vector<int> others;
  for (int v : region) {
    if (v < 0 || v >= inst.num_vars) throw std::invalid_argument("region variable out of range");
    int cur = current[static_cast<std::size_t>(v)];
    others.clear();
    for (int c = 1; c <= inst.q; ++c)
      if (c != cur) others.push_back(c);
    rng.shuffle(others);
    std::vector<int> comps{cur};
    for (int k = 0; k < components_per_var - 1; ++k)
      comps.push_back(others[static_cast<std::size_t>(k)]);
    sel.components.push_back(std::move(comps));
  }
  return sel;
}

// Free bits are the selected components of the region variables; all other
// bits stay clamped at the one-hot image of `current` (so unselected in-region
// components are clamped to zero). Penalty terms ride along unchanged.
inline MultivaluedPartition multivalued_partition(const Qubo& q, const OneHotEncoding& enc,
                                                  const Assignment& current,
                                                  const MultivaluedSelection& sel) {
  if (q.num_bits != enc.num_bits()) throw std::invalid_argument("qubo does not match encoding");
  if (sel.vars.size() != sel.components.size())
    throw std::invalid_argument("selection shape mismatch");
  BitState reference = onehot_bits(enc, current);
  std::vector<int> free_bits;
  for (std::size_t k = 0; k < sel.vars.size(); ++k) {
    int v = sel.vars[k];
    const auto& comps = sel.components[k];
    if (comps.size() < 2) throw std::invalid_argument("selection needs at least two components");
    if (comps.empty() || comps.front() != current[static_cast<std::size_t>(v)])
      throw std::invalid_argument("selection must keep the current component first");
    for (int c : comps) free_bits.push_back(enc.bit(v, c));
  }
  MultivaluedPartition p;
  p.selection = sel;
  p.sub = clamp_keep(q, free_bits, reference);
  return p;
}

// --- binary method ---------------------------------------------------------

// y_k = 0 keeps region variable k at alpha[k] (its current component),
// y_k = 1 moves it to beta[k]. The reduced QUBO is exact: its energy at y
// plus offset_full equals the full Potts energy after applying y.
struct BinarySubproblem {
  Region vars;
  std::vector<int> alpha;
  std::vector<int> beta;
  Qubo reduced;
  double offset_full = 0.0;
};

inline BinarySubproblem binary_partition(const PottsInstance& inst, const Assignment& current,
                                         const Region& region, Rng& rng) {
  check_assignment(inst, current);
  BinarySubproblem sub;
  sub.vars = region;
  sub.offset_full = energy(inst, current);
  std::vector<int> pos(static_cast<std::size_t>(inst.num_vars), -1);
  for (std::size_t k = 0; k < region.size(); ++k) {
    int v = region[k];
    if (v < 0 || v >= inst.num_vars) throw std::invalid_argument("region variable out of range");
    if (pos[static_cast<std::size_t>(v)] != -1)
      throw std::invalid_argument("duplicate region variable");
    pos[static_cast<std::size_t>(v)] = static_cast<int>(k);
    int cur = current[static_cast<std::size_t>(v)];
    // move target: uniform among the other q-1 components
    int off = 1 + rng.uniform_int(inst.q - 1);
    sub.alpha.push_back(cur);
    sub.beta.push_back(wrap_component(cur + off, inst.q));
  }
  sub.reduced = Qubo(static_cast<int>(region.size()));
  for (const Edge& e : inst.edges) {
    int pi = pos[static_cast<std::size_t>(e.i)];
    int pj = pos[static_cast<std::size_t>(e.j)];
    if (pi >= 0 && pj >= 0) {
      double aa = edge_value(e, sub.alpha[static_cast<std::size_t>(pi)],
                             sub.alpha[static_cast<std::size_t>(pj)], inst.q);
      double ab = edge_value(e, sub.alpha[static_cast<std::size_t>(pi)],
                             sub.beta[static_cast<std::size_t>(pj)], inst.q);
      double ba = edge_value(e, sub.beta[static_cast<std::size_t>(pi)],
                             sub.alpha[static_cast<std::size_t>(pj)], inst.q);
      double bb = edge_value(e, sub.beta[static_cast<std::size_t>(pi)],
                             sub.beta[static_cast<std::size_t>(pj)], inst.q);
      double r = aa - ab - ba + bb;
      if (r != 0.0) sub.reduced.add_quadratic(pi, pj, r);
      sub.reduced.add_linear(pi, ba - aa);
      sub.reduced.add_linear(pj, ab - aa);
    } else if (pi >= 0) {
      int cj = current[static_cast<std::size_t>(e.j)];
      sub.reduced.add_linear(pi, edge_value(e, sub.beta[static_cast<std::size_t>(pi)], cj, inst.q) -
                                     edge_value(e, sub.alpha[static_cast<std::size_t>(pi)], cj,
                                                inst.q));
    } else if (pj >= 0) {
      int ci = current[static_cast<std::size_t>(e.i)];
      sub.reduced.add_linear(pj, edge_value(e, ci, sub.beta[static_cast<std::size_t>(pj)], inst.q) -
                                     edge_value(e, ci, sub.alpha[static_cast<std::size_t>(pj)],
                                                inst.q));
    }
  }
  return sub;
}

// Applies a transit vector; the result is feasible by construction.
inline Assignment apply_binary_solution(const BinarySubproblem& sub, const BitState& y,
                                        Assignment current) {
  if (y.size() != sub.vars.size()) throw std::invalid_argument("transit length mismatch");
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] > 1) throw std::invalid_argument("transit entry not 0/1");
    current[static_cast<std::size_t>(sub.vars[k])] = y[k] ? sub.beta[k] : sub.alpha[k];
  }
  return current;
}

}  // namespace potts
