#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "potts/chimera.hpp"
#include "potts/instance.hpp"
#include "potts/onehot.hpp"
#include "potts/partition.hpp"
#include "potts/qubo.hpp"
#include "potts/rng.hpp"

namespace potts {

// Chains indexed by logical bit; a failed bit keeps an empty chain and is
// listed in `unembedded`.
struct Embedding {
  std::vector<std::vector<int>> chains;
  std::vector<int> unembedded;
};

enum class SubproblemKind { multivalued, binary };

// One logical variable's bits, in attempt order. For multivalued groups,
// `required_bit` is the tentatively selected component: if it fails, the
// whole group is dropped.
struct EmbedGroup {
  int var = 0;
  std::vector<int> bits;
  int required_bit = -1;
};

struct EmbedOrder {
  SubproblemKind kind = SubproblemKind::binary;
  std::vector<EmbedGroup> groups;
};

namespace detail {

// Greedy chain growth. A new bit roots at the free qubit minimizing the sum
// of BFS distances to its already-embedded neighbors' chains, then absorbs
// the connecting paths into its own chain.
class ChainEmbedder {
 public:
  ChainEmbedder(const ChimeraGraph& hw, int num_bits)
      : hw_(hw),
        free_(static_cast<std::size_t>(hw.num_nodes()), 1),
        dist_(static_cast<std::size_t>(hw.num_nodes())),
        parent_(static_cast<std::size_t>(hw.num_nodes())),
        cost_(static_cast<std::size_t>(hw.num_nodes())),
        reach_(static_cast<std::size_t>(hw.num_nodes())) {
    for (int v = 0; v < hw.num_nodes(); ++v)
      if (hw.defect[static_cast<std::size_t>(v)]) free_[static_cast<std::size_t>(v)] = 0;
    emb_.chains.resize(static_cast<std::size_t>(num_bits));
  }

  bool embed_bit(int b, const std::vector<int>& embedded_neighbors, Rng& rng) {
    auto& chain = emb_.chains[static_cast<std::size_t>(b)];
    if (embedded_neighbors.empty()) {
      std::vector<int> candidates;
      for (int v = 0; v < hw_.num_nodes(); ++v)
        if (free_[static_cast<std::size_t>(v)]) candidates.push_back(v);
      if (candidates.empty()) return fail(b);
      int root = candidates[static_cast<std::size_t>(rng.uniform_int(
          static_cast<int>(candidates.size())))];
      chain.push_back(root);
      free_[static_cast<std::size_t>(root)] = 0;
      return true;
    }
    const int nn = hw_.num_nodes();
    const int inf = std::numeric_limits<int>::max();
    std::fill(cost_.begin(), cost_.end(), 0LL);
    std::fill(reach_.begin(), reach_.end(), 0);
    std::vector<std::vector<int>> parents;
    parents.reserve(embedded_neighbors.size());
    for (int u : embedded_neighbors) {
      bfs_from_chain(emb_.chains[static_cast<std::size_t>(u)]);
      parents.push_back(parent_);
      for (int v = 0; v < nn; ++v) {
        if (dist_[static_cast<std::size_t>(v)] == inf) continue;
        ++reach_[static_cast<std::size_t>(v)];
        cost_[static_cast<std::size_t>(v)] += dist_[static_cast<std::size_t>(v)];
      }
      dists_.push_back(dist_);
    }
    long long best = std::numeric_limits<long long>::max();
    std::vector<int> candidates;
    const int want = static_cast<int>(embedded_neighbors.size());
    for (int v = 0; v < nn; ++v) {
      if (!free_[static_cast<std::size_t>(v)] || reach_[static_cast<std::size_t>(v)] != want)
        continue;
      long long c = cost_[static_cast<std::size_t>(v)];
      if (c < best) {
        best = c;
        candidates.clear();
      }
      if (c == best) candidates.push_back(v);
    }
    if (candidates.empty()) {
      dists_.clear();
      return fail(b);
    }
    int root = candidates[static_cast<std::size_t>(rng.uniform_int(
        static_cast<int>(candidates.size())))];
    chain.push_back(root);
    free_[static_cast<std::size_t>(root)] = 0;
    for (std::size_t j = 0; j < embedded_neighbors.size(); ++j) {
      int v = root;
      while (dists_[j][static_cast<std::size_t>(v)] > 1) {
        v = parents[j][static_cast<std::size_t>(v)];
        if (free_[static_cast<std::size_t>(v)]) {
          chain.push_back(v);
          free_[static_cast<std::size_t>(v)] = 0;
        }
      }
    }
    dists_.clear();
    return true;
  }

  void release_group(const std::vector<int>& bits) {
    for (int b : bits) {
      auto& chain = emb_.chains[static_cast<std::size_t>(b)];
      for (int v : chain) free_[static_cast<std::size_t>(v)] = 1;
      if (!chain.empty()) {
        chain.clear();
        emb_.unembedded.push_back(b);
      }
    }
  }

  bool embedded(int b) const { return !emb_.chains[static_cast<std::size_t>(b)].empty(); }
  Embedding take() { return std::move(emb_); }

 private:
  bool fail(int b) {
    emb_.unembedded.push_back(b);
    return false;
  }

  // dist 1 = free qubit adjacent to the chain, growing outward over free
  // qubits only
  void bfs_from_chain(const std::vector<int>& target) {
    const int inf = std::numeric_limits<int>::max();
    std::fill(dist_.begin(), dist_.end(), inf);
    std::fill(parent_.begin(), parent_.end(), -1);
    std::deque<int> queue;
    for (int t : target)
      for (int v : hw_.adj[static_cast<std::size_t>(t)]) {
        if (!free_[static_cast<std::size_t>(v)]) continue;
        if (dist_[static_cast<std::size_t>(v)] != inf) continue;
        dist_[static_cast<std::size_t>(v)] = 1;
        queue.push_back(v);
      }
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : hw_.adj[static_cast<std::size_t>(v)]) {
        if (!free_[static_cast<std::size_t>(w)]) continue;
        if (dist_[static_cast<std::size_t>(w)] != inf) continue;
        dist_[static_cast<std::size_t>(w)] = dist_[static_cast<std::size_t>(v)] + 1;
        parent_[static_cast<std::size_t>(w)] = v;
        queue.push_back(w);
      }
    }
  }

  const ChimeraGraph& hw_;
  std::vector<char> free_;
  Embedding emb_;
  std::vector<int> dist_;
  std::vector<int> parent_;
  std::vector<long long> cost_;
  std::vector<int> reach_;
  std::vector<std::vector<int>> dists_;
};

inline std::vector<int> embedded_qubo_neighbors(const QuboView& view, const ChainEmbedder& st,
                                                int b) {
  std::vector<int> out;
  for (int k = view.start[static_cast<std::size_t>(b)];
       k < view.start[static_cast<std::size_t>(b) + 1]; ++k) {
    int other = view.adj[static_cast<std::size_t>(k)].first;
    if (st.embedded(other)) out.push_back(other);
  }
  return out;
}

}  // namespace detail

// Multivalued groups that end with fewer than two embedded bits, or whose
// required bit failed, are dropped entirely and their qubits reused.
inline void apply_group_exclusion(detail::ChainEmbedder& st, SubproblemKind kind,
                                  const EmbedGroup& g) {
  if (kind != SubproblemKind::multivalued) return;
  int count = 0;
  for (int b : g.bits)
    if (st.embedded(b)) ++count;
  bool required_ok = g.required_bit < 0 || st.embedded(g.required_bit);
  if (count < 2 || !required_ok) st.release_group(g.bits);
}

// Embeds the quadratic graph of `logical` into `hw` following a fixed order.
inline Embedding embed_subproblem(const Qubo& logical, const EmbedOrder& order,
                                  const ChimeraGraph& hw, Rng& rng) {
  QuboView view = make_view(logical);
  detail::ChainEmbedder st(hw, logical.num_bits);
  for (const EmbedGroup& g : order.groups) {
    for (int b : g.bits) {
      logical.check_bit(b);
      st.embed_bit(b, detail::embedded_qubo_neighbors(view, st, b), rng);
    }
    apply_group_exclusion(st, order.kind, g);
  }
  return st.take();
}

// Attempt order of one variable's component bits against the current
// embedding state. Criterion 1: the bit interacts (through an instance edge,
// penalty cliques aside) with an already-embedded bit. Criterion 2: the bit
// is the tentatively selected component, i.e. the variable's current value.
// The first bit prefers criterion 1 and, among those, criterion 2; the rest
// follow as criterion-1 bits, then criterion-2, then the remainder.
inline std::vector<int> order_variables(const PottsInstance& inst, const OneHotEncoding& enc,
                                        const Assignment& current,
                                        const std::vector<char>& embedded_bits, int var,
                                        Rng& rng) {
  check_assignment(inst, current);
  if (var < 0 || var >= inst.num_vars) throw std::invalid_argument("variable index out of range");
  if (static_cast<int>(embedded_bits.size()) != enc.num_bits())
    throw std::invalid_argument("embedded flag length does not match encoding");
  const int tentative = current[static_cast<std::size_t>(var)];
  std::vector<char> crit1(static_cast<std::size_t>(inst.q) + 1, 0);
  for (const Edge& e : inst.edges) {
    if (e.i != var && e.j != var) continue;
    int other = e.i == var ? e.j : e.i;
    for (int c = 1; c <= inst.q; ++c) {
      int partner = e.i == var ? wrap_component(c - e.shift, inst.q)
                               : wrap_component(c + e.shift, inst.q);
      if (embedded_bits[static_cast<std::size_t>(enc.bit(other, partner))])
        crit1[static_cast<std::size_t>(c)] = 1;
    }
  }
  std::vector<int> first_pool;
  for (int c = 1; c <= inst.q; ++c)
    if (crit1[static_cast<std::size_t>(c)]) first_pool.push_back(c);
  int first;
  if (first_pool.empty()) {
    first = tentative;
  } else if (crit1[static_cast<std::size_t>(tentative)]) {
    first = tentative;
  } else {
    first = first_pool[static_cast<std::size_t>(rng.uniform_int(
        static_cast<int>(first_pool.size())))];
  }
  std::vector<int> class1, class2, rest;
  for (int c = 1; c <= inst.q; ++c) {
    if (c == first) continue;
    if (crit1[static_cast<std::size_t>(c)])
      class1.push_back(c);
    else if (c == tentative)
      class2.push_back(c);
    else
      rest.push_back(c);
  }
  rng.shuffle(class1);
  rng.shuffle(rest);
  std::vector<int> out{enc.bit(var, first)};
  for (int c : class1) out.push_back(enc.bit(var, c));
  for (int c : class2) out.push_back(enc.bit(var, c));
  for (int c : rest) out.push_back(enc.bit(var, c));
  return out;
}

struct MultivaluedEmbedding {
  Embedding emb;            // indexed by full-encoding bit
  EmbedOrder order;         // realized attempt order
  MultivaluedSelection selection;  // retained variables only
};

// Algorithm-style driver: variables in region order; each variable's bit
// order reacts to what is embedded so far; group exclusion frees qubits
// before the next variable starts.
inline MultivaluedEmbedding embed_multivalued(const PottsInstance& inst,
                                              const OneHotEncoding& enc, const Qubo& q,
                                              const Assignment& current, const Region& region,
                                              const ChimeraGraph& hw, Rng& rng) {
  if (q.num_bits != enc.num_bits()) throw std::invalid_argument("qubo does not match encoding");
  QuboView view = make_view(q);
  detail::ChainEmbedder st(hw, q.num_bits);
  std::vector<char> embedded(static_cast<std::size_t>(q.num_bits), 0);
  MultivaluedEmbedding out;
  out.order.kind = SubproblemKind::multivalued;
  for (int v : region) {
    EmbedGroup g;
    g.var = v;
    g.required_bit = enc.bit(v, current[static_cast<std::size_t>(v)]);
    g.bits = order_variables(inst, enc, current, embedded, v, rng);
    for (int b : g.bits)
      st.embed_bit(b, detail::embedded_qubo_neighbors(view, st, b), rng);
    apply_group_exclusion(st, SubproblemKind::multivalued, g);
    for (int b : g.bits) embedded[static_cast<std::size_t>(b)] = st.embedded(b) ? 1 : 0;
    out.order.groups.push_back(std::move(g));
  }
  for (const EmbedGroup& g : out.order.groups) {
    std::vector<int> comps;
    bool current_in = false;
    for (int b : g.bits)
      if (st.embedded(b)) {
        int c = enc.comp_of(b);
        if (b == g.required_bit) current_in = true;
        comps.push_back(c);
      }
    if (comps.size() < 2 || !current_in) continue;  // excluded group
    // current component first, the rest in attempt order
    std::vector<int> ordered{enc.comp_of(g.required_bit)};
    for (int c : comps)
      if (c != ordered.front()) ordered.push_back(c);
    out.selection.vars.push_back(g.var);
    out.selection.components.push_back(std::move(ordered));
  }
  out.emb = st.take();
  return out;
}

// Binary transit bits embed as singleton groups in region order.
inline Embedding embed_binary(const BinarySubproblem& sub, const ChimeraGraph& hw, Rng& rng) {
  EmbedOrder order;
  order.kind = SubproblemKind::binary;
  for (int k = 0; k < static_cast<int>(sub.vars.size()); ++k)
    order.groups.push_back({sub.vars[static_cast<std::size_t>(k)], {k}, -1});
  return embed_subproblem(sub.reduced, order, hw, rng);
}

// Structural validity; an empty result means the embedding is sound.
inline std::vector<std::string> embedding_violations(const ChimeraGraph& hw, const Qubo& logical,
                                                     const Embedding& emb) {
  std::vector<std::string> bad;
  if (static_cast<int>(emb.chains.size()) != logical.num_bits) {
    bad.push_back("chain table size does not match logical bit count");
    return bad;
  }
  std::vector<int> owner(static_cast<std::size_t>(hw.num_nodes()), -1);
  for (int b = 0; b < logical.num_bits; ++b) {
    const auto& chain = emb.chains[static_cast<std::size_t>(b)];
    for (int v : chain) {
      if (v < 0 || v >= hw.num_nodes()) {
        bad.push_back("bit " + std::to_string(b) + " uses qubit out of range");
        continue;
      }
      if (hw.defect[static_cast<std::size_t>(v)])
        bad.push_back("bit " + std::to_string(b) + " uses defect qubit " + std::to_string(v));
      if (owner[static_cast<std::size_t>(v)] != -1)
        bad.push_back("qubit " + std::to_string(v) + " shared by bits " +
                      std::to_string(owner[static_cast<std::size_t>(v)]) + " and " +
                      std::to_string(b));
      owner[static_cast<std::size_t>(v)] = b;
    }
    if (chain.empty()) continue;
    // connectivity within the chain
    std::vector<char> seen(chain.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int visited = 1;
    auto index_of = [&](int v) {
      for (std::size_t k = 0; k < chain.size(); ++k)
        if (chain[k] == v) return static_cast<int>(k);
      return -1;
    };
    while (!queue.empty()) {
      int k = queue.front();
      queue.pop_front();
      for (int w : hw.adj[static_cast<std::size_t>(chain[static_cast<std::size_t>(k)])]) {
        int kw = index_of(w);
        if (kw >= 0 && !seen[static_cast<std::size_t>(kw)]) {
          seen[static_cast<std::size_t>(kw)] = 1;
          ++visited;
          queue.push_back(kw);
        }
      }
    }
    if (visited != static_cast<int>(chain.size()))
      bad.push_back("bit " + std::to_string(b) + " chain is disconnected");
  }
  for (const auto& [key, c] : logical.quadratic) {
    if (c == 0.0) continue;
    auto [i, j] = Qubo::unpack(key);
    const auto& ci = emb.chains[static_cast<std::size_t>(i)];
    const auto& cj = emb.chains[static_cast<std::size_t>(j)];
    if (ci.empty() || cj.empty()) continue;
    bool covered = false;
    for (int v : ci) {
      for (int w : hw.adj[static_cast<std::size_t>(v)])
        if (std::find(cj.begin(), cj.end(), w) != cj.end()) {
          covered = true;
          break;
        }
      if (covered) break;
    }
    if (!covered)
      bad.push_back("logical edge " + std::to_string(i) + "-" + std::to_string(j) +
                    " has no coupler");
  }
  return bad;
}

struct EmbeddingStats {
  int attempted_vars = 0;
  int retained_vars = 0;
  std::vector<int> qembed;       // per retained variable, embedded-bit count
  double log10_feasible = 0.0;   // log10 of the feasible completion count
  int qubits_used = 0;
  int max_chain = 0;
  double mean_chain = 0.0;
};

// Size of the feasible search space the embedded subproblem can reach:
// product of Q_embed over retained variables for multivalued groups, 2 per
// embedded transit bit for binary ones.
inline EmbeddingStats embedding_stats(const Embedding& emb, const EmbedOrder& order) {
  EmbeddingStats s;
  s.attempted_vars = static_cast<int>(order.groups.size());
  int chains = 0;
  long long qubits = 0;
  for (const EmbedGroup& g : order.groups) {
    int count = 0;
    for (int b : g.bits)
      if (!emb.chains[static_cast<std::size_t>(b)].empty()) {
        ++count;
        ++chains;
        int len = static_cast<int>(emb.chains[static_cast<std::size_t>(b)].size());
        qubits += len;
        s.max_chain = std::max(s.max_chain, len);
      }
    if (count == 0) continue;
    ++s.retained_vars;
    s.qembed.push_back(count);
    s.log10_feasible +=
        order.kind == SubproblemKind::multivalued ? std::log10(static_cast<double>(count))
                                                  : count * std::log10(2.0);
  }
  s.qubits_used = static_cast<int>(qubits);
  s.mean_chain = chains > 0 ? static_cast<double>(qubits) / chains : 0.0;
  return s;
}

}  // namespace potts
