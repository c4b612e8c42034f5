#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace potts {

using BitState = std::vector<std::uint8_t>;

// Upper-triangular QUBO: offset + sum_i linear[i] x_i + sum_{i<j} q_ij x_i x_j.
struct Qubo {
  int num_bits = 0;
  double offset = 0.0;
  std::vector<double> linear;
  std::unordered_map<std::uint64_t, double> quadratic;  // pack(i,j) -> coefficient

  static std::uint64_t pack(int i, int j) {
    if (i > j) std::swap(i, j);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
  }
  static std::pair<int, int> unpack(std::uint64_t key) {
    return {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffULL)};
  }

  explicit Qubo(int n = 0) : num_bits(n), linear(static_cast<std::size_t>(n), 0.0) {
    if (n < 0) throw std::invalid_argument("negative bit count");
  }

  void check_bit(int i) const {
    if (i < 0 || i >= num_bits) throw std::invalid_argument("bit index out of range");
  }

  void add_linear(int i, double c) {
    check_bit(i);
    linear[static_cast<std::size_t>(i)] += c;
  }

  void add_quadratic(int i, int j, double c) {
    check_bit(i);
    check_bit(j);
    if (i == j) throw std::invalid_argument("diagonal term belongs in linear");
    quadratic[pack(i, j)] += c;
  }

  double quad(int i, int j) const {
    auto it = quadratic.find(pack(i, j));
    return it == quadratic.end() ? 0.0 : it->second;
  }
};

inline void check_state(const Qubo& q, const BitState& s) {
  if (static_cast<int>(s.size()) != q.num_bits)
    throw std::invalid_argument("state length does not match num_bits");
  for (std::uint8_t b : s)
    if (b > 1) throw std::invalid_argument("state entry not 0/1");
}

inline double qubo_energy(const Qubo& q, const BitState& s) {
  check_state(q, s);
  double e = q.offset;
  for (int i = 0; i < q.num_bits; ++i)
    if (s[static_cast<std::size_t>(i)]) e += q.linear[static_cast<std::size_t>(i)];
  for (const auto& [key, c] : q.quadratic) {
    auto [i, j] = Qubo::unpack(key);
    if (s[static_cast<std::size_t>(i)] && s[static_cast<std::size_t>(j)]) e += c;
  }
  return e;
}

// CSR adjacency over bits, symmetric. The hot loops (annealing sweeps, group
// refinement) walk this instead of the hash map.
struct QuboView {
  std::vector<int> start;                   // num_bits + 1
  std::vector<std::pair<int, double>> adj;  // (other bit, coefficient)

  std::uint64_t degree(int i) const {
    return static_cast<std::uint64_t>(start[static_cast<std::size_t>(i) + 1] -
                                      start[static_cast<std::size_t>(i)]);
  }
};

inline QuboView make_view(const Qubo& q) {
  QuboView v;
  std::vector<int> deg(static_cast<std::size_t>(q.num_bits), 0);
  for (const auto& [key, c] : q.quadratic) {
    auto [i, j] = Qubo::unpack(key);
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  }
  v.start.assign(static_cast<std::size_t>(q.num_bits) + 1, 0);
  for (int i = 0; i < q.num_bits; ++i)
    v.start[static_cast<std::size_t>(i) + 1] =
        v.start[static_cast<std::size_t>(i)] + deg[static_cast<std::size_t>(i)];
  v.adj.resize(static_cast<std::size_t>(v.start[static_cast<std::size_t>(q.num_bits)]));
  std::vector<int> fill(v.start.begin(), v.start.end() - 1);
  for (const auto& [key, c] : q.quadratic) {
    auto [i, j] = Qubo::unpack(key);
    v.adj[static_cast<std::size_t>(fill[static_cast<std::size_t>(i)]++)] = {j, c};
    v.adj[static_cast<std::size_t>(fill[static_cast<std::size_t>(j)]++)] = {i, c};
  }
  return v;
}

// Energy change from flipping bit b of s.
inline double flip_delta(const Qubo& q, const QuboView& v, const BitState& s, int b) {
  double field = q.linear[static_cast<std::size_t>(b)];
  for (int k = v.start[static_cast<std::size_t>(b)]; k < v.start[static_cast<std::size_t>(b) + 1];
       ++k) {
    const auto& [other, c] = v.adj[static_cast<std::size_t>(k)];
    if (s[static_cast<std::size_t>(other)]) field += c;
  }
  return s[static_cast<std::size_t>(b)] ? -field : field;
}

// Sub-QUBO over the free bits of a clamp. Bit k of the sub-QUBO is free_bits[k]
// of the parent; the parent's clamped values are folded into linear terms and
// the offset, so sub energies equal parent energies of the completed state.
struct ClampedQubo {
  Qubo qubo;
  std::vector<int> free_bits;
};

inline ClampedQubo clamp(const Qubo& q, const std::unordered_map<int, int>& fixed) {
  for (const auto& [bit, val] : fixed) {
    q.check_bit(bit);
    if (val != 0 && val != 1) throw std::invalid_argument("clamp value not 0/1");
  }
  ClampedQubo c;
  std::vector<int> pos(static_cast<std::size_t>(q.num_bits), -1);
  for (int i = 0; i < q.num_bits; ++i) {
    if (fixed.count(i)) continue;
    pos[static_cast<std::size_t>(i)] = static_cast<int>(c.free_bits.size());
    c.free_bits.push_back(i);
  }
  c.qubo = Qubo(static_cast<int>(c.free_bits.size()));
  c.qubo.offset = q.offset;
  for (int i = 0; i < q.num_bits; ++i) {
    double lin = q.linear[static_cast<std::size_t>(i)];
    if (lin == 0.0) continue;
    int p = pos[static_cast<std::size_t>(i)];
    if (p >= 0)
      c.qubo.linear[static_cast<std::size_t>(p)] += lin;
    else if (fixed.at(i))
      c.qubo.offset += lin;
  }
  for (const auto& [key, coeff] : q.quadratic) {
    auto [i, j] = Qubo::unpack(key);
    int pi = pos[static_cast<std::size_t>(i)];
    int pj = pos[static_cast<std::size_t>(j)];
    if (pi >= 0 && pj >= 0) {
      c.qubo.add_quadratic(pi, pj, coeff);
    } else if (pi >= 0) {
      if (fixed.at(j)) c.qubo.linear[static_cast<std::size_t>(pi)] += coeff;
    } else if (pj >= 0) {
      if (fixed.at(i)) c.qubo.linear[static_cast<std::size_t>(pj)] += coeff;
    } else {
      if (fixed.at(i) && fixed.at(j)) c.qubo.offset += coeff;
    }
  }
  return c;
}

// Clamp everything outside `free_bits` at its value in `reference`.
inline ClampedQubo clamp_keep(const Qubo& q, const std::vector<int>& free_bits,
                              const BitState& reference) {
  check_state(q, reference);
  std::vector<char> keep(static_cast<std::size_t>(q.num_bits), 0);
  for (int b : free_bits) {
    q.check_bit(b);
    if (keep[static_cast<std::size_t>(b)]) throw std::invalid_argument("duplicate free bit");
    keep[static_cast<std::size_t>(b)] = 1;
  }
  std::unordered_map<int, int> fixed;
  fixed.reserve(static_cast<std::size_t>(q.num_bits) - free_bits.size());
  for (int i = 0; i < q.num_bits; ++i)
    if (!keep[static_cast<std::size_t>(i)]) fixed.emplace(i, reference[static_cast<std::size_t>(i)]);
  ClampedQubo c = clamp(q, fixed);
  // keep the caller's bit order
  if (c.free_bits != free_bits) {
    ClampedQubo r;
    r.free_bits = free_bits;
    r.qubo = Qubo(static_cast<int>(free_bits.size()));
    r.qubo.offset = c.qubo.offset;
    std::unordered_map<int, int> newpos;
    for (int k = 0; k < static_cast<int>(free_bits.size()); ++k)
      newpos.emplace(free_bits[static_cast<std::size_t>(k)], k);
    for (int k = 0; k < c.qubo.num_bits; ++k)
      r.qubo.linear[static_cast<std::size_t>(
          newpos.at(c.free_bits[static_cast<std::size_t>(k)]))] =
          c.qubo.linear[static_cast<std::size_t>(k)];
    for (const auto& [key, coeff] : c.qubo.quadratic) {
      auto [i, j] = Qubo::unpack(key);
      r.qubo.add_quadratic(newpos.at(c.free_bits[static_cast<std::size_t>(i)]),
                           newpos.at(c.free_bits[static_cast<std::size_t>(j)]), coeff);
    }
    return r;
  }
  return c;
}

// Writes a sub-state back into a copy of the reference state.
inline BitState expand_completion(const ClampedQubo& c, const BitState& sub,
                                  BitState reference) {
  if (sub.size() != c.free_bits.size())
    throw std::invalid_argument("sub-state length does not match free bits");
  for (std::size_t k = 0; k < sub.size(); ++k)
    reference[static_cast<std::size_t>(c.free_bits[k])] = sub[k];
  return reference;
}

}  // namespace potts
