#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "potts/instance.hpp"
#include "potts/qubo.hpp"
#include "potts/rng.hpp"

namespace potts {

// Bit layout of the one-hot encoding: variable i owns the contiguous group
// [i*q, (i+1)*q), bit i*q + (c-1) standing for "variable i holds component c".
struct OneHotEncoding {
  int num_vars = 0;
  int q = 0;
  double lambda = 0.0;

  int num_bits() const { return num_vars * q; }
  int bit(int var, int comp) const { return var * q + (comp - 1); }
  int var_of(int b) const { return b / q; }
  int comp_of(int b) const { return b % q + 1; }
};

struct OneHotQubo {
  Qubo qubo;
  OneHotEncoding enc;
};

// For each edge, component c of i interacts with component c - shift of j
// (mod q). lambda(sum_c x - 1)^2 per group expands to -lambda per bit,
// +2 lambda per in-group pair, +lambda to the offset.
inline OneHotQubo encode(const PottsInstance& inst, double lambda) {
  validate_instance(inst);
  if (lambda <= 0.0) throw std::invalid_argument("penalty weight must be positive");
  OneHotQubo out;
  out.enc = {inst.num_vars, inst.q, lambda};
  out.qubo = Qubo(out.enc.num_bits());
  out.qubo.offset = lambda * inst.num_vars;
  for (int v = 0; v < inst.num_vars; ++v) {
    for (int c = 1; c <= inst.q; ++c) {
      out.qubo.add_linear(out.enc.bit(v, c), -lambda);
      for (int c2 = c + 1; c2 <= inst.q; ++c2)
        out.qubo.add_quadratic(out.enc.bit(v, c), out.enc.bit(v, c2), 2.0 * lambda);
    }
  }
  for (const Edge& e : inst.edges)
    for (int c = 1; c <= inst.q; ++c)
      out.qubo.add_quadratic(out.enc.bit(e.i, c),
                             out.enc.bit(e.j, wrap_component(c - e.shift, inst.q)), e.coupling);
  return out;
}

inline BitState onehot_bits(const OneHotEncoding& enc, const Assignment& a) {
  if (static_cast<int>(a.size()) != enc.num_vars)
    throw std::invalid_argument("assignment length does not match encoding");
  BitState s(static_cast<std::size_t>(enc.num_bits()), 0);
  for (int v = 0; v < enc.num_vars; ++v) {
    int c = a[static_cast<std::size_t>(v)];
    if (c < 1 || c > enc.q) throw std::invalid_argument("component out of range 1..q");
    s[static_cast<std::size_t>(enc.bit(v, c))] = 1;
  }
  return s;
}

struct GroupViolation {
  int var = 0;
  int set_bits = 0;  // != 1
};

struct DecodeResult {
  std::optional<Assignment> assignment;
  std::vector<GroupViolation> violations;
  bool feasible() const { return assignment.has_value(); }
};

inline DecodeResult decode(const OneHotEncoding& enc, const BitState& s) {
  if (static_cast<int>(s.size()) != enc.num_bits())
    throw std::invalid_argument("state length does not match encoding");
  DecodeResult r;
  Assignment a(static_cast<std::size_t>(enc.num_vars), 0);
  for (int v = 0; v < enc.num_vars; ++v) {
    int count = 0;
    for (int c = 1; c <= enc.q; ++c)
      if (s[static_cast<std::size_t>(enc.bit(v, c))]) {
        ++count;
        a[static_cast<std::size_t>(v)] = c;
      }
    if (count != 1) r.violations.push_back({v, count});
  }
  if (r.violations.empty()) r.assignment = std::move(a);
  return r;
}

struct LambdaBounds {
  double safe = 1.0;         // feasibility of the ground state guaranteed
  double window_low = 0.0;   // useful range observed in practice
  double window_high = 0.0;
};

// A broken group can gain at most the total incident coupling weight, so
// twice the worst variable's incident weight plus one dominates any repair.
inline LambdaBounds lambda_bounds(const PottsInstance& inst) {
  validate_instance(inst);
  std::vector<double> incident(static_cast<std::size_t>(inst.num_vars), 0.0);
  double max_abs = 0.0;
  for (const Edge& e : inst.edges) {
    incident[static_cast<std::size_t>(e.i)] += std::abs(e.coupling);
    incident[static_cast<std::size_t>(e.j)] += std::abs(e.coupling);
    max_abs = std::max(max_abs, std::abs(e.coupling));
  }
  double worst = 0.0;
  for (double w : incident) worst = std::max(worst, w);
  return {2.0 * worst + 1.0, max_abs, 2.0 * max_abs};
}

inline double min_safe_lambda(const PottsInstance& inst) { return lambda_bounds(inst).safe; }

// Experiments default to the top of the practical window.
inline double default_lambda(const PottsInstance& inst) {
  double hi = lambda_bounds(inst).window_high;
  return hi > 0.0 ? hi : 1.0;
}

// Exhaustive per-group descent: for one variable's group of q bits, picks the
// best of the 2^q patterns given the rest of the state (penalty terms are part
// of the coefficients). Sweeps groups in a fresh random order until a full
// sweep changes nothing. Ties keep the current pattern, otherwise the lowest
// pattern value wins.
inline void onehot_group_refine(const Qubo& q, const QuboView& view, const OneHotEncoding& enc,
                                BitState& s, Rng& rng) {
  check_state(q, s);
  if (q.num_bits != enc.num_bits())
    throw std::invalid_argument("qubo does not match encoding");
  const int nq = enc.q;
  if (nq > 20) throw std::invalid_argument("group too large for exhaustive refinement");
  std::vector<double> field(static_cast<std::size_t>(nq));
  std::vector<double> pairc(static_cast<std::size_t>(nq * nq));
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> order = rng.permutation(enc.num_vars);
    for (int v : order) {
      const int base = enc.bit(v, 1);
      // field = linear + couplings to set bits outside the group
      for (int c = 0; c < nq; ++c) {
        int b = base + c;
        double f = q.linear[static_cast<std::size_t>(b)];
        for (int k = view.start[static_cast<std::size_t>(b)];
             k < view.start[static_cast<std::size_t>(b) + 1]; ++k) {
          const auto& [other, coeff] = view.adj[static_cast<std::size_t>(k)];
          if (other >= base && other < base + nq) continue;
          if (s[static_cast<std::size_t>(other)]) f += coeff;
        }
        field[static_cast<std::size_t>(c)] = f;
        for (int c2 = 0; c2 < nq; ++c2)
          pairc[static_cast<std::size_t>(c * nq + c2)] = c2 > c ? q.quad(base + c, base + c2) : 0.0;
      }
      unsigned cur = 0;
      for (int c = 0; c < nq; ++c)
        if (s[static_cast<std::size_t>(base + c)]) cur |= 1u << c;
      auto pattern_energy = [&](unsigned pat) {
        double e = 0.0;
        for (int c = 0; c < nq; ++c) {
          if (!(pat & (1u << c))) continue;
          e += field[static_cast<std::size_t>(c)];
          for (int c2 = c + 1; c2 < nq; ++c2)
            if (pat & (1u << c2)) e += pairc[static_cast<std::size_t>(c * nq + c2)];
        }
        return e;
      };
      unsigned best = cur;
      double best_e = pattern_energy(cur);
      for (unsigned pat = 0; pat < (1u << nq); ++pat) {
        if (pat == cur) continue;
        double e = pattern_energy(pat);
        if (e < best_e) {
          best = pat;
          best_e = e;
        }
      }
      if (best != cur) {
        for (int c = 0; c < nq; ++c)
          s[static_cast<std::size_t>(base + c)] = (best >> c) & 1u;
        changed = true;
      }
    }
  }
}

}  // namespace potts
