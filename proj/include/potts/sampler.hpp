#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "potts/qubo.hpp"
#include "potts/rng.hpp"

namespace potts {

// Downstream code treats a sampler like a remote service; this is the error
// such a service is allowed to raise per call.
struct SamplerTransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Sample {
  BitState state;
  double energy = 0.0;
};

// Samples sorted by energy; ties keep read order, so the result of a given
// seed is reproducible bit for bit.
struct SampleSet {
  std::vector<Sample> samples;
  int reads = 0;
};

inline const Sample& best_of(const SampleSet& set) {
  if (set.samples.empty()) throw std::invalid_argument("empty sample set");
  return set.samples.front();
}

struct AnnealSchedule {
  int sweeps = 100;
  double beta_initial = 0.1;
  double beta_final = 10.0;
};

inline void validate_schedule(const AnnealSchedule& s) {
  if (s.sweeps < 1) throw std::invalid_argument("sweeps must be at least 1");
  if (!(s.beta_initial > 0.0) || !(s.beta_final > 0.0))
    throw std::invalid_argument("inverse temperatures must be positive");
  if (s.beta_initial > s.beta_final)
    throw std::invalid_argument("schedule must heat up (beta_initial <= beta_final)");
}

// Scale-free default: endpoints relative to the largest coefficient magnitude,
// so scaling the problem does not change the acceptance profile.
inline AnnealSchedule default_schedule(const Qubo& q, int sweeps = 100) {
  double maxc = 0.0;
  for (double l : q.linear) maxc = std::max(maxc, std::abs(l));
  for (const auto& [key, c] : q.quadratic) maxc = std::max(maxc, std::abs(c));
  if (maxc == 0.0) maxc = 1.0;
  return {sweeps, 0.1 / maxc, 10.0 / maxc};
}

// Exhaustive minimum by Gray-code enumeration. Deltas are accumulated
// incrementally; candidate minima are re-evaluated exactly so accumulated
// rounding cannot pick the wrong state. Ties resolve to the state whose
// bit pattern, read as an integer (bit k weighted 2^k), is smallest.
inline Sample brute_force(const Qubo& q, int max_bits = 25) {
  if (q.num_bits > max_bits) throw std::invalid_argument("qubo too large for brute force");
  BitState s(static_cast<std::size_t>(q.num_bits), 0);
  if (q.num_bits == 0) return {s, q.offset};
  QuboView view = make_view(q);
  double e = q.offset;
  double best_e = e;
  std::uint64_t best_code = 0;
  std::uint64_t code = 0;
  const std::uint64_t total = 1ULL << q.num_bits;
  for (std::uint64_t k = 1; k < total; ++k) {
    int b = std::countr_zero(k);
    e += flip_delta(q, view, s, b);
    code ^= 1ULL << b;
    s[static_cast<std::size_t>(b)] ^= 1;
    if (e <= best_e + 1e-9) {
      double exact = qubo_energy(q, s);
      if (exact < best_e || (exact == best_e && code < best_code)) {
        best_e = exact;
        best_code = code;
      }
    }
  }
  BitState best(static_cast<std::size_t>(q.num_bits), 0);
  for (int b = 0; b < q.num_bits; ++b)
    best[static_cast<std::size_t>(b)] = (best_code >> b) & 1u;
  return {best, best_e};
}

// Single-flip Metropolis annealing with a geometric inverse-temperature ramp.
// Each read is an independent restart on its own RNG stream derived from the
// seed and the read index, so the result does not depend on execution order.
inline SampleSet sa_sample(const Qubo& q, int reads, const AnnealSchedule& sched,
                           std::uint64_t seed) {
  if (reads < 1) throw std::invalid_argument("reads must be at least 1");
  validate_schedule(sched);
  QuboView view = make_view(q);
  SampleSet out;
  out.reads = reads;
  out.samples.reserve(static_cast<std::size_t>(reads));
  const int n = q.num_bits;
  const double ratio = sched.beta_final / sched.beta_initial;
  for (int read = 0; read < reads; ++read) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(read)));
    BitState s(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) s[static_cast<std::size_t>(b)] = rng.coin() ? 1 : 0;
    for (int sweep = 0; sweep < sched.sweeps; ++sweep) {
      double beta = sched.sweeps == 1
                        ? sched.beta_final
                        : sched.beta_initial *
                              std::pow(ratio, static_cast<double>(sweep) /
                                                  static_cast<double>(sched.sweeps - 1));
      for (int b = 0; b < n; ++b) {
        double d = flip_delta(q, view, s, b);
        if (d <= 0.0 || rng.uniform() < std::exp(-beta * d))
          s[static_cast<std::size_t>(b)] ^= 1;
      }
    }
    double e = qubo_energy(q, s);  // sweeps accumulate no rounding into the record
    out.samples.push_back({std::move(s), e});
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
  return out;
}

// Stateless solver front. Implementations must be pure in (qubo, reads, seed).
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual SampleSet solve(const Qubo& q, int reads, std::uint64_t seed) const = 0;
};

class SaSampler final : public Sampler {
 public:
  explicit SaSampler(int sweeps = 100) : sweeps_(sweeps) {}
  SampleSet solve(const Qubo& q, int reads, std::uint64_t seed) const override {
    return sa_sample(q, reads, default_schedule(q, sweeps_), seed);
  }

 private:
  int sweeps_;
};

// Exact minimum as a one-sample set; for tests and tiny subproblems.
class ExactSampler final : public Sampler {
 public:
  explicit ExactSampler(int max_bits = 25) : max_bits_(max_bits) {}
  SampleSet solve(const Qubo& q, int reads, std::uint64_t seed) const override {
    (void)reads;
    (void)seed;
    SampleSet set;
    set.reads = 1;
    set.samples.push_back(brute_force(q, max_bits_));
    return set;
  }

 private:
  int max_bits_;
};

// Uniform random states; optionally fails like a flaky remote service.
// Exercises the orchestration guard rails, not the optimizer.
class RandomStubSampler final : public Sampler {
 public:
  explicit RandomStubSampler(double fail_rate = 0.0) : fail_rate_(fail_rate) {}
  SampleSet solve(const Qubo& q, int reads, std::uint64_t seed) const override {
    if (reads < 1) throw std::invalid_argument("reads must be at least 1");
    Rng rng(derive_seed(seed, 0x5717));
    if (fail_rate_ > 0.0 && rng.uniform() < fail_rate_)
      throw SamplerTransportError("stub sampler dropped the request");
    SampleSet set;
    set.reads = reads;
    for (int r = 0; r < reads; ++r) {
      BitState s(static_cast<std::size_t>(q.num_bits));
      for (auto& b : s) b = rng.coin() ? 1 : 0;
      double e = qubo_energy(q, s);
      set.samples.push_back({std::move(s), e});
    }
    std::stable_sort(set.samples.begin(), set.samples.end(),
                     [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
    return set;
  }

 private:
  double fail_rate_;
};

}  // namespace potts
