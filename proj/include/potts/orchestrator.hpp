#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "potts/chimera.hpp"
#include "potts/embedding.hpp"
#include "potts/instance.hpp"
#include "potts/io.hpp"
#include "potts/onehot.hpp"
#include "potts/partition.hpp"
#include "potts/qubo.hpp"
#include "potts/rng.hpp"
#include "potts/sampler.hpp"

namespace potts {

enum class PartitionMethod { random, multivalued, binary };
enum class SolverKind { sa, exact, stub };

inline const char* to_string(PartitionMethod m) {
  switch (m) {
    case PartitionMethod::random: return "random";
    case PartitionMethod::multivalued: return "multivalued";
    case PartitionMethod::binary: return "binary";
  }
  throw std::invalid_argument("unknown partition method");
}

inline PartitionMethod parse_method(const std::string& s) {
  if (s == "random") return PartitionMethod::random;
  if (s == "multivalued") return PartitionMethod::multivalued;
  if (s == "binary") return PartitionMethod::binary;
  throw std::invalid_argument("unknown partition method '" + s + "'");
}

struct RunConfig {
  PartitionMethod method = PartitionMethod::binary;
  SolverKind solver = SolverKind::sa;
  double lambda = 0.0;  // <= 0 picks the instance default
  int region_size = 32;
  int components_per_var = 0;  // multivalued; 0 keeps all q components free
  int bit_budget = 128;        // random
  int iterations = 100;
  int trials = 16;
  int reads = 1000;
  int sweeps = 100;
  std::uint64_t master_seed = 1;
  bool embed = false;
  int chimera_m = 16;
  int chimera_n = 16;
  int chimera_l = 4;
  int defects = 0;
  std::uint64_t defect_seed = 0;
};

struct IterationRecord {
  int trial = 0;
  int iteration = 0;
  PartitionMethod method = PartitionMethod::binary;
  double current_energy = 0.0;
  double best_energy = 0.0;
  bool feasible = true;
  int subproblem_bits = 0;
  double millis = 0.0;
  std::string error;  // empty on success
};

struct TrialRecord {
  int trial = 0;
  std::vector<IterationRecord> iterations;  // index 0 is the initial state
  Assignment best;
  double best_energy = 0.0;
};

struct ExperimentResult {
  PartitionMethod method = PartitionMethod::binary;
  std::vector<TrialRecord> trials;
};

// Working state of one trial. The bit-level methods own `bits` (which may be
// infeasible between iterations); `assign` tracks the last feasible
// projection and is authoritative for the binary method.
struct LoopState {
  Assignment assign;
  BitState bits;
  Assignment best;
  double best_energy = 0.0;
};

namespace detail {

// seed streams inside one iteration
enum : std::uint64_t {
  stream_partition = 1,
  stream_solver = 2,
  stream_refine = 3,
  stream_repair = 4,
};

// one-hot projection of a possibly broken bit state: lowest set bit per
// group, the last feasible component where a group has none
inline Assignment project_bits(const OneHotEncoding& enc, const BitState& bits,
                               const Assignment& last_feasible) {
  Assignment a(static_cast<std::size_t>(enc.num_vars));
  for (int v = 0; v < enc.num_vars; ++v) {
    int c_found = 0;
    for (int c = 1; c <= enc.q; ++c)
      if (bits[static_cast<std::size_t>(enc.bit(v, c))]) {
        c_found = c;
        break;
      }
    a[static_cast<std::size_t>(v)] =
        c_found ? c_found : last_feasible[static_cast<std::size_t>(v)];
  }
  return a;
}

}  // namespace detail

class Orchestrator {
 public:
  Orchestrator(PottsInstance instance, RunConfig config, const Sampler* sampler = nullptr)
      : inst_(std::move(instance)), cfg_(std::move(config)) {
    validate_instance(inst_);
    if (inst_.num_vars == 0) throw std::invalid_argument("empty instance");
    if (cfg_.region_size < 1) throw std::invalid_argument("region size must be at least 1");
    if (cfg_.bit_budget < 1) throw std::invalid_argument("bit budget must be at least 1");
    if (cfg_.iterations < 0) throw std::invalid_argument("negative iteration count");
    if (cfg_.trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (cfg_.reads < 1) throw std::invalid_argument("reads must be at least 1");
    if (cfg_.sweeps < 1) throw std::invalid_argument("sweeps must be at least 1");
    if (cfg_.components_per_var != 0 &&
        (cfg_.components_per_var < 2 || cfg_.components_per_var > inst_.q))
      throw std::invalid_argument("components per variable must be 0 or in 2..q");
    if (cfg_.lambda <= 0.0) cfg_.lambda = default_lambda(inst_);
    encoded_ = encode(inst_, cfg_.lambda);
    view_ = make_view(encoded_.qubo);
    if (cfg_.embed)
      hw_ = make_chimera(cfg_.chimera_m, cfg_.chimera_n, cfg_.chimera_l,
                         random_defects(cfg_.chimera_m, cfg_.chimera_n, cfg_.chimera_l,
                                        cfg_.defects, cfg_.defect_seed));
    if (sampler) {
      sampler_ = sampler;
    } else {
      switch (cfg_.solver) {
        case SolverKind::sa: owned_ = std::make_unique<SaSampler>(cfg_.sweeps); break;
        case SolverKind::exact: owned_ = std::make_unique<ExactSampler>(); break;
        case SolverKind::stub: owned_ = std::make_unique<RandomStubSampler>(); break;
      }
      sampler_ = owned_.get();
    }
  }

  const RunConfig& config() const { return cfg_; }
  double lambda() const { return cfg_.lambda; }
  const OneHotQubo& encoded() const { return encoded_; }

  LoopState make_initial(std::uint64_t seed) const {
    LoopState st;
    st.assign = random_assignment(inst_, seed);
    st.bits = onehot_bits(encoded_.enc, st.assign);
    st.best = st.assign;
    st.best_energy = energy(inst_, st.assign);
    return st;
  }

  // One partition-solve-refine round. On a solver failure the state rolls
  // back to its value at entry and the error is recorded.
  IterationRecord step(LoopState& st, int trial, int iteration, std::uint64_t seed) const {
    IterationRecord rec;
    rec.trial = trial;
    rec.iteration = iteration;
    rec.method = cfg_.method;
    LoopState entry = st;
    auto t0 = std::chrono::steady_clock::now();
    try {
      switch (cfg_.method) {
        case PartitionMethod::binary: rec.subproblem_bits = step_binary(st, seed); break;
        case PartitionMethod::multivalued: rec.subproblem_bits = step_multivalued(st, seed); break;
        case PartitionMethod::random: rec.subproblem_bits = step_random(st, seed); break;
      }
    } catch (const SamplerTransportError& e) {
      st = std::move(entry);
      rec.error = e.what();
      rec.subproblem_bits = 0;
    }
    rec.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                     .count();
    fill_energies(st, rec);
    return rec;
  }

  TrialRecord run_trial(int trial, std::uint64_t initial_seed, std::uint64_t trial_stream) const {
    LoopState st = make_initial(initial_seed);
    TrialRecord out;
    out.trial = trial;
    IterationRecord first;
    first.trial = trial;
    first.iteration = 0;
    first.method = cfg_.method;
    fill_energies(st, first);
    out.iterations.push_back(first);
    for (int it = 1; it <= cfg_.iterations; ++it)
      out.iterations.push_back(step(st, trial, it, derive_seed(trial_stream, it)));
    out.best = st.best;
    out.best_energy = st.best_energy;
    return out;
  }

  // Trials are pure functions of (master seed, trial index), so results do
  // not depend on the order they run in.
  ExperimentResult run() const {
    ExperimentResult res;
    res.method = cfg_.method;
    std::uint64_t initial_root = derive_seed(cfg_.master_seed, 101);
    std::uint64_t trial_root =
        derive_seed(cfg_.master_seed, 201 + static_cast<std::uint64_t>(cfg_.method));
    for (int t = 0; t < cfg_.trials; ++t)
      res.trials.push_back(run_trial(t, derive_seed(initial_root, static_cast<std::uint64_t>(t)),
                                     derive_seed(trial_root, static_cast<std::uint64_t>(t))));
    return res;
  }

 private:
  void fill_energies(const LoopState& st, IterationRecord& rec) const {
    if (cfg_.method == PartitionMethod::binary) {
      rec.current_energy = energy(inst_, st.assign);
      rec.feasible = true;
    } else {
      rec.current_energy = qubo_energy(encoded_.qubo, st.bits);
      rec.feasible = decode(encoded_.enc, st.bits).feasible();
    }
    rec.best_energy = st.best_energy;
  }

  void track_best(LoopState& st, const Assignment& a) const {
    double e = energy(inst_, a);
    if (e < st.best_energy) {
      st.best_energy = e;
      st.best = a;
    }
  }

  int step_binary(LoopState& st, std::uint64_t seed) const {
    Rng rng(derive_seed(seed, detail::stream_partition));
    Region region = grow_region(inst_, cfg_.region_size, rng);
    BinarySubproblem sub = binary_partition(inst_, st.assign, region, rng);
    int solved_bits = sub.reduced.num_bits;
    const Sample* best = nullptr;
    SampleSet samples;
    BitState y(static_cast<std::size_t>(sub.reduced.num_bits), 0);
    if (cfg_.embed) {
      Embedding emb = embed_binary(sub, hw_, rng);
      std::unordered_map<int, int> fixed;
      for (int k = 0; k < sub.reduced.num_bits; ++k)
        if (emb.chains[static_cast<std::size_t>(k)].empty()) fixed.emplace(k, 0);
      if (fixed.empty()) {
        samples = sampler_->solve(sub.reduced, cfg_.reads,
                                  derive_seed(seed, detail::stream_solver));
        best = &best_of(samples);
        y = best->state;
        solved_bits = sub.reduced.num_bits;
      } else {
        ClampedQubo cq = clamp(sub.reduced, fixed);
        solved_bits = cq.qubo.num_bits;
        if (cq.qubo.num_bits > 0) {
          samples = sampler_->solve(cq.qubo, cfg_.reads,
                                    derive_seed(seed, detail::stream_solver));
          best = &best_of(samples);
          y = expand_completion(cq, best->state, y);
        }
      }
    } else {
      samples = sampler_->solve(sub.reduced, cfg_.reads, derive_seed(seed, detail::stream_solver));
      best = &best_of(samples);
      y = best->state;
    }
    // all-stay reduces to energy zero; accept only non-worsening moves
    if (best && best->energy <= 0.0)
      st.assign = apply_binary_solution(sub, y, st.assign);
    st.assign = greedy_refine(inst_, st.assign, derive_seed(seed, detail::stream_refine));
    st.bits = onehot_bits(encoded_.enc, st.assign);
    track_best(st, st.assign);
    return solved_bits;
  }

  // Shared tail of the bit-level methods: guarded replacement, group
  // refinement, best-tracking on feasible states only.
  int finish_bit_step(LoopState& st, const ClampedQubo& sub, std::uint64_t seed) const {
    if (sub.qubo.num_bits > 0) {
      SampleSet samples =
          sampler_->solve(sub.qubo, cfg_.reads, derive_seed(seed, detail::stream_solver));
      const Sample& best = best_of(samples);
      BitState incumbent_sub(sub.free_bits.size());
      for (std::size_t k = 0; k < sub.free_bits.size(); ++k)
        incumbent_sub[k] = st.bits[static_cast<std::size_t>(sub.free_bits[k])];
      if (best.energy <= qubo_energy(sub.qubo, incumbent_sub))
        st.bits = expand_completion(sub, best.state, st.bits);
    }
    Rng refine_rng(derive_seed(seed, detail::stream_refine));
    onehot_group_refine(encoded_.qubo, view_, encoded_.enc, st.bits, refine_rng);
    DecodeResult dec = decode(encoded_.enc, st.bits);
    if (dec.feasible()) {
      st.assign = *dec.assignment;
      track_best(st, st.assign);
    }
    return sub.qubo.num_bits;
  }

  int step_multivalued(LoopState& st, std::uint64_t seed) const {
    // the partition requires a feasible incumbent; repair first if needed
    DecodeResult dec = decode(encoded_.enc, st.bits);
    if (!dec.feasible()) {
      Assignment a = detail::project_bits(encoded_.enc, st.bits, st.assign);
      a = greedy_refine(inst_, a, derive_seed(seed, detail::stream_repair));
      st.assign = a;
      st.bits = onehot_bits(encoded_.enc, a);
      track_best(st, st.assign);
    } else {
      st.assign = *dec.assignment;
    }
    Rng rng(derive_seed(seed, detail::stream_partition));
    Region region = grow_region(inst_, cfg_.region_size, rng);
    MultivaluedSelection sel;
    if (cfg_.embed) {
      MultivaluedEmbedding me =
          embed_multivalued(inst_, encoded_.enc, encoded_.qubo, st.assign, region, hw_, rng);
      sel = std::move(me.selection);
      if (sel.vars.empty()) return 0;  // nothing embeddable this round
    } else {
      int r = cfg_.components_per_var == 0 ? inst_.q : cfg_.components_per_var;
      sel = multivalued_select(inst_, st.assign, region, r, rng);
    }
    MultivaluedPartition part = multivalued_partition(encoded_.qubo, encoded_.enc, st.assign, sel);
    return finish_bit_step(st, part.sub, seed);
  }

  int step_random(LoopState& st, std::uint64_t seed) const {
    Rng rng(derive_seed(seed, detail::stream_partition));
    RandomPartition part = random_partition(encoded_.qubo, st.bits, cfg_.bit_budget, rng);
    ClampedQubo sub = std::move(part.sub);
    if (cfg_.embed) {
      // per-bit embedding; bits that fail stay clamped at their current value
      EmbedOrder order;
      order.kind = SubproblemKind::binary;
      for (int k = 0; k < sub.qubo.num_bits; ++k)
        order.groups.push_back({k, {k}, -1});
      Embedding emb = embed_subproblem(sub.qubo, order, hw_, rng);
      std::unordered_map<int, int> fixed;
      for (int k = 0; k < sub.qubo.num_bits; ++k)
        if (emb.chains[static_cast<std::size_t>(k)].empty())
          fixed.emplace(k, st.bits[static_cast<std::size_t>(
                               sub.free_bits[static_cast<std::size_t>(k)])]);
      if (!fixed.empty()) {
        ClampedQubo inner = clamp(sub.qubo, fixed);
        std::vector<int> outer_free;
        for (int k : inner.free_bits)
          outer_free.push_back(sub.free_bits[static_cast<std::size_t>(k)]);
        inner.free_bits = std::move(outer_free);
        sub = std::move(inner);
      }
    }
    return finish_bit_step(st, sub, seed);
  }

  PottsInstance inst_;
  RunConfig cfg_;
  OneHotQubo encoded_;
  QuboView view_;
  ChimeraGraph hw_;
  const Sampler* sampler_ = nullptr;
  std::unique_ptr<Sampler> owned_;
};

inline ExperimentResult run_experiment(const PottsInstance& inst, const RunConfig& cfg,
                                       const Sampler* sampler = nullptr) {
  return Orchestrator(inst, cfg, sampler).run();
}

// All three methods under one master seed; trial t starts from the same
// assignment in each, so the series are directly comparable.
inline std::vector<ExperimentResult> run_compare(const PottsInstance& inst, RunConfig cfg,
                                                 const Sampler* sampler = nullptr) {
  std::vector<ExperimentResult> out;
  for (PartitionMethod m :
       {PartitionMethod::random, PartitionMethod::multivalued, PartitionMethod::binary}) {
    cfg.method = m;
    out.push_back(run_experiment(inst, cfg, sampler));
  }
  return out;
}

// Per-iteration telemetry. Every column is reproducible from the seed except
// millis, which is wall-clock.
inline void write_results_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "trial,iteration,method,current_energy,best_energy,feasible,subproblem_bits,millis\n";
  char buf[64];
  for (const ExperimentResult& res : results)
    for (const TrialRecord& tr : res.trials)
      for (const IterationRecord& r : tr.iterations) {
        std::snprintf(buf, sizeof buf, "%.3f", r.millis);
        out << r.trial << "," << r.iteration << "," << to_string(r.method) << ","
            << format_double(r.current_energy) << "," << format_double(r.best_energy) << ","
            << (r.feasible ? 1 : 0) << "," << r.subproblem_bits << "," << buf << "\n";
      }
}

// Best-energy envelope across trials, by iteration and method.
inline void write_aggregate_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "iteration,method,min,mean,max\n";
  for (const ExperimentResult& res : results) {
    if (res.trials.empty()) continue;
    std::size_t iters = res.trials.front().iterations.size();
    for (std::size_t it = 0; it < iters; ++it) {
      double mn = 0.0, mx = 0.0, sum = 0.0;
      for (std::size_t t = 0; t < res.trials.size(); ++t) {
        double b = res.trials[t].iterations[it].best_energy;
        if (t == 0) {
          mn = mx = b;
        } else {
          mn = std::min(mn, b);
          mx = std::max(mx, b);
        }
        sum += b;
      }
      out << it << "," << to_string(res.method) << "," << format_double(mn) << ","
          << format_double(sum / static_cast<double>(res.trials.size())) << ","
          << format_double(mx) << "\n";
    }
  }
}

}  // namespace potts
