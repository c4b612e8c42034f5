#pragma once

#include <cstdint>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "potts/embedding.hpp"
#include "potts/instance.hpp"
#include "potts/io.hpp"
#include "potts/orchestrator.hpp"
#include "potts/sampler.hpp"

namespace potts {

namespace detail {

inline ModelKind parse_kind(const std::string& s) {
  if (s == "ferromagnetic" || s == "ferro") return ModelKind::ferromagnetic;
  if (s == "anti-ferromagnetic" || s == "antiferro") return ModelKind::anti_ferromagnetic;
  if (s == "potts-glass" || s == "glass") return ModelKind::potts_glass;
  if (s == "potts-gauge-glass" || s == "gauge-glass") return ModelKind::potts_gauge_glass;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

inline SolverKind parse_solver(const std::string& s) {
  if (s == "sa") return SolverKind::sa;
  if (s == "exact") return SolverKind::exact;
  if (s == "stub") return SolverKind::stub;
  throw std::invalid_argument("unknown solver '" + s + "'");
}

inline std::uint64_t fresh_seed(std::ostream& err) {
  std::random_device rd;
  std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "master seed " << seed << "\n";
  return seed;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline PottsInstance load_instance(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return read_instance(in);
}

struct EmbedStatsOptions {
  std::string partition = "both";
  int m = 16, n = 16, l = 4;
  int defects = 0;
  std::uint64_t defect_seed = 0;
  int trials = 100;
  int region_size = 0;  // 0 = whole instance
};

inline void one_embed_stats_report(std::ostream& out, const PottsInstance& inst,
                                   const OneHotQubo& oq, SubproblemKind kind,
                                   const EmbedStatsOptions& opt, std::uint64_t seed) {
  ChimeraGraph hw =
      make_chimera(opt.m, opt.n, opt.l, random_defects(opt.m, opt.n, opt.l, opt.defects,
                                                       opt.defect_seed));
  double sum_retained = 0.0, sum_log10 = 0.0, sum_qubits = 0.0, sum_maxchain = 0.0;
  std::map<int, double> hist;
  for (int t = 0; t < opt.trials; ++t) {
    std::uint64_t st = derive_seed(seed, static_cast<std::uint64_t>(t));
    Assignment current = random_assignment(inst, derive_seed(st, 1));
    Rng rng(derive_seed(st, 2));
    int target = opt.region_size > 0 ? opt.region_size : inst.num_vars;
    Region region = grow_region(inst, target, rng);
    EmbeddingStats stats;
    if (kind == SubproblemKind::binary) {
      BinarySubproblem sub = binary_partition(inst, current, region, rng);
      EmbedOrder order;
      order.kind = SubproblemKind::binary;
      for (int k = 0; k < static_cast<int>(sub.vars.size()); ++k)
        order.groups.push_back({sub.vars[static_cast<std::size_t>(k)], {k}, -1});
      Embedding emb = embed_subproblem(sub.reduced, order, hw, rng);
      stats = embedding_stats(emb, order);
    } else {
      MultivaluedEmbedding me =
          embed_multivalued(inst, oq.enc, oq.qubo, current, region, hw, rng);
      stats = embedding_stats(me.emb, me.order);
    }
    sum_retained += stats.retained_vars;
    sum_log10 += stats.log10_feasible;
    sum_qubits += stats.qubits_used;
    sum_maxchain += stats.max_chain;
    for (int qe : stats.qembed) hist[qe] += 1.0;
  }
  double inv = 1.0 / opt.trials;
  out << "partition " << (kind == SubproblemKind::binary ? "binary" : "multivalued") << "\n";
  out << "chimera " << opt.m << "x" << opt.n << "x" << opt.l << "\n";
  out << "defects " << opt.defects << "\n";
  out << "trials " << opt.trials << "\n";
  out << "mean_retained_vars " << format_double(sum_retained * inv) << "\n";
  out << "mean_qubits_used " << format_double(sum_qubits * inv) << "\n";
  out << "mean_max_chain " << format_double(sum_maxchain * inv) << "\n";
  out << "mean_log10_feasible " << format_double(sum_log10 * inv) << "\n";
  out << "qembed_mean_counts\n";
  for (const auto& [qe, count] : hist)
    out << qe << " " << format_double(count * inv) << "\n";
}

}  // namespace detail

// Entry point shared by the binary and the tests. `args` excludes the
// program name. Exit codes: 0 success, 1 usage, 2 bad data, 3 internal.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"large-neighborhood local search for integer-valued models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value defaults, overridden by flags");

  // generate
  auto* gen = app.add_subcommand("generate", "write a lattice instance file");
  std::string gen_kind;
  std::vector<int> gen_dims;
  int gen_q = 4;
  bool gen_open = false;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--kind", gen_kind,
                  "ferromagnetic | anti-ferromagnetic | potts-glass | potts-gauge-glass")
      ->required();
  gen->add_option("--dims", gen_dims, "lattice extents lx ly lz")->expected(3)->required();
  gen->add_option("--q", gen_q, "components per variable");
  gen->add_flag("--open", gen_open, "open boundaries (default periodic)");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("-o,--output", gen_out, "instance file path")->required();

  // run
  auto* run = app.add_subcommand("run", "run one partition method on an instance");
  std::string run_instance, run_method = "binary", run_solver = "sa", run_out, run_agg;
  RunConfig rc;
  std::uint64_t run_seed = 0;
  std::vector<int> run_chimera;
  run->add_option("--instance", run_instance, "instance file")->required();
  run->add_option("--method", run_method, "random | multivalued | binary");
  run->add_option("--solver", run_solver, "sa | exact | stub");
  run->add_option("--lambda", rc.lambda, "one-hot penalty weight (default: instance scale)");
  run->add_option("--region-size", rc.region_size, "variables per region");
  run->add_option("--components", rc.components_per_var,
                  "free components per region variable (0 = all)");
  run->add_option("--bit-budget", rc.bit_budget, "bits per random partition");
  run->add_option("--iterations", rc.iterations, "iterations per trial");
  run->add_option("--trials", rc.trials, "independent trials");
  run->add_option("--reads", rc.reads, "solver reads per subproblem");
  run->add_option("--sweeps", rc.sweeps, "annealing sweeps per read");
  auto* run_seed_opt = run->add_option("--seed", run_seed, "master seed");
  run->add_flag("--embed", rc.embed, "gate subproblems through a hardware embedding");
  run->add_option("--chimera", run_chimera, "hardware graph m n l")->expected(3);
  run->add_option("--defects", rc.defects, "random defect qubits");
  run->add_option("--defect-seed", rc.defect_seed, "defect placement seed");
  run->add_option("-o,--output", run_out, "per-iteration results CSV")->required();
  run->add_option("--aggregate", run_agg, "also write the best-energy envelope CSV");

  // compare
  auto* cmp = app.add_subcommand("compare", "run all three methods from shared starts");
  std::string cmp_instance, cmp_solver = "sa", cmp_out, cmp_results;
  RunConfig cc;
  std::uint64_t cmp_seed = 0;
  std::vector<int> cmp_chimera;
  cmp->add_option("--instance", cmp_instance, "instance file")->required();
  cmp->add_option("--solver", cmp_solver, "sa | exact | stub");
  cmp->add_option("--lambda", cc.lambda, "one-hot penalty weight (default: instance scale)");
  cmp->add_option("--region-size", cc.region_size, "variables per region");
  cmp->add_option("--components", cc.components_per_var,
                  "free components per region variable (0 = all)");
  cmp->add_option("--bit-budget", cc.bit_budget, "bits per random partition");
  cmp->add_option("--iterations", cc.iterations, "iterations per trial");
  cmp->add_option("--trials", cc.trials, "independent trials");
  cmp->add_option("--reads", cc.reads, "solver reads per subproblem");
  cmp->add_option("--sweeps", cc.sweeps, "annealing sweeps per read");
  auto* cmp_seed_opt = cmp->add_option("--seed", cmp_seed, "master seed");
  cmp->add_flag("--embed", cc.embed, "gate subproblems through a hardware embedding");
  cmp->add_option("--chimera", cmp_chimera, "hardware graph m n l")->expected(3);
  cmp->add_option("--defects", cc.defects, "random defect qubits");
  cmp->add_option("--defect-seed", cc.defect_seed, "defect placement seed");
  cmp->add_option("-o,--output", cmp_out, "aggregate CSV")->required();
  cmp->add_option("--results", cmp_results, "also write the full per-iteration CSV");

  // solve
  auto* sol = app.add_subcommand("solve", "sample a QUBO file directly");
  std::string sol_qubo, sol_solver = "sa", sol_out;
  int sol_reads = 1000, sol_sweeps = 100;
  std::uint64_t sol_seed = 0;
  sol->add_option("--qubo", sol_qubo, "QUBO file")->required();
  sol->add_option("--solver", sol_solver, "sa | exact");
  sol->add_option("--reads", sol_reads, "reads");
  sol->add_option("--sweeps", sol_sweeps, "annealing sweeps per read");
  auto* sol_seed_opt = sol->add_option("--seed", sol_seed, "sampler seed");
  sol->add_option("-o,--output", sol_out, "samples CSV")->required();

  // embed-stats
  auto* est = app.add_subcommand("embed-stats", "embeddability report for an instance");
  std::string est_instance, est_out;
  detail::EmbedStatsOptions eo;
  std::vector<int> est_chimera;
  double est_lambda = 0.0;
  std::uint64_t est_seed = 0;
  est->add_option("--instance", est_instance, "instance file")->required();
  est->add_option("--partition", eo.partition, "binary | multivalued | both");
  est->add_option("--chimera", est_chimera, "hardware graph m n l")->expected(3);
  est->add_option("--defects", eo.defects, "random defect qubits");
  est->add_option("--defect-seed", eo.defect_seed, "defect placement seed");
  est->add_option("--trials", eo.trials, "averaging trials");
  est->add_option("--region-size", eo.region_size, "region target (0 = whole instance)");
  est->add_option("--lambda", est_lambda, "one-hot penalty weight (default: instance scale)");
  auto* est_seed_opt = est->add_option("--seed", est_seed, "report seed");
  est->add_option("-o,--output", est_out, "report path (default stdout)");

  std::vector<const char*> argv;
  argv.push_back("potts_lns");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) {
      if (gen_seed_opt->count() == 0) gen_seed = detail::fresh_seed(err);
      LatticeSpec lat{gen_dims[0], gen_dims[1], gen_dims[2], !gen_open};
      PottsInstance inst = generate_instance(detail::parse_kind(gen_kind), lat, gen_q, gen_seed);
      std::ostringstream text;
      write_instance(text, inst);
      write_text_file(gen_out, text.str());
      out << "wrote " << gen_out << " (" << inst.num_vars << " vars, " << inst.edges.size()
          << " edges, digest " << detail::hex64(fnv1a64(text.str())) << ")\n";
      return 0;
    }
    if (run->parsed()) {
      if (run_seed_opt->count() == 0) run_seed = detail::fresh_seed(err);
      rc.master_seed = run_seed;
      rc.method = parse_method(run_method);
      rc.solver = detail::parse_solver(run_solver);
      if (!run_chimera.empty()) {
        rc.chimera_m = run_chimera[0];
        rc.chimera_n = run_chimera[1];
        rc.chimera_l = run_chimera[2];
      }
      PottsInstance inst = detail::load_instance(run_instance);
      std::vector<ExperimentResult> results{run_experiment(inst, rc)};
      std::ostringstream csv;
      write_results_csv(csv, results);
      write_text_file(run_out, csv.str());
      if (!run_agg.empty()) {
        std::ostringstream agg;
        write_aggregate_csv(agg, results);
        write_text_file(run_agg, agg.str());
      }
      err << "run method=" << run_method << " lambda="
          << format_double(rc.lambda > 0 ? rc.lambda : default_lambda(inst))
          << " trials=" << rc.trials << " iterations=" << rc.iterations << " seed=" << run_seed
          << "\n";
      return 0;
    }
    if (cmp->parsed()) {
      if (cmp_seed_opt->count() == 0) cmp_seed = detail::fresh_seed(err);
      cc.master_seed = cmp_seed;
      cc.solver = detail::parse_solver(cmp_solver);
      if (!cmp_chimera.empty()) {
        cc.chimera_m = cmp_chimera[0];
        cc.chimera_n = cmp_chimera[1];
        cc.chimera_l = cmp_chimera[2];
      }
      PottsInstance inst = detail::load_instance(cmp_instance);
      std::vector<ExperimentResult> results = run_compare(inst, cc);
      std::ostringstream agg;
      write_aggregate_csv(agg, results);
      write_text_file(cmp_out, agg.str());
      if (!cmp_results.empty()) {
        std::ostringstream csv;
        write_results_csv(csv, results);
        write_text_file(cmp_results, csv.str());
      }
      err << "compare trials=" << cc.trials << " iterations=" << cc.iterations
          << " seed=" << cmp_seed << "\n";
      return 0;
    }
    if (sol->parsed()) {
      if (sol_seed_opt->count() == 0) sol_seed = detail::fresh_seed(err);
      std::istringstream in(read_text_file(sol_qubo));
      Qubo q = read_qubo(in);
      SampleSet set;
      if (sol_solver == "exact") {
        set = ExactSampler().solve(q, 1, sol_seed);
      } else if (sol_solver == "sa") {
        set = SaSampler(sol_sweeps).solve(q, sol_reads, sol_seed);
      } else {
        throw std::invalid_argument("unknown solver '" + sol_solver + "'");
      }
      std::ostringstream csv;
      csv << "state,energy\n";
      for (const Sample& s : set.samples) {
        for (std::uint8_t b : s.state) csv << (b ? '1' : '0');
        csv << "," << format_double(s.energy) << "\n";
      }
      write_text_file(sol_out, csv.str());
      err << "solve reads=" << set.reads << " seed=" << sol_seed << "\n";
      return 0;
    }
    if (est->parsed()) {
      if (est_seed_opt->count() == 0) est_seed = detail::fresh_seed(err);
      if (!est_chimera.empty()) {
        eo.m = est_chimera[0];
        eo.n = est_chimera[1];
        eo.l = est_chimera[2];
      }
      if (eo.partition != "binary" && eo.partition != "multivalued" && eo.partition != "both")
        throw std::invalid_argument("unknown partition '" + eo.partition + "'");
      PottsInstance inst = detail::load_instance(est_instance);
      OneHotQubo oq =
          encode(inst, est_lambda > 0 ? est_lambda : default_lambda(inst));
      std::ostringstream report;
      if (eo.partition != "multivalued")
        detail::one_embed_stats_report(report, inst, oq, SubproblemKind::binary, eo,
                                       derive_seed(est_seed, 7));
      if (eo.partition != "binary")
        detail::one_embed_stats_report(report, inst, oq, SubproblemKind::multivalued, eo,
                                       derive_seed(est_seed, 8));
      if (est_out.empty())
        out << report.str();
      else
        write_text_file(est_out, report.str());
      err << "embed-stats seed=" << est_seed << "\n";
      return 0;
    }
  } catch (const io_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 3;  // unreachable with require_subcommand(1)
}

}  // namespace potts
