#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "potts/instance.hpp"
#include "potts/io.hpp"
#include "potts/onehot.hpp"
#include "potts/qubo.hpp"
#include "potts/sampler.hpp"

using namespace potts;

namespace {

PottsInstance random_instance(Rng& rng, int max_vars = 6, int q_hi = 4) {
  PottsInstance inst;
  inst.num_vars = 2 + rng.uniform_int(max_vars - 1);
  inst.q = 2 + rng.uniform_int(q_hi - 1);
  std::set<std::pair<int, int>> used;
  int want = rng.uniform_int(inst.num_vars * 2 + 1);
  for (int k = 0; k < want; ++k) {
    int i = rng.uniform_int(inst.num_vars);
    int j = rng.uniform_int(inst.num_vars);
    if (i == j || !used.insert(std::minmax(i, j)).second) continue;
    inst.edges.push_back({i, j, rng.coin() ? 1.0 : -1.0, rng.uniform_int(3) - 1});
  }
  return inst;
}

BitState bits_from_code(int n, unsigned code) {
  BitState s(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) s[static_cast<std::size_t>(b)] = (code >> b) & 1u;
  return s;
}

// penalty part evaluated from first principles
double penalty_energy(const OneHotEncoding& enc, const BitState& s) {
  double p = 0.0;
  for (int v = 0; v < enc.num_vars; ++v) {
    int count = 0;
    for (int c = 1; c <= enc.q; ++c)
      if (s[static_cast<std::size_t>(enc.bit(v, c))]) ++count;
    p += enc.lambda * (count - 1) * (count - 1);
  }
  return p;
}

// interaction part evaluated edge by edge on raw bits
double interaction_energy(const PottsInstance& inst, const OneHotEncoding& enc,
                          const BitState& s) {
  double h = 0.0;
  for (const Edge& e : inst.edges)
    for (int c = 1; c <= inst.q; ++c) {
      int cj = wrap_component(c - e.shift, inst.q);
      if (s[static_cast<std::size_t>(enc.bit(e.i, c))] &&
          s[static_cast<std::size_t>(enc.bit(e.j, cj))])
        h += e.coupling;
    }
  return h;
}

}  // namespace

TEST_CASE("qubo energy basics") {
  Qubo q(2);
  q.offset = 1.5;
  q.add_linear(0, -3.0);
  q.add_quadratic(0, 1, 2.0);
  CHECK(qubo_energy(q, {0, 0}) == 1.5);
  CHECK(qubo_energy(q, {1, 0}) == -1.5);
  CHECK(qubo_energy(q, {1, 1}) == 0.5);
  CHECK(Qubo(0).num_bits == 0);
  CHECK(qubo_energy(Qubo(0), {}) == 0.0);
  CHECK_THROWS_AS(q.add_quadratic(0, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(q.add_linear(5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(qubo_energy(q, {1}), std::invalid_argument);
  SECTION("flip deltas agree with recomputation") {
    Rng rng(4);
    Qubo r(10);
    for (int i = 0; i < 10; ++i) r.add_linear(i, rng.uniform() - 0.5);
    for (int i = 0; i < 10; ++i)
      for (int j = i + 1; j < 10; ++j)
        if (rng.coin()) r.add_quadratic(i, j, rng.uniform() - 0.5);
    QuboView view = make_view(r);
    for (int rep = 0; rep < 50; ++rep) {
      BitState s = bits_from_code(10, static_cast<unsigned>(rng.uniform_int(1024)));
      int b = rng.uniform_int(10);
      double before = qubo_energy(r, s);
      double d = flip_delta(r, view, s, b);
      s[static_cast<std::size_t>(b)] ^= 1;
      CHECK(std::abs(qubo_energy(r, s) - (before + d)) < 1e-12);
    }
  }
}

TEST_CASE("one-hot encoding coefficients by hand") {
  // two variables, q = 2, one attractive-free bond (coupling +1, no shift)
  PottsInstance inst;
  inst.num_vars = 2;
  inst.q = 2;
  inst.edges.push_back({0, 1, 1.0, 0});
  OneHotQubo oq = encode(inst, 2.0);
  const OneHotEncoding& enc = oq.enc;
  CHECK(oq.qubo.num_bits == 4);
  CHECK(oq.qubo.offset == 4.0);
  for (int b = 0; b < 4; ++b) CHECK(oq.qubo.linear[static_cast<std::size_t>(b)] == -2.0);
  // in-group pairs carry 2 lambda
  CHECK(oq.qubo.quad(enc.bit(0, 1), enc.bit(0, 2)) == 4.0);
  CHECK(oq.qubo.quad(enc.bit(1, 1), enc.bit(1, 2)) == 4.0);
  // matching components carry the coupling
  CHECK(oq.qubo.quad(enc.bit(0, 1), enc.bit(1, 1)) == 1.0);
  CHECK(oq.qubo.quad(enc.bit(0, 2), enc.bit(1, 2)) == 1.0);
  CHECK(oq.qubo.quad(enc.bit(0, 1), enc.bit(1, 2)) == 0.0);
  CHECK(oq.qubo.quad(enc.bit(0, 2), enc.bit(1, 1)) == 0.0);

  SECTION("feasible states count is q^n") {
    int feasible = 0;
    double best = 1e300;
    for (unsigned code = 0; code < 16; ++code) {
      BitState s = bits_from_code(4, code);
      if (decode(enc, s).feasible()) ++feasible;
      best = std::min(best, qubo_energy(oq.qubo, s));
    }
    CHECK(feasible == 4);
    CHECK(best == 0.0);  // repulsive bond avoided, penalty fully relaxed
  }
  SECTION("shifted bond lands on the wrapped partner") {
    PottsInstance sh;
    sh.num_vars = 2;
    sh.q = 3;
    sh.edges.push_back({0, 1, -1.0, 1});
    OneHotQubo e2 = encode(sh, 1.0);
    // component c of var 0 pairs with c - 1 of var 1
    CHECK(e2.qubo.quad(e2.enc.bit(0, 2), e2.enc.bit(1, 1)) == -1.0);
    CHECK(e2.qubo.quad(e2.enc.bit(0, 1), e2.enc.bit(1, 3)) == -1.0);
    CHECK(e2.qubo.quad(e2.enc.bit(0, 1), e2.enc.bit(1, 1)) == 0.0);
  }
  SECTION("rejects non-positive penalty weight") {
    CHECK_THROWS_AS(encode(inst, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(encode(inst, -1.0), std::invalid_argument);
  }
}

TEST_CASE("encoded energies split into interaction plus penalty") {
  Rng rng(12);
  for (int rep = 0; rep < 25; ++rep) {
    PottsInstance inst = random_instance(rng);
    double lambda = 0.5 + rng.uniform() * 4.0;
    OneHotQubo oq = encode(inst, lambda);
    int n = oq.qubo.num_bits;
    for (int probe = 0; probe < 40; ++probe) {
      BitState s(static_cast<std::size_t>(n));
      for (auto& b : s) b = rng.coin();
      double expect = interaction_energy(inst, oq.enc, s) + penalty_energy(oq.enc, s);
      CHECK(std::abs(qubo_energy(oq.qubo, s) - expect) < 1e-9);
    }
  }
}

TEST_CASE("feasible states reproduce the integer energies exactly") {
  Rng rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    PottsInstance inst = random_instance(rng);
    OneHotQubo oq = encode(inst, 1.0 + rng.uniform_int(4));
    for (int probe = 0; probe < 20; ++probe) {
      Assignment a = random_assignment(inst, rng.u64());
      BitState s = onehot_bits(oq.enc, a);
      CHECK(qubo_energy(oq.qubo, s) == energy(inst, a));  // integer couplings: exact
      DecodeResult dec = decode(oq.enc, s);
      REQUIRE(dec.feasible());
      CHECK(*dec.assignment == a);
    }
  }
}

TEST_CASE("decode flags broken groups") {
  OneHotEncoding enc{2, 2, 1.0};
  DecodeResult ok = decode(enc, {1, 0, 0, 1});
  REQUIRE(ok.feasible());
  CHECK(*ok.assignment == Assignment{1, 2});
  DecodeResult bad = decode(enc, {1, 1, 0, 1});
  CHECK_FALSE(bad.feasible());
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].var == 0);
  CHECK(bad.violations[0].set_bits == 2);
  DecodeResult empty = decode(enc, {0, 0, 1, 0});
  CHECK_FALSE(empty.feasible());
  CHECK(empty.violations[0].set_bits == 0);
  CHECK_THROWS_AS(decode(enc, {1, 0}), std::invalid_argument);
}

TEST_CASE("encode is linear in the penalty weight") {
  Rng rng(14);
  PottsInstance inst = random_instance(rng);
  OneHotQubo a = encode(inst, 1.0);
  OneHotQubo b = encode(inst, 3.0);
  OneHotQubo c = encode(inst, 7.0);
  // (b - a) / 2 == (c - a) / 6 coefficient by coefficient
  CHECK((b.qubo.offset - a.qubo.offset) / 2.0 == (c.qubo.offset - a.qubo.offset) / 6.0);
  for (int i = 0; i < a.qubo.num_bits; ++i)
    CHECK((b.qubo.linear[static_cast<std::size_t>(i)] -
           a.qubo.linear[static_cast<std::size_t>(i)]) /
              2.0 ==
          (c.qubo.linear[static_cast<std::size_t>(i)] -
           a.qubo.linear[static_cast<std::size_t>(i)]) /
              6.0);
  std::set<std::uint64_t> keys;
  for (const auto& [k, v] : a.qubo.quadratic) keys.insert(k);
  for (const auto& [k, v] : c.qubo.quadratic) keys.insert(k);
  for (std::uint64_t k : keys) {
    auto [i, j] = Qubo::unpack(k);
    CHECK((b.qubo.quad(i, j) - a.qubo.quad(i, j)) / 2.0 ==
          (c.qubo.quad(i, j) - a.qubo.quad(i, j)) / 6.0);
  }
}

TEST_CASE("clamping") {
  SECTION("no fixed bits is the identity") {
    Rng rng(15);
    PottsInstance inst = random_instance(rng);
    OneHotQubo oq = encode(inst, 2.0);
    ClampedQubo c = clamp(oq.qubo, {});
    CHECK(c.qubo.num_bits == oq.qubo.num_bits);
    CHECK(c.qubo.offset == oq.qubo.offset);
    CHECK(c.qubo.linear == oq.qubo.linear);
    for (const auto& [k, v] : oq.qubo.quadratic) {
      auto [i, j] = Qubo::unpack(k);
      CHECK(c.qubo.quad(i, j) == v);
    }
  }
  SECTION("two-bit fold by hand") {
    Qubo q(2);
    q.offset = 0.5;
    q.add_linear(0, -1.0);
    q.add_linear(1, 2.0);
    q.add_quadratic(0, 1, -3.0);
    ClampedQubo c1 = clamp(q, {{1, 1}});
    REQUIRE(c1.free_bits == std::vector<int>{0});
    CHECK(c1.qubo.offset == 2.5);                 // offset + linear of the set bit
    CHECK(c1.qubo.linear[0] == -4.0);             // -1 + (-3)
    ClampedQubo c0 = clamp(q, {{1, 0}});
    CHECK(c0.qubo.offset == 0.5);
    CHECK(c0.qubo.linear[0] == -1.0);
    ClampedQubo all = clamp(q, {{0, 1}, {1, 1}});
    CHECK(all.qubo.num_bits == 0);
    CHECK(all.qubo.offset == qubo_energy(q, {1, 1}));
  }
  SECTION("completion identity on random clamps") {
    Rng rng(16);
    for (int rep = 0; rep < 10; ++rep) {
      PottsInstance inst = random_instance(rng, 4, 3);
      OneHotQubo oq = encode(inst, 1.5);
      int n = oq.qubo.num_bits;
      BitState reference(static_cast<std::size_t>(n));
      for (auto& b : reference) b = rng.coin();
      std::unordered_map<int, int> fixed;
      for (int i = 0; i < n; ++i)
        if (rng.coin()) fixed.emplace(i, reference[static_cast<std::size_t>(i)]);
      ClampedQubo c = clamp(oq.qubo, fixed);
      int m = c.qubo.num_bits;
      if (m > 12) continue;
      for (unsigned code = 0; code < (1u << m); ++code) {
        BitState sub = bits_from_code(m, code);
        BitState full = expand_completion(c, sub, reference);
        CHECK(std::abs(qubo_energy(c.qubo, sub) - qubo_energy(oq.qubo, full)) < 1e-9);
      }
    }
  }
  SECTION("rejects bad clamps") {
    Qubo q(2);
    CHECK_THROWS_AS(clamp(q, {{5, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(clamp(q, {{0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(clamp_keep(q, {0, 0}, {0, 0}), std::invalid_argument);
  }
}

TEST_CASE("penalty weight bounds") {
  SECTION("chain example") {
    // 1-D ferromagnetic 4-chain: worst variable sees weight 2
    PottsInstance inst = generate_instance(ModelKind::ferromagnetic, {4, 1, 1, false}, 3, 0);
    LambdaBounds lb = lambda_bounds(inst);
    CHECK(lb.safe == 5.0);
    CHECK(lb.window_low == 1.0);
    CHECK(lb.window_high == 2.0);
    CHECK(min_safe_lambda(inst) == 5.0);
    CHECK(default_lambda(inst) == 2.0);
  }
  SECTION("no edges") {
    PottsInstance inst;
    inst.num_vars = 3;
    inst.q = 2;
    CHECK(min_safe_lambda(inst) == 1.0);
    CHECK(default_lambda(inst) == 1.0);
  }
  SECTION("at the safe weight the unconstrained minimum is feasible and exact") {
    Rng rng(18);
    std::vector<PottsInstance> cases;
    for (auto kind : {ModelKind::ferromagnetic, ModelKind::anti_ferromagnetic,
                      ModelKind::potts_glass, ModelKind::potts_gauge_glass}) {
      cases.push_back(generate_instance(kind, {4, 1, 1, false}, 3, rng.u64()));
      cases.push_back(generate_instance(kind, {2, 2, 1, false}, 3, rng.u64()));
    }
    for (const PottsInstance& inst : cases) {
      OneHotQubo oq = encode(inst, min_safe_lambda(inst));
      Sample ground = brute_force(oq.qubo);  // 2^12 states
      DecodeResult dec = decode(oq.enc, ground.state);
      REQUIRE(dec.feasible());
      // integer exhaustive minimum over 3^4 assignments
      double best = 1e300;
      Assignment a(static_cast<std::size_t>(inst.num_vars));
      int total = 1;
      for (int v = 0; v < inst.num_vars; ++v) total *= inst.q;
      for (int code = 0; code < total; ++code) {
        int c = code;
        for (int v = 0; v < inst.num_vars; ++v) {
          a[static_cast<std::size_t>(v)] = 1 + c % inst.q;
          c /= inst.q;
        }
        best = std::min(best, energy(inst, a));
      }
      CHECK(ground.energy == best);
      CHECK(energy(inst, *dec.assignment) == best);
    }
  }
}

TEST_CASE("group refinement") {
  SECTION("repairs a broken group and lowers the energy") {
    PottsInstance inst = generate_instance(ModelKind::potts_glass, {3, 3, 1, false}, 3, 40);
    OneHotQubo oq = encode(inst, min_safe_lambda(inst));
    QuboView view = make_view(oq.qubo);
    Rng rng(7);
    BitState s(static_cast<std::size_t>(oq.qubo.num_bits));
    for (auto& b : s) b = rng.coin();
    double before = qubo_energy(oq.qubo, s);
    Rng refine_rng(8);
    onehot_group_refine(oq.qubo, view, oq.enc, s, refine_rng);
    CHECK(qubo_energy(oq.qubo, s) <= before);
    // at a safe weight every group must settle on exactly one bit
    CHECK(decode(oq.enc, s).feasible());
  }
  SECTION("fixed point: no single group move improves") {
    PottsInstance inst = generate_instance(ModelKind::potts_gauge_glass, {3, 3, 1, false}, 4, 41);
    OneHotQubo oq = encode(inst, 2.0);
    QuboView view = make_view(oq.qubo);
    Rng rng(9);
    BitState s(static_cast<std::size_t>(oq.qubo.num_bits));
    for (auto& b : s) b = rng.coin();
    Rng refine_rng(10);
    onehot_group_refine(oq.qubo, view, oq.enc, s, refine_rng);
    double settled = qubo_energy(oq.qubo, s);
    for (int v = 0; v < inst.num_vars; ++v)
      for (unsigned pat = 0; pat < (1u << inst.q); ++pat) {
        BitState probe = s;
        for (int c = 1; c <= inst.q; ++c)
          probe[static_cast<std::size_t>(oq.enc.bit(v, c))] = (pat >> (c - 1)) & 1u;
        CHECK(qubo_energy(oq.qubo, probe) >= settled - 1e-9);
      }
  }
  SECTION("feasible input stays feasible and never worsens the integer energy") {
    PottsInstance inst = generate_instance(ModelKind::potts_glass, {4, 4, 1, false}, 4, 42);
    OneHotQubo oq = encode(inst, min_safe_lambda(inst));
    QuboView view = make_view(oq.qubo);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Assignment a = random_assignment(inst, seed);
      BitState s = onehot_bits(oq.enc, a);
      Rng refine_rng(seed);
      onehot_group_refine(oq.qubo, view, oq.enc, s, refine_rng);
      DecodeResult dec = decode(oq.enc, s);
      REQUIRE(dec.feasible());
      CHECK(energy(inst, *dec.assignment) <= energy(inst, a));
    }
  }
}

TEST_CASE("qubo file round-trip") {
  Qubo q(5);
  q.offset = 0.1 + 0.2;
  q.add_linear(0, -1.5);
  q.add_linear(3, 1.0 / 3.0);
  q.add_quadratic(0, 1, 2.0);
  q.add_quadratic(2, 4, -0.7);
  std::ostringstream out;
  write_qubo(out, q);
  std::istringstream in(out.str());
  Qubo back = read_qubo(in);
  CHECK(back.num_bits == 5);
  CHECK(back.offset == q.offset);
  CHECK(back.linear == q.linear);
  CHECK(back.quad(0, 1) == 2.0);
  CHECK(back.quad(2, 4) == -0.7);
  CHECK(back.quad(1, 2) == 0.0);
  std::ostringstream again;
  write_qubo(again, back);
  CHECK(again.str() == out.str());
  std::istringstream bad("num_bits 2\noffset 0\n0 5 1\n");
  CHECK_THROWS_AS(read_qubo(bad), io_error);
}
