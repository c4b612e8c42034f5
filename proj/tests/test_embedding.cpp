#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "potts/chimera.hpp"
#include "potts/embedding.hpp"
#include "potts/instance.hpp"
#include "potts/onehot.hpp"
#include "potts/partition.hpp"

using namespace potts;

TEST_CASE("chimera construction") {
  SECTION("single cell") {
    ChimeraGraph g = make_chimera(1, 1, 4);
    CHECK(g.num_nodes() == 8);
    CHECK(chimera_edge_count(g) == 16);
    ChimeraGraph tiny = make_chimera(1, 1, 2);
    CHECK(tiny.num_nodes() == 4);
    CHECK(chimera_edge_count(tiny) == 4);
    // explicit cell adjacency: shores fully coupled, no intra-shore edges
    std::set<int> n0(tiny.adj[0].begin(), tiny.adj[0].end());
    CHECK(n0 == std::set<int>{2, 3});
    std::set<int> n1(tiny.adj[1].begin(), tiny.adj[1].end());
    CHECK(n1 == std::set<int>{2, 3});
  }
  SECTION("full-scale graph") {
    ChimeraGraph g = make_chimera(16, 16, 4);
    CHECK(g.num_nodes() == 2048);
    CHECK(chimera_edge_count(g) == 16 * 16 * 16 + 15 * 16 * 4 + 16 * 15 * 4);
  }
  SECTION("edge count formula across small shapes") {
    for (int m = 1; m <= 4; ++m)
      for (int n = 1; n <= 4; ++n)
        for (int l = 1; l <= 4; ++l) {
          ChimeraGraph g = make_chimera(m, n, l);
          CHECK(g.num_nodes() == 2 * m * n * l);
          CHECK(chimera_edge_count(g) ==
                static_cast<std::int64_t>(m) * n * l * l + static_cast<std::int64_t>(m - 1) * n * l +
                    static_cast<std::int64_t>(m) * (n - 1) * l);
        }
  }
  SECTION("inter-cell couplers connect matching positions") {
    ChimeraGraph g = make_chimera(2, 1, 4);
    // shore-0 qubit k of cell (0,0) touches shore-0 qubit k of cell (1,0)
    for (int k = 0; k < 4; ++k) {
      const auto& nbrs = g.adj[static_cast<std::size_t>(g.node(0, 0, 0, k))];
      CHECK(std::find(nbrs.begin(), nbrs.end(), g.node(1, 0, 0, k)) != nbrs.end());
    }
  }
  SECTION("defects lose every coupler") {
    ChimeraGraph g = make_chimera(2, 2, 4, {0, 17});
    CHECK(g.adj[0].empty());
    CHECK(g.adj[17].empty());
    for (const auto& nbrs : g.adj) {
      CHECK(std::find(nbrs.begin(), nbrs.end(), 0) == nbrs.end());
      CHECK(std::find(nbrs.begin(), nbrs.end(), 17) == nbrs.end());
    }
    CHECK_THROWS_AS(make_chimera(2, 2, 4, {64}), std::invalid_argument);
    CHECK_THROWS_AS(make_chimera(0, 1, 1), std::invalid_argument);
  }
  SECTION("random defect sets are distinct and reproducible") {
    std::vector<int> a = random_defects(4, 4, 4, 10, 3);
    std::vector<int> b = random_defects(4, 4, 4, 10, 3);
    CHECK(a == b);
    CHECK(std::set<int>(a.begin(), a.end()).size() == 10);
    CHECK_THROWS_AS(random_defects(1, 1, 1, 3, 0), std::invalid_argument);
  }
}

TEST_CASE("bit ordering for embedding") {
  PottsInstance inst;
  inst.num_vars = 2;
  inst.q = 4;
  OneHotEncoding enc{2, 4, 1.0};
  std::vector<char> none(8, 0);
  SECTION("seed variable leads with the tentative bit") {
    Rng rng(1);
    Assignment cur{3, 1};
    std::vector<int> order = order_variables(inst, enc, cur, none, 0, rng);
    REQUIRE(order.size() == 4);
    CHECK(order[0] == enc.bit(0, 3));
    CHECK(std::set<int>(order.begin(), order.end()) ==
          std::set<int>{enc.bit(0, 1), enc.bit(0, 2), enc.bit(0, 3), enc.bit(0, 4)});
  }
  SECTION("interaction to an embedded partner dominates") {
    inst.edges = {{0, 1, -1.0, 1}};
    std::vector<char> embedded(8, 0);
    embedded[static_cast<std::size_t>(enc.bit(0, 3))] = 1;
    Assignment cur{3, 1};
    // var 1 sits on the j side: component c pairs with c + 1 of var 0,
    // so only c = 2 touches the embedded bit
    Rng rng(2);
    std::vector<int> order = order_variables(inst, enc, cur, embedded, 1, rng);
    CHECK(order[0] == enc.bit(1, 2));
    CHECK(order[1] == enc.bit(1, 1));  // tentative follows when not criterion 1
  }
  SECTION("orientation flips the partner component") {
    inst.edges = {{1, 0, -1.0, 1}};
    std::vector<char> embedded(8, 0);
    embedded[static_cast<std::size_t>(enc.bit(0, 3))] = 1;
    Assignment cur{3, 1};
    // var 1 on the i side pairs c with c - 1 of var 0: only c = 4 matches
    Rng rng(3);
    std::vector<int> order = order_variables(inst, enc, cur, embedded, 1, rng);
    CHECK(order[0] == enc.bit(1, 4));
  }
  SECTION("tentative embedded partner keeps the tentative bit first") {
    inst.edges = {{0, 1, -1.0, 0}};
    std::vector<char> embedded(8, 0);
    for (int c = 1; c <= 4; ++c) embedded[static_cast<std::size_t>(enc.bit(0, c))] = 1;
    Assignment cur{1, 2};
    Rng rng(4);
    // every component of var 1 is criterion 1; the tentative one wins
    std::vector<int> order = order_variables(inst, enc, cur, embedded, 1, rng);
    CHECK(order[0] == enc.bit(1, 2));
  }
  SECTION("deterministic per seed") {
    inst.edges = {{0, 1, -1.0, 0}};
    Assignment cur{1, 2};
    std::vector<char> embedded(8, 0);
    embedded[static_cast<std::size_t>(enc.bit(0, 3))] = 1;
    Rng a(9), b(9);
    CHECK(order_variables(inst, enc, cur, embedded, 1, a) ==
          order_variables(inst, enc, cur, embedded, 1, b));
  }
}

TEST_CASE("subproblem embedding") {
  SECTION("isolated bits take one qubit each until the graph is full") {
    Qubo q(10);  // no couplings
    EmbedOrder order;
    order.kind = SubproblemKind::binary;
    for (int k = 0; k < 10; ++k) order.groups.push_back({k, {k}, -1});
    ChimeraGraph hw = make_chimera(1, 1, 4);
    Rng rng(1);
    Embedding emb = embed_subproblem(q, order, hw, rng);
    CHECK(embedding_violations(hw, q, emb).empty());
    int embedded = 0;
    for (const auto& chain : emb.chains)
      if (!chain.empty()) {
        CHECK(chain.size() == 1);
        ++embedded;
      }
    CHECK(embedded == 8);
    CHECK(emb.unembedded.size() == 2);
  }
  SECTION("a triangle needs one chain on a bipartite cell") {
    Qubo q(3);
    q.add_quadratic(0, 1, 1.0);
    q.add_quadratic(0, 2, 1.0);
    q.add_quadratic(1, 2, 1.0);
    EmbedOrder order;
    order.kind = SubproblemKind::binary;
    for (int k = 0; k < 3; ++k) order.groups.push_back({k, {k}, -1});
    ChimeraGraph hw = make_chimera(1, 1, 4);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      Embedding emb = embed_subproblem(q, order, hw, rng);
      CHECK(emb.unembedded.empty());
      CHECK(embedding_violations(hw, q, emb).empty());
      std::size_t total = 0;
      for (const auto& chain : emb.chains) total += chain.size();
      CHECK(total == 4);  // two singletons plus one two-qubit chain
    }
  }
  SECTION("single-bit multivalued groups are always excluded") {
    Qubo q(3);
    q.add_quadratic(1, 2, 1.0);
    EmbedOrder order;
    order.kind = SubproblemKind::multivalued;
    order.groups.push_back({0, {0}, 0});
    order.groups.push_back({1, {1, 2}, 1});
    ChimeraGraph hw = make_chimera(1, 1, 1);  // two qubits only
    Rng rng(5);
    Embedding emb = embed_subproblem(q, order, hw, rng);
    // group 0 embedded its bit, then exclusion released the qubit; group 1
    // then fits on the freed pair
    CHECK(emb.chains[0].empty());
    CHECK_FALSE(emb.chains[1].empty());
    CHECK_FALSE(emb.chains[2].empty());
    CHECK(std::find(emb.unembedded.begin(), emb.unembedded.end(), 0) != emb.unembedded.end());
    CHECK(embedding_violations(hw, q, emb).empty());
  }
  SECTION("missing required bit drops the whole group") {
    // clique of three bits on a three-qubit cell: the third bit can never
    // join, and it is the required one
    Qubo q(3);
    q.add_quadratic(0, 1, 1.0);
    q.add_quadratic(0, 2, 1.0);
    q.add_quadratic(1, 2, 1.0);
    EmbedOrder order;
    order.kind = SubproblemKind::multivalued;
    order.groups.push_back({0, {0, 1, 2}, 2});
    ChimeraGraph hw = make_chimera(1, 1, 2, {3});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      Embedding emb = embed_subproblem(q, order, hw, rng);
      CHECK(emb.chains[0].empty());
      CHECK(emb.chains[1].empty());
      CHECK(emb.chains[2].empty());
      CHECK(emb.unembedded.size() == 3);
    }
  }
  SECTION("small binary subproblems embed whole at full scale") {
    PottsInstance inst = generate_instance(ModelKind::potts_gauge_glass, {6, 6, 6, true}, 4, 3);
    ChimeraGraph hw = make_chimera(16, 16, 4);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      Assignment cur = random_assignment(inst, seed + 40);
      Region region = grow_region(inst, 16, rng);
      BinarySubproblem sub = binary_partition(inst, cur, region, rng);
      Embedding emb = embed_binary(sub, hw, rng);
      CHECK(emb.unembedded.empty());
      CHECK(embedding_violations(hw, sub.reduced, emb).empty());
    }
  }
  SECTION("large binary subproblems stay structurally sound when bits drop") {
    PottsInstance inst = generate_instance(ModelKind::potts_gauge_glass, {6, 6, 6, true}, 4, 3);
    ChimeraGraph hw = make_chimera(16, 16, 4);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed);
      Assignment cur = random_assignment(inst, seed + 40);
      Region region = grow_region(inst, 48, rng);
      BinarySubproblem sub = binary_partition(inst, cur, region, rng);
      Embedding emb = embed_binary(sub, hw, rng);
      CHECK(embedding_violations(hw, sub.reduced, emb).empty());
      int embedded = 0;
      for (const auto& chain : emb.chains)
        if (!chain.empty()) ++embedded;
      CHECK(embedded + static_cast<int>(emb.unembedded.size()) == 48);
      CHECK(embedded >= 40);
    }
  }
}

TEST_CASE("multivalued embedding pipeline") {
  PottsInstance inst = generate_instance(ModelKind::potts_glass, {3, 3, 3, true}, 4, 11);
  OneHotQubo oq = encode(inst, default_lambda(inst));
  Assignment cur = random_assignment(inst, 5);
  ChimeraGraph hw = make_chimera(4, 4, 4);
  Rng rng(12);
  Region region = grow_region(inst, inst.num_vars, rng);
  MultivaluedEmbedding me = embed_multivalued(inst, oq.enc, oq.qubo, cur, region, hw, rng);
  SECTION("structurally valid against the full encoded qubo") {
    CHECK(embedding_violations(hw, oq.qubo, me.emb).empty());
  }
  SECTION("retained groups keep at least two components including the current one") {
    EmbeddingStats stats = embedding_stats(me.emb, me.order);
    CHECK(stats.attempted_vars == inst.num_vars);
    CHECK(stats.retained_vars == static_cast<int>(me.selection.vars.size()));
    CHECK(stats.retained_vars > 0);
    for (int qe : stats.qembed) {
      CHECK(qe >= 2);
      CHECK(qe <= 4);
    }
    for (std::size_t k = 0; k < me.selection.vars.size(); ++k) {
      int v = me.selection.vars[k];
      const auto& comps = me.selection.components[k];
      CHECK(comps[0] == cur[static_cast<std::size_t>(v)]);
      CHECK(comps.size() >= 2);
      // selection must mirror the embedded bits exactly
      for (int c : comps)
        CHECK_FALSE(me.emb.chains[static_cast<std::size_t>(oq.enc.bit(v, c))].empty());
    }
  }
  SECTION("excluded variables hold no qubits") {
    std::set<int> retained(me.selection.vars.begin(), me.selection.vars.end());
    for (int v = 0; v < inst.num_vars; ++v) {
      if (retained.count(v)) continue;
      for (int c = 1; c <= 4; ++c)
        CHECK(me.emb.chains[static_cast<std::size_t>(oq.enc.bit(v, c))].empty());
    }
  }
  SECTION("deterministic per seed") {
    Rng a(13), b(13);
    Region ra = grow_region(inst, 12, a);
    Region rb = grow_region(inst, 12, b);
    REQUIRE(ra == rb);
    MultivaluedEmbedding ma = embed_multivalued(inst, oq.enc, oq.qubo, cur, ra, hw, a);
    MultivaluedEmbedding mb = embed_multivalued(inst, oq.enc, oq.qubo, cur, rb, hw, b);
    CHECK(ma.emb.chains == mb.emb.chains);
    CHECK(ma.selection.vars == mb.selection.vars);
  }
}

TEST_CASE("embedding statistics") {
  SECTION("binary counting") {
    Embedding emb;
    emb.chains.resize(408);
    EmbedOrder order;
    order.kind = SubproblemKind::binary;
    for (int k = 0; k < 408; ++k) {
      order.groups.push_back({k, {k}, -1});
      emb.chains[static_cast<std::size_t>(k)] = {k};
    }
    EmbeddingStats s = embedding_stats(emb, order);
    CHECK(s.retained_vars == 408);
    CHECK(std::abs(s.log10_feasible - 122.8) < 0.05);
    CHECK(s.qubits_used == 408);
    CHECK(s.max_chain == 1);
  }
  SECTION("multivalued counting") {
    Embedding emb;
    emb.chains.resize(12);
    EmbedOrder order;
    order.kind = SubproblemKind::multivalued;
    int next_qubit = 0;
    int sizes[3] = {4, 4, 3};
    for (int g = 0; g < 3; ++g) {
      EmbedGroup grp;
      grp.var = g;
      for (int c = 0; c < 4; ++c) {
        int bit = g * 4 + c;
        grp.bits.push_back(bit);
        if (c < sizes[g]) emb.chains[static_cast<std::size_t>(bit)] = {next_qubit++, next_qubit++};
      }
      order.groups.push_back(grp);
    }
    EmbeddingStats s = embedding_stats(emb, order);
    CHECK(s.retained_vars == 3);
    CHECK(s.qembed == std::vector<int>{4, 4, 3});
    CHECK(std::abs(s.log10_feasible - std::log10(48.0)) < 1e-12);
    CHECK(s.qubits_used == 22);
    CHECK(s.max_chain == 2);
    CHECK(std::abs(s.mean_chain - 2.0) < 1e-12);
  }
}

TEST_CASE("defects reduce embeddability on average") {
  // the greedy heuristic is not monotone case by case; the claim is about
  // the mean over a batch of attempts
  PottsInstance inst = generate_instance(ModelKind::potts_glass, {4, 4, 2, false}, 4, 21);
  OneHotQubo oq = encode(inst, default_lambda(inst));
  Rng defect_rng(22);
  std::vector<int> pool(128);
  for (int i = 0; i < 128; ++i) pool[static_cast<std::size_t>(i)] = i;
  defect_rng.shuffle(pool);
  std::vector<int> counts{0, 16, 40};
  std::vector<double> mean_embedded;
  for (int dc : counts) {
    std::vector<int> defects(pool.begin(), pool.begin() + dc);
    ChimeraGraph hw = make_chimera(4, 4, 4, defects);
    double total = 0.0;
    for (std::uint64_t t = 0; t < 30; ++t) {
      Rng rng(derive_seed(100, t));
      Assignment cur = random_assignment(inst, t);
      Region region = grow_region(inst, inst.num_vars, rng);
      MultivaluedEmbedding me = embed_multivalued(inst, oq.enc, oq.qubo, cur, region, hw, rng);
      int embedded = 0;
      for (const auto& chain : me.emb.chains)
        if (!chain.empty()) ++embedded;
      total += embedded;
    }
    mean_embedded.push_back(total / 30.0);
  }
  CHECK(mean_embedded[0] >= mean_embedded[1]);
  CHECK(mean_embedded[1] >= mean_embedded[2]);
}
