// Copyright 2026 The ActiveAlign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <functional>
#include <map>
#include <set>

#include "activealign/sampling.hpp"
#include "activealign/select.hpp"
#include "fixtures.hpp"

namespace activealign {
namespace {

using testing::credit;
using testing::exhaustive_optimum;
using testing::gain_enumerated;
using testing::objective_enumerated;
using testing::random_selection_instance;
using testing::unlabeled;

std::vector<PairId> random_batch(std::mt19937_64& rng, const SelectionState& st, std::size_t k) {
  std::vector<PairId> cand = unlabeled(st);
  std::shuffle(cand.begin(), cand.end(), rng);
  if (cand.size() > k) cand.resize(k);
  return cand;
}

// ------------------------------------------------------------ signatures

TEST(Signature, SingleRelationAndClass) {
  KnowledgeGraphBuilder b;
  b.add_triple("x", "r", "y");
  b.add_type("x", "C");
  const KnowledgeGraph kg = std::move(b).build();
  SideFeatures f;
  f.mean_relation = Matrix(kg.num_relations(), 2);
  f.mean_class = Matrix(1, 2);
  f.relation_weight.assign(kg.num_relations(), 0.5);
  f.class_weight = {0.9};
  f.mean_relation(0, 0) = 1.0;
  f.mean_relation(0, 1) = 2.0;
  f.mean_class(0, 0) = -3.0;
  f.mean_class(0, 1) = 4.0;
  const Vec sig = schema_signature(kg, f, *kg.find_entity("x"));
  EXPECT_EQ(sig, (Vec{1.0, 2.0, -3.0, 4.0}));
}

TEST(Signature, NoClassesGiveZeroHalf) {
  KnowledgeGraphBuilder b;
  b.add_triple("x", "r", "y");
  const KnowledgeGraph kg = std::move(b).build();
  SideFeatures f;
  f.mean_relation = Matrix(kg.num_relations(), 2);
  f.mean_class = Matrix(0, 2);
  f.relation_weight.assign(kg.num_relations(), 1.0);
  // y only has the inverse out-edge.
  f.mean_relation(1, 0) = 7.0;
  const Vec sig = schema_signature(kg, f, *kg.find_entity("y"));
  EXPECT_EQ(sig, (Vec{7.0, 0.0, 0.0, 0.0}));
}

TEST(Signature, MatchesWeightedMeanFormula) {
  SynthSpec spec;
  spec.entities = 30;
  spec.relations = 4;
  spec.classes = 3;
  spec.density = 3.0;
  const Dataset d = synth_kg_pair(spec, 11);
  EmbedConfig ec;
  ec.entity_dim = 5;
  ec.class_dim = 3;
  const JointModel m = make_joint_model(d.kg1, d.kg2, ec, {}, 11);
  const DerivedFeatures f = compute_features(m, d.kg1, d.kg2);
  for (EntityId e = 0; e < d.kg1.num_entities(); ++e) {
    std::set<RelationId> rels;
    for (std::size_t idx : d.kg1.out_edges(e)) rels.insert(d.kg1.triplets()[idx].rel);
    Vec want(10, 0.0);
    double wr = 0.0, wc = 0.0;
    for (RelationId r : rels) {
      const double w = std::max(0.0, f.left.relation_weight[r]);
      for (std::size_t j = 0; j < 5; ++j) want[j] += w * f.left.mean_relation(r, j);
      wr += w;
    }
    for (ClassId c : d.kg1.entity_classes(e)) {
      const double w = std::max(0.0, f.left.class_weight[c]);
      for (std::size_t j = 0; j < 5; ++j) want[5 + j] += w * f.left.mean_class(c, j);
      wc += w;
    }
    for (std::size_t j = 0; j < 5; ++j) {
      if (wr > 0) want[j] /= wr;
      if (wc > 0) want[5 + j] /= wc;
    }
    const Vec got = schema_signature(d.kg1, f.left, e);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
  }
}

// ----------------------------------------------------------------- pools

struct PoolFixture {
  Dataset d;
  JointModel m;
  DerivedFeatures f;
};

PoolFixture pool_fixture(std::uint64_t seed, double dangling = 0.0) {
  SynthSpec spec;
  spec.entities = 40;
  spec.relations = 5;
  spec.classes = 3;
  spec.density = 2.5;
  spec.dangling = dangling;
  PoolFixture fx{synth_kg_pair(spec, seed), {}, {}};
  EmbedConfig ec;
  ec.entity_dim = 6;
  ec.class_dim = 3;
  fx.m = make_joint_model(fx.d.kg1, fx.d.kg2, ec, {}, seed);
  fx.f = compute_features(fx.m, fx.d.kg1, fx.d.kg2);
  return fx;
}

TEST(GeneratePool, RejectsZeroN) {
  const PoolFixture fx = pool_fixture(1);
  EXPECT_THROW(generate_pool(fx.m, fx.f, fx.d.kg1, fx.d.kg2, 0), std::invalid_argument);
}

TEST(GeneratePool, SaturatedNContainsEveryPair) {
  const PoolFixture fx = pool_fixture(2, 0.2);
  const std::size_t n = std::max(fx.d.kg1.num_entities(), fx.d.kg2.num_entities());
  const Pool p = generate_pool(fx.m, fx.f, fx.d.kg1, fx.d.kg2, n);
  EXPECT_EQ(p.count(ElementKind::kEntity), fx.d.kg1.num_entities() * fx.d.kg2.num_entities());
  EXPECT_EQ(p.count(ElementKind::kRelation), fx.d.kg1.num_base_relations() * fx.d.kg2.num_base_relations());
  EXPECT_EQ(p.count(ElementKind::kClass), fx.d.kg1.num_classes() * fx.d.kg2.num_classes());
  EXPECT_DOUBLE_EQ(pool_recall(p, fx.d.links), 1.0);
}

TEST(GeneratePool, RecallNonDecreasingInN) {
  for (std::uint64_t seed : {3, 4, 5}) {
    const PoolFixture fx = pool_fixture(seed, 0.1);
    double prev = -1.0;
    std::size_t prev_size = 0;
    for (std::size_t n : {1, 2, 4, 8, 16, 40}) {
      const Pool p = generate_pool(fx.m, fx.f, fx.d.kg1, fx.d.kg2, n);
      const double r = pool_recall(p, fx.d.links);
      EXPECT_GE(r, prev) << "seed " << seed << " N " << n;
      EXPECT_GE(p.size(), prev_size);
      prev = r;
      prev_size = p.size();
    }
  }
}

// On an exact clone with the identity mapping, an entity whose signature
// is unique among its side has its counterpart as the single mutual top-1.
TEST(GeneratePool, TopOneFindsUniqueSignaturesOnExactClone) {
  SynthSpec spec;
  spec.entities = 40;
  spec.relations = 6;
  spec.classes = 4;
  spec.density = 2.0;
  const Dataset d = synth_kg_pair(spec, 9);
  EmbedConfig ec;
  ec.entity_dim = 6;
  ec.class_dim = 3;
  AlignConfig ac;
  ac.init_noise = 0.0;
  JointModel m = make_joint_model(d.kg1, d.kg2, ec, ac, 9);
  // Make the right side a relabelled copy of the left so that relation and
  // class means coincide across the gold schema links.
  for (const auto& [a, b] : d.links.relation_matches) {
    for (RelationId off : {0u, 1u}) {
      auto src = m.left.block(SpaceBlock::kRelation).row(a + off);
      std::copy(src.begin(), src.end(), m.right.block(SpaceBlock::kRelation).row(b + off).begin());
    }
  }
  for (const auto& [a, b] : d.links.entity_matches) {
    auto src = m.left.block(SpaceBlock::kEntity).row(a);
    std::copy(src.begin(), src.end(), m.right.block(SpaceBlock::kEntity).row(b).begin());
  }
  const DerivedFeatures f = compute_features(m, d.kg1, d.kg2);
  const Matrix sig = signature_matrix(m, d.kg1, f.left, false);
  const Pool p = generate_pool(m, f, d.kg1, d.kg2, 1);
  std::size_t unique = 0;
  for (const auto& [a, b] : d.links.entity_matches) {
    bool is_unique = true;
    for (EntityId o = 0; o < d.kg1.num_entities() && is_unique; ++o) {
      if (o != a && cosine(sig.row(o), sig.row(a)) >= cosine(sig.row(a), sig.row(a)) - 1e-12) is_unique = false;
    }
    if (!is_unique) continue;
    ++unique;
    EXPECT_TRUE(p.contains({ElementKind::kEntity, a, b})) << a << " " << b;
  }
  EXPECT_GT(unique, 5u);
}

// Oracle: softmax computed by hand from sim() in each direction.
TEST(PoolMatchProbabilities, AgreeWithHandSoftmax) {
  const PoolFixture fx = pool_fixture(6);
  const Pool p = generate_pool(fx.m, fx.f, fx.d.kg1, fx.d.kg2, 3);
  const std::vector<double> probs = pool_match_probabilities(fx.m, fx.f, fx.d.kg1, fx.d.kg2, p);
  ASSERT_EQ(probs.size(), p.size());
  for (PairId q = 0; q < p.size(); ++q) {
    const ElementPair& e = p.at(q);
    const double z = fx.m.align.temperature(e.kind);
    double row = 0.0, col = 0.0;
    const double s = std::exp(sim(fx.m, fx.f, e) / z);
    for (std::uint32_t r : alignable_elements(fx.d.kg2, e.kind)) row += std::exp(sim(fx.m, fx.f, {e.kind, e.left, r}) / z);
    for (std::uint32_t l : alignable_elements(fx.d.kg1, e.kind)) col += std::exp(sim(fx.m, fx.f, {e.kind, l, e.right}) / z);
    EXPECT_GE(probs[q], 0.0);
    EXPECT_LE(probs[q], 1.0);
    EXPECT_NEAR(probs[q], std::min(s / row, s / col), 1e-9);
  }
}

// ----------------------------------------------------- batch probability

TEST(BatchProbability, Examples) {
  const std::vector<double> probs{0.7, 0.2, 0.5};
  EXPECT_DOUBLE_EQ(batch_probability(probs, {}, {}), 1.0);
  const std::vector<PairId> one{0};
  EXPECT_DOUBLE_EQ(batch_probability(probs, one, one), 0.7);
  EXPECT_DOUBLE_EQ(batch_probability(probs, one, {}), 1.0 - 0.7);
  const std::vector<PairId> not_in{1};
  EXPECT_THROW(batch_probability(probs, one, not_in), std::invalid_argument);
}

TEST(BatchProbability, SumsToOneOverSubsets) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng() % 10;
    std::vector<double> probs(k);
    for (double& p : probs) p = u(rng);
    std::vector<PairId> batch(k);
    for (PairId i = 0; i < k; ++i) batch[i] = i;
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      std::vector<PairId> plus;
      for (PairId i = 0; i < k; ++i) {
        if (mask >> i & 1) plus.push_back(i);
      }
      total += batch_probability(probs, batch, plus);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

// ------------------------------------------------------------------ gain

TEST(Gain, EmptyBatchReducesToExpectedCredit) {
  std::mt19937_64 rng(1);
  auto in = random_selection_instance(rng, 20, 0.3, 0.0);
  const SelectionState& st = in->state;
  const GainEngine g(st, in->table);
  for (PairId q = 0; q < st.size(); ++q) {
    double want = 0.0;
    for (PairId t = 0; t < st.size(); ++t) want += st.threshold(in->table.get(q, t));
    EXPECT_NEAR(g.gain(q), st.probs[q] * want, 1e-12);
  }
}

TEST(Gain, ZeroProbabilityGivesZero) {
  std::mt19937_64 rng(2);
  auto in = random_selection_instance(rng, 15);
  in->state.probs[3] = 0.0;
  const GainEngine g(in->state, in->table);
  EXPECT_EQ(g.gain(3), 0.0);
}

TEST(Gain, MatchesSubsetEnumeration) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 26;
    auto in = random_selection_instance(rng, n);
    const SelectionState& st = in->state;
    const std::vector<PairId> cand = unlabeled(st);
    if (cand.size() < 2) continue;
    const std::size_t k = rng() % std::min<std::size_t>(cand.size(), 11);
    std::vector<PairId> batch = random_batch(rng, st, k);
    const PairId q = batch.empty() ? cand[0] : batch.back();
    if (!batch.empty()) batch.pop_back();
    EXPECT_NEAR(expected_gain(st, in->table, batch, q), gain_enumerated(st, in->table, batch, q), 1e-9)
        << "trial " << trial;
    EXPECT_NEAR(expected_objective(st, in->table, batch), objective_enumerated(st, in->table, batch), 1e-9);
  }
}

TEST(Gain, MonotoneAndSubmodular) {
  std::mt19937_64 rng(4);
  std::size_t violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto in = random_selection_instance(rng, 5 + rng() % 20);
    const SelectionState& st = in->state;
    const std::vector<PairId> cand = unlabeled(st);
    if (cand.size() < 3) continue;
    std::vector<PairId> big = random_batch(rng, st, 1 + rng() % (cand.size() - 1));
    std::vector<PairId> small(big.begin(), big.begin() + static_cast<std::ptrdiff_t>(rng() % big.size()));
    for (PairId q : cand) {
      if (std::find(big.begin(), big.end(), q) != big.end()) continue;
      const double gs = expected_gain(st, in->table, small, q);
      const double gb = expected_gain(st, in->table, big, q);
      violations += gb < -1e-12;
      violations += gs + 1e-12 < gb;
    }
  }
  EXPECT_EQ(violations, 0u);
}

TEST(Gain, LabeledMatchesRaiseTheBaseline) {
  std::mt19937_64 rng(5);
  auto in = random_selection_instance(rng, 12, 0.5, 0.0);
  SelectionState st = in->state;
  const double before = expected_gain(st, in->table, {}, 0);
  st.labeled[1] = 1;
  st.matched = {1};
  const double after = expected_gain(st, in->table, {}, 0);
  EXPECT_LE(after, before + 1e-12);
  EXPECT_NEAR(after, gain_enumerated(st, in->table, {}, 0), 1e-12);
}

// ---------------------------------------------------------------- greedy

std::vector<PairId> plain_greedy(const SelectionState& st, const PowerTable& t, std::size_t budget) {
  std::vector<PairId> batch;
  for (std::size_t round = 0; round < budget; ++round) {
    double best = -1.0;
    PairId arg = 0;
    for (PairId q : unlabeled(st)) {
      if (std::find(batch.begin(), batch.end(), q) != batch.end()) continue;
      const double g = expected_gain(st, t, batch, q);
      if (g > best) {
        best = g;
        arg = q;
      }
    }
    batch.push_back(arg);
  }
  return batch;
}

TEST(Greedy, ZeroBudgetIsEmptyAndOverBudgetThrows) {
  std::mt19937_64 rng(6);
  auto in = random_selection_instance(rng, 10);
  EXPECT_TRUE(greedy_select(in->state, in->table, 0).empty());
  EXPECT_THROW(greedy_select(in->state, in->table, in->state.unlabeled_count() + 1), std::invalid_argument);
}

TEST(Greedy, FullBudgetTakesEveryUnlabeledPair) {
  std::mt19937_64 rng(7);
  auto in = random_selection_instance(rng, 14);
  const auto items = greedy_select(in->state, in->table, in->state.unlabeled_count());
  std::vector<PairId> got = batch_ids(items);
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, unlabeled(in->state));
}

TEST(Greedy, LazyEvaluationEqualsPlainLoop) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    auto in = random_selection_instance(rng, 10 + rng() % 30);
    const std::size_t b = std::min<std::size_t>(in->state.unlabeled_count(), 1 + rng() % 8);
    const auto items = greedy_select(in->state, in->table, b);
    EXPECT_EQ(batch_ids(items), plain_greedy(in->state, in->table, b)) << "trial " << trial;
    std::vector<PairId> prefix;
    for (const BatchItem& it : items) {
      EXPECT_NEAR(it.gain, expected_gain(in->state, in->table, prefix, it.pair), 1e-12);
      EXPECT_EQ(it.probability, in->state.probs[it.pair]);
      prefix.push_back(it.pair);
    }
  }
}

TEST(Greedy, WithinOneMinusOneOverEOfOptimum) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    auto in = random_selection_instance(rng, 6 + rng() % 7, 0.3, 0.1);
    const std::size_t b = std::min<std::size_t>(in->state.unlabeled_count(), 1 + rng() % 4);
    const double opt = exhaustive_optimum(in->state, in->table, b);
    const double got = objective_enumerated(in->state, in->table, batch_ids(greedy_select(in->state, in->table, b)));
    EXPECT_GE(got, (1.0 - 1.0 / std::numbers::e) * opt - 1e-12) << "trial " << trial;
  }
}

// ------------------------------------------------------------- partition

TEST(Partition, RejectsRhoOutsideUnitInterval) {
  auto g = testing::graph_instance(1, 4, 2, 8, 10);
  const std::vector<double> pw = edge_powers(g->inputs);
  EXPECT_THROW(partition_pool(g->graph, pw, 0.0), std::invalid_argument);
  EXPECT_THROW(partition_pool(g->graph, pw, 1.5), std::invalid_argument);
}

TEST(Partition, LabelsCoverThePoolAndRatiosClearRho) {
  std::size_t splits = 0, fallbacks = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto g = testing::graph_instance(seed, 5, 2, 10, 18);
    const std::vector<double> pw = edge_powers(g->inputs);
    for (double rho : {0.2, 0.5, 0.8, 1.0}) {
      const Partitioning p = partition_pool(g->graph, pw, rho);
      splits += p.splits;
      fallbacks += p.fallback_splits;
      ASSERT_EQ(p.part.size(), g->pool.size());
      std::set<std::uint32_t> labels(p.part.begin(), p.part.end());
      EXPECT_EQ(labels.size(), p.count);
      for (std::uint32_t i = 0; i < p.count; ++i) {
        std::vector<PairId> members;
        for (PairId q = 0; q < g->pool.size(); ++q) {
          if (p.part[q] == i) members.push_back(q);
        }
        EXPECT_GE(partition_ratio(g->graph, pw, p, i, members).first, rho - 1e-12)
            << "seed " << seed << " rho " << rho;
      }
    }
  }
  EXPECT_GT(splits, fallbacks);
  std::printf("splits %zu, of which fallback %zu\n", splits, fallbacks);
}

TEST(Partition, RhoOneLeavesNoPoweredIntraEdgesAndKeepsTheExactTable) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto g = testing::graph_instance(seed, 5, 2, 10, 18);
    const std::vector<double> pw = edge_powers(g->inputs);
    const Partitioning p = partition_pool(g->graph, pw, 1.0);
    for (std::size_t i = 0; i < g->graph.num_edges(); ++i) {
      const GraphEdge& e = g->graph.edges()[i];
      if (p.part[e.src] == p.part[e.dst]) EXPECT_EQ(pw[i], 0.0);
    }
    const SelectionState st = testing::state_for(*g);
    const PartitionSelection sel = partition_select(st, g->inputs, {}, 3, 1.0);
    const PowerTable exact = build_power_table(g->inputs, {});
    for (PairId a = 0; a < g->pool.size(); ++a) {
      for (PairId b = 0; b < g->pool.size(); ++b) {
        EXPECT_NEAR(sel.estimated.get(a, b), exact.get(a, b), 1e-12);
      }
    }
    EXPECT_EQ(batch_ids(sel.batch), batch_ids(greedy_select(st, exact, 3)));
  }
}

// Partition-graph edge weights straight from the edge list: the smallest
// ||v|| + r over relation edges between two distinct partitions.
std::map<std::pair<std::uint32_t, std::uint32_t>, double> cheapest_inter_edges(const testing::GraphInstance& g,
                                                                               const Partitioning& p) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> out;
  for (std::size_t i = 0; i < g.graph.num_edges(); ++i) {
    const GraphEdge& e = g.graph.edges()[i];
    if (e.rel.is_type() || !g.diffs.usable(i) || p.part[e.src] == p.part[e.dst]) continue;
    const double d = norm(g.diffs.vec(i)) + g.diffs.radius(i);
    auto [it, fresh] = out.emplace(std::make_pair(p.part[e.src], p.part[e.dst]), d);
    if (!fresh) it->second = std::min(it->second, d);
  }
  return out;
}

TEST(Partition, QuotientGraphKeepsTheCheapestInterEdge) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto g = testing::graph_instance(seed, 6, 2, 40, 30);
    const Partitioning p = partition_pool(g->graph, edge_powers(g->inputs), 0.7);
    const QuotientGraph qg = quotient_graph(g->graph, g->diffs, p);
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> got;
    for (std::uint32_t a = 0; a < p.count; ++a) {
      for (const auto& [b, d] : qg.out[a]) got[{a, b}] = d;
    }
    const auto want = cheapest_inter_edges(*g, p);
    ASSERT_EQ(got.size(), want.size());
    for (const auto& [k, d] : want) EXPECT_DOUBLE_EQ(got.at(k), d);
  }
}

// Enumerates every walk: real first hop, up to mu - 2 partition hops, real
// last hop. Keeps one-hop targets and multi-hop targets above kappa.
std::map<PairId, double> quotient_walk_oracle(const testing::GraphInstance& g, const Partitioning& p, PairId src,
                                              std::size_t mu, double kappa) {
  const auto hop = cheapest_inter_edges(g, p);
  auto d_of = [&](std::size_t i) { return norm(g.diffs.vec(i)) + g.diffs.radius(i); };
  auto inter = [&](std::size_t i) {
    const GraphEdge& e = g.graph.edges()[i];
    return !e.rel.is_type() && g.diffs.usable(i) && p.part[e.src] != p.part[e.dst];
  };
  std::map<PairId, double> best;
  auto offer = [&](PairId t, double d, bool multi) {
    const double pw = 1.0 / (1.0 + d);
    if (t == src || (multi && !(pw > kappa))) return;
    best[t] = std::max(best[t], pw);
  };
  std::function<void(std::uint32_t, double, std::size_t)> walk = [&](std::uint32_t at, double d, std::size_t left) {
    for (std::size_t i = 0; i < g.graph.num_edges(); ++i) {
      if (inter(i) && p.part[g.graph.edges()[i].src] == at) offer(g.graph.edges()[i].dst, d + d_of(i), true);
    }
    if (left == 0) return;
    for (const auto& [k, w] : hop) {
      if (k.first == at) walk(k.second, d + w, left - 1);
    }
  };
  for (std::size_t i = 0; i < g.graph.num_edges(); ++i) {
    const GraphEdge& e = g.graph.edges()[i];
    if (e.src != src || !inter(i)) continue;
    offer(e.dst, d_of(i), false);
    if (mu >= 2) walk(p.part[e.dst], d_of(i), mu - 2);
  }
  return best;
}

TEST(Partition, QuotientPowersMatchWalkEnumeration) {
  std::size_t multi = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto g = testing::graph_instance(seed, 6, 2, 40, 30);
    for (double rho : {0.5, 0.9}) {
      const Partitioning p = partition_pool(g->graph, edge_powers(g->inputs), rho);
      const QuotientGraph qg = quotient_graph(g->graph, g->diffs, p);
      for (std::size_t mu : {1u, 2u, 4u}) {
        for (PairId src = 0; src < g->pool.size(); ++src) {
          const auto want = quotient_walk_oracle(*g, p, src, mu, 0.6);
          const auto got = quotient_path_powers(g->graph, qg, p, src, mu, 0.6);
          ASSERT_EQ(got.size(), want.size()) << "seed " << seed << " src " << src << " mu " << mu;
          for (const auto& [t, pw] : got) {
            EXPECT_NEAR(pw, want.at(t), 1e-12);
            multi += mu > 1 && pw > 0.6;
          }
        }
      }
    }
  }
  EXPECT_GT(multi, 0u);
}

TEST(Partition, IntraPartitionEdgesAreNeverWalked) {
  auto g = testing::graph_instance(4, 6, 2, 40, 30);
  Partitioning whole;
  whole.part.assign(g->pool.size(), 0);
  const QuotientGraph qg = quotient_graph(g->graph, g->diffs, whole);
  for (PairId src = 0; src < g->pool.size(); ++src) {
    EXPECT_TRUE(quotient_path_powers(g->graph, qg, whole, src, 5, 0.0).empty());
  }
}

TEST(Partition, PowerlessPoolStaysWholeAndMatchesGreedy) {
  // Without triples there are no relation edges, so nothing forces a split.
  auto g = testing::graph_instance(3, 5, 2, 0, 18);
  const SelectionState st = testing::state_for(*g);
  const PartitionSelection sel = partition_select(st, g->inputs, {}, 3, 0.8);
  EXPECT_EQ(sel.partitions.count, 1u);
  EXPECT_EQ(sel.partitions.splits, 0u);
  EXPECT_EQ(batch_ids(sel.batch), batch_ids(greedy_select(st, build_power_table(g->inputs, {}), 3)));
}

}  // namespace
}  // namespace activealign
