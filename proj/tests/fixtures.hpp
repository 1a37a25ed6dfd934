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

// Random selection instances and brute-force oracles shared by the unit
// tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "activealign/align.hpp"
#include "activealign/align_graph.hpp"
#include "activealign/infer.hpp"
#include "activealign/pool.hpp"
#include "activealign/select.hpp"

namespace activealign::testing {

struct SelectionInstance {
  Pool pool;
  PowerTable table;
  SelectionState state;
};

// n pairs, each source reaching about `density` of the others with powers
// spread over (0, 1] so that many clear kappa; self-power 1. A few pairs are
// labeled, some of them as matches.
inline std::unique_ptr<SelectionInstance> random_selection_instance(std::mt19937_64& rng, std::size_t n,
                                                                    double density = 0.3,
                                                                    double labeled_rate = 0.1) {
  auto in = std::make_unique<SelectionInstance>();
  std::vector<ElementPair> pairs;
  for (std::uint32_t i = 0; i < n; ++i) pairs.push_back({ElementKind::kEntity, i, i});
  in->pool = Pool(pairs);
  in->table = PowerTable(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (PairId s = 0; s < n; ++s) {
    in->table.raise(s, s, 1.0);
    for (PairId t = 0; t < n; ++t) {
      if (t != s && u(rng) < density) in->table.raise(s, t, 0.5 + 0.5 * u(rng));
    }
  }
  in->state.pool = &in->pool;
  in->state.probs.resize(n);
  in->state.labeled.assign(n, 0);
  for (PairId q = 0; q < n; ++q) {
    const double r = u(rng);
    // Include exact 0 and 1 probabilities now and then.
    in->state.probs[q] = r < 0.05 ? 0.0 : r > 0.95 ? 1.0 : u(rng);
    if (u(rng) < labeled_rate) {
      in->state.labeled[q] = 1;
      if (u(rng) < 0.5) in->state.matched.push_back(q);
    }
  }
  in->state.kappa = 0.8;
  return in;
}

inline std::vector<PairId> unlabeled(const SelectionState& st) {
  std::vector<PairId> out;
  for (PairId q = 0; q < st.size(); ++q) {
    if (!st.is_labeled(q)) out.push_back(q);
  }
  return out;
}

// F(Q+) = sum over unlabeled targets of h(max(I(t|L+), max_{q in Q+} I(t|q))),
// evaluated from the dense table.
inline double credit(const SelectionState& st, const PowerTable& t, const std::vector<PairId>& matches) {
  double total = 0.0;
  for (PairId target = 0; target < st.size(); ++target) {
    if (st.is_labeled(target)) continue;
    double best = 0.0;
    for (PairId s : st.matched) best = std::max(best, t.get(s, target));
    for (PairId s : matches) best = std::max(best, t.get(s, target));
    total += st.threshold(best);
  }
  return total;
}

// E_{P(Q+|Q)}[F(Q+)] by enumerating all 2^|Q| subsets.
inline double expected_credit_enumerated(const SelectionState& st, const PowerTable& t,
                                         const std::vector<PairId>& batch) {
  const std::size_t k = batch.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<PairId> plus;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask >> i & 1) plus.push_back(batch[i]);
    }
    const double pr = batch_probability(st.probs, batch, plus);
    if (pr == 0.0) continue;
    total += pr * credit(st, t, plus);
  }
  return total;
}

// G(q | Q) straight from its definition as a difference of expectations.
inline double gain_enumerated(const SelectionState& st, const PowerTable& t, const std::vector<PairId>& batch,
                              PairId q) {
  std::vector<PairId> with = batch;
  with.push_back(q);
  return expected_credit_enumerated(st, t, with) - expected_credit_enumerated(st, t, batch);
}

// Objective value of a batch by enumeration, relative to L+ alone.
inline double objective_enumerated(const SelectionState& st, const PowerTable& t, const std::vector<PairId>& batch) {
  return expected_credit_enumerated(st, t, batch) - credit(st, t, {});
}

// Best objective over all batches of exactly `budget` unlabeled pairs.
inline double exhaustive_optimum(const SelectionState& st, const PowerTable& t, std::size_t budget) {
  const std::vector<PairId> cand = unlabeled(st);
  if (budget > cand.size()) return 0.0;
  std::vector<char> pick(cand.size(), 0);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(budget), 1);
  double best = 0.0;
  do {
    std::vector<PairId> batch;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (pick[i]) batch.push_back(cand[i]);
    }
    best = std::max(best, objective_enumerated(st, t, batch));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// A small graph-backed instance: two KGs over `n` entities with a few
// relations, a random pool of entity pairs plus all relation pairs, and a
// model whose right relations are noisy copies of the left ones so that
// many edges carry power above kappa.
struct GraphInstance {
  KnowledgeGraph kg1, kg2;
  Pool pool;
  JointModel model;
  DerivedFeatures features;
  AlignmentGraph graph;
  EdgeDifferences diffs;
  InferenceInputs inputs;
  std::vector<double> probs;
};

inline std::unique_ptr<GraphInstance> graph_instance(std::uint64_t seed, std::size_t n, std::size_t relations,
                                                     std::size_t triples, std::size_t max_entity_pairs,
                                                     double noise = 0.05) {
  auto g = std::make_unique<GraphInstance>();
  std::mt19937_64 rng(seed);
  auto make = [&](const char* prefix) {
    KnowledgeGraphBuilder b;
    for (std::size_t i = 0; i < n; ++i) b.add_entity(std::string(prefix) + std::to_string(i));
    for (std::size_t r = 0; r < relations; ++r) b.add_relation("r" + std::to_string(r));
    for (std::size_t k = 0; k < triples; ++k) {
      const auto h = static_cast<EntityId>(rng() % n), t = static_cast<EntityId>(rng() % n);
      const auto r = KnowledgeGraph::base_relation(static_cast<std::uint32_t>(rng() % relations));
      if (h != t) b.add_triple(h, r, t);
    }
    return std::move(b).build();
  };
  g->kg1 = make("a");
  g->kg2 = make("b");
  std::vector<ElementPair> ents;
  for (EntityId x = 0; x < n; ++x) {
    for (EntityId y = 0; y < n; ++y) ents.push_back({ElementKind::kEntity, x, y});
  }
  std::shuffle(ents.begin(), ents.end(), rng);
  if (ents.size() > max_entity_pairs) ents.resize(max_entity_pairs);
  for (RelationId a : alignable_relations(g->kg1)) {
    for (RelationId b : alignable_relations(g->kg2)) {
      if (a == b) ents.push_back({ElementKind::kRelation, a, b});
    }
  }
  g->pool = Pool(ents);
  EmbedConfig ec;
  ec.entity_dim = 4;
  ec.class_dim = 2;
  g->model = make_joint_model(g->kg1, g->kg2, ec, {}, seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Matrix& lr = g->model.left.block(SpaceBlock::kRelation);
  Matrix& rr = g->model.right.block(SpaceBlock::kRelation);
  for (std::size_t i = 0; i < rr.rows(); ++i) {
    for (std::size_t j = 0; j < rr.cols(); ++j) rr(i, j) = 0.4 * lr(i, j) + noise * gauss(rng);
  }
  Matrix& lrm = g->model.left.block(SpaceBlock::kRelation);
  for (double& x : lrm.data()) x *= 0.4;
  g->features = compute_features(g->model, g->kg1, g->kg2);
  g->graph = AlignmentGraph::build(g->kg1, g->kg2, g->pool);
  g->diffs = EdgeDifferences::compute(g->model, g->graph, g->kg1, g->kg2);
  g->inputs = {&g->model, &g->features, &g->kg1, &g->kg2, &g->graph, &g->diffs, {}};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  g->probs.resize(g->pool.size());
  for (double& p : g->probs) p = u(rng);
  return g;
}

inline SelectionState state_for(const GraphInstance& g, double kappa = 0.8) {
  SelectionState st;
  st.pool = &g.pool;
  st.probs = g.probs;
  st.labeled.assign(g.pool.size(), 0);
  st.kappa = kappa;
  return st;
}

}  // namespace activealign::testing
