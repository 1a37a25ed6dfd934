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

// Desk-scale datasets: random-walk down-sampling of a loaded pair and a
// synthetic clone-and-perturb generator with exact gold links.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "activealign/dataset_io.hpp"
#include "activealign/kg.hpp"

namespace activealign {

using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Number of items removed when dropping `fraction` of `count`; rounds so the
// survivors never exceed (1 - fraction) * count.
inline std::size_t dropped_count(double fraction, std::size_t count) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count) - 1e-9));
}

namespace detail {

// Rebuilds the subgraph of `g` induced by `keep` (indexed by entity id),
// renaming nothing. Ids follow the original id order.
inline KnowledgeGraph induced_subgraph(const KnowledgeGraph& g, const std::vector<char>& keep) {
  KnowledgeGraphBuilder b;
  for (EntityId e = 0; e < g.num_entities(); ++e) {
    if (keep[e]) b.add_entity(g.entity_name(e));
  }
  auto ts = g.triplets();
  for (std::size_t i = 0; i < ts.size(); i += 2) {
    const Triple& t = ts[i];
    if (keep[t.head] && keep[t.tail]) {
      b.add_triple(g.entity_name(t.head), g.relation_name(t.rel), g.entity_name(t.tail));
    }
  }
  for (const TypeTriple& t : g.type_triplets()) {
    if (keep[t.entity]) b.add_type(g.entity_name(t.entity), g.class_name(t.cls));
  }
  return std::move(b).build();
}

inline GoldLinks remap_links(const GoldLinks& links, const KnowledgeGraph& old1,
                             const KnowledgeGraph& old2, const KnowledgeGraph& new1,
                             const KnowledgeGraph& new2) {
  GoldLinks out;
  for (auto [a, b] : links.entity_matches) {
    auto x = new1.find_entity(old1.entity_name(a));
    auto y = new2.find_entity(old2.entity_name(b));
    if (x && y) out.entity_matches.emplace_back(*x, *y);
  }
  for (auto [a, b] : links.relation_matches) {
    auto x = new1.find_relation(old1.relation_name(a));
    auto y = new2.find_relation(old2.relation_name(b));
    if (x && y) out.relation_matches.emplace_back(*x, *y);
  }
  for (auto [a, b] : links.class_matches) {
    auto x = new1.find_class(old1.class_name(a));
    auto y = new2.find_class(old2.class_name(b));
    if (x && y) out.class_matches.emplace_back(*x, *y);
  }
  out.normalize();
  return out;
}

}  // namespace detail

// Samples `n_entities` connected entities of kg1 by a seeded random walk that
// starts (and restarts) at matched entities; kg2 keeps the counterparts of
// the sampled matched entities, minus a `dangling` share of them.
inline Dataset subsample(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                         const GoldLinks& links, std::size_t n_entities, std::uint64_t seed,
                         double dangling = 0.0) {
  if (n_entities > kg1.num_entities()) {
    throw std::invalid_argument("subsample: n_entities exceeds the number of source entities");
  }
  if (dangling < 0.0 || dangling > 1.0) throw std::invalid_argument("subsample: dangling not in [0,1]");
  Rng rng(seed);

  std::vector<std::uint32_t> counterpart(kg1.num_entities(), UINT32_MAX);
  std::vector<EntityId> matched;
  for (auto [a, b] : links.entity_matches) {
    if (counterpart[a] == UINT32_MAX) matched.push_back(a);
    counterpart[a] = b;
  }
  std::sort(matched.begin(), matched.end());

  std::vector<char> keep1(kg1.num_entities(), 0);
  std::vector<EntityId> chosen;
  auto pick_start = [&]() -> EntityId {
    std::vector<EntityId> fresh;
    for (EntityId e : matched) {
      if (!keep1[e]) fresh.push_back(e);
    }
    if (fresh.empty()) {
      for (EntityId e = 0; e < kg1.num_entities(); ++e) {
        if (!keep1[e]) fresh.push_back(e);
      }
    }
    return fresh[uniform_index(rng, fresh.size())];
  };
  auto take = [&](EntityId e) {
    if (!keep1[e]) {
      keep1[e] = 1;
      chosen.push_back(e);
    }
  };

  constexpr double kRestart = 0.15;
  std::size_t stalled = 0;
  EntityId cur = 0;
  if (n_entities > 0) {
    cur = pick_start();
    take(cur);
  }
  while (chosen.size() < n_entities) {
    auto out = kg1.out_edges(cur);
    if (out.empty() || stalled > 4 * n_entities + 16) {
      cur = pick_start();
      take(cur);
      stalled = 0;
      continue;
    }
    if (uniform01(rng) < kRestart) {
      cur = chosen[uniform_index(rng, chosen.size())];
      continue;
    }
    cur = kg1.triplets()[out[uniform_index(rng, out.size())]].tail;
    if (keep1[cur]) {
      ++stalled;
    } else {
      take(cur);
      stalled = 0;
    }
  }

  std::vector<EntityId> surviving;
  for (EntityId e : matched) {
    if (keep1[e]) surviving.push_back(e);
  }
  std::shuffle(surviving.begin(), surviving.end(), rng);
  surviving.resize(surviving.size() - dropped_count(dangling, surviving.size()));

  std::vector<char> keep2(kg2.num_entities(), 0);
  for (EntityId e : surviving) keep2[counterpart[e]] = 1;

  Dataset out{detail::induced_subgraph(kg1, keep1), detail::induced_subgraph(kg2, keep2), {}};
  out.links = detail::remap_links(links, kg1, kg2, out.kg1, out.kg2);
  return out;
}

inline Dataset subsample(const Dataset& ds, std::size_t n_entities, std::uint64_t seed,
                         double dangling = 0.0) {
  return subsample(ds.kg1, ds.kg2, ds.links, n_entities, seed, dangling);
}

struct SynthSpec {
  std::size_t entities = 100;
  std::size_t relations = 8;
  std::size_t classes = 4;
  // Forward relation triplets per entity.
  double density = 2.0;
  // Share of kg2's relation triplets removed.
  double noise = 0.0;
  // Share of entities without a counterpart in kg2.
  double dangling = 0.0;
  // Probability that an entity gets a second class.
  double extra_class_rate = 0.25;

  void validate() const {
    auto frac = [](double x, const char* what) {
      if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in [0,1]");
    };
    frac(noise, "noise");
    frac(dangling, "dangling");
    frac(extra_class_rate, "extra_class_rate");
    if (!(density >= 0.0)) throw std::invalid_argument("density must be >= 0");
    const double n = static_cast<double>(entities);
    const double max_triples = n * (n - 1.0) * static_cast<double>(relations);
    if (density * n > 0.5 * max_triples && density > 0.0) {
      throw std::invalid_argument("density too high for the entity and relation counts");
    }
    if (density > 0.0 && entities > 0 && relations == 0) {
      throw std::invalid_argument("density > 0 requires at least one relation");
    }
  }

  std::size_t target_triples() const {
    return static_cast<std::size_t>(std::llround(density * static_cast<double>(entities)));
  }
};

// Generates a random kg1, clones it into kg2 under fresh names and a shuffled
// id order, then drops `dangling` of kg2's entities and `noise` of its
// relation triplets. Gold links are exact by construction. Relations and
// classes exist in a graph only when some fact uses them, matching what the
// on-disk layout can express.
inline Dataset synth_kg_pair(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const std::size_t n = spec.entities;

  std::vector<Triple> forward;
  {
    std::unordered_set<std::uint64_t> seen;
    const std::size_t want = spec.target_triples();
    while (forward.size() < want) {
      const auto h = static_cast<EntityId>(uniform_index(rng, n));
      const auto t = static_cast<EntityId>(uniform_index(rng, n));
      const auto r = static_cast<RelationId>(uniform_index(rng, spec.relations));
      if (h == t) continue;
      const std::uint64_t key = (static_cast<std::uint64_t>(h) * spec.relations + r) * n + t;
      if (!seen.insert(key).second) continue;
      forward.push_back({h, r, t});
    }
  }
  std::vector<std::pair<EntityId, ClassId>> types;
  if (spec.classes > 0) {
    for (EntityId e = 0; e < n; ++e) {
      const auto c = static_cast<ClassId>(uniform_index(rng, spec.classes));
      types.emplace_back(e, c);
      if (spec.classes > 1 && uniform01(rng) < spec.extra_class_rate) {
        auto c2 = static_cast<ClassId>(uniform_index(rng, spec.classes - 1));
        if (c2 >= c) ++c2;
        types.emplace_back(e, c2);
      }
    }
  }

  auto ename1 = [](std::size_t i) { return "e" + std::to_string(i); };
  auto rname1 = [](std::size_t i) { return "r" + std::to_string(i); };
  auto cname1 = [](std::size_t i) { return "c" + std::to_string(i); };

  KnowledgeGraphBuilder b1;
  for (std::size_t i = 0; i < n; ++i) b1.add_entity(ename1(i));
  for (const Triple& t : forward) b1.add_triple(ename1(t.head), rname1(t.rel), ename1(t.tail));
  for (auto [e, c] : types) b1.add_type(ename1(e), cname1(c));

  // kg2 names are a permutation of the originals.
  std::vector<std::size_t> eperm(n), rperm(spec.relations), cperm(spec.classes);
  std::iota(eperm.begin(), eperm.end(), 0);
  std::iota(rperm.begin(), rperm.end(), 0);
  std::iota(cperm.begin(), cperm.end(), 0);
  std::shuffle(eperm.begin(), eperm.end(), rng);
  std::shuffle(rperm.begin(), rperm.end(), rng);
  std::shuffle(cperm.begin(), cperm.end(), rng);
  auto ename2 = [&](std::size_t i) { return "x" + std::to_string(eperm[i]); };
  auto rname2 = [&](std::size_t i) { return "p" + std::to_string(rperm[i]); };
  auto cname2 = [&](std::size_t i) { return "k" + std::to_string(cperm[i]); };

  std::vector<char> alive(n, 1);
  {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t drop = dropped_count(spec.dangling, n);
    for (std::size_t i = 0; i < drop; ++i) alive[order[i]] = 0;
  }
  std::vector<Triple> kept;
  for (const Triple& t : forward) {
    if (alive[t.head] && alive[t.tail]) kept.push_back(t);
  }
  {
    std::vector<std::size_t> order(kept.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t drop = dropped_count(spec.noise, kept.size());
    std::vector<char> gone(kept.size(), 0);
    for (std::size_t i = 0; i < drop; ++i) gone[order[i]] = 1;
    std::vector<Triple> tmp;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (!gone[i]) tmp.push_back(kept[i]);
    }
    kept.swap(tmp);
  }

  // Insert kg2 entities in a shuffled order so ids carry no alignment signal.
  KnowledgeGraphBuilder b2;
  {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      if (alive[i]) b2.add_entity(ename2(i));
    }
  }
  for (const Triple& t : kept) b2.add_triple(ename2(t.head), rname2(t.rel), ename2(t.tail));
  for (auto [e, c] : types) {
    if (alive[e]) b2.add_type(ename2(e), cname2(c));
  }

  Dataset ds{std::move(b1).build(), std::move(b2).build(), {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) {
      ds.links.entity_matches.emplace_back(*ds.kg1.find_entity(ename1(i)),
                                           *ds.kg2.find_entity(ename2(i)));
    }
  }
  for (std::size_t i = 0; i < spec.relations; ++i) {
    auto x = ds.kg1.find_relation(rname1(i));
    auto y = ds.kg2.find_relation(rname2(i));
    if (x && y) ds.links.relation_matches.emplace_back(*x, *y);
  }
  for (std::size_t i = 0; i < spec.classes; ++i) {
    auto x = ds.kg1.find_class(cname1(i));
    auto y = ds.kg2.find_class(cname2(i));
    if (x && y) ds.links.class_matches.emplace_back(*x, *y);
  }
  ds.links.normalize();
  return ds;
}

}  // namespace activealign
