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

// Product graph of two KGs restricted to a pool. Nodes are pool pairs,
// edges carry a relation pair.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "activealign/kg.hpp"
#include "activealign/pool.hpp"

namespace activealign {

// Reserved relation ids for the type edges between an entity pair and a
// class pair. They never collide with real ids (those are < 2^16).
inline constexpr RelationId kTypeRelation = std::numeric_limits<RelationId>::max() - 1;
inline constexpr RelationId kTypeInverse = std::numeric_limits<RelationId>::max();

struct RelationPair {
  RelationId left = 0;
  RelationId right = 0;

  bool is_type() const { return left >= kTypeRelation; }
  auto operator<=>(const RelationPair&) const = default;
};

inline constexpr std::uint32_t kNoTriplet = std::numeric_limits<std::uint32_t>::max();

struct GraphEdge {
  PairId src = 0;
  RelationPair rel;
  PairId dst = 0;
  // Indices into the triplets() of each KG, kNoTriplet for type edges.
  std::uint32_t left_triplet = kNoTriplet;
  std::uint32_t right_triplet = kNoTriplet;

  auto operator<=>(const GraphEdge&) const = default;
};

// Whether (r, r') may label an edge: both forward with (r, r') in the pool,
// or both inverse with the base pair in the pool.
inline bool relation_pair_allowed(const Pool& pool, RelationId r, RelationId r2) {
  if (KnowledgeGraph::is_inverse(r) != KnowledgeGraph::is_inverse(r2)) return false;
  return pool.contains({ElementKind::kRelation, r & ~1u, r2 & ~1u});
}

class AlignmentGraph {
 public:
  // Optional pruning hook: returns false to drop every edge labelled with a
  // relation pair. Type edges are never pruned.
  using RelationFilter = std::function<bool(RelationPair)>;

  AlignmentGraph() = default;

  static AlignmentGraph build(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2, const Pool& pool,
                              const RelationFilter& keep = nullptr) {
    AlignmentGraph g;
    g.pool_ = &pool;
    g.num_nodes_ = pool.size();
    for (PairId q = 0; q < pool.size(); ++q) {
      const ElementPair& p = pool.at(q);
      if (p.kind != ElementKind::kEntity) continue;
      check_entity(kg1, p.left);
      check_entity(kg2, p.right);
      for (std::size_t i : kg1.out_edges(p.left)) {
        const Triple& t1 = kg1.triplets()[i];
        for (std::size_t j : kg2.out_edges(p.right)) {
          const Triple& t2 = kg2.triplets()[j];
          if (!relation_pair_allowed(pool, t1.rel, t2.rel)) continue;
          auto dst = pool.find({ElementKind::kEntity, t1.tail, t2.tail});
          if (!dst) continue;
          const RelationPair rp{t1.rel, t2.rel};
          if (keep && !keep(rp)) continue;
          g.edges_.push_back({q, rp, *dst, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
        }
      }
      for (ClassId c1 : kg1.entity_classes(p.left)) {
        for (ClassId c2 : kg2.entity_classes(p.right)) {
          auto dst = pool.find({ElementKind::kClass, c1, c2});
          if (!dst) continue;
          g.edges_.push_back({q, {kTypeRelation, kTypeRelation}, *dst, kNoTriplet, kNoTriplet});
          g.edges_.push_back({*dst, {kTypeInverse, kTypeInverse}, q, kNoTriplet, kNoTriplet});
        }
      }
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    g.index();
    return g;
  }

  const Pool& pool() const { return *pool_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const GraphEdge> edges() const { return edges_; }

  // Edges leaving q, sorted by (relation pair, target).
  std::span<const GraphEdge> out_edges(PairId q) const {
    check(q);
    return std::span<const GraphEdge>(edges_).subspan(offsets_[q], offsets_[q + 1] - offsets_[q]);
  }
  // Indices into edges() of the edges entering q.
  std::span<const std::uint32_t> in_edges(PairId q) const {
    check(q);
    return in_[q];
  }

  std::vector<std::pair<RelationPair, PairId>> neighbors(PairId q) const {
    std::vector<std::pair<RelationPair, PairId>> out;
    for (const GraphEdge& e : out_edges(q)) out.emplace_back(e.rel, e.dst);
    return out;
  }

  std::size_t degree(PairId q) const { return out_edges(q).size() + in_edges(q).size(); }

  std::uint32_t edge_index(const GraphEdge& e) const {
    return static_cast<std::uint32_t>(&e - edges_.data());
  }

  // Tab-separated dump: kind, left, right, relation, relation, kind, left, right.
  void dump(std::ostream& os, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2) const {
    auto name = [](const KnowledgeGraph& kg, ElementKind k, std::uint32_t id) {
      switch (k) {
        case ElementKind::kEntity: return kg.entity_name(id);
        case ElementKind::kRelation: return kg.relation_name(id);
        case ElementKind::kClass: return kg.class_name(id);
      }
      return std::string();
    };
    auto rel = [](const KnowledgeGraph& kg, RelationId r) {
      if (r == kTypeRelation) return std::string("type");
      if (r == kTypeInverse) return std::string("type") + KnowledgeGraph::kInverseSuffix;
      return kg.relation_name(r);
    };
    for (const GraphEdge& e : edges_) {
      const ElementPair& a = pool_->at(e.src);
      const ElementPair& b = pool_->at(e.dst);
      os << kind_name(a.kind) << '\t' << name(kg1, a.kind, a.left) << '\t' << name(kg2, a.kind, a.right)
         << '\t' << rel(kg1, e.rel.left) << '\t' << rel(kg2, e.rel.right) << '\t' << kind_name(b.kind) << '\t'
         << name(kg1, b.kind, b.left) << '\t' << name(kg2, b.kind, b.right) << '\n';
    }
  }

 private:
  static void check_entity(const KnowledgeGraph& kg, EntityId e) {
    if (e >= kg.num_entities()) throw std::out_of_range("pool pair references an unknown entity");
  }
  void check(PairId q) const {
    if (q >= num_nodes_) throw std::out_of_range("unknown alignment graph node " + std::to_string(q));
  }
  void index() {
    offsets_.assign(num_nodes_ + 1, 0);
    in_.assign(num_nodes_, {});
    for (const GraphEdge& e : edges_) ++offsets_[e.src + 1];
    for (std::size_t i = 0; i < num_nodes_; ++i) offsets_[i + 1] += offsets_[i];
    for (std::uint32_t i = 0; i < edges_.size(); ++i) in_[edges_[i].dst].push_back(i);
  }

  const Pool* pool_ = nullptr;
  std::size_t num_nodes_ = 0;
  std::vector<GraphEdge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::vector<std::uint32_t>> in_;
};

}  // namespace activealign
