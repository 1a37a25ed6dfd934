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

// Knowledge graph data model.
//
// A KnowledgeGraph holds interned entities, relations and classes plus two
// kinds of facts:
//   - relation triplets (head, relation, tail), always stored together with
//     the synthetic inverse triplet (tail, relation^-1, head);
//   - type triplets (entity, class), split out of the raw facts by the
//     reserved relation name `type`.
//
// Relation ids are laid out in pairs: base relation k has id 2k and its
// inverse has id 2k+1, so inverse(r) == r ^ 1. Triplet storage follows the
// same pairing: the forward triplet sits at index 2i and its inverse at 2i+1.
// A graph is immutable once built and can be shared freely across threads.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace activealign {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using ClassId = std::uint32_t;

enum class ElementKind : std::uint8_t { kEntity = 0, kRelation = 1, kClass = 2 };

inline const char* kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::kEntity: return "entity";
    case ElementKind::kRelation: return "relation";
    case ElementKind::kClass: return "class";
  }
  return "?";
}

inline std::optional<ElementKind> parse_kind(const std::string& s) {
  if (s == "entity") return ElementKind::kEntity;
  if (s == "relation") return ElementKind::kRelation;
  if (s == "class") return ElementKind::kClass;
  return std::nullopt;
}

enum class Label : std::int8_t { kNonMatch = -1, kUnlabeled = 0, kMatch = 1 };

// An element of KG1 paired with an element of the same kind in KG2.
struct ElementPair {
  ElementKind kind = ElementKind::kEntity;
  std::uint32_t left = 0;
  std::uint32_t right = 0;

  auto operator<=>(const ElementPair&) const = default;
};

struct Triple {
  EntityId head = 0;
  RelationId rel = 0;
  EntityId tail = 0;

  auto operator<=>(const Triple&) const = default;
};

struct TypeTriple {
  EntityId entity = 0;
  ClassId cls = 0;

  auto operator<=>(const TypeTriple&) const = default;
};

// Dense string <-> id dictionary.
class Interner {
 public:
  std::uint32_t intern(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.push_back(name);
    index_.emplace(name, id);
    return id;
  }
  std::optional<std::uint32_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

class KnowledgeGraphBuilder;

class KnowledgeGraph {
 public:
  static constexpr const char* kInverseSuffix = "^-1";

  static RelationId inverse(RelationId r) { return r ^ 1u; }
  static bool is_inverse(RelationId r) { return (r & 1u) != 0; }
  static RelationId base_relation(std::uint32_t k) { return 2 * k; }

  std::size_t num_entities() const { return entities_.size(); }
  // Counts inverse relations too.
  std::size_t num_relations() const { return 2 * base_relations_.size(); }
  std::size_t num_base_relations() const { return base_relations_.size(); }
  std::size_t num_classes() const { return classes_.size(); }

  const std::string& entity_name(EntityId e) const { return entities_.name(e); }
  const std::string& class_name(ClassId c) const { return classes_.name(c); }
  std::string relation_name(RelationId r) const {
    const std::string& base = base_relations_.name(r / 2);
    return is_inverse(r) ? base + kInverseSuffix : base;
  }

  std::optional<EntityId> find_entity(const std::string& n) const { return entities_.find(n); }
  std::optional<ClassId> find_class(const std::string& n) const { return classes_.find(n); }
  // Only base (forward) relations are addressable by name.
  std::optional<RelationId> find_relation(const std::string& n) const {
    auto k = base_relations_.find(n);
    if (!k) return std::nullopt;
    return base_relation(*k);
  }

  // All relation triplets including inverses; index i ^ 1 is the inverse of i.
  std::span<const Triple> triplets() const { return triplets_; }
  std::span<const TypeTriple> type_triplets() const { return type_triplets_; }

  // Indices into triplets() whose head is `e`.
  std::span<const std::size_t> out_edges(EntityId e) const { return out_edges_.at(e); }
  // Indices into triplets() labelled with relation `r`.
  std::span<const std::size_t> relation_triplets(RelationId r) const {
    return relation_triplets_.at(r);
  }
  std::span<const EntityId> class_members(ClassId c) const { return class_members_.at(c); }
  std::span<const ClassId> entity_classes(EntityId e) const { return entity_classes_.at(e); }

  bool class_is_empty(ClassId c) const { return class_members_.at(c).empty(); }
  bool is_member(EntityId e, ClassId c) const {
    auto cs = entity_classes(e);
    return std::binary_search(cs.begin(), cs.end(), c);
  }
  bool has_triplet(EntityId h, RelationId r, EntityId t) const {
    return triplet_keys_.count(key(h, r, t)) > 0;
  }

 private:
  friend class KnowledgeGraphBuilder;

  static std::uint64_t key(EntityId h, RelationId r, EntityId t) {
    return (static_cast<std::uint64_t>(h) << 40) | (static_cast<std::uint64_t>(r) << 24) |
           static_cast<std::uint64_t>(t);
  }

  Interner entities_;
  Interner base_relations_;
  Interner classes_;
  std::vector<Triple> triplets_;
  std::vector<TypeTriple> type_triplets_;
  std::vector<std::vector<std::size_t>> out_edges_;
  std::vector<std::vector<std::size_t>> relation_triplets_;
  std::vector<std::vector<EntityId>> class_members_;
  std::vector<std::vector<ClassId>> entity_classes_;
  std::unordered_set<std::uint64_t> triplet_keys_;
};

class KnowledgeGraphBuilder {
 public:
  static constexpr std::size_t kMaxEntities = std::size_t{1} << 24;
  static constexpr std::size_t kMaxRelations = std::size_t{1} << 15;

  EntityId add_entity(const std::string& name) {
    const auto id = g_.entities_.intern(name);
    if (g_.entities_.size() > kMaxEntities) throw std::length_error("too many entities");
    return id;
  }
  RelationId add_relation(const std::string& name) {
    if (name.ends_with(KnowledgeGraph::kInverseSuffix)) {
      throw std::invalid_argument("relation name uses the reserved inverse suffix: " + name);
    }
    const auto k = g_.base_relations_.intern(name);
    if (g_.base_relations_.size() > kMaxRelations) throw std::length_error("too many relations");
    return KnowledgeGraph::base_relation(k);
  }
  ClassId add_class(const std::string& name) { return g_.classes_.intern(name); }

  // Duplicate facts are ignored.
  void add_triple(EntityId h, RelationId r, EntityId t) {
    if (KnowledgeGraph::is_inverse(r)) throw std::invalid_argument("add_triple takes base relations");
    if (!forward_.insert(KnowledgeGraph::key(h, r, t)).second) return;
    pending_.push_back({h, r, t});
  }
  void add_triple(const std::string& h, const std::string& r, const std::string& t) {
    const EntityId hid = add_entity(h);
    const RelationId rid = add_relation(r);
    const EntityId tid = add_entity(t);
    add_triple(hid, rid, tid);
  }
  void add_type(EntityId e, ClassId c) {
    if (!types_.insert({e, c}).second) return;
    g_.type_triplets_.push_back({e, c});
  }
  void add_type(const std::string& e, const std::string& c) {
    const EntityId eid = add_entity(e);
    add_type(eid, add_class(c));
  }

  KnowledgeGraph build() && {
    KnowledgeGraph& g = g_;
    g.triplets_.reserve(2 * pending_.size());
    for (const Triple& t : pending_) {
      g.triplets_.push_back(t);
      g.triplets_.push_back({t.tail, KnowledgeGraph::inverse(t.rel), t.head});
    }
    g.out_edges_.assign(g.num_entities(), {});
    g.relation_triplets_.assign(g.num_relations(), {});
    for (std::size_t i = 0; i < g.triplets_.size(); ++i) {
      const Triple& t = g.triplets_[i];
      g.out_edges_[t.head].push_back(i);
      g.relation_triplets_[t.rel].push_back(i);
      g.triplet_keys_.insert(KnowledgeGraph::key(t.head, t.rel, t.tail));
    }
    g.class_members_.assign(g.num_classes(), {});
    g.entity_classes_.assign(g.num_entities(), {});
    for (const TypeTriple& tt : g.type_triplets_) {
      g.class_members_[tt.cls].push_back(tt.entity);
      g.entity_classes_[tt.entity].push_back(tt.cls);
    }
    for (auto& v : g.class_members_) std::sort(v.begin(), v.end());
    for (auto& v : g.entity_classes_) std::sort(v.begin(), v.end());
    return std::move(g_);
  }

 private:
  KnowledgeGraph g_;
  std::vector<Triple> pending_;
  std::unordered_set<std::uint64_t> forward_;
  std::set<std::pair<EntityId, ClassId>> types_;
};

// Gold alignment between two graphs. Relation ids are base (even) ids.
// Consumed only by the simulated oracle and by evaluation.
struct GoldLinks {
  using Links = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  Links entity_matches;
  Links relation_matches;
  Links class_matches;

  const Links& of(ElementKind kind) const {
    switch (kind) {
      case ElementKind::kEntity: return entity_matches;
      case ElementKind::kRelation: return relation_matches;
      case ElementKind::kClass: return class_matches;
    }
    throw std::logic_error("bad kind");
  }
  Links& of(ElementKind kind) {
    return const_cast<Links&>(static_cast<const GoldLinks&>(*this).of(kind));
  }

  void normalize() {
    for (Links* l : {&entity_matches, &relation_matches, &class_matches}) {
      std::sort(l->begin(), l->end());
      l->erase(std::unique(l->begin(), l->end()), l->end());
    }
  }

  bool is_match(const ElementPair& p) const {
    const Links& l = of(p.kind);
    return std::binary_search(l.begin(), l.end(), std::make_pair(p.left, p.right));
  }

  std::size_t size() const {
    return entity_matches.size() + relation_matches.size() + class_matches.size();
  }
};

// Label store enforcing the unlabeled -> +-1 transition rule.
class LabelBook {
 public:
  Label get(const ElementPair& p) const {
    auto it = labels_.find(p);
    return it == labels_.end() ? Label::kUnlabeled : it->second;
  }
  // Returns false when the pair already carries the same label; throws on a
  // conflicting relabel.
  bool set(const ElementPair& p, Label l) {
    if (l == Label::kUnlabeled) throw std::invalid_argument("cannot assign the unlabeled state");
    auto [it, inserted] = labels_.emplace(p, l);
    if (inserted) return true;
    if (it->second != l) throw std::logic_error("conflicting label for an already labeled pair");
    return false;
  }
  bool contains(const ElementPair& p) const { return labels_.count(p) > 0; }
  std::size_t size() const { return labels_.size(); }
  const std::map<ElementPair, Label>& all() const { return labels_; }

  std::vector<ElementPair> matches(ElementKind kind) const {
    std::vector<ElementPair> out;
    for (const auto& [p, l] : labels_) {
      if (p.kind == kind && l == Label::kMatch) out.push_back(p);
    }
    return out;
  }
  std::vector<ElementPair> non_matches(ElementKind kind) const {
    std::vector<ElementPair> out;
    for (const auto& [p, l] : labels_) {
      if (p.kind == kind && l == Label::kNonMatch) out.push_back(p);
    }
    return out;
  }

 private:
  std::map<ElementPair, Label> labels_;
};

inline std::size_t element_count(const KnowledgeGraph& g, ElementKind kind) {
  switch (kind) {
    case ElementKind::kEntity: return g.num_entities();
    case ElementKind::kRelation: return g.num_relations();
    case ElementKind::kClass: return g.num_classes();
  }
  return 0;
}

}  // namespace activealign
