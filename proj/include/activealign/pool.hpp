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

// Candidate pool of element pairs, schema signatures and top-N blocking.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "activealign/align.hpp"
#include "activealign/kg.hpp"
#include "activealign/linalg.hpp"

namespace activealign {

using PairId = std::uint32_t;

// Sorted, duplicate-free set of element pairs. A pair's id is its index, so
// ids depend only on the set's content and never on insertion order.
class Pool {
 public:
  Pool() = default;
  explicit Pool(std::vector<ElementPair> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
    index_.reserve(pairs_.size());
    for (std::size_t i = 0; i < pairs_.size(); ++i) index_.emplace(key(pairs_[i]), static_cast<PairId>(i));
  }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::span<const ElementPair> pairs() const { return pairs_; }
  const ElementPair& at(PairId id) const { return pairs_.at(id); }

  std::optional<PairId> find(const ElementPair& p) const {
    auto it = index_.find(key(p));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const ElementPair& p) const { return index_.count(key(p)) > 0; }

  std::size_t count(ElementKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(pairs_.begin(), pairs_.end(), [&](const ElementPair& p) { return p.kind == kind; }));
  }

 private:
  static std::uint64_t key(const ElementPair& p) {
    return (static_cast<std::uint64_t>(p.kind) << 56) | (static_cast<std::uint64_t>(p.left) << 28) |
           static_cast<std::uint64_t>(p.right);
  }

  std::vector<ElementPair> pairs_;
  std::unordered_map<std::uint64_t, PairId> index_;
};

// [weighted mean of rbar over the distinct relations on e's out-edges
//  (inverses included); weighted mean of cbar over e's classes].
// Weights are the schema weights w_r, w_c clamped at 0. A half with no
// positive weight is the zero vector.
inline Vec schema_signature(const KnowledgeGraph& kg, const SideFeatures& f, EntityId e) {
  const std::size_t de = f.mean_relation.cols();
  Vec sig(2 * de, 0.0);
  std::span<double> rel_half(sig.data(), de), cls_half(sig.data() + de, de);

  std::vector<RelationId> rels;
  for (std::size_t idx : kg.out_edges(e)) rels.push_back(kg.triplets()[idx].rel);
  std::sort(rels.begin(), rels.end());
  rels.erase(std::unique(rels.begin(), rels.end()), rels.end());
  double wr = 0.0;
  for (RelationId r : rels) {
    const double w = std::max(0.0, f.relation_weight[r]);
    if (w <= 0.0) continue;
    axpy(w, f.mean_relation.row(r), rel_half);
    wr += w;
  }
  if (wr > 0.0) {
    for (double& x : rel_half) x /= wr;
  }

  double wc = 0.0;
  for (ClassId c : kg.entity_classes(e)) {
    const double w = std::max(0.0, f.class_weight[c]);
    if (w <= 0.0) continue;
    axpy(w, f.mean_class.row(c), cls_half);
    wc += w;
  }
  if (wc > 0.0) {
    for (double& x : cls_half) x /= wc;
  }
  return sig;
}

// Signatures of every entity on one side. Left signatures are mapped by
// A_ent half by half so they live in the right space, as in the mean branch
// of S(r, r') and S(c, c').
inline Matrix signature_matrix(const JointModel& m, const KnowledgeGraph& kg, const SideFeatures& f,
                               bool right_side) {
  const std::size_t de = m.left.entity_dim();
  Matrix out(kg.num_entities(), 2 * de);
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    Vec s = schema_signature(kg, f, e);
    if (!right_side) {
      const Vec a = matvec(m.align.a_ent, std::span<const double>(s.data(), de));
      const Vec b = matvec(m.align.a_ent, std::span<const double>(s.data() + de, de));
      std::copy(a.begin(), a.end(), s.begin());
      std::copy(b.begin(), b.end(), s.begin() + static_cast<std::ptrdiff_t>(de));
    }
    std::copy(s.begin(), s.end(), out.row(e).begin());
  }
  return out;
}

namespace detail {

// Top-n column indices of each row of `sim` by descending value, ties by
// ascending index.
inline std::vector<std::vector<std::uint32_t>> top_n_rows(const Matrix& sim, std::size_t n) {
  std::vector<std::vector<std::uint32_t>> out(sim.rows());
  std::vector<std::uint32_t> idx(sim.cols());
  for (std::size_t i = 0; i < sim.rows(); ++i) {
    for (std::uint32_t j = 0; j < idx.size(); ++j) idx[j] = j;
    const std::size_t k = std::min(n, idx.size());
    auto row = sim.row(i);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    out[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

}  // namespace detail

// Cosine similarities between all left and right schema signatures.
inline Matrix signature_similarity(const JointModel& m, const DerivedFeatures& f, const KnowledgeGraph& kg1,
                                   const KnowledgeGraph& kg2) {
  const Matrix a = signature_matrix(m, kg1, f.left, false);
  const Matrix b = signature_matrix(m, kg2, f.right, true);
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = cosine(a.row(i), b.row(j));
  }
  return out;
}

// Entity pairs in both the left top-N and the right top-N, plus every base
// relation pair and every class pair.
inline Pool generate_pool(const JointModel& m, const DerivedFeatures& f, const KnowledgeGraph& kg1,
                          const KnowledgeGraph& kg2, std::size_t n) {
  if (n < 1) throw std::invalid_argument("generate_pool: N must be at least 1");
  std::vector<ElementPair> pairs;
  for (RelationId a : alignable_relations(kg1)) {
    for (RelationId b : alignable_relations(kg2)) pairs.push_back({ElementKind::kRelation, a, b});
  }
  for (ClassId a = 0; a < kg1.num_classes(); ++a) {
    for (ClassId b = 0; b < kg2.num_classes(); ++b) pairs.push_back({ElementKind::kClass, a, b});
  }
  if (kg1.num_entities() > 0 && kg2.num_entities() > 0) {
    const Matrix sim = signature_similarity(m, f, kg1, kg2);
    Matrix simt(sim.cols(), sim.rows());
    for (std::size_t i = 0; i < sim.rows(); ++i) {
      for (std::size_t j = 0; j < sim.cols(); ++j) simt(j, i) = sim(i, j);
    }
    const auto left_top = detail::top_n_rows(sim, n);
    const auto right_top = detail::top_n_rows(simt, n);
    for (EntityId e = 0; e < left_top.size(); ++e) {
      for (std::uint32_t e2 : left_top[e]) {
        const auto& back = right_top[e2];
        if (std::binary_search(back.begin(), back.end(), e)) pairs.push_back({ElementKind::kEntity, e, e2});
      }
    }
  }
  return Pool(std::move(pairs));
}

// Fraction of gold matches present in the pool.
inline double pool_recall(const Pool& pool, const GoldLinks& gold) {
  if (gold.size() == 0) return 1.0;
  std::size_t hit = 0;
  for (ElementKind k : kAllKinds) {
    for (const auto& [a, b] : gold.of(k)) hit += pool.contains({k, a, b}) ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

}  // namespace activealign
