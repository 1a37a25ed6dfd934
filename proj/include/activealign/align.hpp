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

// Joint alignment of entities, relations and classes across two embedding
// spaces.
//
//   S(e, e') = cos(A_ent e, e')
//   S(r, r') = max(cos(A_rel r, r'), cos(A_ent rbar, rbar'))
//   S(c, c') = max(cos(A_cls c, c'), cos(A_ent cbar, cbar'))
//
// where rbar / cbar are the dangling-weighted mean embeddings held in
// DerivedFeatures. The class vector c is the class centre b_c. Features are
// recomputed between training phases, never inside one, so during training
// the mean branch only propagates gradient into A_ent.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "activealign/embed.hpp"
#include "activealign/gradient.hpp"
#include "activealign/kg.hpp"
#include "activealign/linalg.hpp"
#include "activealign/sampling.hpp"

namespace activealign {

enum class AlignBlock : std::uint8_t { kEntity = 0, kRelation = 1, kClass = 2 };

inline ParamKey align_key(AlignBlock b, std::size_t row) {
  return {Owner::kAlign, static_cast<std::uint8_t>(b), static_cast<std::uint32_t>(row)};
}

struct AlignConfig {
  double z_ent = 0.05;
  double z_rel = 0.1;
  double z_cls = 0.1;
  double tau = 0.9;
  double gamma = 2.0;
  double init_noise = 0.01;

  void validate() const {
    if (!(z_ent > 0.0 && z_rel > 0.0 && z_cls > 0.0)) {
      throw std::invalid_argument("temperatures must be positive");
    }
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in (0,1)");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  }
};

struct AlignmentModel {
  AlignConfig cfg;
  Matrix a_ent;
  Matrix a_rel;
  Matrix a_cls;

  AlignmentModel() = default;
  AlignmentModel(std::size_t entity_dim, std::size_t class_dim, const AlignConfig& c, Rng& rng)
      : cfg(c) {
    cfg.validate();
    std::normal_distribution<double> gauss(0.0, c.init_noise);
    a_ent = Matrix::identity(entity_dim);
    a_rel = Matrix::identity(entity_dim);
    a_cls = Matrix::identity(class_dim);
    for (Matrix* m : {&a_ent, &a_rel, &a_cls}) {
      for (double& x : m->data()) x += gauss(rng);
    }
  }

  double temperature(ElementKind k) const {
    switch (k) {
      case ElementKind::kEntity: return cfg.z_ent;
      case ElementKind::kRelation: return cfg.z_rel;
      case ElementKind::kClass: return cfg.z_cls;
    }
    return 1.0;
  }

  Matrix& block(std::uint8_t b) {
    switch (static_cast<AlignBlock>(b)) {
      case AlignBlock::kEntity: return a_ent;
      case AlignBlock::kRelation: return a_rel;
      case AlignBlock::kClass: return a_cls;
    }
    throw std::out_of_range("bad align block");
  }

  bool operator==(const AlignmentModel& o) const {
    return cfg.z_ent == o.cfg.z_ent && cfg.z_rel == o.cfg.z_rel && cfg.z_cls == o.cfg.z_cls &&
           cfg.tau == o.cfg.tau && cfg.gamma == o.cfg.gamma && a_ent == o.a_ent &&
           a_rel == o.a_rel && a_cls == o.a_cls;
  }
};

// Both embedding spaces plus the mapping between them.
struct JointModel {
  EmbeddingSpace left;
  EmbeddingSpace right;
  AlignmentModel align;

  const EmbeddingSpace& space(bool right_side) const { return right_side ? right : left; }
  bool all_finite() const {
    return left.all_finite() && right.all_finite() && activealign::all_finite(align.a_ent.data()) &&
           activealign::all_finite(align.a_rel.data()) &&
           activealign::all_finite(align.a_cls.data());
  }
  bool operator==(const JointModel&) const = default;
};

inline JointModel make_joint_model(const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                                   const EmbedConfig& ecfg, const AlignConfig& acfg,
                                   std::uint64_t seed) {
  Rng rng(seed);
  JointModel m;
  m.left = EmbeddingSpace(kg1.num_entities(), kg1.num_relations(), kg1.num_classes(), ecfg, rng);
  m.right = EmbeddingSpace(kg2.num_entities(), kg2.num_relations(), kg2.num_classes(), ecfg, rng);
  m.align = AlignmentModel(ecfg.entity_dim, ecfg.class_dim, acfg, rng);
  return m;
}

inline double& joint_param(JointModel& m, ParamKey k, std::size_t col) {
  switch (k.owner) {
    case Owner::kLeft: return m.left.block(k.block).row(k.row)[col];
    case Owner::kRight: return m.right.block(k.block).row(k.row)[col];
    case Owner::kAlign: return m.align.block(k.block).row(k.row)[col];
  }
  throw std::out_of_range("bad owner");
}

// Per-side derived quantities. Weights are cosine maxima; means are weighted
// averages with negative weights clamped to zero.
struct SideFeatures {
  Vec entity_weight;
  Matrix mean_relation;  // one row per relation id, inverses included
  std::vector<char> mean_relation_empty;
  Matrix mean_class;
  std::vector<char> mean_class_empty;
  Vec relation_weight;
  Vec class_weight;

  bool operator==(const SideFeatures&) const = default;
};

struct DerivedFeatures {
  SideFeatures left;
  SideFeatures right;
  bool stale = true;

  const SideFeatures& side(bool right_side) const { return right_side ? right : left; }
  bool operator==(const DerivedFeatures&) const = default;
};

// Local optimum of f_er over the relation for one triplet, in entity space.
// TransE: e' - e. RotatE: the unit complex number of e'_k / e_k per
// coordinate, written as interleaved (cos, sin).
inline Vec local_optimum_relation(ModelKind kind, std::span<const double> head,
                                  std::span<const double> tail) {
  if (kind == ModelKind::kTransE) return sub(tail, head);
  Vec out(head.size(), 0.0);
  for (std::size_t k = 0; 2 * k + 1 < head.size(); ++k) {
    const double hr = head[2 * k], hi = head[2 * k + 1];
    const double tr = tail[2 * k], ti = tail[2 * k + 1];
    // tail * conj(head)
    const double re = tr * hr + ti * hi;
    const double im = ti * hr - tr * hi;
    const double mod = std::hypot(re, im);
    if (mod > 0.0) {
      out[2 * k] = re / mod;
      out[2 * k + 1] = im / mod;
    }
  }
  return out;
}

// Weighted mean of local optima over the triplets of `r`, each weighted by
// min(w_head, w_tail). Returns false (and a zero vector) without weight.
inline bool mean_relation_embedding(const EmbeddingSpace& s, const KnowledgeGraph& kg, RelationId r,
                                    std::span<const double> entity_weight, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  double total = 0.0;
  for (std::size_t idx : kg.relation_triplets(r)) {
    const Triple& t = kg.triplets()[idx];
    const double w = std::max(0.0, std::min(entity_weight[t.head], entity_weight[t.tail]));
    if (w <= 0.0) continue;
    const Vec opt = local_optimum_relation(s.kind(), s.entity(t.head), s.entity(t.tail));
    axpy(w, opt, out);
    total += w;
  }
  if (total <= 0.0) return false;
  for (double& x : out) x /= total;
  return true;
}

// sum_e w_e e / sum_e w_e over members of `c`.
inline bool mean_class_embedding(const EmbeddingSpace& s, const KnowledgeGraph& kg, ClassId c,
                                 std::span<const double> entity_weight, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  double total = 0.0;
  for (EntityId e : kg.class_members(c)) {
    const double w = std::max(0.0, entity_weight[e]);
    if (w <= 0.0) continue;
    axpy(w, s.entity(e), out);
    total += w;
  }
  if (total <= 0.0) return false;
  for (double& x : out) x /= total;
  return true;
}

// Unit-normalized rows of A_ent e (left) or e' (right), for fast cosines.
inline Matrix normalized_entities(const JointModel& m, bool right_side) {
  const EmbeddingSpace& s = m.space(right_side);
  Matrix out(s.num_entities(), s.entity_dim());
  for (EntityId e = 0; e < s.num_entities(); ++e) {
    Vec v = right_side ? Vec(s.entity(e).begin(), s.entity(e).end())
                       : matvec(m.align.a_ent, s.entity(e));
    const double n = norm(v);
    if (n > 0.0) {
      for (std::size_t i = 0; i < v.size(); ++i) out(e, i) = v[i] / n;
    }
  }
  return out;
}

// Dense S(e, e') for all entity pairs.
inline Matrix entity_similarity_matrix(const JointModel& m) {
  const Matrix l = normalized_entities(m, false);
  const Matrix r = normalized_entities(m, true);
  Matrix out(l.rows(), r.rows());
  for (std::size_t i = 0; i < l.rows(); ++i) {
    for (std::size_t j = 0; j < r.rows(); ++j) out(i, j) = std::clamp(dot(l.row(i), r.row(j)), -1.0, 1.0);
  }
  return out;
}

namespace detail {

inline double branch_cos(const Matrix& a, std::span<const double> x, std::span<const double> y) {
  return cosine(matvec(a, x), y);
}

// cos(A x, y); adds scale * gradient to `g` for A and, when keys are given,
// for x and y.
inline double branch_cos_grad(const Matrix& a, AlignBlock ablock, std::span<const double> x,
                              std::span<const double> y, Gradient* g, double scale,
                              const ParamKey* x_key, const ParamKey* y_key) {
  const Vec u = matvec(a, x);
  const CosineGrad cg = cosine_grad(u, y);
  if (!g) return cg.value;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (cg.d_u[i] != 0.0) g->add(align_key(ablock, i), x, scale * cg.d_u[i]);
  }
  if (x_key) g->add(*x_key, matTvec(a, cg.d_u), scale);
  if (y_key) g->add(*y_key, cg.d_y, scale);
  return cg.value;
}

// Gradient w.r.t. entity-space relation vector mapped back to the stored
// parameters (phases for RotatE).
inline Vec relation_param_grad(const EmbeddingSpace& s, RelationId r, std::span<const double> d_vec) {
  if (s.kind() == ModelKind::kTransE) return Vec(d_vec.begin(), d_vec.end());
  auto phase = s.block(SpaceBlock::kRelation).row(r);
  Vec out(phase.size());
  for (std::size_t k = 0; k < phase.size(); ++k) {
    out[k] = -std::sin(phase[k]) * d_vec[2 * k] + std::cos(phase[k]) * d_vec[2 * k + 1];
  }
  return out;
}

}  // namespace detail

// S(pair). When `g` is given, adds scale * dS/dparams; the max rule routes
// the gradient through the larger branch.
inline double sim_accumulate(const JointModel& m, const DerivedFeatures& f, const ElementPair& p,
                             Gradient* g, double scale = 1.0) {
  switch (p.kind) {
    case ElementKind::kEntity: {
      const ParamKey kx = key_of(Owner::kLeft, SpaceBlock::kEntity, p.left);
      const ParamKey ky = key_of(Owner::kRight, SpaceBlock::kEntity, p.right);
      return detail::branch_cos_grad(m.align.a_ent, AlignBlock::kEntity, m.left.entity(p.left),
                                     m.right.entity(p.right), g, scale, &kx, &ky);
    }
    case ElementKind::kRelation: {
      const Vec r1 = m.left.relation_vector(p.left);
      const Vec r2 = m.right.relation_vector(p.right);
      auto mean1 = f.left.mean_relation.row(p.left);
      auto mean2 = f.right.mean_relation.row(p.right);
      const double s_struct = detail::branch_cos(m.align.a_rel, r1, r2);
      const double s_mean = detail::branch_cos(m.align.a_ent, mean1, mean2);
      if (!g) return std::max(s_struct, s_mean);
      if (s_mean > s_struct) {
        return detail::branch_cos_grad(m.align.a_ent, AlignBlock::kEntity, mean1, mean2, g, scale,
                                       nullptr, nullptr);
      }
      const Vec u = matvec(m.align.a_rel, r1);
      const CosineGrad cg = cosine_grad(u, r2);
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (cg.d_u[i] != 0.0) g->add(align_key(AlignBlock::kRelation, i), r1, scale * cg.d_u[i]);
      }
      g->add(key_of(Owner::kLeft, SpaceBlock::kRelation, p.left),
             detail::relation_param_grad(m.left, p.left, matTvec(m.align.a_rel, cg.d_u)), scale);
      g->add(key_of(Owner::kRight, SpaceBlock::kRelation, p.right),
             detail::relation_param_grad(m.right, p.right, cg.d_y), scale);
      return cg.value;
    }
    case ElementKind::kClass: {
      auto c1 = m.left.class_vector(p.left);
      auto c2 = m.right.class_vector(p.right);
      auto mean1 = f.left.mean_class.row(p.left);
      auto mean2 = f.right.mean_class.row(p.right);
      const double s_struct = detail::branch_cos(m.align.a_cls, c1, c2);
      const double s_mean = detail::branch_cos(m.align.a_ent, mean1, mean2);
      if (!g) return std::max(s_struct, s_mean);
      if (s_mean > s_struct) {
        return detail::branch_cos_grad(m.align.a_ent, AlignBlock::kEntity, mean1, mean2, g, scale,
                                       nullptr, nullptr);
      }
      const ParamKey kx = key_of(Owner::kLeft, SpaceBlock::kClassB, p.left);
      const ParamKey ky = key_of(Owner::kRight, SpaceBlock::kClassB, p.right);
      return detail::branch_cos_grad(m.align.a_cls, AlignBlock::kClass, c1, c2, g, scale, &kx, &ky);
    }
  }
  return 0.0;
}

inline double sim(const JointModel& m, const DerivedFeatures& f, const ElementPair& p) {
  return sim_accumulate(m, f, p, nullptr);
}

// Relation ids that take part in schema alignment: base relations only.
inline std::vector<RelationId> alignable_relations(const KnowledgeGraph& kg) {
  std::vector<RelationId> out;
  for (std::uint32_t k = 0; k < kg.num_base_relations(); ++k) out.push_back(KnowledgeGraph::base_relation(k));
  return out;
}

inline std::vector<std::uint32_t> alignable_elements(const KnowledgeGraph& kg, ElementKind kind) {
  if (kind == ElementKind::kRelation) return alignable_relations(kg);
  std::vector<std::uint32_t> out(element_count(kg, kind));
  std::iota(out.begin(), out.end(), 0u);
  return out;
}

// Recomputes weights, mean embeddings and schema weights from scratch.
inline DerivedFeatures compute_features(const JointModel& m, const KnowledgeGraph& kg1,
                                        const KnowledgeGraph& kg2) {
  DerivedFeatures f;
  const Matrix s = entity_similarity_matrix(m);
  const double lowest = -1.0;
  f.left.entity_weight.assign(kg1.num_entities(), 0.0);
  f.right.entity_weight.assign(kg2.num_entities(), 0.0);
  if (kg1.num_entities() > 0 && kg2.num_entities() > 0) {
    std::fill(f.left.entity_weight.begin(), f.left.entity_weight.end(), lowest);
    std::fill(f.right.entity_weight.begin(), f.right.entity_weight.end(), lowest);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (std::size_t j = 0; j < s.cols(); ++j) {
        f.left.entity_weight[i] = std::max(f.left.entity_weight[i], s(i, j));
        f.right.entity_weight[j] = std::max(f.right.entity_weight[j], s(i, j));
      }
    }
  }
  const std::size_t de = m.left.entity_dim();
  auto fill_side = [&](SideFeatures& side, const EmbeddingSpace& sp, const KnowledgeGraph& kg) {
    side.mean_relation = Matrix(kg.num_relations(), de);
    side.mean_relation_empty.assign(kg.num_relations(), 0);
    for (RelationId r = 0; r < kg.num_relations(); ++r) {
      side.mean_relation_empty[r] =
          !mean_relation_embedding(sp, kg, r, side.entity_weight, side.mean_relation.row(r));
    }
    side.mean_class = Matrix(kg.num_classes(), de);
    side.mean_class_empty.assign(kg.num_classes(), 0);
    for (ClassId c = 0; c < kg.num_classes(); ++c) {
      side.mean_class_empty[c] =
          !mean_class_embedding(sp, kg, c, side.entity_weight, side.mean_class.row(c));
    }
  };
  fill_side(f.left, m.left, kg1);
  fill_side(f.right, m.right, kg2);

  // Schema weights: best similarity to any element of the other side. An
  // inverse relation shares the weight of its base relation.
  f.left.relation_weight.assign(kg1.num_relations(), 0.0);
  f.right.relation_weight.assign(kg2.num_relations(), 0.0);
  f.left.class_weight.assign(kg1.num_classes(), 0.0);
  f.right.class_weight.assign(kg2.num_classes(), 0.0);
  const auto r1 = alignable_relations(kg1), r2 = alignable_relations(kg2);
  if (!r1.empty() && !r2.empty()) {
    for (RelationId a : r1) f.left.relation_weight[a] = lowest;
    for (RelationId b : r2) f.right.relation_weight[b] = lowest;
    for (RelationId a : r1) {
      for (RelationId b : r2) {
        const double v = sim(m, f, {ElementKind::kRelation, a, b});
        f.left.relation_weight[a] = std::max(f.left.relation_weight[a], v);
        f.right.relation_weight[b] = std::max(f.right.relation_weight[b], v);
      }
    }
    for (RelationId a : r1) f.left.relation_weight[a ^ 1u] = f.left.relation_weight[a];
    for (RelationId b : r2) f.right.relation_weight[b ^ 1u] = f.right.relation_weight[b];
  }
  if (kg1.num_classes() > 0 && kg2.num_classes() > 0) {
    std::fill(f.left.class_weight.begin(), f.left.class_weight.end(), lowest);
    std::fill(f.right.class_weight.begin(), f.right.class_weight.end(), lowest);
    for (ClassId a = 0; a < kg1.num_classes(); ++a) {
      for (ClassId b = 0; b < kg2.num_classes(); ++b) {
        const double v = sim(m, f, {ElementKind::kClass, a, b});
        f.left.class_weight[a] = std::max(f.left.class_weight[a], v);
        f.right.class_weight[b] = std::max(f.right.class_weight[b], v);
      }
    }
  }
  f.stale = false;
  return f;
}

// Directional softmax Pr[j | row] with temperature z over `sims`.
inline double directional_probability(std::span<const double> sims, std::size_t j, double z) {
  if (sims.empty() || j >= sims.size()) throw std::out_of_range("directional_probability");
  const double mx = *std::max_element(sims.begin(), sims.end());
  double denom = 0.0;
  for (double s : sims) denom += std::exp((s - mx) / z);
  return std::exp((sims[j] - mx) / z) / denom;
}

// min(Pr[x' | x], Pr[x | x']) given the similarities of x to its candidates
// and of x' to its candidates.
inline double match_probability(std::span<const double> row_sims, std::size_t j_in_row,
                                std::span<const double> col_sims, std::size_t i_in_col, double z) {
  return std::min(directional_probability(row_sims, j_in_row, z),
                  directional_probability(col_sims, i_in_col, z));
}

// Pairs labeled by the oracle plus mined pseudo-matches, indexed by kind.
struct LabeledSets {
  using Links = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  std::array<Links, 3> matches;
  std::array<Links, 3> non_matches;
  struct SemiPair {
    ElementPair pair;
    double soft_label = 0.0;
  };
  std::vector<SemiPair> semi;

  Links& match_links(ElementKind k) { return matches[static_cast<std::size_t>(k)]; }
  const Links& match_links(ElementKind k) const { return matches[static_cast<std::size_t>(k)]; }
  const Links& non_match_links(ElementKind k) const {
    return non_matches[static_cast<std::size_t>(k)];
  }

  static LabeledSets from(const LabelBook& book) {
    LabeledSets out;
    for (const auto& [p, l] : book.all()) {
      auto& dst = l == Label::kMatch ? out.matches : out.non_matches;
      dst[static_cast<std::size_t>(p.kind)].emplace_back(p.left, p.right);
    }
    return out;
  }

  std::size_t match_count() const { return matches[0].size() + matches[1].size() + matches[2].size(); }
};

inline constexpr std::array<ElementKind, 3> kAllKinds = {ElementKind::kEntity, ElementKind::kRelation,
                                                         ElementKind::kClass};

// Alignment negatives for one labeled match: substitute either side by a
// random element of that side, never reproducing the match itself.
inline std::vector<ElementPair> sample_alignment_negatives(const ElementPair& pos,
                                                           std::span<const std::uint32_t> left_pool,
                                                           std::span<const std::uint32_t> right_pool,
                                                           std::size_t count, Rng& rng) {
  std::vector<ElementPair> out;
  const bool left_ok = left_pool.size() > 1;
  const bool right_ok = right_pool.size() > 1;
  if (!left_ok && !right_ok) return out;
  for (std::size_t i = 0; i < count; ++i) {
    const bool swap_left = left_ok && (!right_ok || uniform01(rng) < 0.5);
    ElementPair neg = pos;
    for (int attempt = 0; attempt < 64 && neg == pos; ++attempt) {
      if (swap_left) {
        neg.left = left_pool[uniform_index(rng, left_pool.size())];
      } else {
        neg.right = right_pool[uniform_index(rng, right_pool.size())];
      }
    }
    if (!(neg == pos)) out.push_back(neg);
  }
  return out;
}

// One listwise term: -log softmax_z(S(pos) | S(pos), S(negs)), optionally
// scaled by the focal factor (1 - p_pos)^gamma.
inline double alignment_term(const JointModel& m, const DerivedFeatures& f, const ElementPair& pos,
                             std::span<const ElementPair> negs, bool focal, Gradient* g,
                             double scale = 1.0) {
  const double z = m.align.temperature(pos.kind);
  std::vector<double> s(negs.size() + 1);
  s[0] = sim(m, f, pos);
  for (std::size_t i = 0; i < negs.size(); ++i) s[i + 1] = sim(m, f, negs[i]);
  const double mx = *std::max_element(s.begin(), s.end());
  double denom = 0.0;
  for (double v : s) denom += std::exp((v - mx) / z);
  std::vector<double> prob(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) prob[i] = std::exp((s[i] - mx) / z) / denom;
  const double p = prob[0];
  const double log_p = (s[0] - mx) / z - std::log(denom);
  const double gamma = m.align.cfg.gamma;
  double value;
  // d value / d log p
  double dlogp;
  if (focal) {
    const double q = 1.0 - p;
    const double fw = q <= 0.0 ? 0.0 : std::pow(q, gamma);
    value = -fw * log_p;
    // d/dlogp of -(1-p)^gamma log p = -(1-p)^gamma + gamma (1-p)^(gamma-1) p log p
    const double fw1 = (q <= 0.0 || gamma == 0.0) ? 0.0 : gamma * std::pow(q, gamma - 1.0);
    dlogp = -fw + fw1 * p * log_p;
  } else {
    value = -log_p;
    dlogp = -1.0;
  }
  if (g) {
    // d log p / d s_i = (delta_i0 - prob_i) / z
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = dlogp * ((i == 0 ? 1.0 : 0.0) - prob[i]) / z;
      if (d == 0.0) continue;
      sim_accumulate(m, f, i == 0 ? pos : negs[i - 1], g, scale * d);
    }
  }
  return value;
}

struct AlignmentBatch {
  std::vector<ElementPair> positives;
  std::vector<std::vector<ElementPair>> negatives;
};

// Negatives for every positive: random substitutions plus labeled
// non-matches sharing an element with the positive.
inline AlignmentBatch make_alignment_batch(std::span<const ElementPair> positives,
                                           const LabeledSets& labeled, const KnowledgeGraph& kg1,
                                           const KnowledgeGraph& kg2, std::size_t negatives_per_pos,
                                           Rng& rng) {
  AlignmentBatch b;
  std::array<std::vector<std::uint32_t>, 3> lp, rp;
  for (ElementKind k : kAllKinds) {
    lp[static_cast<std::size_t>(k)] = alignable_elements(kg1, k);
    rp[static_cast<std::size_t>(k)] = alignable_elements(kg2, k);
  }
  for (const ElementPair& pos : positives) {
    const auto ki = static_cast<std::size_t>(pos.kind);
    auto negs = sample_alignment_negatives(pos, lp[ki], rp[ki], negatives_per_pos, rng);
    for (auto [a, c] : labeled.non_match_links(pos.kind)) {
      if (a == pos.left || c == pos.right) negs.push_back({pos.kind, a, c});
    }
    b.positives.push_back(pos);
    b.negatives.push_back(std::move(negs));
  }
  return b;
}

inline LossResult alignment_loss(const JointModel& m, const DerivedFeatures& f,
                                 const AlignmentBatch& batch, bool focal) {
  LossResult res;
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    if (batch.negatives[i].empty()) {
      ++res.skipped;
      continue;
    }
    res.value += alignment_term(m, f, batch.positives[i], batch.negatives[i], focal, &res.grad);
  }
  return res;
}

// Convenience overload over all labeled matches.
inline LossResult alignment_loss(const JointModel& m, const DerivedFeatures& f,
                                 const LabeledSets& labeled, const KnowledgeGraph& kg1,
                                 const KnowledgeGraph& kg2, std::size_t negatives_per_pos, bool focal,
                                 Rng& rng) {
  std::vector<ElementPair> pos;
  for (ElementKind k : kAllKinds) {
    for (auto [a, b] : labeled.match_links(k)) pos.push_back({k, a, b});
  }
  return alignment_loss(m, f, make_alignment_batch(pos, labeled, kg1, kg2, negatives_per_pos, rng),
                        focal);
}

// -sum S0(x, x') S(x, x') over mined pairs; S0 is the frozen soft label.
inline LossResult semi_loss(const JointModel& m, const DerivedFeatures& f,
                            std::span<const LabeledSets::SemiPair> semi) {
  LossResult res;
  for (const auto& sp : semi) {
    res.value -= sp.soft_label * sim_accumulate(m, f, sp.pair, &res.grad, -sp.soft_label);
  }
  return res;
}

struct ScoredPair {
  ElementPair pair;
  double score = 0.0;
};

// Greedy one-to-one sweep: descending score, ties by pair, skipping pairs
// whose left or right element is already used.
inline std::vector<ScoredPair> one_to_one_sweep(std::vector<ScoredPair> cand) {
  std::sort(cand.begin(), cand.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pair < b.pair;
  });
  std::set<std::pair<ElementKind, std::uint32_t>> used_l, used_r;
  std::vector<ScoredPair> out;
  for (const ScoredPair& c : cand) {
    if (used_l.count({c.pair.kind, c.pair.left}) || used_r.count({c.pair.kind, c.pair.right})) continue;
    used_l.insert({c.pair.kind, c.pair.left});
    used_r.insert({c.pair.kind, c.pair.right});
    out.push_back(c);
  }
  return out;
}

// Pairs with S > tau, conflict-free, carrying their current similarity as
// the frozen soft label. Elements already in a labeled match and pairs
// labeled as non-matches are left out.
inline std::vector<LabeledSets::SemiPair> semi_supervised_mine(const JointModel& m,
                                                               const DerivedFeatures& f,
                                                               const KnowledgeGraph& kg1,
                                                               const KnowledgeGraph& kg2,
                                                               const LabeledSets& labeled) {
  const double tau = m.align.cfg.tau;
  std::vector<ScoredPair> cand;
  std::set<std::pair<ElementKind, std::uint32_t>> taken_l, taken_r;
  std::set<ElementPair> rejected;
  for (ElementKind k : kAllKinds) {
    for (auto [a, b] : labeled.match_links(k)) {
      taken_l.insert({k, a});
      taken_r.insert({k, b});
    }
    for (auto [a, b] : labeled.non_match_links(k)) rejected.insert({k, a, b});
  }
  auto consider = [&](const ElementPair& p, double s) {
    if (!(s > tau)) return;
    if (taken_l.count({p.kind, p.left}) || taken_r.count({p.kind, p.right}) || rejected.count(p)) return;
    cand.push_back({p, s});
  };
  const Matrix es = entity_similarity_matrix(m);
  for (std::size_t i = 0; i < es.rows(); ++i) {
    for (std::size_t j = 0; j < es.cols(); ++j) {
      consider({ElementKind::kEntity, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)},
               es(i, j));
    }
  }
  for (RelationId a : alignable_relations(kg1)) {
    for (RelationId b : alignable_relations(kg2)) {
      const ElementPair p{ElementKind::kRelation, a, b};
      consider(p, sim(m, f, p));
    }
  }
  for (ClassId a = 0; a < kg1.num_classes(); ++a) {
    for (ClassId b = 0; b < kg2.num_classes(); ++b) {
      const ElementPair p{ElementKind::kClass, a, b};
      consider(p, sim(m, f, p));
    }
  }
  std::vector<LabeledSets::SemiPair> out;
  for (const ScoredPair& sp : one_to_one_sweep(std::move(cand))) out.push_back({sp.pair, sp.score});
  return out;
}

struct JointTrainOptions {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
  std::size_t negatives = 4;
  std::size_t align_negatives = 10;
  // Summed mini-batch gradients routinely exceed norm 5, and clipping them
  // stalls the alignment terms, so clipping is opt-in here.
  double clip_norm = 0.0;
  bool normalize_entities = true;
  bool focal = false;
  bool use_semi = true;
  double align_weight = 1.0;
  double semi_weight = 1.0;
};

inline void apply_joint_sgd(JointModel& m, const Gradient& g, double lr, bool normalize_entities) {
  apply_sgd(m.left, g, lr, Owner::kLeft, normalize_entities);
  apply_sgd(m.right, g, lr, Owner::kRight, normalize_entities);
  for (const auto& [k, v] : g.rows()) {
    if (k.owner != Owner::kAlign) continue;
    axpy(-lr, v, m.align.block(k.block).row(k.row));
  }
}

// Joint epochs over both graphs' structure losses and the alignment losses.
// Features stay frozen for the whole call; the caller recomputes them after.
// Returns the mean loss per epoch.
inline std::vector<double> train_joint(JointModel& m, const DerivedFeatures& f,
                                       const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                                       const LabeledSets& labeled, const JointTrainOptions& opts) {
  if (opts.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  Rng rng(opts.seed);
  std::vector<ElementPair> positives;
  for (ElementKind k : kAllKinds) {
    for (auto [a, b] : labeled.match_links(k)) positives.push_back({k, a, b});
  }
  const KnowledgeGraph* kgs[2] = {&kg1, &kg2};
  const Owner owners[2] = {Owner::kLeft, Owner::kRight};
  const std::size_t bs = std::max<std::size_t>(1, opts.batch_size);
  std::vector<double> curve;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::vector<std::size_t> rel_order[2], type_order[2];
    std::size_t steps = 1;
    for (int s = 0; s < 2; ++s) {
      rel_order[s].resize(kgs[s]->triplets().size());
      std::iota(rel_order[s].begin(), rel_order[s].end(), 0);
      std::shuffle(rel_order[s].begin(), rel_order[s].end(), rng);
      type_order[s].resize(kgs[s]->type_triplets().size());
      std::iota(type_order[s].begin(), type_order[s].end(), 0);
      std::shuffle(type_order[s].begin(), type_order[s].end(), rng);
      steps = std::max(steps, (rel_order[s].size() + bs - 1) / bs);
    }
    std::vector<std::size_t> pos_order(positives.size());
    std::iota(pos_order.begin(), pos_order.end(), 0);
    std::shuffle(pos_order.begin(), pos_order.end(), rng);
    std::vector<std::size_t> semi_order(labeled.semi.size());
    std::iota(semi_order.begin(), semi_order.end(), 0);
    std::shuffle(semi_order.begin(), semi_order.end(), rng);

    // Slices are spread evenly over `steps` so every item is seen once.
    auto slice = [&](std::size_t n, std::size_t step) {
      return std::pair<std::size_t, std::size_t>{n * step / steps, n * (step + 1) / steps};
    };
    double total = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      Gradient g;
      double step_loss = 0.0;
      for (int s = 0; s < 2; ++s) {
        const EmbeddingSpace& sp = s == 0 ? m.left : m.right;
        auto [b0, b1] = slice(rel_order[s].size(), step);
        if (b1 > b0) {
          std::vector<Triple> batch;
          for (std::size_t i = b0; i < b1; ++i) batch.push_back(kgs[s]->triplets()[rel_order[s][i]]);
          LossResult r = loss_er(sp, *kgs[s], batch, opts.negatives, rng, owners[s]);
          step_loss += r.value;
          g.merge(r.grad);
        }
        auto [t0, t1] = slice(type_order[s].size(), step);
        if (t1 > t0) {
          std::vector<TypeTriple> batch;
          for (std::size_t i = t0; i < t1; ++i) batch.push_back(kgs[s]->type_triplets()[type_order[s][i]]);
          LossResult r = loss_ec(sp, *kgs[s], batch, opts.negatives, rng, owners[s]);
          step_loss += r.value;
          g.merge(r.grad);
        }
      }
      auto [p0, p1] = slice(pos_order.size(), step);
      if (p1 > p0) {
        std::vector<ElementPair> pos;
        for (std::size_t i = p0; i < p1; ++i) pos.push_back(positives[pos_order[i]]);
        const AlignmentBatch ab = make_alignment_batch(pos, labeled, kg1, kg2, opts.align_negatives, rng);
        LossResult r = alignment_loss(m, f, ab, opts.focal);
        step_loss += opts.align_weight * r.value;
        g.merge(r.grad, opts.align_weight);
      }
      if (opts.use_semi) {
        auto [s0, s1] = slice(semi_order.size(), step);
        if (s1 > s0) {
          std::vector<LabeledSets::SemiPair> part;
          for (std::size_t i = s0; i < s1; ++i) part.push_back(labeled.semi[semi_order[i]]);
          LossResult r = semi_loss(m, f, part);
          step_loss += opts.semi_weight * r.value;
          g.merge(r.grad, opts.semi_weight);
        }
      }
      check_finite_loss(step_loss, "joint loss");
      clip_gradient(g, opts.clip_norm);
      apply_joint_sgd(m, g, opts.learning_rate, opts.normalize_entities);
      total += step_loss;
    }
    if (!m.all_finite()) throw TrainingDiverged("parameters became non-finite");
    curve.push_back(total / static_cast<double>(steps));
  }
  return curve;
}

// Focal-loss epochs over all labels (old and newly added) plus a freshly
// mined semi set, followed by a feature refresh.
inline DerivedFeatures fine_tune(JointModel& m, DerivedFeatures f, const KnowledgeGraph& kg1,
                                 const KnowledgeGraph& kg2, LabeledSets labeled,
                                 const JointTrainOptions& opts) {
  if (opts.epochs == 0) return f;
  if (f.stale) f = compute_features(m, kg1, kg2);
  labeled.semi = opts.use_semi ? semi_supervised_mine(m, f, kg1, kg2, labeled)
                               : std::vector<LabeledSets::SemiPair>{};
  JointTrainOptions o = opts;
  o.focal = true;
  train_joint(m, f, kg1, kg2, labeled, o);
  return compute_features(m, kg1, kg2);
}

}  // namespace activealign
