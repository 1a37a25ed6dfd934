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

// Per-graph embedding model.
//
// Entity-relation structure is scored by TransE, ||e + r - e'||, or RotatE,
// ||e o r - e'|| with r a vector of unit-modulus complex numbers. Entity-class
// structure is scored by ||W_c FFNN(e) - b_c||, where FFNN is a one hidden
// layer tanh network shared by all classes of the graph and (W_c, b_c) define
// the subspace of class c. Both are trained with margin ranking losses and
// plain SGD using hand-derived gradients.
//
// RotatE entity vectors hold interleaved (re, im) pairs; relations store one
// phase per complex coordinate. relation_vector() always returns a vector in
// entity space (a translation for TransE, interleaved (cos, sin) for RotatE),
// which is what alignment and inference consume.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "activealign/gradient.hpp"
#include "activealign/kg.hpp"
#include "activealign/linalg.hpp"
#include "activealign/sampling.hpp"

namespace activealign {

enum class ModelKind : std::uint8_t { kTransE = 0, kRotatE = 1 };

inline const char* model_kind_name(ModelKind k) {
  return k == ModelKind::kTransE ? "transe" : "rotate";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "transe" || s == "TransE") return ModelKind::kTransE;
  if (s == "rotate" || s == "RotatE") return ModelKind::kRotatE;
  throw std::invalid_argument("unknown model kind: " + s);
}

enum class SpaceBlock : std::uint8_t {
  kEntity = 0,
  kRelation,
  kClassW,  // one row per class: W_c flattened row-major (d_c * d_c)
  kClassB,
  kFfnnW1,  // d_c x d_e
  kFfnnB1,  // 1 x d_c
  kFfnnW2,  // d_c x d_c
  kFfnnB2,  // 1 x d_c
  kCount
};

inline constexpr std::size_t kSpaceBlockCount = static_cast<std::size_t>(SpaceBlock::kCount);

inline ParamKey key_of(Owner owner, SpaceBlock block, std::size_t row) {
  return {owner, static_cast<std::uint8_t>(block), static_cast<std::uint32_t>(row)};
}

struct EmbedConfig {
  ModelKind kind = ModelKind::kTransE;
  std::size_t entity_dim = 100;
  std::size_t class_dim = 50;
  double margin_er = 1.0;
  double margin_ec = 1.0;

  void validate() const {
    if (entity_dim == 0 || class_dim == 0) throw std::invalid_argument("dimensions must be positive");
    if (kind == ModelKind::kRotatE && entity_dim % 2 != 0) {
      throw std::invalid_argument("RotatE needs an even entity dimension");
    }
    if (!(margin_er >= 0.0) || !(margin_ec >= 0.0)) throw std::invalid_argument("margins must be >= 0");
  }
};

struct FfnnTrace {
  Vec hidden;  // tanh activations
  Vec output;
};

class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;

  EmbeddingSpace(std::size_t n_entities, std::size_t n_relations, std::size_t n_classes,
                 const EmbedConfig& cfg, Rng& rng)
      : cfg_(cfg) {
    cfg_.validate();
    const std::size_t de = cfg.entity_dim;
    const std::size_t dc = cfg.class_dim;
    const double bound = 6.0 / std::sqrt(static_cast<double>(de));
    std::uniform_real_distribution<double> uni(-bound, bound);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix& ent = block(SpaceBlock::kEntity);
    ent = Matrix(n_entities, de);
    for (double& x : ent.data()) x = uni(rng);
    for (std::size_t i = 0; i < n_entities; ++i) normalize_row(ent.row(i));

    Matrix& rel = block(SpaceBlock::kRelation);
    rel = Matrix(n_relations, relation_param_dim());
    if (cfg.kind == ModelKind::kTransE) {
      for (double& x : rel.data()) x = uni(rng);
      for (std::size_t i = 0; i < n_relations; ++i) normalize_row(rel.row(i));
    } else {
      std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
      for (double& x : rel.data()) x = phase(rng);
    }

    Matrix& cw = block(SpaceBlock::kClassW);
    cw = Matrix(n_classes, dc * dc);
    const double ws = 1.0 / std::sqrt(static_cast<double>(dc));
    for (double& x : cw.data()) x = ws * gauss(rng);
    Matrix& cb = block(SpaceBlock::kClassB);
    cb = Matrix(n_classes, dc);
    for (double& x : cb.data()) x = 0.1 * gauss(rng);

    Matrix& w1 = block(SpaceBlock::kFfnnW1);
    w1 = Matrix(dc, de);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(de));
    for (double& x : w1.data()) x = s1 * gauss(rng);
    block(SpaceBlock::kFfnnB1) = Matrix(1, dc);
    Matrix& w2 = block(SpaceBlock::kFfnnW2);
    w2 = Matrix(dc, dc);
    for (double& x : w2.data()) x = ws * gauss(rng);
    block(SpaceBlock::kFfnnB2) = Matrix(1, dc);
  }

  // Reassembles a space from stored blocks (checkpoint loading).
  static EmbeddingSpace from_blocks(const EmbedConfig& cfg, std::array<Matrix, kSpaceBlockCount> blocks) {
    cfg.validate();
    EmbeddingSpace s;
    s.cfg_ = cfg;
    s.blocks_ = std::move(blocks);
    return s;
  }

  const EmbedConfig& config() const { return cfg_; }
  ModelKind kind() const { return cfg_.kind; }
  std::size_t entity_dim() const { return cfg_.entity_dim; }
  std::size_t class_dim() const { return cfg_.class_dim; }
  std::size_t relation_param_dim() const {
    return cfg_.kind == ModelKind::kTransE ? cfg_.entity_dim : cfg_.entity_dim / 2;
  }
  std::size_t num_entities() const { return block(SpaceBlock::kEntity).rows(); }
  std::size_t num_relations() const { return block(SpaceBlock::kRelation).rows(); }
  std::size_t num_classes() const { return block(SpaceBlock::kClassB).rows(); }

  Matrix& block(SpaceBlock b) { return blocks_.at(static_cast<std::size_t>(b)); }
  const Matrix& block(SpaceBlock b) const { return blocks_.at(static_cast<std::size_t>(b)); }
  Matrix& block(std::uint8_t b) { return blocks_.at(b); }
  const Matrix& block(std::uint8_t b) const { return blocks_.at(b); }

  std::span<const double> entity(EntityId e) const { return block(SpaceBlock::kEntity).row(e); }
  std::span<double> entity(EntityId e) { return block(SpaceBlock::kEntity).row(e); }
  std::span<const double> class_vector(ClassId c) const { return block(SpaceBlock::kClassB).row(c); }

  Vec relation_vector(RelationId r) const {
    auto p = block(SpaceBlock::kRelation).row(r);
    if (cfg_.kind == ModelKind::kTransE) return Vec(p.begin(), p.end());
    Vec out(cfg_.entity_dim);
    for (std::size_t k = 0; k < p.size(); ++k) {
      out[2 * k] = std::cos(p[k]);
      out[2 * k + 1] = std::sin(p[k]);
    }
    return out;
  }

  // e + r (TransE) or e o r (RotatE).
  Vec apply_relation(std::span<const double> head, RelationId r) const {
    auto p = block(SpaceBlock::kRelation).row(r);
    Vec out(head.begin(), head.end());
    if (cfg_.kind == ModelKind::kTransE) {
      axpy(1.0, p, out);
    } else {
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double c = std::cos(p[k]), s = std::sin(p[k]);
        out[2 * k] = head[2 * k] * c - head[2 * k + 1] * s;
        out[2 * k + 1] = head[2 * k] * s + head[2 * k + 1] * c;
      }
    }
    return out;
  }

  FfnnTrace ffnn(std::span<const double> e) const {
    const Matrix& w1 = block(SpaceBlock::kFfnnW1);
    const Matrix& w2 = block(SpaceBlock::kFfnnW2);
    FfnnTrace t;
    t.hidden = matvec(w1, e);
    auto b1 = block(SpaceBlock::kFfnnB1).row(0);
    for (std::size_t i = 0; i < t.hidden.size(); ++i) t.hidden[i] = std::tanh(t.hidden[i] + b1[i]);
    t.output = matvec(w2, t.hidden);
    axpy(1.0, block(SpaceBlock::kFfnnB2).row(0), t.output);
    return t;
  }

  bool all_finite() const {
    for (const Matrix& m : blocks_) {
      if (!activealign::all_finite(m.data())) return false;
    }
    return true;
  }

  bool operator==(const EmbeddingSpace& o) const {
    return cfg_.kind == o.cfg_.kind && cfg_.entity_dim == o.cfg_.entity_dim &&
           cfg_.class_dim == o.cfg_.class_dim && cfg_.margin_er == o.cfg_.margin_er &&
           cfg_.margin_ec == o.cfg_.margin_ec && blocks_ == o.blocks_;
  }

  static void normalize_row(std::span<double> v) {
    const double n = norm(v);
    if (n > 0.0) {
      for (double& x : v) x /= n;
    }
  }

 private:
  EmbedConfig cfg_;
  std::array<Matrix, kSpaceBlockCount> blocks_;
};

// f_er over explicit vectors; when `grad` is set, adds scale * df/dparams
// for head/tail entity rows `head_id`/`tail_id` and relation row `r`.
inline double score_er_vectors(const EmbeddingSpace& s, std::span<const double> head, RelationId r,
                               std::span<const double> tail, Vec* d_head = nullptr,
                               Vec* d_rel = nullptr, Vec* d_tail = nullptr) {
  const Vec pred = s.apply_relation(head, r);
  const Vec z = sub(pred, tail);
  const double f = norm(z);
  if (!d_head && !d_rel && !d_tail) return f;
  Vec u(z.size(), 0.0);
  if (f > 0.0) {
    for (std::size_t i = 0; i < z.size(); ++i) u[i] = z[i] / f;
  }
  if (d_tail) {
    d_tail->resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) (*d_tail)[i] = -u[i];
  }
  if (s.kind() == ModelKind::kTransE) {
    if (d_head) *d_head = u;
    if (d_rel) *d_rel = u;
    return f;
  }
  auto phase = s.block(SpaceBlock::kRelation).row(r);
  if (d_head) d_head->assign(u.size(), 0.0);
  if (d_rel) d_rel->assign(phase.size(), 0.0);
  for (std::size_t k = 0; k < phase.size(); ++k) {
    const double c = std::cos(phase[k]), sn = std::sin(phase[k]);
    const double ure = u[2 * k], uim = u[2 * k + 1];
    if (d_head) {
      (*d_head)[2 * k] = ure * c + uim * sn;
      (*d_head)[2 * k + 1] = -ure * sn + uim * c;
    }
    if (d_rel) (*d_rel)[k] = -ure * pred[2 * k + 1] + uim * pred[2 * k];
  }
  return f;
}

inline double score_er(const EmbeddingSpace& s, EntityId h, RelationId r, EntityId t) {
  return score_er_vectors(s, s.entity(h), r, s.entity(t));
}

inline double score_er_accumulate(const EmbeddingSpace& s, EntityId h, RelationId r, EntityId t,
                                  Gradient& g, double scale, Owner owner) {
  Vec dh, dr, dt;
  const double f = score_er_vectors(s, s.entity(h), r, s.entity(t), &dh, &dr, &dt);
  g.add(key_of(owner, SpaceBlock::kEntity, h), dh, scale);
  g.add(key_of(owner, SpaceBlock::kRelation, r), dr, scale);
  g.add(key_of(owner, SpaceBlock::kEntity, t), dt, scale);
  return f;
}

// ||W_c FFNN(e) - b_c||; adds scale * gradient into `g` when given.
inline double score_ec_vector(const EmbeddingSpace& s, std::span<const double> e, ClassId c,
                              Gradient* g = nullptr, double scale = 1.0,
                              Owner owner = Owner::kLeft, EntityId entity_row = 0) {
  const std::size_t dc = s.class_dim();
  const FfnnTrace tr = s.ffnn(e);
  auto wflat = s.block(SpaceBlock::kClassW).row(c);
  auto b = s.class_vector(c);
  Vec z(dc, 0.0);
  for (std::size_t i = 0; i < dc; ++i) {
    z[i] = dot(wflat.subspan(i * dc, dc), tr.output) - b[i];
  }
  const double f = norm(z);
  if (!g || f == 0.0) return f;

  Vec u(dc);
  for (std::size_t i = 0; i < dc; ++i) u[i] = z[i] / f;
  auto dw = g->row(key_of(owner, SpaceBlock::kClassW, c), dc * dc);
  for (std::size_t i = 0; i < dc; ++i) axpy(scale * u[i], tr.output, dw.subspan(i * dc, dc));
  g->add(key_of(owner, SpaceBlock::kClassB, c), u, -scale);

  // dy = W_c^T u
  Vec dy(dc, 0.0);
  for (std::size_t i = 0; i < dc; ++i) axpy(u[i], wflat.subspan(i * dc, dc), dy);
  const Matrix& w2 = s.block(SpaceBlock::kFfnnW2);
  const Matrix& w1 = s.block(SpaceBlock::kFfnnW1);
  for (std::size_t i = 0; i < dc; ++i) {
    g->add(key_of(owner, SpaceBlock::kFfnnW2, i), tr.hidden, scale * dy[i]);
  }
  g->add(key_of(owner, SpaceBlock::kFfnnB2, 0), dy, scale);
  Vec da = matTvec(w2, dy);
  for (std::size_t i = 0; i < dc; ++i) da[i] *= 1.0 - tr.hidden[i] * tr.hidden[i];
  for (std::size_t i = 0; i < dc; ++i) {
    g->add(key_of(owner, SpaceBlock::kFfnnW1, i), e, scale * da[i]);
  }
  g->add(key_of(owner, SpaceBlock::kFfnnB1, 0), da, scale);
  g->add(key_of(owner, SpaceBlock::kEntity, entity_row), matTvec(w1, da), scale);
  return f;
}

inline double score_ec(const EmbeddingSpace& s, EntityId e, ClassId c) {
  return score_ec_vector(s, s.entity(e), c);
}

// Tail-corrupted negatives, rejecting corruptions that are themselves facts.
inline std::vector<std::vector<EntityId>> sample_tail_negatives(const KnowledgeGraph& kg,
                                                                std::span<const Triple> batch,
                                                                std::size_t per_positive, Rng& rng) {
  std::vector<std::vector<EntityId>> out(batch.size());
  const std::size_t n = kg.num_entities();
  if (n < 2) return out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Triple& t = batch[i];
    for (std::size_t k = 0; k < per_positive; ++k) {
      for (int attempt = 0; attempt < 16; ++attempt) {
        const auto cand = static_cast<EntityId>(uniform_index(rng, n));
        if (cand == t.tail || kg.has_triplet(t.head, t.rel, cand)) continue;
        out[i].push_back(cand);
        break;
      }
    }
  }
  return out;
}

// Entities substituted for class members; only non-members qualify.
inline std::vector<std::vector<EntityId>> sample_class_negatives(const KnowledgeGraph& kg,
                                                                 std::span<const TypeTriple> batch,
                                                                 std::size_t per_positive, Rng& rng) {
  std::vector<std::vector<EntityId>> out(batch.size());
  const std::size_t n = kg.num_entities();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ClassId c = batch[i].cls;
    if (kg.class_members(c).size() >= n) continue;
    for (std::size_t k = 0; k < per_positive; ++k) {
      auto cand = static_cast<EntityId>(uniform_index(rng, n));
      // Linear probe from a random start always terminates since a
      // non-member exists.
      while (kg.is_member(cand, c)) cand = static_cast<EntityId>((cand + 1) % n);
      out[i].push_back(cand);
    }
  }
  return out;
}

// Sum over positives and their negatives of |margin + f(pos) - f(neg)|_+.
inline LossResult loss_er(const EmbeddingSpace& s, std::span<const Triple> batch,
                          const std::vector<std::vector<EntityId>>& negatives,
                          Owner owner = Owner::kLeft) {
  LossResult res;
  const double margin = s.config().margin_er;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Triple& t = batch[i];
    if (negatives[i].empty()) {
      ++res.skipped;
      continue;
    }
    Vec ph, pr, pt;
    const double fpos = score_er_vectors(s, s.entity(t.head), t.rel, s.entity(t.tail), &ph, &pr, &pt);
    std::size_t active = 0;
    for (EntityId neg : negatives[i]) {
      Vec nh, nr, nt;
      const double fneg = score_er_vectors(s, s.entity(t.head), t.rel, s.entity(neg), &nh, &nr, &nt);
      const double h = margin + fpos - fneg;
      if (h <= 0.0) continue;
      res.value += h;
      ++active;
      res.grad.add(key_of(owner, SpaceBlock::kEntity, t.head), nh, -1.0);
      res.grad.add(key_of(owner, SpaceBlock::kRelation, t.rel), nr, -1.0);
      res.grad.add(key_of(owner, SpaceBlock::kEntity, neg), nt, -1.0);
    }
    if (active > 0) {
      const double a = static_cast<double>(active);
      res.grad.add(key_of(owner, SpaceBlock::kEntity, t.head), ph, a);
      res.grad.add(key_of(owner, SpaceBlock::kRelation, t.rel), pr, a);
      res.grad.add(key_of(owner, SpaceBlock::kEntity, t.tail), pt, a);
    }
  }
  return res;
}

inline LossResult loss_er(const EmbeddingSpace& s, const KnowledgeGraph& kg,
                          std::span<const Triple> batch, std::size_t negatives_per_pos, Rng& rng,
                          Owner owner = Owner::kLeft) {
  return loss_er(s, batch, sample_tail_negatives(kg, batch, negatives_per_pos, rng), owner);
}

// Sum over type facts and non-member substitutes of |margin + f_ec(pos) - f_ec(neg)|_+.
inline LossResult loss_ec(const EmbeddingSpace& s, std::span<const TypeTriple> batch,
                          const std::vector<std::vector<EntityId>>& negatives,
                          Owner owner = Owner::kLeft) {
  LossResult res;
  const double margin = s.config().margin_ec;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TypeTriple& t = batch[i];
    if (negatives[i].empty()) {
      ++res.skipped;
      continue;
    }
    const double fpos = score_ec(s, t.entity, t.cls);
    std::size_t active = 0;
    for (EntityId neg : negatives[i]) {
      const double fneg = score_ec(s, neg, t.cls);
      const double h = margin + fpos - fneg;
      if (h <= 0.0) continue;
      res.value += h;
      ++active;
      score_ec_vector(s, s.entity(neg), t.cls, &res.grad, -1.0, owner, neg);
    }
    if (active > 0) {
      score_ec_vector(s, s.entity(t.entity), t.cls, &res.grad, static_cast<double>(active), owner,
                      t.entity);
    }
  }
  return res;
}

inline LossResult loss_ec(const EmbeddingSpace& s, const KnowledgeGraph& kg,
                          std::span<const TypeTriple> batch, std::size_t negatives_per_pos, Rng& rng,
                          Owner owner = Owner::kLeft) {
  return loss_ec(s, batch, sample_class_negatives(kg, batch, negatives_per_pos, rng), owner);
}

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scales `g` so that its norm is at most `max_norm` (0 disables).
inline void clip_gradient(Gradient& g, double max_norm) {
  if (max_norm <= 0.0) return;
  const double n = g.norm();
  if (n > max_norm) g.scale(max_norm / n);
}

// Applies p -= lr * g for rows owned by `owner`. Touched entity rows are
// renormalized onto the unit sphere when `normalize_entities` is set.
inline void apply_sgd(EmbeddingSpace& s, const Gradient& g, double lr, Owner owner,
                      bool normalize_entities) {
  for (const auto& [k, v] : g.rows()) {
    if (k.owner != owner) continue;
    auto row = s.block(k.block).row(k.row);
    axpy(-lr, v, row);
    if (normalize_entities && k.block == static_cast<std::uint8_t>(SpaceBlock::kEntity)) {
      EmbeddingSpace::normalize_row(row);
    }
  }
}

struct TrainOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
  std::size_t negatives = 4;
  double clip_norm = 5.0;
  bool normalize_entities = true;
};

struct TrainReport {
  // Mean hinge loss per positive, one entry per epoch.
  std::vector<double> loss_curve;
  std::size_t skipped = 0;
};

inline void check_finite_loss(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw TrainingDiverged(std::string(what) + ": loss is not finite; lower the learning rate");
  }
}

// One pass over all relation and type triplets of `kg` in shuffled
// mini-batches. Returns the summed loss and the number of positives seen.
inline std::pair<double, std::size_t> train_epoch(EmbeddingSpace& s, const KnowledgeGraph& kg,
                                                  const TrainOptions& opts, Rng& rng,
                                                  std::size_t* skipped = nullptr) {
  std::vector<std::size_t> rel_order(kg.triplets().size());
  std::iota(rel_order.begin(), rel_order.end(), 0);
  std::shuffle(rel_order.begin(), rel_order.end(), rng);
  std::vector<std::size_t> type_order(kg.type_triplets().size());
  std::iota(type_order.begin(), type_order.end(), 0);
  std::shuffle(type_order.begin(), type_order.end(), rng);

  double total = 0.0;
  std::size_t seen = 0;
  const std::size_t bs = std::max<std::size_t>(1, opts.batch_size);
  std::vector<Triple> batch;
  for (std::size_t start = 0; start < rel_order.size(); start += bs) {
    batch.clear();
    for (std::size_t i = start; i < std::min(rel_order.size(), start + bs); ++i) {
      batch.push_back(kg.triplets()[rel_order[i]]);
    }
    LossResult r = loss_er(s, kg, batch, opts.negatives, rng);
    check_finite_loss(r.value, "entity-relation loss");
    clip_gradient(r.grad, opts.clip_norm);
    apply_sgd(s, r.grad, opts.learning_rate, Owner::kLeft, opts.normalize_entities);
    total += r.value;
    seen += batch.size();
    if (skipped) *skipped += r.skipped;
  }
  std::vector<TypeTriple> tbatch;
  for (std::size_t start = 0; start < type_order.size(); start += bs) {
    tbatch.clear();
    for (std::size_t i = start; i < std::min(type_order.size(), start + bs); ++i) {
      tbatch.push_back(kg.type_triplets()[type_order[i]]);
    }
    LossResult r = loss_ec(s, kg, tbatch, opts.negatives, rng);
    check_finite_loss(r.value, "entity-class loss");
    clip_gradient(r.grad, opts.clip_norm);
    apply_sgd(s, r.grad, opts.learning_rate, Owner::kLeft, opts.normalize_entities);
    total += r.value;
    seen += tbatch.size();
    if (skipped) *skipped += r.skipped;
  }
  if (!s.all_finite()) throw TrainingDiverged("parameters became non-finite");
  return {total, seen};
}

inline TrainReport train(EmbeddingSpace& s, const KnowledgeGraph& kg, const TrainOptions& opts) {
  if (opts.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  TrainReport report;
  Rng rng(opts.seed);
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    auto [total, seen] = train_epoch(s, kg, opts, rng, &report.skipped);
    report.loss_curve.push_back(seen > 0 ? total / static_cast<double>(seen) : 0.0);
  }
  return report;
}

}  // namespace activealign
