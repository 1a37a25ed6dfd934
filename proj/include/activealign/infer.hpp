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

// Inference power: how strongly labeling one pair a match lets the model
// conclude another pair is a match.
//
// Entity targets use embedding-difference bounds along alignment graph
// paths. For a triplet (e, r, e'') the tail is approximated by e + r~
// within radius d; along a path the mapped tail difference is bounded by
//   D = || A_rel sum r~_k - sum r~'_k || + sum (d_k + d'_k)
// and the power is the best 1 / (1 + D) over paths of at most mu hops.
// Class and relation targets use the norm of the similarity gradient with
// respect to the source entities, squashed into (0, 1) by g / (1 + g).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "activealign/align.hpp"
#include "activealign/align_graph.hpp"
#include "activealign/embed.hpp"
#include "activealign/kg.hpp"
#include "activealign/linalg.hpp"
#include "activealign/pool.hpp"
#include "activealign/sampling.hpp"

namespace activealign {

struct InferConfig {
  std::size_t mu = 5;      // hop limit
  std::size_t beam = 8;    // partial paths kept per node and hop; 0 = exhaustive
  double kappa = 0.8;      // threshold for the overall power
  std::size_t samples = 8; // m, only for the generic bound estimator
  bool generic_bounds = false;

  void validate() const {
    if (mu < 1) throw std::invalid_argument("mu must be at least 1");
    if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must be in [0, 1)");
    if (samples < 1) throw std::invalid_argument("sample count m must be at least 1");
  }
};

struct EdgeBound {
  Vec r_tilde;
  double d = 0.0;
  bool converged = true;
};

// Closed forms: TransE gives (r, 0); RotatE has the deterministic tail
// e o r, so r~ = e o r - e and d = 0.
inline EdgeBound edge_bound(const EmbeddingSpace& s, EntityId head, RelationId rel) {
  EdgeBound b;
  if (s.kind() == ModelKind::kTransE) {
    b.r_tilde = s.relation_vector(rel);
  } else {
    const auto e = s.entity(head);
    b.r_tilde = sub(s.apply_relation(e, rel), e);
  }
  return b;
}

struct GenericBoundOptions {
  std::size_t steps = 400;
  double lr = 0.1;
  double tol = 1e-9;
};

// Model-agnostic estimator: m gradient-descent minimizations of f_er over
// the tail, started from randomly drawn entity embeddings. r~ is the mean
// solution minus the head, d the largest distance of a solution to the mean.
// Descends on f_er^2 / 2, which has the same minimizers and a gradient that
// vanishes at them. A run whose last step still moved more than `tol` keeps
// its best iterate and clears `converged`.
inline EdgeBound edge_bound_generic(const EmbeddingSpace& s, EntityId head, RelationId rel, std::size_t m,
                                    Rng& rng, const GenericBoundOptions& opts = {}) {
  if (m < 1) throw std::invalid_argument("edge_bound_generic: m must be at least 1");
  if (s.num_entities() == 0) throw std::invalid_argument("edge_bound_generic: empty space");
  const auto e = s.entity(head);
  const std::size_t de = e.size();
  EdgeBound b;
  std::vector<Vec> sols;
  for (std::size_t i = 0; i < m; ++i) {
    const auto start = s.entity(static_cast<EntityId>(uniform_index(rng, s.num_entities())));
    Vec t(start.begin(), start.end());
    Vec best = t, dt;
    double best_f = score_er_vectors(s, e, rel, t);
    double last_move = std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step < opts.steps && best_f > 0.0; ++step) {
      const double f = score_er_vectors(s, e, rel, t, nullptr, nullptr, &dt);
      const double scale = opts.lr * f;
      last_move = scale * norm(dt);
      axpy(-scale, dt, t);
      const double nf = score_er_vectors(s, e, rel, t);
      if (nf < best_f) {
        best_f = nf;
        best = t;
      }
      if (last_move < opts.tol) break;
    }
    if (last_move >= opts.tol && best_f > opts.tol) b.converged = false;
    sols.push_back(std::move(best));
  }
  Vec mean(de, 0.0);
  for (const Vec& v : sols) axpy(1.0 / static_cast<double>(m), v, mean);
  for (const Vec& v : sols) b.d = std::max(b.d, norm(sub(v, mean)));
  b.r_tilde = sub(mean, e);
  return b;
}

// || A_rel sum r~ - sum r~' || + sum (d + d'), with the vector sums taken
// before the norm.
inline double path_difference(const Matrix& a_rel, std::span<const std::pair<EdgeBound, EdgeBound>> path) {
  if (path.empty()) throw std::invalid_argument("path_difference: empty path");
  const std::size_t de = path.front().first.r_tilde.size();
  Vec left(de, 0.0), right(de, 0.0);
  double radius = 0.0;
  for (const auto& [l, r] : path) {
    axpy(1.0, l.r_tilde, left);
    axpy(1.0, r.r_tilde, right);
    radius += l.d + r.d;
  }
  return norm(sub(matvec(a_rel, left), right)) + radius;
}

inline double power_of_difference(double d) { return 1.0 / (1.0 + d); }
inline double squash(double g) { return g / (1.0 + g); }

// Per-edge A_rel r~ - r~' and d + d' for every relation edge of a graph.
// Because A_rel is linear, a path's D is the norm of the summed vectors
// plus the summed radii.
class EdgeDifferences {
 public:
  EdgeDifferences() = default;

  static EdgeDifferences compute(const JointModel& m, const AlignmentGraph& g, const KnowledgeGraph& kg1,
                                 const KnowledgeGraph& kg2, const InferConfig& cfg = {},
                                 std::uint64_t seed = 0) {
    EdgeDifferences out;
    const std::size_t de = m.left.entity_dim();
    out.dim_ = de;
    out.vec_ = Matrix(g.num_edges(), de);
    out.radius_.assign(g.num_edges(), 0.0);
    out.usable_.assign(g.num_edges(), 0);
    Rng rng(seed);
    auto bound = [&](const EmbeddingSpace& s, const Triple& t) {
      return cfg.generic_bounds ? edge_bound_generic(s, t.head, t.rel, cfg.samples, rng)
                                : edge_bound(s, t.head, t.rel);
    };
    for (std::size_t i = 0; i < g.num_edges(); ++i) {
      const GraphEdge& e = g.edges()[i];
      if (e.rel.is_type()) continue;
      const EdgeBound l = bound(m.left, kg1.triplets()[e.left_triplet]);
      const EdgeBound r = bound(m.right, kg2.triplets()[e.right_triplet]);
      const Vec v = sub(matvec(m.align.a_rel, l.r_tilde), r.r_tilde);
      std::copy(v.begin(), v.end(), out.vec_.row(i).begin());
      out.radius_[i] = l.d + r.d;
      out.usable_[i] = 1;
    }
    return out;
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return radius_.size(); }
  bool usable(std::size_t edge) const { return usable_.at(edge) != 0; }
  std::span<const double> vec(std::size_t edge) const { return vec_.row(edge); }
  double radius(std::size_t edge) const { return radius_.at(edge); }
  double edge_power(std::size_t edge) const {
    return usable(edge) ? power_of_difference(norm(vec(edge)) + radius(edge)) : 0.0;
  }

 private:
  std::size_t dim_ = 0;
  Matrix vec_;
  std::vector<double> radius_;
  std::vector<char> usable_;
};

struct PathSearchOptions {
  std::size_t mu = 5;
  std::size_t beam = 8;  // 0 = exhaustive
  // When set, only edges with a nonzero mask entry are walked.
  const std::vector<char>* edge_mask = nullptr;
};

namespace detail {

struct PathState {
  PairId node = 0;
  std::int32_t parent = -1;  // index into the previous hop's states
  double radius = 0.0;
  double power = 0.0;
  Vec sum;
};

inline bool walkable(const AlignmentGraph& g, const EdgeDifferences& diffs, const PathSearchOptions& o,
                     const GraphEdge& e) {
  const std::uint32_t i = g.edge_index(e);
  if (!diffs.usable(i)) return false;
  return !o.edge_mask || (*o.edge_mask)[i] != 0;
}

inline void exhaustive_dfs(const AlignmentGraph& g, const EdgeDifferences& diffs, const PathSearchOptions& o,
                           std::vector<PairId>& path, const Vec& sum, double radius,
                           std::unordered_map<PairId, double>& best) {
  if (path.size() > o.mu) return;
  for (const GraphEdge& e : g.out_edges(path.back())) {
    if (!walkable(g, diffs, o, e)) continue;
    if (std::find(path.begin(), path.end(), e.dst) != path.end()) continue;
    const std::uint32_t i = g.edge_index(e);
    // A copy per level keeps the summation order identical to the beam.
    Vec next = sum;
    axpy(1.0, diffs.vec(i), next);
    const double r = radius + diffs.radius(i);
    const double p = power_of_difference(norm(next) + r);
    double& slot = best[e.dst];
    slot = std::max(slot, p);
    path.push_back(e.dst);
    exhaustive_dfs(g, diffs, o, path, next, r, best);
    path.pop_back();
  }
}

}  // namespace detail

// Best 1 / (1 + D) from `src` to every entity pair reachable within mu hops
// over relation edges, as (target, power) sorted by target. Paths never
// revisit a node. The beam keeps, per node and hop, the `beam` partial paths
// with the highest partial power; beam 0 enumerates every path.
inline std::vector<std::pair<PairId, double>> path_powers_from(const AlignmentGraph& g,
                                                               const EdgeDifferences& diffs, PairId src,
                                                               const PathSearchOptions& o = {}) {
  std::unordered_map<PairId, double> best;
  const std::size_t de = diffs.dim();
  if (o.beam == 0) {
    std::vector<PairId> path{src};
    detail::exhaustive_dfs(g, diffs, o, path, Vec(de, 0.0), 0.0, best);
  } else {
    std::vector<std::vector<detail::PathState>> hops(1);
    hops[0].push_back({src, -1, 0.0, 1.0, Vec(de, 0.0)});
    for (std::size_t h = 1; h <= o.mu && !hops.back().empty(); ++h) {
      const auto& prev = hops.back();
      std::vector<detail::PathState> next;
      for (std::size_t si = 0; si < prev.size(); ++si) {
        const detail::PathState& s = prev[si];
        for (const GraphEdge& e : g.out_edges(s.node)) {
          if (!detail::walkable(g, diffs, o, e)) continue;
          // Walk the parent chain to reject revisits.
          bool seen = e.dst == s.node;
          std::int32_t p = s.parent;
          for (std::size_t k = hops.size() - 1; !seen && p >= 0 && k > 0; --k) {
            const detail::PathState& ps = hops[k - 1][static_cast<std::size_t>(p)];
            seen = ps.node == e.dst;
            p = ps.parent;
          }
          if (seen) continue;
          const std::uint32_t i = g.edge_index(e);
          detail::PathState n{e.dst, static_cast<std::int32_t>(si), s.radius + diffs.radius(i), 0.0, s.sum};
          axpy(1.0, diffs.vec(i), n.sum);
          n.power = power_of_difference(norm(n.sum) + n.radius);
          double& slot = best[n.node];
          slot = std::max(slot, n.power);
          next.push_back(std::move(n));
        }
      }
      // Per-node beam; stable order keeps the search deterministic.
      std::stable_sort(next.begin(), next.end(), [](const detail::PathState& a, const detail::PathState& b) {
        if (a.node != b.node) return a.node < b.node;
        return a.power > b.power;
      });
      std::vector<detail::PathState> kept;
      for (std::size_t i = 0; i < next.size();) {
        std::size_t j = i;
        while (j < next.size() && next[j].node == next[i].node) ++j;
        for (std::size_t k = i; k < std::min(j, i + o.beam); ++k) kept.push_back(std::move(next[k]));
        i = j;
      }
      hops.push_back(std::move(kept));
    }
  }
  best.erase(src);
  std::vector<std::pair<PairId, double>> out(best.begin(), best.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Power from one entity pair to another; 0 when no path within mu hops.
inline double infer_pair_to_pair(const AlignmentGraph& g, const EdgeDifferences& diffs, PairId src, PairId dst,
                                 const PathSearchOptions& o = {}) {
  if (src == dst) throw std::invalid_argument("infer_pair_to_pair: source equals target");
  if (dst >= g.num_nodes()) throw std::out_of_range("infer_pair_to_pair: unknown target");
  for (const auto& [t, p] : path_powers_from(g, diffs, src, o)) {
    if (t == dst) return p;
  }
  return 0.0;
}

// Power from a labeled relation pair to an entity pair: the relation term of
// D is zero, so each matched source reaching dst over an edge labelled with
// the pair (or its inverse) contributes 1 / (1 + d + d').
inline double infer_relation_to_pair(const AlignmentGraph& g, const EdgeDifferences& diffs, RelationPair rel,
                                     PairId dst, std::span<const PairId> known_matches) {
  double best = 0.0;
  for (std::uint32_t i : g.in_edges(dst)) {
    const GraphEdge& e = g.edges()[i];
    if (e.rel.is_type() || (e.rel.left & ~1u) != rel.left || (e.rel.right & ~1u) != rel.right) continue;
    if (std::find(known_matches.begin(), known_matches.end(), e.src) == known_matches.end()) continue;
    best = std::max(best, power_of_difference(diffs.radius(i)));
  }
  return best;
}

// || d S_mean(c, c') / d(e, e') || for the mean branch cos(A_ent cbar, cbar')
// with the entity weights held fixed. Zero unless both memberships hold.
inline double infer_pair_to_class(const JointModel& m, const DerivedFeatures& f, const KnowledgeGraph& kg1,
                                  const KnowledgeGraph& kg2, const ElementPair& ent, const ElementPair& cls) {
  if (!kg1.is_member(ent.left, cls.left) || !kg2.is_member(ent.right, cls.right)) return 0.0;
  if (f.left.mean_class_empty[cls.left] || f.right.mean_class_empty[cls.right]) return 0.0;
  auto total = [](const KnowledgeGraph& kg, const SideFeatures& s, ClassId c) {
    double w = 0.0;
    for (EntityId e : kg.class_members(c)) w += std::max(0.0, s.entity_weight[e]);
    return w;
  };
  const double share1 = std::max(0.0, f.left.entity_weight[ent.left]) / total(kg1, f.left, cls.left);
  const double share2 = std::max(0.0, f.right.entity_weight[ent.right]) / total(kg2, f.right, cls.right);
  const CosineGrad cg = cosine_grad(matvec(m.align.a_ent, f.left.mean_class.row(cls.left)),
                                    f.right.mean_class.row(cls.right));
  const Vec gl = matTvec(m.align.a_ent, cg.d_u);
  const double n1 = share1 * norm(gl), n2 = share2 * norm(cg.d_y);
  return std::sqrt(n1 * n1 + n2 * n2);
}

namespace detail {

// Jacobian-transpose product of the local optimum with respect to the tail,
// applied to `g`. TransE: identity. RotatE: per complex coordinate,
// u = z / |z| with z = t * conj(h).
inline Vec local_optimum_tail_vjp(ModelKind kind, std::span<const double> head, std::span<const double> tail,
                                  std::span<const double> g) {
  if (kind == ModelKind::kTransE) return Vec(g.begin(), g.end());
  Vec out(g.size(), 0.0);
  for (std::size_t k = 0; 2 * k + 1 < head.size(); ++k) {
    const double a = head[2 * k], b = head[2 * k + 1];
    const double tr = tail[2 * k], ti = tail[2 * k + 1];
    const double zr = tr * a + ti * b, zi = ti * a - tr * b;
    const double mod = std::hypot(zr, zi);
    if (mod == 0.0) continue;
    const double ur = zr / mod, ui = zi / mod;
    // J = (I - u u^T) / |z| is symmetric.
    const double g0 = g[2 * k], g1 = g[2 * k + 1];
    const double dot_ug = ur * g0 + ui * g1;
    const double jr = (g0 - ur * dot_ug) / mod, ji = (g1 - ui * dot_ug) / mod;
    // dz/dt = [[a, b], [-b, a]]; transpose applied.
    out[2 * k] = a * jr - b * ji;
    out[2 * k + 1] = b * jr + a * ji;
  }
  return out;
}

}  // namespace detail

// || d S_mean(r, r') / d(e'' - e, e''' - e') || for an edge
// (e, e') -(r, r')-> (e'', e''') with forward relations. The gradient runs
// through the weighted mean of local optima with weights held fixed; for
// RotatE the difference is moved by moving the tail. The best edge counts
// when several tails exist; 0 without such an edge.
inline double infer_pair_to_relation(const JointModel& m, const DerivedFeatures& f, const KnowledgeGraph& kg1,
                                     const KnowledgeGraph& kg2, const AlignmentGraph& g, PairId ent,
                                     RelationPair rel) {
  if (rel.is_type() || KnowledgeGraph::is_inverse(rel.left) || KnowledgeGraph::is_inverse(rel.right)) return 0.0;
  if (f.left.mean_relation_empty[rel.left] || f.right.mean_relation_empty[rel.right]) return 0.0;
  auto triplet_weight = [](const SideFeatures& s, const Triple& t) {
    return std::max(0.0, std::min(s.entity_weight[t.head], s.entity_weight[t.tail]));
  };
  auto total = [&](const KnowledgeGraph& kg, const SideFeatures& s, RelationId r) {
    double w = 0.0;
    for (std::size_t i : kg.relation_triplets(r)) w += triplet_weight(s, kg.triplets()[i]);
    return w;
  };
  const CosineGrad cg = cosine_grad(matvec(m.align.a_ent, f.left.mean_relation.row(rel.left)),
                                    f.right.mean_relation.row(rel.right));
  const Vec gl = matTvec(m.align.a_ent, cg.d_u);
  const double w1 = total(kg1, f.left, rel.left), w2 = total(kg2, f.right, rel.right);
  double best = 0.0;
  for (const GraphEdge& e : g.out_edges(ent)) {
    if (e.rel != rel) continue;
    const Triple& t1 = kg1.triplets()[e.left_triplet];
    const Triple& t2 = kg2.triplets()[e.right_triplet];
    const Vec a = detail::local_optimum_tail_vjp(m.left.kind(), m.left.entity(t1.head), m.left.entity(t1.tail), gl);
    const Vec b =
        detail::local_optimum_tail_vjp(m.right.kind(), m.right.entity(t2.head), m.right.entity(t2.tail), cg.d_y);
    const double n1 = triplet_weight(f.left, t1) / w1 * norm(a);
    const double n2 = triplet_weight(f.right, t2) / w2 * norm(b);
    best = std::max(best, std::sqrt(n1 * n1 + n2 * n2));
  }
  return best;
}

struct PowerEntry {
  PairId target = 0;
  double power = 0.0;

  auto operator<=>(const PowerEntry&) const = default;
};

// Sparse I(target | source) for every source in a pool. Rows are sorted by
// target and hold only positive powers.
class PowerTable {
 public:
  PowerTable() = default;
  explicit PowerTable(std::size_t n) : rows_(n) {}

  std::size_t size() const { return rows_.size(); }
  std::span<const PowerEntry> from(PairId q) const { return rows_.at(q); }

  // Keeps the larger value when the entry already exists.
  void raise(PairId source, PairId target, double power) {
    if (!(power > 0.0)) return;
    power = std::min(power, 1.0);
    auto& row = rows_.at(source);
    auto it = std::lower_bound(row.begin(), row.end(), target,
                               [](const PowerEntry& e, PairId t) { return e.target < t; });
    if (it != row.end() && it->target == target) {
      it->power = std::max(it->power, power);
    } else {
      row.insert(it, {target, power});
    }
  }

  double get(PairId source, PairId target) const {
    const auto& row = rows_.at(source);
    auto it = std::lower_bound(row.begin(), row.end(), target,
                               [](const PowerEntry& e, PairId t) { return e.target < t; });
    return it != row.end() && it->target == target ? it->power : 0.0;
  }

  // source<TAB>target<TAB>power, ids as pool indices.
  void dump(std::ostream& os) const {
    for (PairId s = 0; s < rows_.size(); ++s) {
      for (const PowerEntry& e : rows_[s]) os << s << '\t' << e.target << '\t' << e.power << '\n';
    }
  }

  bool operator==(const PowerTable&) const = default;

 private:
  std::vector<std::vector<PowerEntry>> rows_;
};

// Everything needed to fill a power table for one round.
struct InferenceInputs {
  const JointModel* model = nullptr;
  const DerivedFeatures* features = nullptr;
  const KnowledgeGraph* kg1 = nullptr;
  const KnowledgeGraph* kg2 = nullptr;
  const AlignmentGraph* graph = nullptr;
  const EdgeDifferences* diffs = nullptr;
  // Entity pairs labeled as matches; sources for relation-pair powers.
  std::vector<PairId> known_entity_matches;
};

// Fills I(. | q) for every pool pair q:
//  - every pair infers itself with power 1;
//  - entity pairs reach entity pairs over paths, class pairs over type edges
//    and relation pairs over the relation edges they start;
//  - relation pairs reach entity pairs from known entity matches.
// `edge_mask` restricts every use of the graph to the kept edges.
// `paths`, when set, replaces the entity path search and returns
// (target, power) pairs for a source.
using PathPowerFn = std::function<std::vector<std::pair<PairId, double>>(PairId)>;

inline PowerTable build_power_table(const InferenceInputs& in, const InferConfig& cfg,
                                    const std::vector<char>* edge_mask = nullptr,
                                    const PathPowerFn* paths = nullptr) {
  cfg.validate();
  const AlignmentGraph& g = *in.graph;
  const Pool& pool = g.pool();
  PowerTable t(pool.size());
  PathSearchOptions po{cfg.mu, cfg.beam, edge_mask};
  auto kept = [&](const GraphEdge& e) { return !edge_mask || (*edge_mask)[g.edge_index(e)] != 0; };

  // Relation pair -> in-edges whose source is a known match.
  std::vector<char> known(pool.size(), 0);
  for (PairId q : in.known_entity_matches) known.at(q) = 1;

  for (PairId q = 0; q < pool.size(); ++q) {
    t.raise(q, q, 1.0);
    const ElementPair& p = pool.at(q);
    if (p.kind != ElementKind::kEntity) continue;
    for (const auto& [dst, pw] : paths ? (*paths)(q) : path_powers_from(g, *in.diffs, q, po)) t.raise(q, dst, pw);
    for (const GraphEdge& e : g.out_edges(q)) {
      if (!kept(e)) continue;
      if (e.rel.left == kTypeRelation) {
        t.raise(q, e.dst, squash(infer_pair_to_class(*in.model, *in.features, *in.kg1, *in.kg2, p, pool.at(e.dst))));
      } else if (!e.rel.is_type() && !KnowledgeGraph::is_inverse(e.rel.left)) {
        auto rp = pool.find({ElementKind::kRelation, e.rel.left, e.rel.right});
        if (!rp) continue;
        t.raise(q, *rp,
                squash(infer_pair_to_relation(*in.model, *in.features, *in.kg1, *in.kg2, g, q, e.rel)));
      }
      // Relation pair sources: the edge's base relation pair reaches e.dst
      // when q is a known match.
      if (known[q] && !e.rel.is_type()) {
        auto rp = pool.find({ElementKind::kRelation, e.rel.left & ~1u, e.rel.right & ~1u});
        if (rp) t.raise(*rp, e.dst, power_of_difference(in.diffs->radius(g.edge_index(e))));
      }
    }
  }
  return t;
}

// I(q' | sources) = max over sources, for every pool pair.
inline std::vector<double> best_source_powers(const PowerTable& t, std::span<const PairId> sources) {
  std::vector<double> out(t.size(), 0.0);
  for (PairId s : sources) {
    for (const PowerEntry& e : t.from(s)) out[e.target] = std::max(out[e.target], e.power);
  }
  return out;
}

// Sum of I(q' | sources) over targets whose power exceeds kappa. Targets with
// a nonzero `exclude` entry are skipped.
inline double overall_power(const PowerTable& t, std::span<const PairId> sources, double kappa,
                            const std::vector<char>* exclude = nullptr) {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must be in [0, 1)");
  const std::vector<double> best = best_source_powers(t, sources);
  double sum = 0.0;
  for (std::size_t q = 0; q < best.size(); ++q) {
    if (exclude && (*exclude)[q]) continue;
    if (best[q] > kappa) sum += best[q];
  }
  return sum;
}

}  // namespace activealign
