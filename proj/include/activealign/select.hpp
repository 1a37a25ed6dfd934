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

// Batch selection maximizing the expected overall inference power.
//
// With Q+ the (random) matches of a batch Q, each target q' is credited
// h(max(I(q'|L+), max_{q in Q+} I(q'|q))), where h(x) = x if x > kappa
// and 0 otherwise, and L+ are the matches labeled in earlier rounds. The
// objective is the expectation over Q+ minus the credit of L+ alone. It is
// monotone and submodular, so greedy selection is within 1 - 1/e of optimal.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "activealign/align.hpp"
#include "activealign/align_graph.hpp"
#include "activealign/infer.hpp"
#include "activealign/pool.hpp"

namespace activealign {

// prod_{q in Q+} p(q) * prod_{q in Q \ Q+} (1 - p(q)). `probs` is indexed by
// pair id; Q+ must be a subset of Q.
inline double batch_probability(std::span<const double> probs, std::span<const PairId> batch,
                                std::span<const PairId> matches) {
  double out = 1.0;
  for (PairId q : batch) {
    const bool hit = std::find(matches.begin(), matches.end(), q) != matches.end();
    out *= hit ? probs[q] : 1.0 - probs[q];
  }
  for (PairId q : matches) {
    if (std::find(batch.begin(), batch.end(), q) == batch.end()) {
      throw std::invalid_argument("batch_probability: Q+ is not a subset of Q");
    }
  }
  return out;
}

// Pr[match] for every pool pair: the smaller of the two directional
// softmaxes over same-kind candidates, with the kind's temperature.
inline std::vector<double> pool_match_probabilities(const JointModel& m, const DerivedFeatures& f,
                                                    const KnowledgeGraph& kg1, const KnowledgeGraph& kg2,
                                                    const Pool& pool) {
  std::vector<double> out(pool.size(), 0.0);
  const Matrix ent = entity_similarity_matrix(m);
  for (ElementKind kind : kAllKinds) {
    const auto lefts = alignable_elements(kg1, kind);
    const auto rights = alignable_elements(kg2, kind);
    if (lefts.empty() || rights.empty()) continue;
    // Dense similarity over alignable elements, indexed by position.
    std::vector<std::uint32_t> lpos(element_count(kg1, kind), 0), rpos(element_count(kg2, kind), 0);
    for (std::uint32_t i = 0; i < lefts.size(); ++i) lpos[lefts[i]] = i;
    for (std::uint32_t j = 0; j < rights.size(); ++j) rpos[rights[j]] = j;
    Matrix s(lefts.size(), rights.size());
    Matrix st(rights.size(), lefts.size());
    for (std::size_t i = 0; i < lefts.size(); ++i) {
      for (std::size_t j = 0; j < rights.size(); ++j) {
        s(i, j) = kind == ElementKind::kEntity ? ent(lefts[i], rights[j])
                                               : sim(m, f, {kind, lefts[i], rights[j]});
        st(j, i) = s(i, j);
      }
    }
    const double z = m.align.temperature(kind);
    for (PairId q = 0; q < pool.size(); ++q) {
      const ElementPair& p = pool.at(q);
      if (p.kind != kind) continue;
      const std::uint32_t i = lpos[p.left], j = rpos[p.right];
      out[q] = match_probability(s.row(i), j, st.row(j), i, z);
    }
  }
  return out;
}

struct SelectionState {
  const Pool* pool = nullptr;
  std::vector<double> probs;   // Pr[match] by pair id
  std::vector<char> labeled;   // by pair id; labeled pairs are neither candidates nor targets
  std::vector<PairId> matched; // L+, labeled matches of every kind
  double kappa = 0.8;

  std::size_t size() const { return probs.size(); }
  double threshold(double x) const { return x > kappa ? x : 0.0; }
  bool is_labeled(PairId q) const { return !labeled.empty() && labeled[q]; }
  std::size_t unlabeled_count() const {
    return size() - static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), 1));
  }
};

// Marginal gains G(q | Q) in polynomial time.
//
// For a target q' let the selected sources with credit a_k = h(I(q'|q_k))
// be sorted by descending credit. The best credit equals a_k with
// probability p_k prod_{j<k} (1 - p_j) and falls back to the L+ credit b
// with probability prod_k (1 - p_k). Hence
//   G(q | Q) = p(q) sum_{q'} E[(h(I(q'|q)) - max(b, best))_+]
// costs one pass over the sorted sources of each target q reaches.
class GainEngine {
 public:
  GainEngine(const SelectionState& st, const PowerTable& table)
      : st_(&st), table_(&table), sources_(st.size()), in_batch_(st.size(), 0) {
    if (table.size() != st.size()) throw std::invalid_argument("GainEngine: table and state sizes differ");
    base_ = best_source_powers(table, st.matched);
    for (double& b : base_) b = st.threshold(b);
  }

  double gain(PairId q) const {
    if (in_batch_.at(q)) return 0.0;
    const double pq = st_->probs[q];
    if (pq <= 0.0) return 0.0;
    double sum = 0.0;
    for (const PowerEntry& e : table_->from(q)) {
      if (st_->is_labeled(e.target)) continue;
      const double a = st_->threshold(e.power);
      if (a <= 0.0) continue;
      sum += expected_shortfall(e.target, a);
    }
    return pq * sum;
  }

  void add(PairId q) {
    if (in_batch_.at(q)) return;
    in_batch_[q] = 1;
    batch_.push_back(q);
    const double pq = st_->probs[q];
    for (const PowerEntry& e : table_->from(q)) {
      const double a = st_->threshold(e.power);
      if (a <= 0.0 || st_->is_labeled(e.target)) continue;
      auto& v = sources_[e.target];
      // Descending credit; equal credits keep insertion order.
      auto it = std::upper_bound(v.begin(), v.end(), a,
                                 [](double x, const std::pair<double, double>& s) { return x > s.first; });
      v.insert(it, {a, pq});
    }
  }

  std::span<const PairId> batch() const { return batch_; }

 private:
  // E[(a - max(b, best))_+] for target t.
  double expected_shortfall(PairId t, double a) const {
    const double b = base_[t];
    if (a <= b) return 0.0;
    double survive = 1.0, acc = 0.0;
    for (const auto& [credit, p] : sources_[t]) {
      if (credit >= a) {
        survive *= 1.0 - p;
        if (survive == 0.0) return 0.0;
        continue;
      }
      acc += survive * p * (a - std::max(credit, b));
      survive *= 1.0 - p;
    }
    return acc + survive * (a - b);
  }

  const SelectionState* st_;
  const PowerTable* table_;
  std::vector<std::vector<std::pair<double, double>>> sources_;  // (credit, prob)
  std::vector<char> in_batch_;
  std::vector<PairId> batch_;
  std::vector<double> base_;  // h(I(q' | L+))
};

inline double expected_gain(const SelectionState& st, const PowerTable& table, std::span<const PairId> batch,
                            PairId q) {
  GainEngine g(st, table);
  for (PairId s : batch) g.add(s);
  return g.gain(q);
}

// Expected overall power of the batch beyond the L+ credit; the telescoped
// sum of marginal gains.
inline double expected_objective(const SelectionState& st, const PowerTable& table, std::span<const PairId> batch) {
  GainEngine g(st, table);
  double total = 0.0;
  for (PairId q : batch) {
    total += g.gain(q);
    g.add(q);
  }
  return total;
}

struct BatchItem {
  PairId pair = 0;
  double gain = 0.0;
  double probability = 0.0;
};

// Greedy maximization with lazy (CELF) re-evaluation. Candidates are the
// unlabeled pool pairs; ties go to the smaller pair id, so the result equals
// the plain greedy loop.
inline std::vector<BatchItem> greedy_select(const SelectionState& st, const PowerTable& table, std::size_t budget) {
  if (budget > st.unlabeled_count()) throw std::invalid_argument("greedy_select: budget exceeds unlabeled pool");
  GainEngine g(st, table);
  struct Entry {
    double gain;
    PairId q;
    std::size_t round;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.q > b.q;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  if (budget == 0) return {};
  for (PairId q = 0; q < st.size(); ++q) {
    if (!st.is_labeled(q)) heap.push({g.gain(q), q, 0});
  }
  std::vector<BatchItem> out;
  while (out.size() < budget && !heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    if (top.round != out.size()) {
      top.gain = g.gain(top.q);
      top.round = out.size();
      heap.push(top);
      continue;
    }
    out.push_back({top.q, top.gain, st.probs[top.q]});
    g.add(top.q);
  }
  return out;
}

inline std::vector<PairId> batch_ids(std::span<const BatchItem> items) {
  std::vector<PairId> out;
  for (const BatchItem& b : items) out.push_back(b.pair);
  return out;
}

// One-hop power I(q'|q) along each edge: 1 / (1 + D(edge)) for relation
// edges, the squashed gradient power for entity -> class type edges, 0 for
// class -> entity type edges.
inline std::vector<double> edge_powers(const InferenceInputs& in) {
  const AlignmentGraph& g = *in.graph;
  std::vector<double> out(g.num_edges(), 0.0);
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const GraphEdge& e = g.edges()[i];
    if (!e.rel.is_type()) {
      out[i] = in.diffs->edge_power(i);
    } else if (e.rel.left == kTypeRelation) {
      out[i] = squash(infer_pair_to_class(*in.model, *in.features, *in.kg1, *in.kg2, g.pool().at(e.src),
                                          g.pool().at(e.dst)));
    }
  }
  return out;
}

struct Partitioning {
  std::vector<std::uint32_t> part;  // partition index by pair id
  std::size_t count = 1;
  std::size_t splits = 0;
  std::size_t fallback_splits = 0;  // splits that had to isolate a single pair
};

// min over q in P_i of outer / (inner + outer) for one partition; pairs
// without outgoing power count as 1. Reports the pair attaining the min.
inline std::pair<double, PairId> partition_ratio(const AlignmentGraph& g, std::span<const double> pw,
                                                 const Partitioning& p, std::uint32_t i,
                                                 std::span<const PairId> members) {
  double worst = std::numeric_limits<double>::infinity();
  PairId at = members.empty() ? 0 : members.front();
  for (PairId q : members) {
    double inner = 0.0, outer = 0.0;
    for (const GraphEdge& e : g.out_edges(q)) {
      const double w = pw[g.edge_index(e)];
      (p.part[e.dst] == i ? inner : outer) += w;
    }
    if (inner + outer <= 0.0) continue;
    const double r = outer / (inner + outer);
    if (r < worst) {
      worst = r;
      at = q;
    }
  }
  return {worst, at};
}

// Splits the pool until every pair keeps at least a rho share of its one-hop
// power across partitions. A violating partition is split on the relation
// pair carrying the most intra-partition power: the pairs with such an
// intra edge move to a new partition. When that set is empty or the whole
// partition, the worst pair is isolated instead, so every split makes
// progress and at most |P| - 1 splits happen.
inline Partitioning partition_pool(const AlignmentGraph& g, std::span<const double> pw, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0, 1]");
  Partitioning p;
  p.part.assign(g.num_nodes(), 0);
  std::vector<std::vector<PairId>> members(1);
  for (PairId q = 0; q < g.num_nodes(); ++q) members[0].push_back(q);
  bool flag = g.num_nodes() > 0;
  while (flag && p.splits + 1 < std::max<std::size_t>(g.num_nodes(), 1)) {
    flag = false;
    for (std::uint32_t i = 0; i < members.size(); ++i) {
      const auto [ratio, worst] = partition_ratio(g, pw, p, i, members[i]);
      if (!(ratio < rho)) continue;
      // Relation pair with the most intra-partition power.
      std::vector<std::pair<RelationPair, double>> load;
      for (PairId q : members[i]) {
        for (const GraphEdge& e : g.out_edges(q)) {
          if (p.part[e.dst] != i) continue;
          load.emplace_back(e.rel, pw[g.edge_index(e)]);
        }
      }
      std::sort(load.begin(), load.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      RelationPair best_rel{};
      double best_load = -1.0;
      for (std::size_t k = 0; k < load.size();) {
        std::size_t j = k;
        double s = 0.0;
        while (j < load.size() && load[j].first == load[k].first) s += load[j++].second;
        if (s > best_load) {
          best_load = s;
          best_rel = load[k].first;
        }
        k = j;
      }
      std::vector<PairId> moved, stay;
      for (PairId q : members[i]) {
        bool has = false;
        for (const GraphEdge& e : g.out_edges(q)) has = has || (e.rel == best_rel && p.part[e.dst] == i);
        (has ? moved : stay).push_back(q);
      }
      if (moved.empty() || stay.empty()) {
        moved = {worst};
        stay.clear();
        for (PairId q : members[i]) {
          if (q != worst) stay.push_back(q);
        }
        ++p.fallback_splits;
      }
      const auto n = static_cast<std::uint32_t>(members.size());
      for (PairId q : moved) p.part[q] = n;
      members[i] = std::move(stay);
      members.push_back(std::move(moved));
      ++p.splits;
      flag = true;
      break;
    }
  }
  p.count = members.size();
  return p;
}

// Partition graph: one node per partition and an edge i -> j when some
// relation edge leads from P_i to P_j, carrying the smallest D among those
// edges (the largest single-edge power).
struct QuotientGraph {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> out;  // sorted by target
  std::vector<std::vector<std::uint32_t>> leaving;  // inter-partition relation edges by source partition
  std::vector<double> edge_d;  // D of every graph edge; +inf when unusable
};

inline QuotientGraph quotient_graph(const AlignmentGraph& g, const EdgeDifferences& diffs, const Partitioning& p) {
  QuotientGraph qg;
  qg.out.resize(p.count);
  qg.leaving.resize(p.count);
  qg.edge_d.assign(g.num_edges(), std::numeric_limits<double>::infinity());
  std::vector<std::map<std::uint32_t, double>> best(p.count);
  for (std::uint32_t i = 0; i < g.num_edges(); ++i) {
    const GraphEdge& e = g.edges()[i];
    if (e.rel.is_type() || !diffs.usable(i)) continue;
    const double d = norm(diffs.vec(i)) + diffs.radius(i);
    qg.edge_d[i] = d;
    const std::uint32_t a = p.part[e.src], b = p.part[e.dst];
    if (a == b) continue;
    qg.leaving[a].push_back(i);
    auto [it, fresh] = best[a].emplace(b, d);
    if (!fresh) it->second = std::min(it->second, d);
  }
  for (std::uint32_t a = 0; a < p.count; ++a) qg.out[a].assign(best[a].begin(), best[a].end());
  return qg;
}

// Estimated powers from `src` over paths through partitions: a real first
// hop out of src, at most mu - 2 hops on the partition graph, and a real
// last hop into the target. Moving inside a partition is free and every
// intra-partition edge is dropped. Hop differences add up, so a path's D is
// the sum of its hop D values. Multi-hop estimates at or below kappa are
// dropped since they never count toward the objective.
inline std::vector<std::pair<PairId, double>> quotient_path_powers(const AlignmentGraph& g, const QuotientGraph& qg,
                                                                   const Partitioning& p, PairId src,
                                                                   std::size_t mu, double kappa) {
  const double inf = std::numeric_limits<double>::infinity();
  const double limit = kappa > 0.0 ? 1.0 / kappa - 1.0 : inf;
  std::map<PairId, double> best;
  auto offer = [&](PairId t, double d) {
    if (t == src) return;
    double& slot = best[t];
    slot = std::max(slot, power_of_difference(d));
  };
  std::vector<double> reach(p.count, inf);
  for (const GraphEdge& e : g.out_edges(src)) {
    const std::uint32_t i = g.edge_index(e);
    const double d = qg.edge_d[i];
    if (!(d < inf) || p.part[e.dst] == p.part[src]) continue;
    offer(e.dst, d);
    reach[p.part[e.dst]] = std::min(reach[p.part[e.dst]], d);
  }
  if (mu >= 2) {
    for (std::size_t hop = 0; hop + 2 < mu; ++hop) {
      std::vector<double> next = reach;
      for (std::uint32_t a = 0; a < p.count; ++a) {
        if (!(reach[a] < limit)) continue;
        for (const auto& [b, d] : qg.out[a]) next[b] = std::min(next[b], reach[a] + d);
      }
      reach.swap(next);
    }
    for (std::uint32_t a = 0; a < p.count; ++a) {
      if (!(reach[a] < limit)) continue;
      for (std::uint32_t i : qg.leaving[a]) {
        const double d = reach[a] + qg.edge_d[i];
        if (d < limit) offer(g.edges()[i].dst, d);
      }
    }
  }
  return {best.begin(), best.end()};
}

struct PartitionSelection {
  std::vector<BatchItem> batch;
  Partitioning partitions;
  PowerTable estimated;  // I^; the exact table when rho is 1
};

// Keeps only edges whose endpoints lie in different partitions.
inline std::vector<char> inter_partition_mask(const AlignmentGraph& g, const Partitioning& p) {
  std::vector<char> mask(g.num_edges(), 0);
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const GraphEdge& e = g.edges()[i];
    mask[i] = p.part[e.src] != p.part[e.dst];
  }
  return mask;
}

// Partitions the pool, estimates powers through the partition graph, then
// runs the greedy selection on the estimates. With rho = 1 no power may be
// lost, so the exact table is used and the result equals greedy_select.
inline PartitionSelection partition_select(const SelectionState& st, const InferenceInputs& in,
                                           const InferConfig& cfg, std::size_t budget, double rho) {
  PartitionSelection out;
  const std::vector<double> pw = edge_powers(in);
  out.partitions = partition_pool(*in.graph, pw, rho);
  if (rho == 1.0) {
    out.estimated = build_power_table(in, cfg);
  } else {
    const QuotientGraph qg = quotient_graph(*in.graph, *in.diffs, out.partitions);
    const std::vector<char> mask = inter_partition_mask(*in.graph, out.partitions);
    const PathPowerFn paths = [&](PairId q) {
      return quotient_path_powers(*in.graph, qg, out.partitions, q, cfg.mu, cfg.kappa);
    };
    out.estimated = build_power_table(in, cfg, &mask, &paths);
  }
  out.batch = greedy_select(st, out.estimated, budget);
  return out;
}

}  // namespace activealign
