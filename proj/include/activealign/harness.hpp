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

// Experiment harness: simulated oracle, metrics, baseline selectors and the
// active-learning driver shared by the CLI loop and the HTTP session.

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "activealign/align.hpp"
#include "activealign/align_graph.hpp"
#include "activealign/dataset_io.hpp"
#include "activealign/embed.hpp"
#include "activealign/infer.hpp"
#include "activealign/kg.hpp"
#include "activealign/pool.hpp"
#include "activealign/sampling.hpp"
#include "activealign/select.hpp"
#include "json.hpp"

namespace activealign {

// ------------------------------------------------------------------ oracle

// Answers with the gold label and counts every query.
class OracleSim {
 public:
  explicit OracleSim(const GoldLinks& gold) : gold_(&gold) {}

  Label ask(const ElementPair& p) {
    ++queries_;
    const bool match = gold_->is_match(p);
    ++counts_[static_cast<std::size_t>(p.kind)][match ? 0 : 1];
    return match ? Label::kMatch : Label::kNonMatch;
  }

  std::size_t queries() const { return queries_; }
  std::size_t matches(ElementKind k) const { return counts_[static_cast<std::size_t>(k)][0]; }
  std::size_t non_matches(ElementKind k) const { return counts_[static_cast<std::size_t>(k)][1]; }

 private:
  const GoldLinks* gold_;
  std::size_t queries_ = 0;
  std::array<std::array<std::size_t, 2>, 3> counts_{};
};

// ----------------------------------------------------------------- splits

// Gold links partitioned per kind into a held-out test part, the seed
// labels, and the remainder the oracle may reveal.
struct Split {
  GoldLinks test;
  GoldLinks seed;
  GoldLinks rest;
};

inline Split split_gold(const GoldLinks& gold, double test_fraction, double seed_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && seed_fraction >= 0.0 && test_fraction + seed_fraction <= 1.0)) {
    throw std::invalid_argument("split fractions must be non-negative and sum to at most 1");
  }
  Rng rng(seed);
  Split s;
  for (ElementKind k : kAllKinds) {
    GoldLinks::Links links = gold.of(k);
    std::sort(links.begin(), links.end());
    std::shuffle(links.begin(), links.end(), rng);
    const std::size_t n = links.size();
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    const auto n_seed =
        std::min(n - n_test, static_cast<std::size_t>(std::llround(seed_fraction * static_cast<double>(n))));
    s.test.of(k).assign(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.seed.of(k).assign(links.begin() + static_cast<std::ptrdiff_t>(n_test),
                        links.begin() + static_cast<std::ptrdiff_t>(n_test + n_seed));
    s.rest.of(k).assign(links.begin() + static_cast<std::ptrdiff_t>(n_test + n_seed), links.end());
  }
  s.test.normalize();
  s.seed.normalize();
  s.rest.normalize();
  return s;
}

// ---------------------------------------------------------------- metrics

struct KindMetrics {
  std::size_t count = 0;  // test matches of this kind
  double hits1 = 0.0;
  double hits10 = 0.0;
  double mrr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::array<KindMetrics, 3> kinds{};
  std::size_t labels_used = 0;
  double seconds = 0.0;  // wall time; never serialized into reports

  const KindMetrics& of(ElementKind k) const { return kinds[static_cast<std::size_t>(k)]; }
  KindMetrics& of(ElementKind k) { return kinds[static_cast<std::size_t>(k)]; }
};

// Rank of column j in `row`: 1 + number of strictly larger entries. Ties
// resolve in the model's favor.
inline std::size_t rank_in_row(std::span<const double> row, std::size_t j) {
  std::size_t r = 1;
  for (double x : row) r += x > row[j] ? 1 : 0;
  return r;
}

inline double f1_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

// Metrics of one kind from a left-by-right similarity matrix indexed by
// element positions. Rankings run over every right candidate; P/R/F1 come
// from a greedy one-to-one sweep restricted to the test rows, accepting
// only scores above `floor`.
inline KindMetrics kind_metrics(const Matrix& s, std::span<const std::pair<std::uint32_t, std::uint32_t>> test,
                                double floor = 0.0) {
  KindMetrics km;
  km.count = test.size();
  if (test.empty()) return km;
  std::vector<ScoredPair> cand;
  std::vector<char> row_used(s.rows(), 0);
  for (const auto& [i, j] : test) {
    const std::size_t r = rank_in_row(s.row(i), j);
    km.hits1 += r <= 1 ? 1.0 : 0.0;
    km.hits10 += r <= 10 ? 1.0 : 0.0;
    km.mrr += 1.0 / static_cast<double>(r);
    if (row_used[i]) continue;
    row_used[i] = 1;
    for (std::uint32_t c = 0; c < s.cols(); ++c) {
      if (s(i, c) > floor) cand.push_back({{ElementKind::kEntity, i, c}, s(i, c)});
    }
  }
  const double n = static_cast<double>(test.size());
  km.hits1 /= n;
  km.hits10 /= n;
  km.mrr /= n;
  const std::vector<ScoredPair> picked = one_to_one_sweep(std::move(cand));
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sorted(test.begin(), test.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t correct = 0;
  for (const ScoredPair& p : picked) {
    correct += std::binary_search(sorted.begin(), sorted.end(), std::make_pair(p.pair.left, p.pair.right)) ? 1 : 0;
  }
  km.precision = picked.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(picked.size());
  km.recall = static_cast<double>(correct) / n;
  km.f1 = f1_score(km.precision, km.recall);
  return km;
}

// Similarities between all alignable elements of one kind, with the
// position maps from element ids to matrix indices.
struct KindSimilarity {
  Matrix s;
  std::vector<std::uint32_t> lefts, rights;
  std::vector<std::int64_t> lpos, rpos;  // -1 for non-alignable ids
};

inline KindSimilarity kind_similarity(const JointModel& m, const DerivedFeatures& f, const KnowledgeGraph& kg1,
                                      const KnowledgeGraph& kg2, ElementKind kind, const Matrix* entity_sims = nullptr) {
  KindSimilarity out;
  out.lefts = alignable_elements(kg1, kind);
  out.rights = alignable_elements(kg2, kind);
  out.lpos.assign(element_count(kg1, kind), -1);
  out.rpos.assign(element_count(kg2, kind), -1);
  for (std::size_t i = 0; i < out.lefts.size(); ++i) out.lpos[out.lefts[i]] = static_cast<std::int64_t>(i);
  for (std::size_t j = 0; j < out.rights.size(); ++j) out.rpos[out.rights[j]] = static_cast<std::int64_t>(j);
  if (kind == ElementKind::kEntity) {
    out.s = entity_sims ? *entity_sims : entity_similarity_matrix(m);
    return out;
  }
  out.s = Matrix(out.lefts.size(), out.rights.size());
  for (std::size_t i = 0; i < out.lefts.size(); ++i) {
    for (std::size_t j = 0; j < out.rights.size(); ++j) out.s(i, j) = sim(m, f, {kind, out.lefts[i], out.rights[j]});
  }
  return out;
}

// Evaluates the model on the held-out test links only.
inline MetricsReport evaluate(const JointModel& m, const DerivedFeatures& f, const KnowledgeGraph& kg1,
                              const KnowledgeGraph& kg2, const GoldLinks& test, double floor = 0.0) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test split");
  MetricsReport rep;
  for (ElementKind k : kAllKinds) {
    if (test.of(k).empty()) continue;
    const KindSimilarity ks = kind_similarity(m, f, kg1, kg2, k);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> idx;
    for (const auto& [a, b] : test.of(k)) {
      if (ks.lpos.at(a) < 0 || ks.rpos.at(b) < 0) throw std::invalid_argument("evaluate: test link on a non-alignable element");
      idx.emplace_back(static_cast<std::uint32_t>(ks.lpos[a]), static_cast<std::uint32_t>(ks.rpos[b]));
    }
    rep.of(k) = kind_metrics(ks.s, idx, floor);
  }
  return rep;
}

// Share of inferred pairs that are gold matches; absent for an empty set.
inline std::optional<double> inference_accuracy(std::span<const ElementPair> inferred, const GoldLinks& gold) {
  if (inferred.empty()) return std::nullopt;
  std::size_t hit = 0;
  for (const ElementPair& p : inferred) hit += gold.is_match(p) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(inferred.size());
}

// Unlabeled pool pairs whose best power from the labeled matches exceeds kappa.
inline std::vector<PairId> inferred_pairs(const PowerTable& t, const SelectionState& st) {
  const std::vector<double> best = best_source_powers(t, st.matched);
  std::vector<PairId> out;
  for (PairId q = 0; q < best.size(); ++q) {
    if (!st.is_labeled(q) && best[q] > st.kappa) out.push_back(q);
  }
  return out;
}

// -------------------------------------------------------------- baselines

enum class Selector : std::uint8_t { kRandom, kDegree, kPageRank, kUncertainty, kDaakgGreedy, kDaakgPartition };

inline const char* selector_name(Selector s) {
  switch (s) {
    case Selector::kRandom: return "random";
    case Selector::kDegree: return "degree";
    case Selector::kPageRank: return "pagerank";
    case Selector::kUncertainty: return "uncertainty";
    case Selector::kDaakgGreedy: return "daakg_greedy";
    case Selector::kDaakgPartition: return "daakg_partition";
  }
  return "?";
}

inline Selector parse_selector(const std::string& s) {
  for (Selector x : {Selector::kRandom, Selector::kDegree, Selector::kPageRank, Selector::kUncertainty,
                     Selector::kDaakgGreedy, Selector::kDaakgPartition}) {
    if (s == selector_name(x)) return x;
  }
  throw std::invalid_argument("unknown selector: " + s);
}

// PageRank over the directed alignment graph; dangling mass is spread
// uniformly. Scores sum to 1.
inline std::vector<double> pagerank(const AlignmentGraph& g, double damping = 0.85, std::size_t iterations = 50) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return {};
  std::vector<double> pr(n, 1.0 / static_cast<double>(n)), next(n);
  const double nd = static_cast<double>(n);
  for (std::size_t it = 0; it < iterations; ++it) {
    double dangling = 0.0;
    for (PairId q = 0; q < n; ++q) {
      if (g.out_edges(q).empty()) dangling += pr[q];
    }
    std::fill(next.begin(), next.end(), (1.0 - damping) / nd + damping * dangling / nd);
    for (PairId q = 0; q < n; ++q) {
      const auto out = g.out_edges(q);
      if (out.empty()) continue;
      const double share = damping * pr[q] / static_cast<double>(out.size());
      for (const GraphEdge& e : out) next[e.dst] += share;
    }
    pr.swap(next);
  }
  return pr;
}

inline double binary_entropy(double p) {
  auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  return term(p) + term(1.0 - p);
}

// Top-`budget` unlabeled pairs by descending score, ties by pair id.
inline std::vector<BatchItem> top_by_score(const SelectionState& st, std::span<const double> score, std::size_t budget) {
  if (budget > st.unlabeled_count()) throw std::invalid_argument("budget exceeds unlabeled pool");
  std::vector<PairId> cand;
  for (PairId q = 0; q < st.size(); ++q) {
    if (!st.is_labeled(q)) cand.push_back(q);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](PairId a, PairId b) { return score[a] > score[b]; });
  std::vector<BatchItem> out;
  for (std::size_t i = 0; i < budget; ++i) out.push_back({cand[i], score[cand[i]], st.probs[cand[i]]});
  return out;
}

// Baseline strategies. `seed` drives the random selector only.
inline std::vector<BatchItem> baseline_select(Selector strategy, const SelectionState& st, const AlignmentGraph& g,
                                              std::size_t budget, std::uint64_t seed) {
  std::vector<double> score(st.size(), 0.0);
  switch (strategy) {
    case Selector::kRandom: {
      if (budget > st.unlabeled_count()) throw std::invalid_argument("budget exceeds unlabeled pool");
      std::vector<PairId> cand;
      for (PairId q = 0; q < st.size(); ++q) {
        if (!st.is_labeled(q)) cand.push_back(q);
      }
      Rng rng(seed);
      std::shuffle(cand.begin(), cand.end(), rng);
      std::vector<BatchItem> out;
      for (std::size_t i = 0; i < budget; ++i) out.push_back({cand[i], 0.0, st.probs[cand[i]]});
      return out;
    }
    case Selector::kDegree:
      for (PairId q = 0; q < st.size(); ++q) score[q] = static_cast<double>(g.degree(q));
      break;
    case Selector::kPageRank: score = pagerank(g); break;
    case Selector::kUncertainty:
      for (PairId q = 0; q < st.size(); ++q) score[q] = binary_entropy(st.probs[q]);
      break;
    default: throw std::invalid_argument("baseline_select: not a baseline strategy");
  }
  return top_by_score(st, score, budget);
}

// ------------------------------------------------------------ loop config

struct LoopConfig {
  std::uint64_t seed = 1;
  Selector selector = Selector::kDaakgGreedy;
  std::size_t budget = 100;      // total oracle queries
  std::size_t batch = 100;       // B, queries per round
  std::size_t pool_n = 20;       // N of the top-N pool
  double rho = 0.9;
  double test_fraction = 0.3;
  double seed_fraction = 0.1;
  double match_floor = 0.0;      // similarity floor of the greedy matching
  std::size_t pretrain_epochs = 100;
  std::size_t finetune_epochs = 30;
  std::size_t refresh_every = 10;  // feature refresh period during pretraining
  EmbedConfig embed;
  AlignConfig align;
  InferConfig infer;
  JointTrainOptions train;

  LoopConfig() {
    embed.entity_dim = 100;
    embed.class_dim = 50;
  }

  void validate() const {
    embed.validate();
    align.validate();
    infer.validate();
    if (batch == 0 && budget > 0) throw std::invalid_argument("batch must be positive");
    if (pool_n < 1) throw std::invalid_argument("pool_n must be at least 1");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0, 1]");
    if (refresh_every == 0) throw std::invalid_argument("refresh_every must be positive");
    if (!(train.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  }
};

// One report line per round.
struct RoundRecord {
  std::string selector;
  std::size_t round = 0;
  std::size_t labels_used = 0;
  std::size_t batch_size = 0;
  std::size_t labeled_matches = 0;  // seed plus oracle matches
  double labeled_match_fraction = 0.0;
  MetricsReport metrics;
};

inline nlohmann::ordered_json metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (ElementKind k : kAllKinds) {
    const KindMetrics& m = r.of(k);
    if (m.count == 0) continue;
    j[kind_name(k)] = {{"count", m.count},         {"h1", m.hits1},         {"h10", m.hits10},
                       {"mrr", m.mrr},             {"precision", m.precision}, {"recall", m.recall},
                       {"f1", m.f1}};
  }
  return j;
}

inline nlohmann::ordered_json record_json(const RoundRecord& r) {
  return {{"selector", r.selector},
          {"round", r.round},
          {"labels_used", r.labels_used},
          {"batch_size", r.batch_size},
          {"labeled_matches", r.labeled_matches},
          {"labeled_match_fraction", r.labeled_match_fraction},
          {"metrics", metrics_json(r.metrics)}};
}

inline void write_jsonl(std::ostream& os, std::span<const RoundRecord> records) {
  for (const RoundRecord& r : records) os << record_json(r).dump() << '\n';
}

// Long-format curve: one row per round and kind.
inline void write_csv(std::ostream& os, std::span<const RoundRecord> records) {
  os << "selector,round,labels_used,labeled_match_fraction,kind,h1,h10,mrr,precision,recall,f1\n";
  for (const RoundRecord& r : records) {
    for (ElementKind k : kAllKinds) {
      const KindMetrics& m = r.metrics.of(k);
      if (m.count == 0) continue;
      os << r.selector << ',' << r.round << ',' << r.labels_used << ',' << nlohmann::json(r.labeled_match_fraction).dump()
         << ',' << kind_name(k);
      for (double x : {m.hits1, m.hits10, m.mrr, m.precision, m.recall, m.f1}) os << ',' << nlohmann::json(x).dump();
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------- learner

// Model, labels and selection state of one active-learning run. The pool
// and its alignment graph are fixed after pretraining; probabilities and
// powers are recomputed every round. All randomness derives from
// config.seed and the round number, so replaying the same label
// submissions reproduces the same state.
class ActiveLearner {
 public:
  ActiveLearner(const Dataset& data, const LoopConfig& cfg, std::optional<JointModel> pretrained = std::nullopt)
      : data_(&data), cfg_(cfg) {
    cfg_.validate();
    split_ = split_gold(data.links, cfg.test_fraction, cfg.seed_fraction, cfg.seed);
    for (ElementKind k : kAllKinds) {
      for (const auto& [a, b] : split_.seed.of(k)) book_.set({k, a, b}, Label::kMatch);
    }
    if (pretrained) {
      model_ = std::move(*pretrained);
      features_ = compute_features(model_, data.kg1, data.kg2);
    } else {
      model_ = make_joint_model(data.kg1, data.kg2, cfg.embed, cfg.align, cfg.seed);
      pretrain();
    }
    build_pool();
  }

  ActiveLearner(const ActiveLearner&) = delete;
  ActiveLearner& operator=(const ActiveLearner&) = delete;

  const LoopConfig& config() const { return cfg_; }
  const Dataset& data() const { return *data_; }
  const Split& split() const { return split_; }
  const JointModel& model() const { return model_; }
  const DerivedFeatures& features() const { return features_; }
  const Pool& pool() const { return *pool_; }
  const AlignmentGraph& graph() const { return graph_; }
  const LabelBook& labels() const { return book_; }
  std::size_t round() const { return round_; }
  std::size_t labels_used() const { return labels_used_; }
  std::size_t budget_left() const { return cfg_.budget - std::min(cfg_.budget, labels_used_); }

  // Selection state for the current model and labels.
  SelectionState state() const {
    SelectionState st;
    st.pool = pool_.get();
    st.probs = pool_match_probabilities(model_, features_, data_->kg1, data_->kg2, *pool_);
    st.labeled.assign(pool_->size(), 0);
    st.kappa = cfg_.infer.kappa;
    for (PairId q = 0; q < pool_->size(); ++q) {
      const Label l = book_.get(pool_->at(q));
      if (l == Label::kUnlabeled) continue;
      st.labeled[q] = 1;
      if (l == Label::kMatch) st.matched.push_back(q);
    }
    return st;
  }

  // Power table of the current model, with labeled entity matches in the
  // pool as known anchors.
  PowerTable power_table(const SelectionState& st) const {
    const EdgeDifferences diffs =
        EdgeDifferences::compute(model_, graph_, data_->kg1, data_->kg2, cfg_.infer, cfg_.seed + round_);
    return build_power_table(inputs(st, diffs), cfg_.infer);
  }

  // Next batch: at most B pairs, truncated by the remaining budget and the
  // unlabeled pool.
  std::vector<BatchItem> propose() const {
    const SelectionState st = state();
    const std::size_t b = std::min({cfg_.batch, budget_left(), st.unlabeled_count()});
    switch (cfg_.selector) {
      case Selector::kDaakgGreedy: return greedy_select(st, power_table(st), b);
      case Selector::kDaakgPartition: {
        const EdgeDifferences diffs =
            EdgeDifferences::compute(model_, graph_, data_->kg1, data_->kg2, cfg_.infer, cfg_.seed + round_);
        return partition_select(st, inputs(st, diffs), cfg_.infer, b, cfg_.rho).batch;
      }
      default: return baseline_select(cfg_.selector, st, graph_, b, cfg_.seed * 1000003 + round_);
    }
  }

  // Records labels for pool pairs, then fine-tunes and advances the round.
  // Every label consumes budget, match or not.
  void submit(std::span<const std::pair<PairId, Label>> labels) {
    for (const auto& [q, l] : labels) {
      if (book_.set(pool_->at(q), l)) ++labels_used_;
    }
    JointTrainOptions o = cfg_.train;
    o.epochs = cfg_.finetune_epochs;
    o.seed = cfg_.seed + 7919 * (round_ + 1);
    features_ = fine_tune(model_, features_, data_->kg1, data_->kg2, LabeledSets::from(book_), o);
    ++round_;
  }

  MetricsReport evaluate() const {
    MetricsReport r = activealign::evaluate(model_, features_, data_->kg1, data_->kg2, split_.test, cfg_.match_floor);
    r.labels_used = labels_used_;
    return r;
  }

  std::size_t labeled_matches() const {
    std::size_t n = 0;
    for (const auto& [p, l] : book_.all()) n += l == Label::kMatch ? 1 : 0;
    return n;
  }

  RoundRecord record(std::size_t batch_size) const {
    RoundRecord r;
    r.selector = selector_name(cfg_.selector);
    r.round = round_;
    r.labels_used = labels_used_;
    r.batch_size = batch_size;
    r.labeled_matches = labeled_matches();
    const std::size_t gold = data_->links.size();
    r.labeled_match_fraction = gold ? static_cast<double>(r.labeled_matches) / static_cast<double>(gold) : 0.0;
    r.metrics = evaluate();
    return r;
  }

 private:
  InferenceInputs inputs(const SelectionState& st, const EdgeDifferences& diffs) const {
    InferenceInputs in{&model_, &features_, &data_->kg1, &data_->kg2, &graph_, &diffs, {}};
    for (PairId q : st.matched) {
      if (pool_->at(q).kind == ElementKind::kEntity) in.known_entity_matches.push_back(q);
    }
    return in;
  }

  void pretrain() {
    features_ = compute_features(model_, data_->kg1, data_->kg2);
    std::size_t done = 0;
    while (done < cfg_.pretrain_epochs) {
      const std::size_t chunk = std::min(cfg_.refresh_every, cfg_.pretrain_epochs - done);
      LabeledSets ls = LabeledSets::from(book_);
      if (cfg_.train.use_semi) ls.semi = semi_supervised_mine(model_, features_, data_->kg1, data_->kg2, ls);
      JointTrainOptions o = cfg_.train;
      o.epochs = chunk;
      o.seed = cfg_.seed + done;
      o.focal = false;
      train_joint(model_, features_, data_->kg1, data_->kg2, ls, o);
      features_ = compute_features(model_, data_->kg1, data_->kg2);
      done += chunk;
    }
  }

  // Top-N pool without the held-out test pairs.
  void build_pool() {
    const Pool full = generate_pool(model_, features_, data_->kg1, data_->kg2, cfg_.pool_n);
    std::vector<ElementPair> keep;
    for (const ElementPair& p : full.pairs()) {
      if (!split_.test.is_match(p)) keep.push_back(p);
    }
    pool_ = std::make_unique<Pool>(std::move(keep));
    graph_ = AlignmentGraph::build(data_->kg1, data_->kg2, *pool_);
  }

  const Dataset* data_;
  LoopConfig cfg_;
  Split split_;
  LabelBook book_;
  JointModel model_;
  DerivedFeatures features_;
  std::unique_ptr<Pool> pool_;
  AlignmentGraph graph_;
  std::size_t round_ = 0;
  std::size_t labels_used_ = 0;
};

// Runs the simulated loop until the budget or the pool runs out. The first
// record is the pretrained model; each later one follows a labeled batch.
inline std::vector<RoundRecord> active_loop(ActiveLearner& learner, std::ostream* progress = nullptr) {
  OracleSim oracle(learner.data().links);
  std::vector<RoundRecord> out;
  auto t0 = std::chrono::steady_clock::now();
  auto stamp = [&](RoundRecord& r) {
    r.metrics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) {
      *progress << r.selector << " round " << r.round << " labels " << r.labels_used << " entity H@1 "
                << r.metrics.of(ElementKind::kEntity).hits1 << " (" << r.metrics.seconds << " s)\n";
    }
  };
  out.push_back(learner.record(0));
  stamp(out.back());
  while (learner.budget_left() > 0) {
    const std::vector<BatchItem> batch = learner.propose();
    if (batch.empty()) break;
    std::vector<std::pair<PairId, Label>> labels;
    for (const BatchItem& b : batch) labels.emplace_back(b.pair, oracle.ask(learner.pool().at(b.pair)));
    learner.submit(labels);
    out.push_back(learner.record(batch.size()));
    stamp(out.back());
  }
  return out;
}

}  // namespace activealign
