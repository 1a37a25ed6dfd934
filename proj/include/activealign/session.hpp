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

// Annotation sessions. A session directory holds an append-only audit log
// (events.jsonl) and the latest checkpoint. The log is the source of
// truth: opening a session replays it from the recorded config and seed.
//
// Event lines:
//   {"event":"start","dataset":...,"config":...}
//   {"event":"batch","round":r,"pairs":[ids]}
//   {"event":"label","round":r,"pair":id,"label":"match"|"non-match"}
//   {"event":"round","round":r}          after fine-tuning completes

#pragma once

#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "activealign/checkpoint.hpp"
#include "activealign/config.hpp"
#include "activealign/dataset_io.hpp"
#include "activealign/harness.hpp"
#include "json.hpp"

namespace activealign {

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SessionStatus : std::uint8_t { kReady, kPending, kTraining };

inline const char* status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kReady: return "ready";
    case SessionStatus::kPending: return "pending";
    case SessionStatus::kTraining: return "training";
  }
  return "?";
}

inline const char* label_name(Label l) { return l == Label::kMatch ? "match" : "non-match"; }

inline std::optional<Label> parse_label(const std::string& s) {
  if (s == "match") return Label::kMatch;
  if (s == "non-match") return Label::kNonMatch;
  return std::nullopt;
}

struct ApiResult {
  int code = 200;
  nlohmann::json body;
};

// Display context of an element: adjacent triplets, classes or members.
inline nlohmann::json element_context(const KnowledgeGraph& kg, ElementKind kind, std::uint32_t id,
                                      std::size_t limit = 20) {
  nlohmann::json out;
  auto triple_json = [&](const Triple& t) {
    // Inverse triplets are shown in their stored direction.
    if (KnowledgeGraph::is_inverse(t.rel)) {
      return nlohmann::json::array({kg.entity_name(t.tail), kg.relation_name(KnowledgeGraph::inverse(t.rel)),
                                    kg.entity_name(t.head)});
    }
    return nlohmann::json::array({kg.entity_name(t.head), kg.relation_name(t.rel), kg.entity_name(t.tail)});
  };
  nlohmann::json triples = nlohmann::json::array();
  switch (kind) {
    case ElementKind::kEntity: {
      out["name"] = kg.entity_name(id);
      for (std::size_t idx : kg.out_edges(id)) {
        if (triples.size() >= limit) break;
        triples.push_back(triple_json(kg.triplets()[idx]));
      }
      nlohmann::json classes = nlohmann::json::array();
      for (ClassId c : kg.entity_classes(id)) classes.push_back(kg.class_name(c));
      out["classes"] = classes;
      break;
    }
    case ElementKind::kRelation: {
      out["name"] = kg.relation_name(id);
      for (std::size_t idx : kg.relation_triplets(id)) {
        if (triples.size() >= limit) break;
        triples.push_back(triple_json(kg.triplets()[idx]));
      }
      break;
    }
    case ElementKind::kClass: {
      out["name"] = kg.class_name(id);
      nlohmann::json members = nlohmann::json::array();
      for (EntityId e : kg.class_members(id)) {
        if (members.size() >= limit) break;
        members.push_back(kg.entity_name(e));
      }
      out["members"] = members;
      break;
    }
  }
  out["triples"] = triples;
  return out;
}

class Session {
 public:
  // Starts a new session in an empty or missing directory. Without a
  // checkpoint the model is pretrained from scratch.
  static std::unique_ptr<Session> create(const std::filesystem::path& dir, const std::filesystem::path& dataset,
                                         const LoopConfig& cfg, const std::filesystem::path& checkpoint = {}) {
    std::filesystem::create_directories(dir);
    if (std::filesystem::exists(dir / "events.jsonl")) throw SessionError("session already exists: " + dir.string());
    nlohmann::json start = {{"event", "start"},
                            {"dataset", std::filesystem::absolute(dataset).string()},
                            {"config", dump_config(cfg)},
                            {"checkpoint", checkpoint.empty() ? "" : std::filesystem::absolute(checkpoint).string()}};
    auto s = std::unique_ptr<Session>(new Session(dir, dataset, cfg, checkpoint));
    s->append(start);
    return s;
  }

  // Reopens a session by replaying its audit log.
  static std::unique_ptr<Session> open(const std::filesystem::path& dir) {
    std::ifstream in(dir / "events.jsonl");
    if (!in) throw SessionError("no session at " + dir.string());
    std::vector<nlohmann::json> events;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        events.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw SessionError("corrupt audit log line: " + std::string(e.what()));
      }
    }
    if (events.empty() || events[0].value("event", "") != "start") throw SessionError("audit log lacks a start event");
    LoopConfig cfg = desk_config();
    apply_config(cfg, parse_config_text(events[0].at("config").get<std::string>()));
    auto s = std::unique_ptr<Session>(new Session(dir, events[0].at("dataset").get<std::string>(), cfg,
                                                  events[0].value("checkpoint", std::string())));
    for (std::size_t i = 1; i < events.size(); ++i) s->replay(events[i]);
    return s;
  }

  ~Session() {
    if (worker_.joinable()) worker_.join();
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  nlohmann::json status() const {
    std::lock_guard<std::mutex> lk(mu_);
    nlohmann::json j = {{"status", status_name(status_)},
                        {"round", round_},
                        {"budget", cfg_.budget},
                        {"budget_left", budget_left_},
                        {"labels_used", labels_used_},
                        {"pending", pending_.size()},
                        {"labeled_in_batch", pending_labels_.size()}};
    j["metrics"] = records_.empty() ? nlohmann::json(nullptr) : nlohmann::json::parse(metrics_json(records_.back().metrics).dump());
    if (!error_.empty()) j["error"] = error_;
    return j;
  }

  // The pending batch; selects one first when none is pending.
  ApiResult batch() {
    std::lock_guard<std::mutex> lk(mu_);
    if (status_ == SessionStatus::kTraining) return {409, {{"error", "training in progress"}}};
    if (status_ == SessionStatus::kReady) {
      if (learner_->budget_left() == 0) return {200, batch_json(true)};
      pending_ = learner_->propose();
      if (pending_.empty()) return {200, batch_json(true)};
      nlohmann::json ids = nlohmann::json::array();
      for (const BatchItem& b : pending_) ids.push_back(b.pair);
      append({{"event", "batch"}, {"round", round_}, {"pairs", ids}});
      status_ = SessionStatus::kPending;
    }
    return {200, batch_json(false)};
  }

  // Accepts {"labels":[{"pair_id":..,"label":..}]} or the bare array. The
  // whole request is rejected when any entry is invalid. A complete batch
  // starts fine-tuning in the background.
  ApiResult post_labels(const nlohmann::json& body) {
    std::unique_lock<std::mutex> lk(mu_);
    const nlohmann::json* arr = &body;
    if (body.is_object()) {
      if (!body.contains("labels")) return {400, {{"error", "missing 'labels'"}}};
      arr = &body["labels"];
    }
    if (!arr->is_array()) return {400, {{"error", "labels must be an array"}}};
    std::vector<std::pair<PairId, Label>> fresh;
    std::map<PairId, Label> in_request;
    std::size_t duplicates = 0;
    for (const auto& item : *arr) {
      if (!item.is_object() || !item.contains("pair_id") || !item["pair_id"].is_number_unsigned() ||
          !item.contains("label") || !item["label"].is_string()) {
        return {400, {{"error", "each label needs an unsigned pair_id and a label string"}}};
      }
      const auto q = item["pair_id"].get<PairId>();
      const auto l = parse_label(item["label"].get<std::string>());
      if (!l) return {400, {{"error", "label must be 'match' or 'non-match'"}}};
      if (status_ == SessionStatus::kTraining) return {409, {{"error", "training in progress"}}};
      if (status_ != SessionStatus::kPending || !in_pending(q)) {
        return {409, {{"error", "pair " + std::to_string(q) + " is not in the pending batch"}}};
      }
      auto prev = pending_labels_.find(q);
      auto req = in_request.find(q);
      if ((prev != pending_labels_.end() && prev->second != *l) || (req != in_request.end() && req->second != *l)) {
        return {409, {{"error", "conflicting label for pair " + std::to_string(q)}}};
      }
      if (prev != pending_labels_.end() || req != in_request.end()) {
        ++duplicates;
        continue;
      }
      in_request[q] = *l;
      fresh.emplace_back(q, *l);
    }
    for (const auto& [q, l] : fresh) {
      append({{"event", "label"}, {"round", round_}, {"pair", q}, {"label", label_name(l)}});
      pending_labels_[q] = l;
    }
    const std::size_t remaining = pending_.size() - pending_labels_.size();
    if (remaining == 0 && !pending_.empty()) start_training(lk);
    return {200,
            {{"accepted", fresh.size()},
             {"duplicates", duplicates},
             {"remaining", remaining},
             {"status", status_name(status_)},
             {"round", round_}}};
  }

  nlohmann::ordered_json metrics() const {
    std::lock_guard<std::mutex> lk(mu_);
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (const RoundRecord& r : records_) recs.push_back(record_json(r));
    nlohmann::ordered_json out;
    out["records"] = std::move(recs);
    return out;
  }

  ApiResult pair_context(PairId q) const {
    std::lock_guard<std::mutex> lk(mu_);
    if (status_ == SessionStatus::kTraining) return {409, {{"error", "training in progress"}}};
    if (q >= learner_->pool().size()) return {404, {{"error", "no pair " + std::to_string(q)}}};
    return {200, context_json(q, nullptr)};
  }

  // Blocks until no fine-tuning is running.
  void wait_idle() {
    std::unique_lock<std::mutex> lk(mu_);
    idle_.wait(lk, [&] { return status_ != SessionStatus::kTraining; });
  }

  // Read-only access for tests and the CLI; callers must not race a
  // background fine-tune (call wait_idle first).
  const ActiveLearner& learner() const { return *learner_; }
  const std::filesystem::path& dir() const { return dir_; }
  SessionStatus current_status() const {
    std::lock_guard<std::mutex> lk(mu_);
    return status_;
  }

 private:
  Session(std::filesystem::path dir, const std::filesystem::path& dataset, const LoopConfig& cfg,
          const std::filesystem::path& checkpoint)
      : dir_(std::move(dir)), cfg_(cfg) {
    data_ = std::make_unique<Dataset>(load_dataset(dataset));
    std::optional<JointModel> pretrained;
    if (!checkpoint.empty()) {
      pretrained = load_checkpoint_file(checkpoint);
      check_checkpoint_fits(*pretrained, data_->kg1, data_->kg2);
    }
    learner_ = std::make_unique<ActiveLearner>(*data_, cfg_, std::move(pretrained));
    records_.push_back(learner_->record(0));
    refresh_counters();
    save_checkpoint_file(dir_ / "model.ckpt", learner_->model());
  }

  void append(const nlohmann::json& event) {
    std::ofstream out(dir_ / "events.jsonl", std::ios::app | std::ios::binary);
    if (!out) throw SessionError("cannot append to audit log in " + dir_.string());
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw SessionError("audit log write failed");
  }

  void replay(const nlohmann::json& e) {
    const std::string type = e.value("event", "");
    if (type == "batch") {
      if (status_ != SessionStatus::kReady) throw SessionError("audit log: batch while another is pending");
      pending_ = learner_->propose();
      std::vector<PairId> want = e.at("pairs").get<std::vector<PairId>>();
      if (batch_ids(pending_) != want) throw SessionError("audit log: replayed batch differs from the recorded one");
      status_ = SessionStatus::kPending;
    } else if (type == "label") {
      const auto q = e.at("pair").get<PairId>();
      const auto l = parse_label(e.at("label").get<std::string>());
      if (status_ != SessionStatus::kPending || !in_pending(q) || !l) throw SessionError("audit log: invalid label event");
      pending_labels_[q] = *l;
      if (pending_labels_.size() == pending_.size()) finish_round();
    } else if (type == "round") {
      if (e.at("round").get<std::size_t>() != round_) throw SessionError("audit log: round mismatch");
    } else {
      throw SessionError("audit log: unknown event '" + type + "'");
    }
  }

  bool in_pending(PairId q) const {
    for (const BatchItem& b : pending_) {
      if (b.pair == q) return true;
    }
    return false;
  }

  // Labels in batch order, then fine-tune, evaluate and checkpoint.
  void finish_round() {
    std::vector<std::pair<PairId, Label>> labels;
    for (const BatchItem& b : pending_) labels.emplace_back(b.pair, pending_labels_.at(b.pair));
    const std::size_t size = pending_.size();
    learner_->submit(labels);
    RoundRecord rec = learner_->record(size);
    save_checkpoint_file(dir_ / "model.ckpt", learner_->model());
    records_.push_back(std::move(rec));
    pending_.clear();
    pending_labels_.clear();
    status_ = SessionStatus::kReady;
    refresh_counters();
  }

  void start_training(std::unique_lock<std::mutex>&) {
    status_ = SessionStatus::kTraining;
    if (worker_.joinable()) worker_.join();
    worker_ = std::thread([this] {
      std::string err;
      try {
        finish_round_unlocked();
      } catch (const std::exception& ex) {
        err = ex.what();
      }
      std::lock_guard<std::mutex> lk(mu_);
      if (!err.empty()) {
        error_ = err;
        status_ = SessionStatus::kPending;
      } else {
        append({{"event", "round"}, {"round", round_}});
      }
      idle_.notify_all();
    });
  }

  // The learner is only touched by this thread while status is training;
  // every other accessor checks the status under the mutex first.
  void finish_round_unlocked() {
    std::vector<std::pair<PairId, Label>> labels;
    std::size_t size;
    {
      std::lock_guard<std::mutex> lk(mu_);
      for (const BatchItem& b : pending_) labels.emplace_back(b.pair, pending_labels_.at(b.pair));
      size = pending_.size();
    }
    learner_->submit(labels);
    RoundRecord rec = learner_->record(size);
    save_checkpoint_file(dir_ / "model.ckpt", learner_->model());
    std::lock_guard<std::mutex> lk(mu_);
    records_.push_back(std::move(rec));
    pending_.clear();
    pending_labels_.clear();
    status_ = SessionStatus::kReady;
    refresh_counters();
  }

  void refresh_counters() {
    round_ = learner_->round();
    budget_left_ = learner_->budget_left();
    labels_used_ = learner_->labels_used();
  }

  nlohmann::json context_json(PairId q, const BatchItem* item) const {
    const ElementPair& p = learner_->pool().at(q);
    nlohmann::json j = {{"pair_id", q},
                        {"kind", kind_name(p.kind)},
                        {"left", element_context(data_->kg1, p.kind, p.left)},
                        {"right", element_context(data_->kg2, p.kind, p.right)},
                        {"similarity", sim(learner_->model(), learner_->features(), p)}};
    if (item) {
      j["probability"] = item->probability;
      j["gain"] = item->gain;
    }
    return j;
  }

  nlohmann::json batch_json(bool done) const {
    nlohmann::json pairs = nlohmann::json::array();
    for (const BatchItem& b : pending_) {
      nlohmann::json j = context_json(b.pair, &b);
      auto it = pending_labels_.find(b.pair);
      j["label"] = it == pending_labels_.end() ? nlohmann::json(nullptr) : nlohmann::json(label_name(it->second));
      pairs.push_back(std::move(j));
    }
    return {{"round", round_}, {"status", status_name(status_)}, {"done", done}, {"pairs", pairs}};
  }

  std::filesystem::path dir_;
  LoopConfig cfg_;
  std::unique_ptr<Dataset> data_;
  std::unique_ptr<ActiveLearner> learner_;

  mutable std::mutex mu_;
  std::condition_variable idle_;
  std::thread worker_;
  SessionStatus status_ = SessionStatus::kReady;
  std::vector<BatchItem> pending_;
  std::map<PairId, Label> pending_labels_;
  std::vector<RoundRecord> records_;
  std::size_t round_ = 0, budget_left_ = 0, labels_used_ = 0;
  std::string error_;
};

}  // namespace activealign
