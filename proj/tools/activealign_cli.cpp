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

// activealign: command-line entry points.
//
//   synth   write a synthetic KG pair with gold links
//   train   pretrain embeddings and mappings, save a checkpoint
//   select  emit one batch for the current labels
//   loop    run the simulated active loop, one report record per round
//   eval    metrics of a checkpoint on the held-out links
//   serve   start the HTTP labeling session
//
// Exit codes: 0 ok, 1 other failure, 2 usage, 3 file or data error,
// 4 invalid config, 5 training diverged.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "activealign/checkpoint.hpp"
#include "activealign/config.hpp"
#include "activealign/dataset_io.hpp"
#include "activealign/harness.hpp"
#include "activealign/http_api.hpp"
#include "activealign/sampling.hpp"
#include "activealign/session.hpp"
#include "httplib.h"
#include "json.hpp"

namespace aa = activealign;
namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kConfig = 4, kDiverged = 5 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config file plus one --<key> flag per config key; flags win.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "flat key = value config file");
    for (const aa::ConfigKey& k : aa::config_keys()) {
      app->add_option(std::string("--") + k.name, values[k.name], k.help);
    }
  }

  aa::LoopConfig resolve(const CLI::App* app) const {
    aa::LoopConfig cfg = aa::desk_config();
    aa::ConfigMap merged;
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw IoError("cannot read config file " + file);
      merged = aa::parse_config(in);
    }
    for (const aa::ConfigKey& k : aa::config_keys()) {
      if (app->count(std::string("--") + k.name) > 0) merged[k.name] = values.at(k.name);
    }
    aa::apply_config(cfg, merged);
    return cfg;
  }
};

std::string element_name(const aa::KnowledgeGraph& kg, aa::ElementKind kind, std::uint32_t id) {
  switch (kind) {
    case aa::ElementKind::kEntity:
      return kg.entity_name(id);
    case aa::ElementKind::kRelation:
      return kg.relation_name(id);
    case aa::ElementKind::kClass:
      return kg.class_name(id);
  }
  return {};
}

aa::Dataset load_data(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("no dataset directory at " + dir);
  return aa::load_dataset(dir);
}

std::optional<aa::JointModel> load_model(const std::string& path, const aa::Dataset& d) {
  if (path.empty()) return std::nullopt;
  if (!fs::exists(path)) throw IoError("no checkpoint at " + path);
  aa::JointModel m = aa::load_checkpoint_file(path);
  aa::check_checkpoint_fits(m, d.kg1, d.kg2);
  return m;
}

// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  fn(out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active entity, relation and class alignment between two knowledge graphs"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress on stderr");

  // synth
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic KG pair with gold links");
  aa::SynthSpec spec;
  std::string synth_out;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--entities", spec.entities, "entities per graph before dangling removal");
  synth->add_option("--relations", spec.relations, "base relations");
  synth->add_option("--classes", spec.classes, "classes");
  synth->add_option("--density", spec.density, "forward relation triplets per entity");
  synth->add_option("--noise", spec.noise, "share of kg2 relation triplets removed");
  synth->add_option("--dangling", spec.dangling, "share of entities without a counterpart");
  synth->add_option("--extra_class_rate", spec.extra_class_rate, "probability of a second class");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_flag("--quiet", quiet, "suppress progress on stderr");

  // Shared by the model commands.
  std::string data, checkpoint, out;
  auto model_command = [&](const char* name, const char* help, ConfigFlags& flags) {
    CLI::App* c = app.add_subcommand(name, help);
    c->add_option("--data", data, "dataset directory (rel_triples_1, rel_triples_2, ent_links, ...)")->required();
    flags.attach(c);
    c->add_flag("--quiet", quiet, "suppress progress on stderr");
    return c;
  };

  ConfigFlags train_flags, select_flags, loop_flags, eval_flags, serve_flags;
  CLI::App* train = model_command("train", "pretrain embeddings and mappings, save a checkpoint", train_flags);
  train->add_option("--out", out, "checkpoint file")->required();

  CLI::App* select = model_command("select", "emit one batch for the seed labels", select_flags);
  std::string format = "tsv";
  select->add_option("--checkpoint", checkpoint, "start from this checkpoint instead of pretraining");
  select->add_option("--out", out, "output file; stdout by default");
  select->add_option("--format", format, "tsv | json")->check(CLI::IsMember({"tsv", "json"}));

  CLI::App* loop = model_command("loop", "run the simulated active loop", loop_flags);
  std::string csv;
  loop->add_option("--checkpoint", checkpoint, "start from this checkpoint instead of pretraining");
  loop->add_option("--out", out, "JSONL report, one record per round; stdout by default");
  loop->add_option("--csv", csv, "also write the report as CSV");

  CLI::App* eval = model_command("eval", "metrics of a checkpoint on the held-out links", eval_flags);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--out", out, "output file; stdout by default");

  CLI::App* serve = model_command("serve", "start the HTTP labeling session", serve_flags);
  std::string session_dir, host = "127.0.0.1", ui;
  int port = 8080;
  serve->add_option("--session", session_dir, "session directory; reopened when it holds an audit log")->required();
  serve->add_option("--checkpoint", checkpoint, "start a new session from this checkpoint");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port");
  serve->add_option("--ui", ui, "directory of static UI assets served under /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  std::ostream* progress = quiet ? nullptr : &std::cerr;
  try {
    if (*synth) {
      const aa::Dataset d = aa::synth_kg_pair(spec, synth_seed);
      try {
        aa::save_dataset(synth_out, d);
      } catch (const fs::filesystem_error& e) {
        throw IoError(e.what());
      }
      if (progress) {
        *progress << "wrote " << synth_out << ": " << d.kg1.num_entities() << " + " << d.kg2.num_entities()
                  << " entities\n";
      }
    } else if (*train) {
      aa::LoopConfig cfg = train_flags.resolve(train);
      cfg.budget = 0;
      const aa::Dataset d = load_data(data);
      aa::ActiveLearner learner(d, cfg);
      aa::save_checkpoint_file(out, learner.model());
      if (progress) *progress << aa::metrics_json(learner.evaluate()).dump() << '\n';
    } else if (*select) {
      const aa::LoopConfig cfg = select_flags.resolve(select);
      const aa::Dataset d = load_data(data);
      aa::ActiveLearner learner(d, cfg, load_model(checkpoint, d));
      const std::vector<aa::BatchItem> batch = learner.propose();
      emit(out, [&](std::ostream& os) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const aa::BatchItem& b : batch) {
          const aa::ElementPair& p = learner.pool().at(b.pair);
          const std::string l = element_name(d.kg1, p.kind, p.left), r = element_name(d.kg2, p.kind, p.right);
          if (format == "tsv") {
            os << aa::kind_name(p.kind) << '\t' << l << '\t' << r << '\t' << aa::detail::format_double(b.gain) << '\t'
               << aa::detail::format_double(b.probability) << '\n';
          } else {
            arr.push_back({{"pair_id", b.pair},
                           {"kind", aa::kind_name(p.kind)},
                           {"left", l},
                           {"right", r},
                           {"gain", b.gain},
                           {"probability", b.probability}});
          }
        }
        if (format == "json") os << arr.dump() << '\n';
      });
    } else if (*loop) {
      const aa::LoopConfig cfg = loop_flags.resolve(loop);
      const aa::Dataset d = load_data(data);
      aa::ActiveLearner learner(d, cfg, load_model(checkpoint, d));
      const std::vector<aa::RoundRecord> recs = aa::active_loop(learner, progress);
      emit(out, [&](std::ostream& os) { aa::write_jsonl(os, recs); });
      if (!csv.empty()) emit(csv, [&](std::ostream& os) { aa::write_csv(os, recs); });
    } else if (*eval) {
      const aa::LoopConfig cfg = eval_flags.resolve(eval);
      const aa::Dataset d = load_data(data);
      aa::ActiveLearner learner(d, cfg, load_model(checkpoint, d));
      emit(out, [&](std::ostream& os) { os << aa::metrics_json(learner.evaluate()).dump() << '\n'; });
    } else if (*serve) {
      std::unique_ptr<aa::Session> session;
      if (fs::exists(fs::path(session_dir) / "events.jsonl")) {
        session = aa::Session::open(session_dir);
      } else {
        const aa::LoopConfig cfg = serve_flags.resolve(serve);
        if (!fs::is_directory(data)) throw IoError("no dataset directory at " + data);
        if (!checkpoint.empty() && !fs::exists(checkpoint)) throw IoError("no checkpoint at " + checkpoint);
        session = aa::Session::create(session_dir, data, cfg, checkpoint);
      }
      httplib::Server server;
      aa::register_routes(server, *session, ui);
      if (progress) *progress << "serving " << session_dir << " on http://" << host << ':' << port << '\n';
      if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const aa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const aa::TrainingDiverged& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const aa::DatasetError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kIo;
  } catch (const aa::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kIo;
  } catch (const aa::SessionError& e) {
    std::cerr << "session error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    // Synthetic-data parameters are validated like config values.
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
