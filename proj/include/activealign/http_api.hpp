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

// JSON endpoints over a Session:
//   GET  /status             round, budget left, latest metrics
//   GET  /batch              pending pairs with display context
//   POST /labels             [{pair_id, label: match | non-match}]
//   GET  /metrics            per-round records so far
//   GET  /pair/{id}/context  neighborhoods of one pool pair

#pragma once

#include <filesystem>
#include <string>

#include "activealign/session.hpp"
#include "httplib.h"
#include "json.hpp"

namespace activealign {

template <typename Json = nlohmann::json>
void send_json(httplib::Response& res, int code, const Json& body) {
  res.status = code;
  res.set_content(body.dump(), "application/json");
}

// Registers the API on `server`. `ui_dir`, when it exists, is served as
// static files under "/".
inline void register_routes(httplib::Server& server, Session& session, const std::filesystem::path& ui_dir = {}) {
  server.Get("/status", [&](const httplib::Request&, httplib::Response& res) { send_json(res, 200, session.status()); });
  server.Get("/batch", [&](const httplib::Request&, httplib::Response& res) {
    const ApiResult r = session.batch();
    send_json(res, r.code, r.body);
  });
  server.Post("/labels", [&](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      send_json(res, 400, nlohmann::json{{"error", "body is not valid JSON"}});
      return;
    }
    const ApiResult r = session.post_labels(body);
    send_json(res, r.code, r.body);
  });
  server.Get("/metrics", [&](const httplib::Request&, httplib::Response& res) { send_json(res, 200, session.metrics()); });
  server.Get(R"(/pair/(\d+)/context)", [&](const httplib::Request& req, httplib::Response& res) {
    PairId q = 0;
    try {
      const unsigned long v = std::stoul(req.matches[1].str());
      if (v > std::numeric_limits<PairId>::max()) throw std::out_of_range("id");
      q = static_cast<PairId>(v);
    } catch (const std::exception&) {
      send_json(res, 404, nlohmann::json{{"error", "no such pair"}});
      return;
    }
    const ApiResult r = session.pair_context(q);
    send_json(res, r.code, r.body);
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send_json(res, 500, nlohmann::json{{"error", what}});
  });
  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) server.set_mount_point("/", ui_dir.string());
}

}  // namespace activealign
