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

// Dataset directory layout (OpenEA style):
//
//   rel_triples_1, rel_triples_2   head<TAB>relation<TAB>tail, one per line
//   ent_links                      left<TAB>right entity matches
//   rel_links, cls_links           optional relation / class matches
//
// Lines whose relation is one of the type aliases become type triplets.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "activealign/kg.hpp"

namespace activealign {

class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : "") + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

struct Dataset {
  KnowledgeGraph kg1;
  KnowledgeGraph kg2;
  GoldLinks links;
};

struct LoadOptions {
  std::vector<std::string> type_aliases = {"type"};
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Calls fn(fields, line_number) for every non-empty line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, std::size_t fields, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DatasetError(path.string(), 0, "cannot open file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto parts = split_tabs(line);
    if (parts.size() != fields) {
      throw DatasetError(path.string(), lineno,
                         "expected " + std::to_string(fields) + " tab-separated fields, got " +
                             std::to_string(parts.size()));
    }
    for (const auto& p : parts) {
      if (p.empty()) throw DatasetError(path.string(), lineno, "empty field");
    }
    fn(parts, lineno);
  }
}

inline KnowledgeGraph load_triples(const std::filesystem::path& path,
                                   const std::vector<std::string>& type_aliases) {
  KnowledgeGraphBuilder b;
  for_each_record(path, 3, [&](const std::vector<std::string>& f, std::size_t lineno) {
    const bool is_type =
        std::find(type_aliases.begin(), type_aliases.end(), f[1]) != type_aliases.end();
    try {
      if (is_type) {
        b.add_type(f[0], f[2]);
      } else {
        b.add_triple(f[0], f[1], f[2]);
      }
    } catch (const std::exception& e) {
      throw DatasetError(path.string(), lineno, e.what());
    }
  });
  return std::move(b).build();
}

template <typename Lookup1, typename Lookup2>
GoldLinks::Links load_links(const std::filesystem::path& path, Lookup1&& left, Lookup2&& right) {
  GoldLinks::Links out;
  for_each_record(path, 2, [&](const std::vector<std::string>& f, std::size_t lineno) {
    auto l = left(f[0]);
    if (!l) throw DatasetError(path.string(), lineno, "unknown id in first graph: " + f[0]);
    auto r = right(f[1]);
    if (!r) throw DatasetError(path.string(), lineno, "unknown id in second graph: " + f[1]);
    out.emplace_back(*l, *r);
  });
  return out;
}

}  // namespace detail

inline Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& opts = {}) {
  Dataset ds{detail::load_triples(dir / "rel_triples_1", opts.type_aliases),
             detail::load_triples(dir / "rel_triples_2", opts.type_aliases),
             {}};
  const KnowledgeGraph& g1 = ds.kg1;
  const KnowledgeGraph& g2 = ds.kg2;
  ds.links.entity_matches = detail::load_links(
      dir / "ent_links", [&](const std::string& n) { return g1.find_entity(n); },
      [&](const std::string& n) { return g2.find_entity(n); });
  if (std::filesystem::exists(dir / "rel_links")) {
    ds.links.relation_matches = detail::load_links(
        dir / "rel_links", [&](const std::string& n) { return g1.find_relation(n); },
        [&](const std::string& n) { return g2.find_relation(n); });
  }
  if (std::filesystem::exists(dir / "cls_links")) {
    ds.links.class_matches = detail::load_links(
        dir / "cls_links", [&](const std::string& n) { return g1.find_class(n); },
        [&](const std::string& n) { return g2.find_class(n); });
  }
  ds.links.normalize();
  return ds;
}

inline void write_triples(std::ostream& out, const KnowledgeGraph& g,
                          const std::string& type_name = "type") {
  auto ts = g.triplets();
  for (std::size_t i = 0; i < ts.size(); i += 2) {
    out << g.entity_name(ts[i].head) << '\t' << g.relation_name(ts[i].rel) << '\t'
        << g.entity_name(ts[i].tail) << '\n';
  }
  for (const TypeTriple& t : g.type_triplets()) {
    out << g.entity_name(t.entity) << '\t' << type_name << '\t' << g.class_name(t.cls) << '\n';
  }
}

inline void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError((dir / name).string(), 0, "cannot write file");
    return out;
  };
  {
    auto out = open("rel_triples_1");
    write_triples(out, ds.kg1);
  }
  {
    auto out = open("rel_triples_2");
    write_triples(out, ds.kg2);
  }
  {
    auto out = open("ent_links");
    for (auto [a, b] : ds.links.entity_matches) {
      out << ds.kg1.entity_name(a) << '\t' << ds.kg2.entity_name(b) << '\n';
    }
  }
  {
    auto out = open("rel_links");
    for (auto [a, b] : ds.links.relation_matches) {
      out << ds.kg1.relation_name(a) << '\t' << ds.kg2.relation_name(b) << '\n';
    }
  }
  {
    auto out = open("cls_links");
    for (auto [a, b] : ds.links.class_matches) {
      out << ds.kg1.class_name(a) << '\t' << ds.kg2.class_name(b) << '\n';
    }
  }
}

}  // namespace activealign
