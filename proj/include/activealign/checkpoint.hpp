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

// Plain-text model checkpoints. Doubles are written with 17 significant
// digits, which round-trips every value exactly.

#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "activealign/align.hpp"
#include "activealign/embed.hpp"

namespace activealign {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_double(std::ostream& os, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  os << buf;
}

inline void put_matrix(std::ostream& os, const std::string& tag, const Matrix& m) {
  os << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      put_double(os, m(r, c));
    }
    os << '\n';
  }
}

inline void expect_word(std::istream& is, const std::string& want) {
  std::string got;
  if (!(is >> got) || got != want) throw CheckpointError("checkpoint: expected '" + want + "', got '" + got + "'");
}

template <typename T>
T read_value(std::istream& is, const char* what) {
  T v{};
  if (!(is >> v)) throw CheckpointError(std::string("checkpoint: cannot read ") + what);
  return v;
}

inline Matrix get_matrix(std::istream& is, const std::string& tag) {
  expect_word(is, tag);
  const auto rows = read_value<std::size_t>(is, "rows");
  const auto cols = read_value<std::size_t>(is, "cols");
  if (rows > (1u << 26) || cols > (1u << 20)) throw CheckpointError("checkpoint: implausible matrix shape");
  Matrix m(rows, cols);
  for (double& x : m.data()) {
    std::string tok;
    if (!(is >> tok)) throw CheckpointError("checkpoint: truncated matrix " + tag);
    try {
      std::size_t used = 0;
      x = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw CheckpointError("checkpoint: bad number '" + tok + "' in " + tag);
    }
  }
  return m;
}

inline void put_space(std::ostream& os, const char* side, const EmbeddingSpace& s) {
  const EmbedConfig& c = s.config();
  os << "space " << side << ' ' << model_kind_name(c.kind) << ' ' << c.entity_dim << ' ' << c.class_dim << ' ';
  put_double(os, c.margin_er);
  os << ' ';
  put_double(os, c.margin_ec);
  os << '\n';
  for (std::size_t b = 0; b < kSpaceBlockCount; ++b) put_matrix(os, "block" + std::to_string(b), s.block(static_cast<std::uint8_t>(b)));
}

inline EmbeddingSpace get_space(std::istream& is, const char* side) {
  expect_word(is, "space");
  expect_word(is, side);
  EmbedConfig c;
  try {
    c.kind = parse_model_kind(read_value<std::string>(is, "model kind"));
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  c.entity_dim = read_value<std::size_t>(is, "entity_dim");
  c.class_dim = read_value<std::size_t>(is, "class_dim");
  c.margin_er = read_value<double>(is, "margin_er");
  c.margin_ec = read_value<double>(is, "margin_ec");
  std::array<Matrix, kSpaceBlockCount> blocks;
  for (std::size_t b = 0; b < kSpaceBlockCount; ++b) blocks[b] = get_matrix(is, "block" + std::to_string(b));
  try {
    return EmbeddingSpace::from_blocks(c, std::move(blocks));
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace detail

inline constexpr const char* kCheckpointMagic = "activealign-checkpoint";
inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(std::ostream& os, const JointModel& m) {
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  detail::put_space(os, "left", m.left);
  detail::put_space(os, "right", m.right);
  const AlignConfig& a = m.align.cfg;
  os << "align";
  for (double x : {a.z_ent, a.z_rel, a.z_cls, a.tau, a.gamma, a.init_noise}) {
    os << ' ';
    detail::put_double(os, x);
  }
  os << '\n';
  detail::put_matrix(os, "a_ent", m.align.a_ent);
  detail::put_matrix(os, "a_rel", m.align.a_rel);
  detail::put_matrix(os, "a_cls", m.align.a_cls);
  os << "end\n";
}

inline JointModel load_checkpoint(std::istream& is) {
  detail::expect_word(is, kCheckpointMagic);
  if (detail::read_value<int>(is, "version") != kCheckpointVersion) throw CheckpointError("checkpoint: unsupported version");
  JointModel m;
  m.left = detail::get_space(is, "left");
  m.right = detail::get_space(is, "right");
  detail::expect_word(is, "align");
  AlignConfig& a = m.align.cfg;
  for (double* x : {&a.z_ent, &a.z_rel, &a.z_cls, &a.tau, &a.gamma, &a.init_noise}) *x = detail::read_value<double>(is, "align config");
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  m.align.a_ent = detail::get_matrix(is, "a_ent");
  m.align.a_rel = detail::get_matrix(is, "a_rel");
  m.align.a_cls = detail::get_matrix(is, "a_cls");
  detail::expect_word(is, "end");
  const std::size_t de = m.left.entity_dim(), dc = m.left.class_dim();
  if (m.right.entity_dim() != de || m.right.class_dim() != dc || m.align.a_ent.rows() != de ||
      m.align.a_ent.cols() != de || m.align.a_rel.rows() != de || m.align.a_rel.cols() != de ||
      m.align.a_cls.rows() != dc || m.align.a_cls.cols() != dc) {
    throw CheckpointError("checkpoint: inconsistent dimensions");
  }
  return m;
}

inline void save_checkpoint_file(const std::filesystem::path& path, const JointModel& m) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    save_checkpoint(os, m);
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline JointModel load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return load_checkpoint(is);
}

// The checkpoint must describe graphs of exactly these sizes.
inline void check_checkpoint_fits(const JointModel& m, const KnowledgeGraph& kg1, const KnowledgeGraph& kg2) {
  if (m.left.num_entities() != kg1.num_entities() || m.right.num_entities() != kg2.num_entities() ||
      m.left.num_relations() != kg1.num_relations() || m.right.num_relations() != kg2.num_relations() ||
      m.left.num_classes() != kg1.num_classes() || m.right.num_classes() != kg2.num_classes()) {
    throw CheckpointError("checkpoint does not match the dataset's element counts");
  }
}

}  // namespace activealign
