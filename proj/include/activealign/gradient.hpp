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

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <span>

#include "activealign/linalg.hpp"

namespace activealign {

// Which parameter set a gradient row belongs to.
enum class Owner : std::uint8_t { kLeft = 0, kRight = 1, kAlign = 2 };

// Addresses one row of one parameter matrix.
struct ParamKey {
  Owner owner = Owner::kLeft;
  std::uint8_t block = 0;
  std::uint32_t row = 0;

  auto operator<=>(const ParamKey&) const = default;
};

// Sparse row-wise gradient. Rows are created zero-filled on first touch.
class Gradient {
 public:
  std::span<double> row(ParamKey k, std::size_t width) {
    auto [it, inserted] = rows_.try_emplace(k);
    if (inserted) it->second.assign(width, 0.0);
    return it->second;
  }

  void add(ParamKey k, std::span<const double> g, double scale = 1.0) {
    axpy(scale, g, row(k, g.size()));
  }

  void merge(const Gradient& other, double scale = 1.0) {
    for (const auto& [k, v] : other.rows_) add(k, v, scale);
  }

  double get(ParamKey k, std::size_t col) const {
    auto it = rows_.find(k);
    return it == rows_.end() ? 0.0 : it->second.at(col);
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [k, v] : rows_) s += dot(v, v);
    return std::sqrt(s);
  }

  void scale(double s) {
    for (auto& [k, v] : rows_) {
      for (double& x : v) x *= s;
    }
  }

  bool empty() const { return rows_.empty(); }
  const std::map<ParamKey, Vec>& rows() const { return rows_; }

 private:
  std::map<ParamKey, Vec> rows_;
};

struct LossResult {
  double value = 0.0;
  Gradient grad;
  // Positives for which no valid negative existed.
  std::size_t skipped = 0;
};

}  // namespace activealign
