// Copyright 2026 The gbspp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbspp/numerics.hpp"

namespace gbspp {

struct SpacePoint {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

/// Finite state space of labelled planar points.
struct StateSpace {
  std::vector<SpacePoint> points;
  std::optional<std::vector<double>> densities;
  std::optional<std::vector<std::string>> labels;

  std::size_t size() const { return points.size(); }
  /// Throws DomainError on duplicate ids or mismatched/negative densities.
  void validate() const;
};

/// Daily returns, one column per ticker.
struct ReturnsTable {
  std::vector<std::string> tickers;
  std::vector<std::string> days;
  RealMatrix values;  // days x tickers
  std::vector<std::string> dropped;  // tickers removed for missing data
};

enum class ReturnsMode { Prices, Returns };

ReturnsMode parse_returns_mode(std::string_view name);

/// nx * ny lattice in row-major order; point (r, c) has id "r,c" and
/// coordinates (c * spacing, r * spacing).
StateSpace grid_space(int nx, int ny, double spacing);

/// K_ij = exp(-|r_i - r_j|^2 / sigma^2).
RealMatrix rbf_kernel(const StateSpace& space, double sigma);

/// K_ij = d_i d_j exp(-|r_i - r_j|^2 / sigma^2) with d the space's densities.
RealMatrix density_kernel(const StateSpace& space, double sigma);

/// (1/n) sum_j R_j R_j^T over the n day vectors. With `standardize`, each
/// ticker is first centred and scaled to unit variance so the result is a
/// correlation matrix; without it the raw second-moment matrix is returned.
RealMatrix correlation_kernel(const ReturnsTable& returns, bool standardize = true);

/// Reads `id,x,y[,density][,label]` CSV.
StateSpace parse_space(std::istream& in);
StateSpace load_space(const std::filesystem::path& path);

/// Reads `date,<ticker>,...` CSV. Tickers with a missing cell are dropped
/// with a warning. In prices mode each column becomes log-returns
/// ln(p_t / p_{t-1}) and non-positive prices are rejected.
ReturnsTable parse_returns(std::istream& in, ReturnsMode mode);
ReturnsTable load_returns(const std::filesystem::path& path, ReturnsMode mode);

namespace csv {

std::vector<std::string> split_line(std::string_view line);
/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

}  // namespace csv

}  // namespace gbspp
