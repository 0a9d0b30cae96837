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

#include <span>
#include <string>
#include <vector>

#include "gbspp/kernels.hpp"
#include "gbspp/stats.hpp"

namespace gbspp::cli::svg {

/// Voronoi renderings cap the raster so that the file stays small.
inline constexpr int kMaxRaster = 200;

std::string scatter(const StateSpace& space, std::span<const int> selected, const BBox& box);
std::string marks(const StateSpace& space, std::span<const int> counts, const BBox& box);
/// `owner` is a res x res raster of indices into `selected`, row 0 at ymin.
std::string voronoi(const StateSpace& space, std::span<const int> selected, const BBox& box,
                    const std::vector<int>& owner, int res);

}  // namespace gbspp::cli::svg
