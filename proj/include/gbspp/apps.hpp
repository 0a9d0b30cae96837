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

// Application pipelines: TPP-assisted k-means++ seeding and correlated
// stock subset selection.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gbspp/kernels.hpp"
#include "gbspp/samplers.hpp"
#include "gbspp/stats.hpp"

namespace gbspp {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Dataset2D {
  std::vector<Point2> points;
  std::optional<std::vector<Point2>> true_centers;
};

/// k centres uniform in `bbox`, then per_cluster isotropic Gaussian points
/// around each, cluster by cluster.
Dataset2D synth_blobs(int k, int per_cluster, double spread, const BBox& bbox, RngStream& rng);

/// Dataset as a state space with ids "0", "1", ...
StateSpace to_space(const Dataset2D& data);

/// Pooled standard deviation of the coordinates, sqrt((var x + var y) / 2).
double dataset_std(const Dataset2D& data);

/// D^2-weighted k-means++ seeding over `candidates` (all points when empty).
/// Returns indices into data.points.
std::vector<int> kmeanspp_seeds(const Dataset2D& data, int k, RngStream& rng, std::span<const int> candidates = {});

struct Clustering {
  std::vector<int> assignments;
  std::vector<Point2> centers;
  double inertia = 0.0;
  int iterations = 0;
  /// Inertia after every assignment step.
  std::vector<double> inertia_trace;
};

/// Lloyd iterations until every centre moves less than `tol` or `max_iter`
/// is reached. An empty cluster is re-seeded at the point farthest from its
/// assigned centre.
Clustering lloyd(const Dataset2D& data, std::vector<Point2> seeds, int max_iter = 300, double tol = 1e-9);

/// Mean distance between seeds and true centres under the best one-to-one
/// matching: exact for k <= 8, greedy closest-pair matching above.
double seed_distance(std::span<const Point2> seeds, std::span<const Point2> centers);

struct SeededKmeans {
  IndexSubset tpp_subset;
  std::vector<int> seeds;
  Clustering clustering;
  int attempts = 0;
  /// Empty when every point was selected without sampling.
  std::optional<TppMethod> method;
};

/// Thermal TPP over rbf_kernel(data, sigma) scaled to `mean_points` expected
/// clicks; patterns are redrawn until they hold at least k points (at most
/// 1000 attempts). k-means++ then seeds from the selected points and Lloyd
/// runs on the full data. mean_points >= n selects every point and draws no
/// pattern, so the seeds equal kmeanspp_seeds on the same stream.
SeededKmeans tpp_seeded_kmeans(const Dataset2D& data, int k, double sigma, double mean_points, RngStream& rng,
                               const MatrixFnLimits& limits = {});

struct SeedingConfig {
  int k = 3;
  int per_cluster = 40;
  double spread = 2.0;
  BBox bbox{0.0, 0.0, 10.0, 10.0};
  int trials = 100;
  /// Expected TPP clicks; 3k when absent.
  std::optional<double> mean_points;
  /// RBF width; the dataset standard deviation of each trial when absent.
  std::optional<double> sigma;
};

struct SeedingTrial {
  double tpp_distance = 0.0;
  double kmeanspp_distance = 0.0;
  double tpp_inertia = 0.0;
  double kmeanspp_inertia = 0.0;
  std::size_t subset_size = 0;
  int attempts = 0;
  std::optional<TppMethod> method;
};

/// Trial t draws its data from stream 3t, the TPP seeding from 3t+1 and plain k-means++ from 3t+2.
std::vector<SeedingTrial> seeding_trials(const SeedingConfig& config, std::uint64_t seed, int workers = 1,
                                         const MatrixFnLimits& limits = {});

enum class SelectionProcess { Tpp, Dpp, Ppp };

std::string_view to_string(SelectionProcess process);
SelectionProcess parse_selection_process(std::string_view name);

struct StockSelection {
  std::vector<int> indices;
  std::vector<std::string> tickers;
  RealMatrix submatrix;
  /// Absent for subsets with fewer than two tickers.
  std::optional<double> mean_abs_offdiag;
};

/// Mean |a_ij| over i != j; nullopt below dimension 2.
std::optional<double> mean_abs_offdiag(const RealMatrix& a);

/// `runs` subsets of tickers drawn from the process over the correlation
/// kernel, each scaled to `target_size` expected points (clicks for TPP).
std::vector<StockSelection> select_stocks(const ReturnsTable& returns, double target_size, int runs,
                                          SelectionProcess process, RngStream& rng, bool standardize = true,
                                          const MatrixFnLimits& limits = {});

/// Gaussian daily returns with `blocks` groups of `per_block` tickers; tickers
/// in a group share a common factor with pairwise correlation `within`.
ReturnsTable synth_returns(int blocks, int per_block, int days, double within, RngStream& rng);

}  // namespace gbspp
