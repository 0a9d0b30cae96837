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

// Point-pattern statistics: nearest-neighbour distances, rasterized Voronoi
// cell areas, marks, histograms over repeated runs and the one-sided tests
// used to compare processes.

#include <span>
#include <vector>

#include "gbspp/kernels.hpp"

namespace gbspp {

/// Distance from each selected point to its nearest other selected point.
std::vector<double> nnd(const StateSpace& space, std::span<const int> selected);

struct BBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 1.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool contains(double x, double y) const { return x >= xmin && x <= xmax && y >= ymin && y <= ymax; }
};

/// Smallest distance between two distinct points of the space; 1 for a
/// single point.
double min_spacing(const StateSpace& space);

/// Extent of the space padded by half of min_spacing() on every side.
BBox default_bbox(const StateSpace& space);

/// Raster Voronoi areas of the selected points inside `bbox`, in selection
/// order. Each of the resolution x resolution pixels goes to the nearest
/// selected point by its centre; ties go to the lowest space index. The
/// areas sum to bbox.area().
std::vector<double> voronoi_areas(const StateSpace& space, std::span<const int> selected, const BBox& bbox,
                                  int resolution = 512);

/// Owner of every pixel as a position in `selected`, row-major from (xmin, ymin).
std::vector<int> voronoi_raster(const StateSpace& space, std::span<const int> selected, const BBox& bbox,
                                int resolution);

/// Per-point appearance counts over a batch of index subsets.
std::vector<int> marks(std::span<const std::vector<int>> samples, std::size_t m);

/// Half the L1 distance between two distributions over the same support.
double tvd(std::span<const double> p, std::span<const double> q);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::vector<double>> frequencies;  // runs x bins, each row sums to 1
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation across runs

  std::size_t bins() const { return mean.size(); }
};

/// `bins` equal-width bins over [lo, hi]; a degenerate range is widened by 0.5 each side.
std::vector<double> uniform_edges(double lo, double hi, int bins);

/// Per-run normalized frequencies and their mean/std per bin. Values outside
/// the edges are clipped into the end bins with a warning.
Histogram histogram(std::span<const std::vector<double>> runs, std::span<const double> edges);

double mean(std::span<const double> v);
/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> v);
/// Population variance.
double population_variance(std::span<const double> v);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// CDF of Student's t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Welch's t test of H1: mean(a) < mean(b).
TestResult welch_less(std::span<const double> a, std::span<const double> b);
/// Paired t test of H1: mean(a - b) < 0.
TestResult paired_less(std::span<const double> a, std::span<const double> b);

}  // namespace gbspp
