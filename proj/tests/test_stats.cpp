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

#include <gtest/gtest.h>

#include <cmath>

#include "gbspp/stats.hpp"

using namespace gbspp;

namespace {

StateSpace space_of(std::vector<std::pair<double, double>> pts) {
  StateSpace s;
  for (std::size_t i = 0; i < pts.size(); ++i) s.points.push_back({std::to_string(i), pts[i].first, pts[i].second});
  return s;
}

}  // namespace

TEST(Nnd, DirectDistances) {
  const StateSpace two = space_of({{0, 0}, {1, 0}});
  EXPECT_EQ(nnd(two, std::vector<int>{0, 1}), (std::vector<double>{1, 1}));
  const StateSpace three = space_of({{0, 0}, {0, 1}, {5, 5}});
  const auto d = nnd(three, std::vector<int>{0, 1, 2});
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  EXPECT_DOUBLE_EQ(d[1], 1.0);
  EXPECT_NEAR(d[2], std::sqrt(41.0), 1e-12);
  const StateSpace line = space_of({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_EQ(nnd(line, std::vector<int>{0, 1, 2}), (std::vector<double>{1, 1, 1}));
  EXPECT_THROW(nnd(line, std::vector<int>{0}), DomainError);
  EXPECT_THROW(nnd(line, std::vector<int>{0, 0}), DomainError);
}

TEST(Voronoi, BasicAreas) {
  const BBox unit{0, 0, 1, 1};
  const StateSpace one = space_of({{0.3, 0.7}});
  EXPECT_DOUBLE_EQ(voronoi_areas(one, std::vector<int>{0}, unit, 16)[0], 1.0);

  const StateSpace mirror = space_of({{0.25, 0.5}, {0.75, 0.5}});
  const auto a = voronoi_areas(mirror, std::vector<int>{0, 1}, unit, 64);
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.5);

  const StateSpace quad = space_of({{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}});
  for (int res : {7, 33, 100}) {
    const auto q = voronoi_areas(quad, std::vector<int>{0, 1, 2, 3}, unit, res);
    for (double v : q) EXPECT_NEAR(v, 0.25, 2.0 / res) << res;
  }
  EXPECT_THROW(voronoi_areas(one, std::vector<int>{}, unit, 8), DomainError);
  EXPECT_THROW(voronoi_areas(space_of({{2, 2}}), std::vector<int>{0}, unit, 8), DomainError);
}

TEST(Voronoi, ConservationAtEveryResolution) {
  const StateSpace s = space_of({{0.1, 0.2}, {0.9, 0.3}, {0.4, 0.8}, {0.5, 0.5}, {0.05, 0.95}});
  const BBox box{-0.5, -0.25, 1.5, 1.25};
  for (int res : {1, 2, 3, 10, 97, 256}) {
    const auto a = voronoi_areas(s, std::vector<int>{0, 1, 2, 3, 4}, box, res);
    double total = 0.0;
    for (double v : a) total += v;
    EXPECT_NEAR(total, box.area(), 1e-12) << res;
  }
}

TEST(Voronoi, TiesGoToLowestSpaceIndex) {
  // Points symmetric about x = 0.5 with an odd resolution: the centre column ties.
  const StateSpace s = space_of({{0.25, 0.5}, {0.75, 0.5}});
  const BBox unit{0, 0, 1, 1};
  const auto fwd = voronoi_areas(s, std::vector<int>{0, 1}, unit, 3);
  EXPECT_NEAR(fwd[0], 6.0 / 9.0, 1e-15);
  const auto rev = voronoi_areas(s, std::vector<int>{1, 0}, unit, 3);
  EXPECT_NEAR(rev[1], 6.0 / 9.0, 1e-15);
}

TEST(Voronoi, ConvergesUnderRefinement) {
  const StateSpace s = space_of({{0.3, 0.5}, {0.7, 0.5}});
  const BBox unit{0, 0, 1, 1};
  for (int res : {16, 32, 64, 128}) {
    const auto a = voronoi_areas(s, std::vector<int>{0, 1}, unit, res);
    const auto b = voronoi_areas(s, std::vector<int>{0, 1}, unit, 2 * res);
    // One column of pixels is the perimeter-sized error.
    EXPECT_LE(std::abs(a[0] - b[0]), 4.0 / res);
  }
}

TEST(Voronoi, DefaultBboxPadsHalfSpacing) {
  const StateSpace g = grid_space(3, 2, 2.0);
  const BBox b = default_bbox(g);
  EXPECT_DOUBLE_EQ(b.xmin, -1.0);
  EXPECT_DOUBLE_EQ(b.xmax, 5.0);
  EXPECT_DOUBLE_EQ(b.ymin, -1.0);
  EXPECT_DOUBLE_EQ(b.ymax, 3.0);
}

TEST(Marks, Counts) {
  EXPECT_EQ(marks(std::vector<std::vector<int>>{}, 3), (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(marks(std::vector<std::vector<int>>{{1, 3}}, 4), (std::vector<int>{0, 1, 0, 1}));
  std::vector<std::vector<int>> many(100, std::vector<int>{2});
  EXPECT_EQ(marks(many, 3)[2], 100);
  EXPECT_THROW(marks(std::vector<std::vector<int>>{{5}}, 3), DomainError);
}

TEST(Tvd, Cases) {
  const std::vector<double> p{0.5, 0.5};
  EXPECT_EQ(tvd(p, p), 0.0);
  EXPECT_EQ(tvd(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(tvd(p, std::vector<double>{0.75, 0.25}), 0.25);
  EXPECT_THROW(tvd(p, std::vector<double>{1}), DomainError);
}

TEST(HistogramTest, Cases) {
  const std::vector<double> edges{0.0, 0.5, 1.0};
  const Histogram single = histogram(std::vector<std::vector<double>>{{0.1, 0.2, 0.3}}, edges);
  EXPECT_EQ(single.mean, (std::vector<double>{1.0, 0.0}));

  const Histogram same = histogram(std::vector<std::vector<double>>{{0.1, 0.7}, {0.1, 0.7}}, edges);
  EXPECT_EQ(same.stddev, (std::vector<double>{0.0, 0.0}));

  const Histogram two = histogram(std::vector<std::vector<double>>{{0.1}, {0.9}}, edges);
  EXPECT_DOUBLE_EQ(two.mean[0], 0.5);
  EXPECT_DOUBLE_EQ(two.mean[1], 0.5);
  EXPECT_DOUBLE_EQ(two.stddev[0], 0.5);
  EXPECT_DOUBLE_EQ(two.stddev[1], 0.5);
  for (const auto& row : two.frequencies) EXPECT_NEAR(row[0] + row[1], 1.0, 1e-12);
}

TEST(HistogramTest, OutOfRangeClippedWithWarning) {
  int warnings = 0;
  auto prev = set_warning_handler([&](const std::string&) { ++warnings; });
  const Histogram h = histogram(std::vector<std::vector<double>>{{-1.0, 2.0, 1.0}}, std::vector<double>{0, 0.5, 1});
  set_warning_handler(prev);
  EXPECT_EQ(warnings, 1);
  EXPECT_NEAR(h.mean[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(h.mean[1], 2.0 / 3, 1e-15);
  EXPECT_THROW(histogram(std::vector<std::vector<double>>{{0.1}}, std::vector<double>{1, 0}), DomainError);
}

TEST(UniformEdges, Basics) {
  const auto e = uniform_edges(0.0, 2.0, 4);
  EXPECT_EQ(e, (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
  const auto d = uniform_edges(1.0, 1.0, 2);
  EXPECT_DOUBLE_EQ(d.front(), 0.5);
  EXPECT_DOUBLE_EQ(d.back(), 1.5);
}

TEST(StudentT, KnownValues) {
  // df = 1 is Cauchy: F(t) = 1/2 + atan(t)/pi.
  for (double t : {-3.0, -0.5, 0.0, 1.0, 4.0})
    EXPECT_NEAR(student_t_cdf(t, 1.0), 0.5 + std::atan(t) / M_PI, 1e-12) << t;
  // df = 2: F(t) = 1/2 + t / (2 sqrt(2 + t^2)).
  for (double t : {-2.0, 0.3, 5.0}) EXPECT_NEAR(student_t_cdf(t, 2.0), 0.5 + t / (2 * std::sqrt(2 + t * t)), 1e-12);
  // Large df approaches the normal CDF.
  EXPECT_NEAR(student_t_cdf(-1.6448536269514722, 1e7), 0.05, 1e-6);
  // Tabulated one-sided critical value: t_{0.05, 9} = 1.833113.
  EXPECT_NEAR(student_t_cdf(-1.833113, 9.0), 0.05, 1e-6);
}

TEST(TTests, DirectionAndDegenerateCases) {
  const std::vector<double> lo{1.0, 1.2, 0.9, 1.1, 1.0};
  const std::vector<double> hi{2.0, 2.1, 1.9, 2.2, 2.0};
  EXPECT_LT(welch_less(lo, hi).p_value, 0.001);
  EXPECT_GT(welch_less(hi, lo).p_value, 0.999);
  EXPECT_LT(paired_less(lo, hi).p_value, 0.001);
  const std::vector<double> c{1.0, 1.0};
  EXPECT_EQ(welch_less(c, c).p_value, 1.0);
  EXPECT_EQ(paired_less(std::vector<double>{0, 0}, std::vector<double>{1, 1}).p_value, 0.0);
}

TEST(TTests, WelchMatchesHandComputation) {
  // a: mean 2, var 1 (n 3); b: mean 3, var 4 (n 3).
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, 3, 5};
  const TestResult r = welch_less(a, b);
  const double se = std::sqrt(1.0 / 3 + 4.0 / 3);
  EXPECT_NEAR(r.statistic, -1.0 / se, 1e-12);
  const double df = std::pow(5.0 / 3, 2) / (std::pow(1.0 / 3, 2) / 2 + std::pow(4.0 / 3, 2) / 2);
  EXPECT_NEAR(r.df, df, 1e-12);
}
