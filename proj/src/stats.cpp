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

#include "gbspp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gbspp/errors.hpp"

namespace gbspp {
namespace {

void check_selection(const StateSpace& space, std::span<const int> selected, const char* what) {
  std::vector<char> seen(space.size(), 0);
  for (int i : selected) {
    if (i < 0 || static_cast<std::size_t>(i) >= space.size()) {
      std::ostringstream os;
      os << what << ": index " << i << " outside a space of " << space.size() << " points";
      throw DomainError(os.str());
    }
    if (seen[static_cast<std::size_t>(i)]++) {
      std::ostringstream os;
      os << what << ": index " << i << " selected twice";
      throw DomainError(os.str());
    }
  }
}

double dist2(const SpacePoint& a, const SpacePoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

std::vector<double> nnd(const StateSpace& space, std::span<const int> selected) {
  check_selection(space, selected, "nnd");
  if (selected.size() < 2) throw DomainError("nnd: need at least two selected points");
  std::vector<double> out(selected.size());
  for (std::size_t a = 0; a < selected.size(); ++a) {
    double best = std::numeric_limits<double>::infinity();
    const SpacePoint& p = space.points[static_cast<std::size_t>(selected[a])];
    for (std::size_t b = 0; b < selected.size(); ++b) {
      if (a == b) continue;
      best = std::min(best, dist2(p, space.points[static_cast<std::size_t>(selected[b])]));
    }
    out[a] = std::sqrt(best);
  }
  return out;
}

double min_spacing(const StateSpace& space) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < space.size(); ++a)
    for (std::size_t b = a + 1; b < space.size(); ++b) {
      const double d = dist2(space.points[a], space.points[b]);
      if (d > 0) best = std::min(best, d);
    }
  return std::isfinite(best) ? std::sqrt(best) : 1.0;
}

BBox default_bbox(const StateSpace& space) {
  if (space.size() == 0) throw DomainError("default_bbox: empty space");
  BBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : space.points) {
    box.xmin = std::min(box.xmin, p.x);
    box.ymin = std::min(box.ymin, p.y);
    box.xmax = std::max(box.xmax, p.x);
    box.ymax = std::max(box.ymax, p.y);
  }
  const double pad = 0.5 * min_spacing(space);
  box.xmin -= pad;
  box.ymin -= pad;
  box.xmax += pad;
  box.ymax += pad;
  return box;
}

std::vector<int> voronoi_raster(const StateSpace& space, std::span<const int> selected, const BBox& bbox,
                                int resolution) {
  check_selection(space, selected, "voronoi_areas");
  if (selected.empty()) throw DomainError("voronoi_areas: empty selection");
  if (resolution < 1) throw DomainError("voronoi_areas: resolution must be positive");
  if (!(bbox.width() > 0 && bbox.height() > 0)) throw DomainError("voronoi_areas: degenerate bounding box");
  for (int i : selected) {
    const SpacePoint& p = space.points[static_cast<std::size_t>(i)];
    if (!bbox.contains(p.x, p.y)) throw DomainError("voronoi_areas: point '" + p.id + "' lies outside the bounding box");
  }
  // Candidates in ascending space index so that strict '<' keeps the lowest index on ties.
  std::vector<int> order(selected.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return selected[a] < selected[b]; });
  std::vector<double> px(order.size());
  std::vector<double> py(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const SpacePoint& p = space.points[static_cast<std::size_t>(selected[order[k]])];
    px[k] = p.x;
    py[k] = p.y;
  }
  const double dx = bbox.width() / resolution;
  const double dy = bbox.height() / resolution;
  std::vector<int> owner(static_cast<std::size_t>(resolution) * resolution);
  for (int r = 0; r < resolution; ++r) {
    const double y = bbox.ymin + (r + 0.5) * dy;
    for (int c = 0; c < resolution; ++c) {
      const double x = bbox.xmin + (c + 0.5) * dx;
      double best = std::numeric_limits<double>::infinity();
      int who = 0;
      for (std::size_t k = 0; k < px.size(); ++k) {
        const double d = (x - px[k]) * (x - px[k]) + (y - py[k]) * (y - py[k]);
        if (d < best) {
          best = d;
          who = order[k];
        }
      }
      owner[static_cast<std::size_t>(r) * resolution + c] = who;
    }
  }
  return owner;
}

std::vector<double> voronoi_areas(const StateSpace& space, std::span<const int> selected, const BBox& bbox,
                                  int resolution) {
  const std::vector<int> owner = voronoi_raster(space, selected, bbox, resolution);
  std::vector<std::size_t> counts(selected.size(), 0);
  for (int o : owner) ++counts[static_cast<std::size_t>(o)];
  const double pixels = static_cast<double>(owner.size());
  std::vector<double> areas(selected.size());
  for (std::size_t k = 0; k < counts.size(); ++k) areas[k] = static_cast<double>(counts[k]) / pixels * bbox.area();
  return areas;
}

std::vector<int> marks(std::span<const std::vector<int>> samples, std::size_t m) {
  std::vector<int> out(m, 0);
  for (const auto& s : samples)
    for (int i : s) {
      if (i < 0 || static_cast<std::size_t>(i) >= m) {
        std::ostringstream os;
        os << "marks: index " << i << " outside a space of " << m << " points";
        throw DomainError(os.str());
      }
      ++out[static_cast<std::size_t>(i)];
    }
  return out;
}

double tvd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("tvd: distributions have different support sizes");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return 0.5 * total;
}

std::vector<double> uniform_edges(double lo, double hi, int bins) {
  if (bins < 1) throw DomainError("uniform_edges: need at least one bin");
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) throw DomainError("uniform_edges: invalid range");
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  edges.back() = hi;
  return edges;
}

Histogram histogram(std::span<const std::vector<double>> runs, std::span<const double> edges) {
  if (edges.size() < 2) throw DomainError("histogram: need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw DomainError("histogram: edges must be strictly increasing");
  if (runs.empty()) throw DomainError("histogram: no runs");
  const std::size_t bins = edges.size() - 1;
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  std::size_t clipped = 0;
  for (const auto& run : runs) {
    if (run.empty()) throw DomainError("histogram: a run has no values");
    std::vector<double> f(bins, 0.0);
    for (double v : run) {
      std::size_t b = 0;
      if (v < edges.front()) {
        ++clipped;
      } else if (v >= edges.back()) {
        b = bins - 1;
        if (v > edges.back()) ++clipped;
      } else {
        b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
      }
      f[b] += 1.0;
    }
    for (double& x : f) x /= static_cast<double>(run.size());
    h.frequencies.push_back(std::move(f));
  }
  if (clipped > 0) warn("histogram: " + std::to_string(clipped) + " values outside the edges clipped to end bins");
  h.mean.assign(bins, 0.0);
  h.stddev.assign(bins, 0.0);
  const double n = static_cast<double>(runs.size());
  for (std::size_t b = 0; b < bins; ++b) {
    double s = 0.0;
    for (const auto& f : h.frequencies) s += f[b];
    h.mean[b] = s / n;
    double v = 0.0;
    for (const auto& f : h.frequencies) v += (f[b] - h.mean[b]) * (f[b] - h.mean[b]);
    h.stddev[b] = std::sqrt(v / n);
  }
  return h;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw DomainError("mean: empty sequence");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

double population_variance(std::span<const double> v) {
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size());
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int k = 1; k <= 10000; ++k) {
    const double kk = static_cast<double>(k);
    double num = kk * (b - kk) * x / ((a + 2 * kk - 1) * (a + 2 * kk));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + kk) * (a + b + kk) * x / ((a + 2 * kk) * (a + 2 * kk + 1));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete_beta: continued fraction did not converge");
}

TestResult t_result(double t, double df) {
  TestResult r;
  r.statistic = t;
  r.df = df;
  if (std::isnan(t)) {
    r.p_value = 1.0;
  } else if (std::isinf(t)) {
    r.p_value = t < 0 ? 0.0 : 1.0;
  } else {
    r.p_value = student_t_cdf(t, df);
  }
  return r;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw DomainError("incomplete_beta: parameters must be positive");
  if (!(x >= 0 && x <= 1)) throw DomainError("incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0)) throw DomainError("student_t_cdf: degrees of freedom must be positive");
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t < 0 ? tail : 1.0 - tail;
}

TestResult welch_less(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("welch_less: need at least two values per group");
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  const double se2 = va + vb;
  if (se2 == 0.0) {
    const double t = diff < 0 ? -std::numeric_limits<double>::infinity()
                              : (diff > 0 ? std::numeric_limits<double>::infinity() : std::nan(""));
    return t_result(t, static_cast<double>(a.size() + b.size() - 2));
  }
  const double df = se2 * se2 /
                    (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  return t_result(diff / std::sqrt(se2), df);
}

TestResult paired_less(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("paired_less: samples differ in length");
  if (a.size() < 2) throw DomainError("paired_less: need at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mu = mean(d);
  const double se = std::sqrt(sample_variance(d) / static_cast<double>(d.size()));
  const double df = static_cast<double>(d.size() - 1);
  if (se == 0.0) {
    const double t = mu < 0 ? -std::numeric_limits<double>::infinity()
                            : (mu > 0 ? std::numeric_limits<double>::infinity() : std::nan(""));
    return t_result(t, df);
  }
  return t_result(mu / se, df);
}

}  // namespace gbspp
