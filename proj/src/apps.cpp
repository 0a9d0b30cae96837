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

#include "gbspp/apps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "gbspp/errors.hpp"
#include "gbspp/parallel.hpp"

namespace gbspp {
namespace {

constexpr int kMaxAttempts = 1000;

double dist2(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::string iso_date(int offset) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{2020} / January / 1} + days{offset}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

Dataset2D synth_blobs(int k, int per_cluster, double spread, const BBox& bbox, RngStream& rng) {
  if (k < 1) throw DomainError("synth_blobs: k must be at least 1");
  if (per_cluster < 0) throw DomainError("synth_blobs: per_cluster must be non-negative");
  if (!(spread >= 0)) throw DomainError("synth_blobs: spread must be non-negative");
  Dataset2D data;
  std::vector<Point2> centers(static_cast<std::size_t>(k));
  for (auto& c : centers) {
    c.x = bbox.xmin + bbox.width() * rng.uniform();
    c.y = bbox.ymin + bbox.height() * rng.uniform();
  }
  for (const auto& c : centers)
    for (int i = 0; i < per_cluster; ++i) {
      const double gx = rng.normal();
      const double gy = rng.normal();
      data.points.push_back({c.x + spread * gx, c.y + spread * gy});
    }
  data.true_centers = std::move(centers);
  return data;
}

StateSpace to_space(const Dataset2D& data) {
  StateSpace s;
  s.points.reserve(data.points.size());
  for (std::size_t i = 0; i < data.points.size(); ++i)
    s.points.push_back({std::to_string(i), data.points[i].x, data.points[i].y});
  return s;
}

double dataset_std(const Dataset2D& data) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : data.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  return std::sqrt(0.5 * (population_variance(xs) + population_variance(ys)));
}

std::vector<int> kmeanspp_seeds(const Dataset2D& data, int k, RngStream& rng, std::span<const int> candidates) {
  std::vector<int> pool;
  if (candidates.empty()) {
    pool.resize(data.points.size());
    std::iota(pool.begin(), pool.end(), 0);
  } else {
    pool.assign(candidates.begin(), candidates.end());
    for (int i : pool)
      if (i < 0 || static_cast<std::size_t>(i) >= data.points.size())
        throw DomainError("kmeanspp_seeds: candidate index out of range");
  }
  if (k < 1) throw DomainError("kmeanspp_seeds: k must be at least 1");
  if (static_cast<std::size_t>(k) > pool.size()) {
    std::ostringstream os;
    os << "kmeanspp_seeds: k = " << k << " exceeds the " << pool.size() << " candidate points";
    throw DomainError(os.str());
  }
  std::vector<int> seeds;
  std::vector<char> taken(pool.size(), 0);
  std::size_t first = static_cast<std::size_t>(rng.index(pool.size()));
  seeds.push_back(pool[first]);
  taken[first] = 1;
  std::vector<double> d2(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    d2[i] = dist2(data.points[static_cast<std::size_t>(pool[i])], data.points[static_cast<std::size_t>(pool[first])]);
  while (seeds.size() < static_cast<std::size_t>(k)) {
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (taken[i]) d2[i] = 0.0;
    std::size_t pick;
    if (std::accumulate(d2.begin(), d2.end(), 0.0) > 0) {
      pick = rng.categorical(d2);
    } else {
      // Only duplicates of chosen seeds remain: uniform over the untaken ones.
      std::vector<double> w(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) w[i] = taken[i] ? 0.0 : 1.0;
      pick = rng.categorical(w);
    }
    seeds.push_back(pool[pick]);
    taken[pick] = 1;
    const Point2& s = data.points[static_cast<std::size_t>(pool[pick])];
    for (std::size_t i = 0; i < pool.size(); ++i)
      d2[i] = std::min(d2[i], dist2(data.points[static_cast<std::size_t>(pool[i])], s));
  }
  return seeds;
}

Clustering lloyd(const Dataset2D& data, std::vector<Point2> seeds, int max_iter, double tol) {
  const std::size_t n = data.points.size();
  const std::size_t k = seeds.size();
  if (k == 0) throw DomainError("lloyd: no seeds");
  if (n == 0) throw DomainError("lloyd: empty dataset");
  Clustering out;
  out.centers = std::move(seeds);
  out.assignments.assign(n, 0);
  auto assign = [&] {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int who = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = dist2(data.points[i], out.centers[c]);
        if (d < best) {
          best = d;
          who = static_cast<int>(c);
        }
      }
      out.assignments[i] = who;
      inertia += best;
    }
    out.inertia = inertia;
    out.inertia_trace.push_back(inertia);
  };
  assign();
  for (out.iterations = 0; out.iterations < max_iter;) {
    ++out.iterations;
    std::vector<Point2> sum(k);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(out.assignments[i]);
      sum[c].x += data.points[i].x;
      sum[c].y += data.points[i].y;
      ++count[c];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      Point2 next;
      if (count[c] > 0) {
        next = {sum[c].x / static_cast<double>(count[c]), sum[c].y / static_cast<double>(count[c])};
      } else {
        std::size_t far = 0;
        double worst = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = dist2(data.points[i], out.centers[static_cast<std::size_t>(out.assignments[i])]);
          if (d > worst) {
            worst = d;
            far = i;
          }
        }
        next = data.points[far];
      }
      moved = std::max(moved, std::sqrt(dist2(next, out.centers[c])));
      out.centers[c] = next;
    }
    assign();
    if (moved < tol) break;
  }
  return out;
}

double seed_distance(std::span<const Point2> seeds, std::span<const Point2> centers) {
  if (seeds.size() != centers.size() || seeds.empty())
    throw DomainError("seed_distance: need equally many seeds and centres");
  const std::size_t k = seeds.size();
  std::vector<std::vector<double>> d(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) d[i][j] = std::sqrt(dist2(seeds[i], centers[j]));
  double best = std::numeric_limits<double>::infinity();
  if (k <= 8) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) total += d[i][perm[i]];
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<char> used_s(k, 0);
    std::vector<char> used_c(k, 0);
    best = 0.0;
    for (std::size_t round = 0; round < k; ++round) {
      double m = std::numeric_limits<double>::infinity();
      std::size_t bi = 0;
      std::size_t bj = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (used_s[i]) continue;
        for (std::size_t j = 0; j < k; ++j)
          if (!used_c[j] && d[i][j] < m) {
            m = d[i][j];
            bi = i;
            bj = j;
          }
      }
      used_s[bi] = used_c[bj] = 1;
      best += m;
    }
  }
  return best / static_cast<double>(k);
}

SeededKmeans tpp_seeded_kmeans(const Dataset2D& data, int k, double sigma, double mean_points, RngStream& rng,
                               const MatrixFnLimits& limits) {
  const std::size_t n = data.points.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) throw DomainError("tpp_seeded_kmeans: k must lie in [1, n]");
  if (!(mean_points >= k)) throw DomainError("tpp_seeded_kmeans: mean_points must be at least k");
  SeededKmeans out;
  if (mean_points >= static_cast<double>(n)) {
    out.tpp_subset.resize(n);
    std::iota(out.tpp_subset.begin(), out.tpp_subset.end(), 0);
  } else {
    const KernelMatrix kernel(rbf_kernel(to_space(data), sigma));
    const double c = solve_scale_for_clicks(kernel, InputFlavor::Thermal, mean_points);
    const TppSampler sampler(kernel, InputFlavor::Thermal, c, limits);
    out.method = sampler.method();
    while (true) {
      if (out.attempts == kMaxAttempts) {
        std::ostringstream os;
        os << "tpp_seeded_kmeans: no pattern with at least " << k << " points in " << kMaxAttempts << " attempts";
        throw NumericalError(os.str());
      }
      ++out.attempts;
      out.tpp_subset = support(sampler.sample(rng));
      if (out.tpp_subset.size() >= static_cast<std::size_t>(k)) break;
    }
  }
  out.seeds = kmeanspp_seeds(data, k, rng, out.tpp_subset);
  std::vector<Point2> seeds;
  for (int i : out.seeds) seeds.push_back(data.points[static_cast<std::size_t>(i)]);
  out.clustering = lloyd(data, std::move(seeds));
  return out;
}

std::vector<SeedingTrial> seeding_trials(const SeedingConfig& config, std::uint64_t seed, int workers,
                                         const MatrixFnLimits& limits) {
  if (config.trials < 0) throw DomainError("seeding_trials: trials must be non-negative");
  if (workers < 1) throw DomainError("seeding_trials: workers must be positive");
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<SeedingTrial> out(trials);
  auto run = [&](std::size_t t) {
    RngStream data_rng(seed, 3 * t);
    RngStream tpp_rng(seed, 3 * t + 1);
    RngStream plain_rng(seed, 3 * t + 2);
    const Dataset2D data = synth_blobs(config.k, config.per_cluster, config.spread, config.bbox, data_rng);
    const double sigma = config.sigma.value_or(dataset_std(data));
    const double mp = config.mean_points.value_or(3.0 * config.k);
    const SeededKmeans tpp = tpp_seeded_kmeans(data, config.k, sigma, mp, tpp_rng, limits);
    const std::vector<int> plain = kmeanspp_seeds(data, config.k, plain_rng);
    std::vector<Point2> tpp_points;
    std::vector<Point2> plain_points;
    for (int i : tpp.seeds) tpp_points.push_back(data.points[static_cast<std::size_t>(i)]);
    for (int i : plain) plain_points.push_back(data.points[static_cast<std::size_t>(i)]);
    SeedingTrial& r = out[t];
    r.tpp_distance = seed_distance(tpp_points, *data.true_centers);
    r.kmeanspp_distance = seed_distance(plain_points, *data.true_centers);
    r.tpp_inertia = tpp.clustering.inertia;
    r.kmeanspp_inertia = lloyd(data, std::move(plain_points)).inertia;
    r.subset_size = tpp.tpp_subset.size();
    r.attempts = tpp.attempts;
    r.method = tpp.method;
  };
  parallel_for(trials, workers, run);
  return out;
}

std::string_view to_string(SelectionProcess process) {
  switch (process) {
    case SelectionProcess::Tpp: return "tpp";
    case SelectionProcess::Dpp: return "dpp";
    case SelectionProcess::Ppp: return "ppp";
  }
  return "?";
}

SelectionProcess parse_selection_process(std::string_view name) {
  if (name == "tpp") return SelectionProcess::Tpp;
  if (name == "dpp") return SelectionProcess::Dpp;
  if (name == "ppp") return SelectionProcess::Ppp;
  throw DomainError("unknown selection process '" + std::string(name) + "' (expected tpp, dpp or ppp)");
}

std::optional<double> mean_abs_offdiag(const RealMatrix& a) {
  const Eigen::Index n = a.rows();
  if (n < 2) return std::nullopt;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) total += std::abs(a(i, j));
  return total / static_cast<double>(n * (n - 1));
}

std::vector<StockSelection> select_stocks(const ReturnsTable& returns, double target_size, int runs,
                                          SelectionProcess process, RngStream& rng, bool standardize,
                                          const MatrixFnLimits& limits) {
  const auto m = static_cast<std::size_t>(returns.tickers.size());
  if (!(target_size > 0) || target_size > static_cast<double>(m))
    throw DomainError("select_stocks: target size must lie in (0, number of tickers]");
  if (runs < 0) throw DomainError("select_stocks: runs must be non-negative");
  const KernelMatrix kernel(correlation_kernel(returns, standardize));

  std::optional<TppSampler> tpp;
  std::optional<DppSampler> dpp;
  if (process == SelectionProcess::Tpp) {
    const double c = solve_scale_for_clicks(kernel, InputFlavor::Thermal, target_size);
    tpp.emplace(kernel, InputFlavor::Thermal, c, limits);
  } else if (process == SelectionProcess::Dpp) {
    dpp.emplace(kernel, solve_dpp_scale(kernel.spectrum().eigenvalues, target_size));
  }

  std::vector<StockSelection> out;
  out.reserve(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) {
    StockSelection s;
    switch (process) {
      case SelectionProcess::Tpp: s.indices = support(tpp->sample(rng)); break;
      case SelectionProcess::Dpp: s.indices = dpp->sample(rng); break;
      case SelectionProcess::Ppp: s.indices = sample_ppp(m, target_size, rng); break;
    }
    std::vector<Eigen::Index> idx(s.indices.begin(), s.indices.end());
    for (int i : s.indices) s.tickers.push_back(returns.tickers[static_cast<std::size_t>(i)]);
    s.submatrix = kernel.matrix()(idx, idx);
    s.mean_abs_offdiag = mean_abs_offdiag(s.submatrix);
    out.push_back(std::move(s));
  }
  return out;
}

ReturnsTable synth_returns(int blocks, int per_block, int days, double within, RngStream& rng) {
  if (blocks < 1 || per_block < 1) throw DomainError("synth_returns: need at least one block and ticker");
  if (days < 2) throw DomainError("synth_returns: need at least two days");
  if (!(within >= 0 && within <= 1)) throw DomainError("synth_returns: within-block correlation must lie in [0, 1]");
  constexpr double kVol = 0.01;
  const int m = blocks * per_block;
  ReturnsTable t;
  for (int b = 0; b < blocks; ++b)
    for (int i = 0; i < per_block; ++i) t.tickers.push_back("B" + std::to_string(b) + "S" + std::to_string(i));
  t.values.resize(days, m);
  const double a = std::sqrt(within);
  const double e = std::sqrt(1.0 - within);
  for (int d = 0; d < days; ++d) {
    t.days.push_back(iso_date(d));
    for (int b = 0; b < blocks; ++b) {
      const double factor = rng.normal();
      for (int i = 0; i < per_block; ++i) t.values(d, b * per_block + i) = kVol * (a * factor + e * rng.normal());
    }
  }
  return t;
}

}  // namespace gbspp
