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

#include "gbspp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <regex>
#include <sstream>

#include "gbspp/apps.hpp"
#include "gbspp/encoding.hpp"
#include "gbspp/errors.hpp"
#include "gbspp/kernels.hpp"
#include "gbspp/parallel.hpp"
#include "gbspp/samplers.hpp"
#include "gbspp/stats.hpp"
#include "svg.hpp"

namespace gbspp::cli {
namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// JSON has no infinities; they travel as strings and come back exactly.
Json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError("expected a number, got " + j.dump());
}

void write_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  body(f);
  if (!f) throw Error("failed writing '" + path + "'");
}

std::vector<RunRecord> load_records(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open samples file '" + path + "'");
  return read_records(f);
}

// Flags shared by encode, sample and prob.
struct ModelOptions {
  std::string process;
  std::string space;
  std::string kernel = "rbf";
  double sigma = 1.0;
  std::string returns;
  std::string mode = "returns";
  std::string flavor;
  std::optional<double> mean_points;
  std::optional<double> scale_c;
  int cutoff = 10;
};

void add_model_options(CLI::App* app, ModelOptions& o, bool with_process) {
  if (with_process)
    app->add_option("--process", o.process, "tpp, hpp, perpp, dpp or ppp")
        ->required()
        ->check(CLI::IsMember({"tpp", "hpp", "perpp", "dpp", "ppp"}));
  app->add_option("--space", o.space, "grid:NXxNY:SPACING or a space CSV path");
  app->add_option("--kernel", o.kernel, "rbf, density or correlation")
      ->check(CLI::IsMember({"rbf", "density", "correlation"}));
  app->add_option("--sigma", o.sigma, "kernel width")->check(CLI::PositiveNumber);
  app->add_option("--returns", o.returns, "returns or prices CSV for the correlation kernel");
  app->add_option("--mode", o.mode, "prices or returns")->check(CLI::IsMember({"prices", "returns"}));
  app->add_option("--flavor", o.flavor, "squeezed, thermal or squashed")
      ->check(CLI::IsMember({"squeezed", "thermal", "squashed"}));
  auto* mp = app->add_option("--mean-points", o.mean_points, "target expected number of points");
  auto* sc = app->add_option("--scale-c", o.scale_c, "explicit kernel scale");
  mp->excludes(sc);
  sc->excludes(mp);
  if (with_process) app->add_option("--cutoff", o.cutoff, "total photon cutoff for hpp (even)");
}

StateSpace load_space_arg(const std::string& spec) {
  static const std::regex grid(R"(grid:(\d+)x(\d+):([0-9.eE+-]+))");
  std::smatch m;
  if (std::regex_match(spec, m, grid)) {
    double spacing = 0.0;
    try {
      spacing = std::stod(m[3].str());
    } catch (const std::exception&) {
      throw UsageError("bad grid spacing in '" + spec + "'");
    }
    return grid_space(std::stoi(m[1].str()), std::stoi(m[2].str()), spacing);
  }
  if (spec.rfind("grid:", 0) == 0) throw UsageError("grid spaces are written grid:NXxNY:SPACING, got '" + spec + "'");
  return load_space(spec);
}

struct Model {
  KernelMatrix kernel;
  std::string descriptor;
  std::optional<StateSpace> space;
};

Model build_model(const ModelOptions& o) {
  Model model;
  if (o.kernel == "correlation") {
    if (o.returns.empty()) throw UsageError("--kernel correlation needs --returns");
    const ReturnsTable table = load_returns(o.returns, parse_returns_mode(o.mode));
    model.kernel = KernelMatrix(correlation_kernel(table));
    model.descriptor = "correlation(returns=" + o.returns + ",mode=" + o.mode + ")";
    return model;
  }
  if (o.space.empty()) throw UsageError("--kernel " + o.kernel + " needs --space");
  StateSpace space = load_space_arg(o.space);
  const RealMatrix k = o.kernel == "rbf" ? rbf_kernel(space, o.sigma) : density_kernel(space, o.sigma);
  model.kernel = KernelMatrix(k);
  model.descriptor = o.kernel + "(sigma=" + num(o.sigma, 17) + ",space=" + o.space + ")";
  model.space = std::move(space);
  return model;
}

InputFlavor require_flavor(const ModelOptions& o, const char* process) {
  if (o.flavor.empty()) throw UsageError(std::string("--process ") + process + " needs --flavor");
  return parse_flavor(o.flavor);
}

void require_scale(const ModelOptions& o) {
  if (!o.mean_points && !o.scale_c) throw UsageError("one of --mean-points or --scale-c is required");
  if (o.mean_points && !(*o.mean_points >= 0)) throw UsageError("--mean-points must be non-negative");
}

// For TPP the target counts clicks; for photon processes it counts photons.
double gaussian_scale(const ModelOptions& o, const KernelMatrix& kernel, InputFlavor flavor, bool clicks) {
  require_scale(o);
  if (o.scale_c) return *o.scale_c;
  if (*o.mean_points == 0) return 0.0;
  return clicks ? solve_scale_for_clicks(kernel, flavor, *o.mean_points)
                : solve_scale(flavor_lambdas(kernel, flavor), flavor, *o.mean_points);
}

double dpp_scale(const ModelOptions& o, const KernelMatrix& kernel) {
  require_scale(o);
  if (o.scale_c) return *o.scale_c;
  if (*o.mean_points == 0) return 0.0;
  return solve_dpp_scale(kernel.spectrum().eigenvalues, *o.mean_points);
}

double dpp_log_probability(const KernelMatrix& kernel, double scale, std::span<const int> subset) {
  double log_norm = 0.0;
  for (double l : kernel.spectrum().eigenvalues) log_norm += std::log1p(std::max(0.0, scale * l));
  std::vector<Eigen::Index> idx(subset.begin(), subset.end());
  const double det = determinant(RealMatrix(scale * kernel.matrix()(idx, idx)));
  return (det > 0 ? std::log(det) : -std::numeric_limits<double>::infinity()) - log_norm;
}

std::vector<int> membership(std::span<const int> subset, std::size_t m) {
  std::vector<int> p(m, 0);
  for (int i : subset) p[static_cast<std::size_t>(i)] = 1;
  return p;
}

std::vector<int> parse_pattern(const std::string& text) {
  std::vector<int> p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      p.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--pattern must be a comma-separated list of integers, got '" + text + "'");
    }
  }
  return p;
}

// ---------------------------------------------------------------------------------------------

int cmd_encode(const ModelOptions& o, const std::string& out_path, std::ostream& out) {
  const Model model = build_model(o);
  const InputFlavor flavor = require_flavor(o, "encode");
  const double c = gaussian_scale(o, model.kernel, flavor, false);
  const GaussianState state = encode(model.kernel, flavor, c);
  const RealVector lambdas = flavor_lambdas(model.kernel, flavor);
  Json j;
  j["kernel"] = model.descriptor;
  j["flavor"] = std::string(to_string(flavor));
  j["modes"] = state.modes();
  j["scale_c"] = c;
  j["mean_photons"] = mean_points(lambdas, flavor, c);
  j["expected_clicks"] = expected_clicks(model.kernel, flavor, c);
  j["vacuum_probability"] = state.vacuum_probability();
  j["mode_params"] = std::vector<double>(state.mode_params().begin(), state.mode_params().end());
  j["kernel_eigenvalues"] = std::vector<double>(lambdas.begin(), lambdas.end());
  write_output(out_path, out, [&](std::ostream& s) { s << j.dump(2) << "\n"; });
  return kExitOk;
}

struct SampleOptions {
  int samples = 1;
  std::uint64_t seed = 0;
  int parallel = 1;
  std::string out;
};

int cmd_sample(const ModelOptions& o, const SampleOptions& so, std::ostream& out) {
  if (so.samples < 0) throw UsageError("--samples must be non-negative");
  if (so.parallel < 1) throw UsageError("--parallel must be positive");
  RunRecord base;
  base.process = o.process;
  base.seed = so.seed;
  const auto n = static_cast<std::size_t>(so.samples);
  std::vector<RunRecord> records(n, base);

  if (o.process == "ppp") {
    if (o.scale_c) throw UsageError("--process ppp takes --mean-points, not --scale-c");
    if (!o.mean_points) throw UsageError("--process ppp needs --mean-points");
    std::size_t m = 0;
    if (!o.space.empty() || !o.returns.empty()) {
      const Model model = build_model(o);
      m = static_cast<std::size_t>(model.kernel.dim());
      base.kernel = model.descriptor;
    } else {
      throw UsageError("--process ppp needs --space or --returns to fix the ground set");
    }
    base.target_mean = *o.mean_points;
    records.assign(n, base);
    parallel_for(n, so.parallel, [&](std::size_t i) {
      RngStream rng(so.seed, i);
      records[i].stream = i;
      records[i].pattern = membership(sample_ppp(m, *o.mean_points, rng), m);
    });
  } else {
    const Model model = build_model(o);
    base.kernel = model.descriptor;
    base.target_mean = o.mean_points;
    if (o.process == "dpp") {
      const double scale = dpp_scale(o, model.kernel);
      base.scale_c = scale;
      records.assign(n, base);
      const DppSampler sampler(model.kernel, scale);
      const auto m = static_cast<std::size_t>(model.kernel.dim());
      parallel_for(n, so.parallel, [&](std::size_t i) {
        RngStream rng(so.seed, i);
        const IndexSubset s = sampler.sample(rng);
        records[i].stream = i;
        records[i].pattern = membership(s, m);
        records[i].log_probability = dpp_log_probability(model.kernel, scale, s);
      });
    } else if (o.process == "tpp") {
      const InputFlavor flavor = require_flavor(o, "tpp");
      const double c = gaussian_scale(o, model.kernel, flavor, true);
      base.flavor = std::string(to_string(flavor));
      base.scale_c = c;
      const TppSampler sampler(model.kernel, flavor, c);
      if (sampler.method() == TppMethod::ClassicalThreshold) base.method = std::string(to_string(sampler.method()));
      records.assign(n, base);
      parallel_for(n, so.parallel, [&](std::size_t i) {
        RngStream rng(so.seed, i);
        records[i].stream = i;
        records[i].pattern = sampler.sample(rng);
        if (const GaussianState* state = sampler.state())
          records[i].log_probability = std::log(tpp_probability(*state, records[i].pattern));
      });
    } else if (o.process == "hpp") {
      const InputFlavor flavor = require_flavor(o, "hpp");
      const double c = gaussian_scale(o, model.kernel, flavor, false);
      base.flavor = std::string(to_string(flavor));
      base.scale_c = c;
      records.assign(n, base);
      const GaussianState state = encode(model.kernel, flavor, c);
      const ExactHppSampler sampler(state, o.cutoff);
      std::map<Pattern, double> table;
      for (std::size_t k = 0; k < sampler.patterns().size(); ++k) table[sampler.patterns()[k]] = sampler.probabilities()[k];
      parallel_for(n, so.parallel, [&](std::size_t i) {
        RngStream rng(so.seed, i);
        records[i].stream = i;
        records[i].pattern = sampler.sample(rng);
        records[i].log_probability = std::log(table.at(records[i].pattern));
      });
    } else {  // perpp
      const InputFlavor flavor = o.flavor.empty() ? InputFlavor::Thermal : parse_flavor(o.flavor);
      if (flavor == InputFlavor::Squeezed) throw UsageError("--process perpp takes a thermal or squashed flavor");
      const double c = gaussian_scale(o, model.kernel, flavor, false);
      base.flavor = std::string(to_string(flavor));
      base.scale_c = c;
      records.assign(n, base);
      const ClassicalSampler sampler(model.kernel, flavor, c);
      parallel_for(n, so.parallel, [&](std::size_t i) {
        RngStream rng(so.seed, i);
        records[i].stream = i;
        records[i].pattern = sampler.sample(rng);
      });
    }
  }
  write_output(so.out, out, [&](std::ostream& s) {
    for (const auto& r : records) s << serialize(r) << "\n";
  });
  return kExitOk;
}

int cmd_prob(const ModelOptions& o, const std::string& pattern_text, std::ostream& out) {
  const Model model = build_model(o);
  const std::vector<int> pattern = parse_pattern(pattern_text);
  if (static_cast<Eigen::Index>(pattern.size()) != model.kernel.dim())
    throw DomainError("pattern has " + std::to_string(pattern.size()) + " entries but the space has " +
                      std::to_string(model.kernel.dim()) + " points");
  double p = 0.0;
  double logp = 0.0;
  if (o.process == "tpp" || o.process == "hpp") {
    const InputFlavor flavor = require_flavor(o, o.process.c_str());
    const GaussianState state = encode(model.kernel, flavor, gaussian_scale(o, model.kernel, flavor, o.process == "tpp"));
    p = o.process == "tpp" ? tpp_probability(state, pattern) : hpp_probability(state, pattern);
    logp = std::log(p);
  } else if (o.process == "dpp") {
    IndexSubset subset;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (pattern[i] != 0 && pattern[i] != 1) throw DomainError("dpp patterns are 0/1 membership vectors");
      if (pattern[i] == 1) subset.push_back(static_cast<int>(i));
    }
    logp = dpp_log_probability(model.kernel, dpp_scale(o, model.kernel), subset);
    p = std::exp(logp);
  } else {
    throw UsageError("prob supports --process tpp, hpp or dpp");
  }
  out << "probability " << num(p) << "\n";
  out << "log_probability " << num(logp) << "\n";
  return kExitOk;
}

struct AnalyzeOptions {
  std::string mode;
  std::string input;
  std::string space;
  std::string out;
  std::string svg;
  std::string hist;
  int bins = 20;
  int resolution = 512;
};

std::vector<IndexSubset> subsets_for(const std::vector<RunRecord>& records, std::size_t m) {
  std::vector<IndexSubset> runs;
  runs.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].pattern.size() != m)
      throw DomainError("sample " + std::to_string(r) + " has " + std::to_string(records[r].pattern.size()) +
                        " entries but the space has " + std::to_string(m) + " points");
    runs.push_back(support(records[r].pattern));
  }
  return runs;
}

void write_histogram(const std::string& path, std::ostream& out, const std::vector<std::vector<double>>& values,
                     int bins) {
  // Uniform bins over the observed range; the edges are written out as the first two columns.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : values)
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  const std::vector<double> edges = uniform_edges(lo, hi, bins);
  const Histogram h = histogram(values, edges);
  write_output(path, out, [&](std::ostream& s) {
    s << "bin_lo,bin_hi,mean_frequency,std_frequency\n";
    for (std::size_t b = 0; b < h.bins(); ++b)
      s << num(h.edges[b]) << "," << num(h.edges[b + 1]) << "," << num(h.mean[b]) << "," << num(h.stddev[b]) << "\n";
  });
}

int cmd_analyze(const AnalyzeOptions& a, std::ostream& out) {
  if (a.input.empty()) throw UsageError("analyze needs --input");
  if (a.space.empty()) throw UsageError("analyze needs --space");
  if (a.bins < 1) throw UsageError("--bins must be positive");
  const StateSpace space = load_space_arg(a.space);
  const std::vector<RunRecord> records = load_records(a.input);
  const std::vector<IndexSubset> runs = subsets_for(records, space.size());
  const BBox box = default_bbox(space);

  if (a.mode == "marks") {
    const std::vector<int> counts = marks(runs, space.size());
    write_output(a.out, out, [&](std::ostream& s) {
      s << "index,id,x,y,count\n";
      for (std::size_t i = 0; i < space.size(); ++i)
        s << i << "," << csv::escape(space.points[i].id) << "," << num(space.points[i].x) << ","
          << num(space.points[i].y) << "," << counts[i] << "\n";
    });
    if (!a.svg.empty()) {
      write_output(a.svg, out, [&](std::ostream& s) { s << svg::marks(space, counts, box); });
    }
    return kExitOk;
  }

  std::vector<std::vector<double>> per_run;
  std::size_t skipped = 0;
  std::ostringstream rows;
  const bool nnd_mode = a.mode == "nnd";
  rows << (nnd_mode ? "run,index,id,nnd\n" : "run,index,id,area\n");
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const IndexSubset& s = runs[r];
    if (s.size() < (nnd_mode ? 2u : 1u)) {
      ++skipped;
      continue;
    }
    std::vector<double> v = nnd_mode ? nnd(space, s) : voronoi_areas(space, s, box, a.resolution);
    for (std::size_t k = 0; k < s.size(); ++k)
      rows << r << "," << s[k] << "," << csv::escape(space.points[static_cast<std::size_t>(s[k])].id) << ","
           << num(v[k]) << "\n";
    per_run.push_back(std::move(v));
  }
  if (skipped > 0)
    warn("analyze: skipped " + std::to_string(skipped) + " sample(s) with too few points for " + a.mode);
  write_output(a.out, out, [&](std::ostream& s) { s << rows.str(); });
  if (!a.hist.empty()) {
    if (per_run.empty()) throw DomainError("analyze: no sample has enough points for a histogram");
    write_histogram(a.hist, out, per_run, a.bins);
  }
  if (!a.svg.empty()) {
    const IndexSubset first = runs.empty() ? IndexSubset{} : runs.front();
    write_output(a.svg, out, [&](std::ostream& s) {
      if (nnd_mode || first.empty()) {
        s << svg::scatter(space, first, box);
      } else {
        const int res = std::min(a.resolution, svg::kMaxRaster);
        s << svg::voronoi(space, first, box, voronoi_raster(space, first, box, res), res);
      }
    });
  }
  return kExitOk;
}

struct SeedOptions {
  SeedingConfig config;
  double extent = 10.0;
  std::uint64_t seed = 0;
  int parallel = 1;
  std::string out;
  std::string summary;
};

int cmd_seed_kmeans(SeedOptions so, std::ostream& out) {
  if (so.parallel < 1) throw UsageError("--parallel must be positive");
  if (!(so.extent > 0)) throw UsageError("--extent must be positive");
  so.config.bbox = BBox{0.0, 0.0, so.extent, so.extent};
  const std::vector<SeedingTrial> trials = seeding_trials(so.config, so.seed, so.parallel);
  if (!so.out.empty()) {
    write_output(so.out, out, [&](std::ostream& s) {
      for (std::size_t t = 0; t < trials.size(); ++t) {
        const SeedingTrial& r = trials[t];
        Json j;
        j["trial"] = t;
        j["tpp_distance"] = r.tpp_distance;
        j["kmeanspp_distance"] = r.kmeanspp_distance;
        j["tpp_inertia"] = r.tpp_inertia;
        j["kmeanspp_inertia"] = r.kmeanspp_inertia;
        j["subset_size"] = r.subset_size;
        j["attempts"] = r.attempts;
        j["method"] = r.method ? Json(std::string(to_string(*r.method))) : Json("all-points");
        s << j.dump() << "\n";
      }
    });
  }
  std::vector<double> tpp;
  std::vector<double> plain;
  int wins = 0;
  for (const auto& r : trials) {
    tpp.push_back(r.tpp_distance);
    plain.push_back(r.kmeanspp_distance);
    if (r.tpp_distance < r.kmeanspp_distance) ++wins;
  }
  const TestResult test = trials.size() >= 2 ? paired_less(tpp, plain) : TestResult{};
  const double mp = so.config.mean_points.value_or(3.0 * so.config.k);
  write_output(so.summary, out, [&](std::ostream& s) {
    s << "trials,k,per_cluster,spread,mean_points,tpp_mean_distance,kmeanspp_mean_distance,win_rate,t_statistic,"
         "p_value\n";
    s << trials.size() << "," << so.config.k << "," << so.config.per_cluster << "," << num(so.config.spread) << ","
      << num(mp) << "," << num(trials.empty() ? 0.0 : mean(tpp)) << "," << num(trials.empty() ? 0.0 : mean(plain))
      << "," << num(trials.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(trials.size())) << ","
      << num(test.statistic) << "," << num(test.p_value) << "\n";
  });
  return kExitOk;
}

struct StockOptions {
  std::string returns;
  std::string mode = "returns";
  std::string synthetic;
  double target = 5.0;
  int runs = 50;
  std::uint64_t seed = 0;
  std::string out;
  std::string summary;
};

ReturnsTable stock_input(const StockOptions& so) {
  if (so.returns.empty() == so.synthetic.empty())
    throw UsageError("stocks needs exactly one of --returns or --synthetic");
  if (!so.returns.empty()) return load_returns(so.returns, parse_returns_mode(so.mode));
  static const std::regex spec(R"((\d+):(\d+):(\d+):([0-9.eE+-]+))");
  std::smatch m;
  if (!std::regex_match(so.synthetic, m, spec))
    throw UsageError("--synthetic is written BLOCKS:PER_BLOCK:DAYS:WITHIN, got '" + so.synthetic + "'");
  RngStream rng(so.seed, 3);
  return synth_returns(std::stoi(m[1].str()), std::stoi(m[2].str()), std::stoi(m[3].str()), std::stod(m[4].str()),
                       rng);
}

int cmd_stocks(const StockOptions& so, std::ostream& out) {
  if (so.runs < 1) throw UsageError("--runs must be positive");
  const ReturnsTable table = stock_input(so);
  const SelectionProcess order[] = {SelectionProcess::Tpp, SelectionProcess::Ppp, SelectionProcess::Dpp};
  std::vector<std::vector<StockSelection>> results;
  for (std::size_t p = 0; p < 3; ++p) {
    RngStream rng(so.seed, p);
    results.push_back(select_stocks(table, so.target, so.runs, order[p], rng));
  }
  if (!so.out.empty()) {
    write_output(so.out, out, [&](std::ostream& s) {
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t r = 0; r < results[p].size(); ++r) {
          const StockSelection& sel = results[p][r];
          Json j;
          j["process"] = std::string(to_string(order[p]));
          j["run"] = r;
          j["indices"] = sel.indices;
          j["tickers"] = sel.tickers;
          j["mean_abs_offdiag"] = sel.mean_abs_offdiag ? Json(*sel.mean_abs_offdiag) : Json(nullptr);
          s << j.dump() << "\n";
        }
    });
  }
  std::vector<std::vector<double>> offdiag(3);
  std::vector<double> sizes(3, 0.0);
  for (std::size_t p = 0; p < 3; ++p) {
    for (const auto& sel : results[p]) {
      sizes[p] += static_cast<double>(sel.indices.size());
      if (sel.mean_abs_offdiag) offdiag[p].push_back(*sel.mean_abs_offdiag);
    }
    sizes[p] /= static_cast<double>(results[p].size());
  }
  write_output(so.summary, out, [&](std::ostream& s) {
    s << "process,runs,target,mean_size,scored_runs,mean_abs_offdiag,sd_abs_offdiag,comparison,p_value\n";
    for (std::size_t p = 0; p < 3; ++p) {
      const auto& v = offdiag[p];
      s << to_string(order[p]) << "," << so.runs << "," << num(so.target) << "," << num(sizes[p]) << "," << v.size()
        << "," << (v.empty() ? "" : num(mean(v))) << "," << (v.size() < 2 ? "" : num(std::sqrt(sample_variance(v))))
        << ",";
      // Each row tests whether this process scores above the next one in the TPP > PPP > DPP ordering.
      if (p < 2 && v.size() >= 2 && offdiag[p + 1].size() >= 2) {
        s << to_string(order[p]) << ">" << to_string(order[p + 1]) << ","
          << num(welch_less(offdiag[p + 1], v).p_value) << "\n";
      } else {
        s << ",\n";
      }
    }
  });
  return kExitOk;
}

struct BenchOptions {
  std::vector<int> sizes{250, 500, 1000, 2000, 2500};
  std::vector<int> hafnian_sizes{8, 12, 16};
  std::vector<int> torontonian_sizes{8, 10, 12, 14};
  int repetitions = 5;
  std::uint64_t seed = 0;
  std::string out;
};

template <typename F>
double median_seconds(int repetitions, F&& body) {
  std::vector<double> t;
  for (int r = 0; r < repetitions; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

int cmd_bench(const BenchOptions& b, std::ostream& out) {
  if (b.repetitions < 5) throw UsageError("--repetitions must be at least 5");
  std::vector<BenchRow> rows;
  RngStream rng(b.seed, 0);
  for (int n : b.hafnian_sizes) {
    ComplexMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) a(i, j) = a(j, i) = Complex(rng.normal(), rng.normal());
    volatile double sink = 0;
    rows.push_back({"hafnian", n, median_seconds(b.repetitions, [&] { sink = std::abs(hafnian(a)); })});
  }
  for (int m : b.torontonian_sizes) {
    const KernelMatrix k(rbf_kernel(grid_space(m, 1, 1.0), 1.0));
    const GaussianState s = encode(k, InputFlavor::Thermal, solve_scale(flavor_lambdas(k, InputFlavor::Thermal),
                                                                         InputFlavor::Thermal, 0.5 * m));
    const ComplexMatrix o = ComplexMatrix::Identity(2 * m, 2 * m) - s.sigma_q_inverse();
    volatile double sink = 0;
    rows.push_back({"torontonian", m, median_seconds(b.repetitions, [&] { sink = torontonian(o); })});
  }
  const std::vector<BenchRow> classical = bench_classical(b.sizes, b.repetitions, b.seed);
  rows.insert(rows.end(), classical.begin(), classical.end());
  write_output(b.out, out, [&](std::ostream& s) {
    s << "op,size,median_seconds\n";
    for (const auto& r : rows) s << r.op << "," << r.size << "," << num(r.median_seconds, 6) << "\n";
    if (classical.size() >= 2) s << "classical_fit_exponent,," << num(fit_exponent(classical), 6) << "\n";
  });
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

std::string serialize(const RunRecord& r) {
  Json j;
  j["process"] = r.process;
  j["kernel"] = r.kernel;
  j["flavor"] = r.flavor ? Json(*r.flavor) : Json(nullptr);
  j["scale_c"] = r.scale_c ? number_json(*r.scale_c) : Json(nullptr);
  j["target_mean"] = r.target_mean ? number_json(*r.target_mean) : Json(nullptr);
  j["seed"] = r.seed;
  j["stream"] = r.stream;
  j["pattern"] = r.pattern;
  j["log_probability"] = r.log_probability ? number_json(*r.log_probability) : Json(nullptr);
  j["method"] = r.method ? Json(*r.method) : Json(nullptr);
  return j.dump();
}

RunRecord parse_record(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("run record is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("run record must be a JSON object");
  auto opt_number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return number_from(j[key]);
  };
  auto opt_string = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw ParseError(std::string("run record field '") + key + "' must be a string");
    return j[key].get<std::string>();
  };
  RunRecord r;
  try {
    r.process = j.at("process").get<std::string>();
    r.kernel = j.at("kernel").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stream = j.at("stream").get<std::uint64_t>();
    r.pattern = j.at("pattern").get<std::vector<int>>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("run record: ") + e.what());
  }
  r.flavor = opt_string("flavor");
  r.scale_c = opt_number("scale_c");
  r.target_mean = opt_number("target_mean");
  r.log_probability = opt_number("log_probability");
  r.method = opt_string("method");
  return r;
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<BenchRow> bench_classical(const std::vector<int>& sizes, int repetitions, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (int m : sizes) {
    if (m < 1) throw DomainError("bench: sizes must be positive");
    // Uniform points at unit density with sigma = 1 keep the spectrum shape comparable across sizes.
    RngStream place(seed, static_cast<std::uint64_t>(m));
    const double side = std::sqrt(static_cast<double>(m));
    StateSpace space;
    for (int i = 0; i < m; ++i) space.points.push_back({std::to_string(i), side * place.uniform(), side * place.uniform()});
    const KernelMatrix k(rbf_kernel(space, 1.0));
    const double c = solve_scale(flavor_lambdas(k, InputFlavor::Thermal), InputFlavor::Thermal, 0.1 * m);
    const ClassicalSampler sampler(k, InputFlavor::Thermal, c);
    RngStream rng(seed, 1'000'000 + static_cast<std::uint64_t>(m));
    const int batch = std::max(1, static_cast<int>(2e7 / (static_cast<double>(m) * m)));
    volatile int sink = 0;
    const double t = median_seconds(repetitions, [&] {
      for (int i = 0; i < batch; ++i) sink = sampler.sample(rng)[0];
    });
    rows.push_back({"classical_sample", m, t / batch});
  }
  return rows;
}

double fit_exponent(const std::vector<BenchRow>& rows) {
  if (rows.size() < 2) throw DomainError("fit_exponent: need at least two sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.size));
    const double y = std::log(r.median_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Point processes from Gaussian boson sampling"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ModelOptions encode_opts;
  std::string encode_out;
  auto* encode_cmd = app.add_subcommand("encode", "Encode a kernel into a Gaussian state and print its summary");
  add_model_options(encode_cmd, encode_opts, false);
  encode_cmd->add_option("--out", encode_out, "output JSON path (default stdout)");

  ModelOptions sample_opts;
  SampleOptions sample_run;
  auto* sample_cmd = app.add_subcommand("sample", "Draw samples and write one JSON record per line");
  add_model_options(sample_cmd, sample_opts, true);
  sample_cmd->add_option("--samples", sample_run.samples, "number of samples");
  sample_cmd->add_option("--seed", sample_run.seed, "master seed");
  sample_cmd->add_option("--parallel", sample_run.parallel, "worker threads");
  sample_cmd->add_option("--out", sample_run.out, "output JSONL path (default stdout)");

  ModelOptions prob_opts;
  std::string prob_pattern;
  auto* prob_cmd = app.add_subcommand("prob", "Evaluate the probability of one pattern");
  add_model_options(prob_cmd, prob_opts, true);
  prob_cmd->add_option("--pattern", prob_pattern, "comma-separated counts, clicks or membership")->required();

  AnalyzeOptions analyze_opts;
  auto* analyze_cmd = app.add_subcommand("analyze", "Spatial statistics of sampled patterns");
  analyze_cmd->add_option("mode", analyze_opts.mode, "nnd, voronoi or marks")
      ->required()
      ->check(CLI::IsMember({"nnd", "voronoi", "marks"}));
  analyze_cmd->add_option("--input", analyze_opts.input, "samples JSONL");
  analyze_cmd->add_option("--space", analyze_opts.space, "grid:NXxNY:SPACING or a space CSV path");
  analyze_cmd->add_option("--out", analyze_opts.out, "output CSV path (default stdout)");
  analyze_cmd->add_option("--svg", analyze_opts.svg, "SVG rendering of the first sample or the marks");
  analyze_cmd->add_option("--hist", analyze_opts.hist, "histogram CSV path");
  analyze_cmd->add_option("--bins", analyze_opts.bins, "histogram bins (default 20)");
  analyze_cmd->add_option("--resolution", analyze_opts.resolution, "Voronoi raster resolution")
      ->check(CLI::PositiveNumber);

  SeedOptions seed_opts;
  auto* seed_cmd = app.add_subcommand("seed-kmeans", "Paired trials of TPP-seeded against plain k-means++");
  seed_cmd->add_option("--k", seed_opts.config.k, "clusters")->check(CLI::PositiveNumber);
  seed_cmd->add_option("--per-cluster", seed_opts.config.per_cluster, "points per cluster")
      ->check(CLI::PositiveNumber);
  seed_cmd->add_option("--spread", seed_opts.config.spread, "cluster standard deviation")
      ->check(CLI::NonNegativeNumber);
  seed_cmd->add_option("--extent", seed_opts.extent, "side of the square holding the centres");
  seed_cmd->add_option("--trials", seed_opts.config.trials, "paired trials")->check(CLI::NonNegativeNumber);
  seed_cmd->add_option("--mean-points", seed_opts.config.mean_points, "expected TPP clicks (default 3k)");
  seed_cmd->add_option("--sigma", seed_opts.config.sigma, "RBF width (default dataset std)")
      ->check(CLI::PositiveNumber);
  seed_cmd->add_option("--seed", seed_opts.seed, "master seed");
  seed_cmd->add_option("--parallel", seed_opts.parallel, "worker threads");
  seed_cmd->add_option("--out", seed_opts.out, "per-trial JSONL path");
  seed_cmd->add_option("--summary", seed_opts.summary, "summary CSV path (default stdout)");

  StockOptions stock_opts;
  auto* stock_cmd = app.add_subcommand("stocks", "Select stock subsets by TPP, PPP and DPP");
  stock_cmd->add_option("--returns", stock_opts.returns, "returns or prices CSV");
  stock_cmd->add_option("--mode", stock_opts.mode, "prices or returns")->check(CLI::IsMember({"prices", "returns"}));
  stock_cmd->add_option("--synthetic", stock_opts.synthetic, "BLOCKS:PER_BLOCK:DAYS:WITHIN synthetic returns");
  stock_cmd->add_option("--target", stock_opts.target, "expected subset size")->check(CLI::PositiveNumber);
  stock_cmd->add_option("--runs", stock_opts.runs, "selections per process");
  stock_cmd->add_option("--seed", stock_opts.seed, "master seed");
  stock_cmd->add_option("--out", stock_opts.out, "per-selection JSONL path");
  stock_cmd->add_option("--summary", stock_opts.summary, "summary CSV path (default stdout)");

  BenchOptions bench_opts;
  auto* bench_cmd = app.add_subcommand("bench", "Time the matrix functions and the classical sampler");
  bench_cmd->add_option("--sizes", bench_opts.sizes, "classical sampler sizes")->delimiter(',');
  bench_cmd->add_option("--hafnian-sizes", bench_opts.hafnian_sizes, "hafnian matrix sizes")->delimiter(',');
  bench_cmd->add_option("--torontonian-sizes", bench_opts.torontonian_sizes, "torontonian mode counts")
      ->delimiter(',');
  bench_cmd->add_option("--repetitions", bench_opts.repetitions, "repetitions per size (median is reported)");
  bench_cmd->add_option("--seed", bench_opts.seed, "seed for the random inputs");
  bench_cmd->add_option("--out", bench_opts.out, "output CSV path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  WarningHandler previous = set_warning_handler([&](const std::string& m) { err << "warning: " << m << "\n"; });
  struct Restore {
    WarningHandler& h;
    ~Restore() { set_warning_handler(h); }
  } restore{previous};
  try {
    if (*encode_cmd) return cmd_encode(encode_opts, encode_out, out);
    if (*sample_cmd) return cmd_sample(sample_opts, sample_run, out);
    if (*prob_cmd) return cmd_prob(prob_opts, prob_pattern, out);
    if (*analyze_cmd) return cmd_analyze(analyze_opts, out);
    if (*seed_cmd) return cmd_seed_kmeans(seed_opts, out);
    if (*stock_cmd) return cmd_stocks(stock_opts, out);
    if (*bench_cmd) return cmd_bench(bench_opts, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gbspp::cli
