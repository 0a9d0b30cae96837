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
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gbspp/cli.hpp"
#include "gbspp/errors.hpp"

using namespace gbspp;
using namespace gbspp::cli;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("gbspp_cli_") + info->test_suite_name() + "_" + info->name());
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

// "probability <v>" -> v
double printed(const std::string& text, const std::string& key) {
  for (const auto& l : lines(text))
    if (l.rfind(key + " ", 0) == 0) return std::stod(l.substr(key.size() + 1));
  ADD_FAILURE() << "no '" << key << "' line in:\n" << text;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

TEST(RunRecordJson, RoundTrip) {
  RunRecord r;
  r.process = "tpp";
  r.kernel = "rbf(sigma=1,space=grid:2x2:1)";
  r.flavor = "thermal";
  r.scale_c = 0.1 + 0.2;  // not exactly representable in short decimal form
  r.target_mean = 10.0;
  r.seed = 18446744073709551615ULL;
  r.stream = 42;
  r.pattern = {0, 1, 3};
  r.log_probability = -std::numeric_limits<double>::infinity();
  r.method = "classical-threshold";
  EXPECT_EQ(parse_record(serialize(r)), r);

  RunRecord bare;
  bare.process = "ppp";
  EXPECT_EQ(parse_record(serialize(bare)), bare);
}

TEST(RunRecordJson, RejectsGarbage) {
  EXPECT_THROW(parse_record("not json"), ParseError);
  EXPECT_THROW(parse_record("[1,2]"), ParseError);
  EXPECT_THROW(parse_record(R"({"process":"tpp"})"), ParseError);
}

TEST(CliSample, CountContractAndDeterminism) {
  const std::vector<std::string> args{"sample",    "--process", "tpp",     "--space",  "grid:10x10:1.0",
                                      "--kernel",  "rbf",       "--sigma", "1.0",      "--flavor",
                                      "thermal",   "--mean-points", "10",  "--samples", "10",
                                      "--seed",    "7"};
  const Result a = invoke(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const auto rows = lines(a.out);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RunRecord r = parse_record(rows[i]);
    EXPECT_EQ(r.stream, i);
    EXPECT_EQ(r.seed, 7u);
    EXPECT_EQ(r.pattern.size(), 100u);
    EXPECT_EQ(r.method, "classical-threshold");
  }
  EXPECT_EQ(invoke(args).out, a.out);

  auto parallel = args;
  parallel.insert(parallel.end(), {"--parallel", "3"});
  EXPECT_EQ(invoke(parallel).out, a.out);
}

TEST(CliSample, PppWithZeroMeanIsEmpty) {
  const Result r = invoke({"sample", "--process", "ppp", "--space", "grid:4x4:1", "--mean-points", "0", "--samples",
                           "5", "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& row : rows) {
    const RunRecord rec = parse_record(row);
    EXPECT_EQ(rec.pattern, std::vector<int>(16, 0));
  }
}

TEST(CliSample, EveryProcessRuns) {
  for (const std::string p : {"tpp", "hpp", "perpp", "dpp", "ppp"}) {
    std::vector<std::string> args{"sample", "--process", p, "--space", "grid:2x1:1", "--mean-points", "0.3",
                                  "--samples", "4", "--seed", "3"};
    if (p == "tpp" || p == "hpp") args.insert(args.end(), {"--flavor", "thermal"});
    const Result r = invoke(args);
    EXPECT_EQ(r.code, kExitOk) << p << ": " << r.err;
    EXPECT_EQ(lines(r.out).size(), 4u) << p;
  }
}

TEST(CliSample, UsageErrors) {
  EXPECT_EQ(invoke({"sample", "--process", "tpp", "--space", "grid:2x1:1", "--flavor", "thermal", "--mean-points",
                    "1", "--scale-c", "0.1"})
                .code,
            kExitUsage);
  EXPECT_EQ(invoke({"sample", "--process", "tpp", "--space", "grid:2x1:1", "--mean-points", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"sample", "--process", "nope", "--space", "grid:2x1:1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"sample", "--process", "ppp", "--space", "grid:2x1:1", "--scale-c", "0.1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"sample", "--process", "dpp", "--space", "grid:2by1", "--mean-points", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({}).code, kExitUsage);
}

TEST(CliSample, LibraryFailureExitsThree) {
  // A scale beyond the thermal validity bound 1 / lambda_max.
  const Result r = invoke({"sample", "--process", "perpp", "--space", "grid:2x1:1", "--scale-c", "5"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(CliProb, SingleModeThermalClick) {
  // K = [1], c = 1/2: mean photon number 1, geometric click probability 1/2.
  const Result r =
      invoke({"prob", "--process", "tpp", "--space", "grid:1x1:1", "--flavor", "thermal", "--scale-c", "0.5",
              "--pattern", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(printed(r.out, "probability"), 0.5, 1e-11);
  EXPECT_NEAR(printed(r.out, "log_probability"), std::log(0.5), 1e-11);
  EXPECT_NE(r.out.find("log_probability -0.69314718056\n"), std::string::npos);
}

TEST(CliProb, VacuumOnTwoModeThermalState) {
  // Grid of two unit-spaced points: K eigenvalues 1 +- e^-1. Vacuum is prod 1 / (1 + n_i), n = c l / (1 - c l).
  const double c = 0.3;
  double expected = 1.0;
  for (double l : {1.0 + std::exp(-1.0), 1.0 - std::exp(-1.0)}) expected /= 1.0 + c * l / (1.0 - c * l);
  for (const std::string p : {"tpp", "hpp"}) {
    const Result r = invoke({"prob", "--process", p, "--space", "grid:2x1:1", "--flavor", "thermal", "--scale-c",
                             "0.3", "--pattern", "0,0"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NEAR(printed(r.out, "probability"), expected, 1e-11) << p;
  }
}

TEST(CliProb, OddPhotonTotalOnSqueezedStateIsZero) {
  const Result r = invoke({"prob", "--process", "hpp", "--space", "grid:2x1:1", "--flavor", "squeezed", "--scale-c",
                           "0.3", "--pattern", "1,2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(printed(r.out, "probability"), 0.0);
}

TEST(CliProb, PatternLengthMismatch) {
  const Result r = invoke({"prob", "--process", "hpp", "--space", "grid:2x1:1", "--flavor", "thermal", "--scale-c",
                           "0.3", "--pattern", "1,0,0"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_EQ(invoke({"prob", "--process", "hpp", "--space", "grid:2x1:1", "--flavor", "thermal", "--scale-c", "0.3",
                    "--pattern", "1,x"})
                .code,
            kExitUsage);
}

TEST(CliAnalyze, NndOnTwoPointPatternGivesTwoEqualRows) {
  RunRecord r;
  r.process = "ppp";
  r.pattern = {1, 0, 0, 1};  // (0,0) and (1,1) on a 2x2 unit grid
  const auto samples = scratch("s.jsonl");
  spit(samples, serialize(r) + "\n");
  const Result res = invoke({"analyze", "nnd", "--input", samples.string(), "--space", "grid:2x2:1"});
  ASSERT_EQ(res.code, kExitOk) << res.err;
  const auto rows = lines(res.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "run,index,id,nnd");
  const double d0 = std::stod(rows[1].substr(rows[1].rfind(',') + 1));
  const double d1 = std::stod(rows[2].substr(rows[2].rfind(',') + 1));
  EXPECT_NEAR(d0, std::sqrt(2.0), 1e-11);
  EXPECT_EQ(d0, d1);
}

TEST(CliAnalyze, VoronoiAreasSumToBoundingBox) {
  const auto samples = scratch("s.jsonl");
  const Result s = invoke({"sample", "--process", "ppp", "--space", "grid:5x5:1", "--mean-points", "6", "--samples",
                           "4", "--seed", "9", "--out", samples.string()});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  const Result res =
      invoke({"analyze", "voronoi", "--input", samples.string(), "--space", "grid:5x5:1", "--resolution", "64"});
  ASSERT_EQ(res.code, kExitOk) << res.err;
  // Padded bbox of a 5x5 unit grid: [-0.5, 4.5]^2.
  std::map<int, double> per_run;
  const auto rows = lines(res.out);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int run_id = std::stoi(rows[i]);
    per_run[run_id] += std::stod(rows[i].substr(rows[i].rfind(',') + 1));
  }
  ASSERT_FALSE(per_run.empty());
  for (const auto& [run_id, total] : per_run) EXPECT_NEAR(total, 25.0, 1e-8) << "run " << run_id;
}

TEST(CliAnalyze, MarksCountAppearances) {
  const auto samples = scratch("s.jsonl");
  std::string text;
  for (const auto& p : std::vector<std::vector<int>>{{1, 0, 1}, {1, 1, 0}, {2, 0, 0}}) {
    RunRecord r;
    r.process = "hpp";
    r.pattern = p;
    text += serialize(r) + "\n";
  }
  spit(samples, text);
  const auto svg = scratch("m.svg");
  const Result res =
      invoke({"analyze", "marks", "--input", samples.string(), "--space", "grid:3x1:1", "--svg", svg.string()});
  ASSERT_EQ(res.code, kExitOk) << res.err;
  const auto rows = lines(res.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1], "0,\"0,0\",0,0,3");
  EXPECT_EQ(rows[2], "1,\"0,1\",1,0,1");
  EXPECT_EQ(rows[3], "2,\"0,2\",2,0,1");
  const std::string a = slurp(svg);
  EXPECT_EQ(a.rfind("<?xml", 0), 0u);
  EXPECT_NE(a.find("width=\"800\" height=\"800\""), std::string::npos);
}

TEST(CliAnalyze, SpaceMismatchFails) {
  RunRecord r;
  r.process = "ppp";
  r.pattern = {1, 1};
  const auto samples = scratch("s.jsonl");
  spit(samples, serialize(r) + "\n");
  EXPECT_EQ(invoke({"analyze", "nnd", "--input", samples.string(), "--space", "grid:3x1:1"}).code, kExitFailure);
}

TEST(CliAnalyze, SvgAndHistogramAreDeterministic) {
  const auto samples = scratch("s.jsonl");
  ASSERT_EQ(invoke({"sample", "--process", "dpp", "--space", "grid:6x6:1", "--mean-points", "6", "--samples", "5",
                    "--seed", "2", "--out", samples.string()})
                .code,
            kExitOk);
  std::string first_svg;
  std::string first_hist;
  for (int round = 0; round < 2; ++round) {
    const auto svg = scratch("v" + std::to_string(round) + ".svg");
    const auto hist = scratch("h" + std::to_string(round) + ".csv");
    const Result r = invoke({"analyze", "voronoi", "--input", samples.string(), "--space", "grid:6x6:1", "--svg",
                             svg.string(), "--bins", "6", "--hist", hist.string(), "--resolution", "96"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    if (round == 0) {
      first_svg = slurp(svg);
      first_hist = slurp(hist);
      EXPECT_EQ(lines(first_hist).size(), 7u);
    } else {
      EXPECT_EQ(slurp(svg), first_svg);
      EXPECT_EQ(slurp(hist), first_hist);
    }
  }
}

TEST(CliSeedKmeans, SummaryHasWinRateAndIsReproducible) {
  const std::vector<std::string> args{"seed-kmeans", "--k", "3", "--per-cluster", "40", "--trials", "6", "--seed", "4"};
  const Result a = invoke(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const auto rows = lines(a.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NE(rows[0].find("win_rate"), std::string::npos);
  EXPECT_EQ(rows[1].rfind("6,3,40,", 0), 0u);
  EXPECT_EQ(invoke(args).out, a.out);
}

TEST(CliStocks, UncorrelatedReturnsGiveZeroOffdiagonal) {
  // Mutually orthogonal mean-zero columns: every sample correlation is exactly zero.
  const auto returns = scratch("r.csv");
  spit(returns,
       "date,A,B,C\n"
       "d1,1,1,1\n"
       "d2,1,-1,-1\n"
       "d3,-1,1,-1\n"
       "d4,-1,-1,1\n");
  const Result r =
      invoke({"stocks", "--returns", returns.string(), "--target", "2", "--runs", "10", "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> f;
    std::stringstream ss(rows[i]);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    ASSERT_GE(f.size(), 6u);
    if (!f[5].empty()) EXPECT_NEAR(std::stod(f[5]), 0.0, 1e-12) << rows[i];
  }
}

TEST(CliStocks, NeedsExactlyOneInput) {
  EXPECT_EQ(invoke({"stocks"}).code, kExitUsage);
  EXPECT_EQ(invoke({"stocks", "--synthetic", "2:3:10:0.5", "--returns", "x.csv"}).code, kExitUsage);
}

TEST(CliBench, ReportsMediansAndExponent) {
  const Result r = invoke({"bench", "--sizes", "40,80", "--hafnian-sizes", "8", "--torontonian-sizes", "6"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "op,size,median_seconds");
  EXPECT_EQ(rows[1].rfind("hafnian,8,", 0), 0u);
  EXPECT_EQ(rows[5].rfind("classical_fit_exponent,,", 0), 0u);
  EXPECT_EQ(invoke({"bench", "--repetitions", "3"}).code, kExitUsage);
}

TEST(FitExponent, RecoversPowerLaw) {
  std::vector<BenchRow> rows;
  for (int m : {100, 200, 400, 800}) rows.push_back({"x", m, 3e-9 * std::pow(m, 2.0)});
  EXPECT_NEAR(fit_exponent(rows), 2.0, 1e-12);
}
