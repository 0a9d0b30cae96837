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
#include <sstream>

#include "gbspp/kernels.hpp"
#include "gbspp/rng.hpp"
#include "gbspp/stats.hpp"

using namespace gbspp;

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  RngStream a(42, 0);
  RngStream b(42, 0);
  RngStream c(42, 1);
  RngStream d(43, 0);
  bool differs_c = false;
  bool differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
}

TEST(Rng, UniformRangeAndMoments) {
  RngStream r(1, 2);
  std::vector<double> u;
  for (int i = 0; i < 100000; ++i) {
    const double v = r.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    u.push_back(v);
  }
  EXPECT_NEAR(mean(u), 0.5, 3 * std::sqrt(1.0 / 12 / 1e5));
}

TEST(Rng, NormalMoments) {
  RngStream r(3, 4);
  std::vector<double> z;
  for (int i = 0; i < 100000; ++i) z.push_back(r.normal());
  EXPECT_NEAR(mean(z), 0.0, 3 * std::sqrt(1.0 / 1e5));
  EXPECT_NEAR(sample_variance(z), 1.0, 3 * std::sqrt(2.0 / 1e5));
}

TEST(Rng, PoissonMomentsOnBothBranches) {
  for (double mu : {0.3, 4.0, 9.99, 10.0, 37.5, 1000.0}) {
    RngStream r(5, static_cast<std::uint64_t>(mu * 100));
    constexpr int n = 100000;
    std::vector<double> k;
    for (int i = 0; i < n; ++i) k.push_back(static_cast<double>(r.poisson(mu)));
    EXPECT_NEAR(mean(k), mu, 3 * std::sqrt(mu / n)) << mu;
    EXPECT_NEAR(sample_variance(k), mu, 5 * mu * std::sqrt(2.0 / n) + 3 * std::sqrt(mu / n)) << mu;
  }
  RngStream r(6, 0);
  EXPECT_EQ(r.poisson(0.0), 0U);
  EXPECT_THROW(r.poisson(-1.0), DomainError);
}

TEST(Rng, PoissonPmfSmallMean) {
  RngStream r(7, 0);
  constexpr int n = 200000;
  std::vector<int> h(8, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = r.poisson(1.5);
    if (k < 8) ++h[k];
  }
  double p = std::exp(-1.5);
  for (int k = 0; k < 8; ++k) {
    EXPECT_NEAR(h[k] / double(n), p, 4 * std::sqrt(p * (1 - p) / n) + 1e-9) << k;
    p *= 1.5 / (k + 1);
  }
}

TEST(Rng, IndexAndCategorical) {
  RngStream r(8, 0);
  std::vector<int> h(3, 0);
  for (int i = 0; i < 30000; ++i) ++h[r.index(3)];
  for (int c : h) EXPECT_NEAR(c, 10000, 3 * std::sqrt(30000 * (1.0 / 3) * (2.0 / 3)));
  const std::vector<double> w{0.0, 3.0, 1.0};
  std::vector<int> g(3, 0);
  for (int i = 0; i < 40000; ++i) ++g[r.categorical(w)];
  EXPECT_EQ(g[0], 0);
  EXPECT_NEAR(g[1] / 40000.0, 0.75, 3 * std::sqrt(0.75 * 0.25 / 40000));
  EXPECT_THROW(r.categorical(std::vector<double>{0.0, 0.0}), DomainError);
  EXPECT_THROW(r.index(0), DomainError);
}

TEST(Grid, LayoutAndIds) {
  const StateSpace g = grid_space(3, 2, 0.5);
  ASSERT_EQ(g.size(), 6U);
  EXPECT_EQ(g.points[4].id, "1,1");
  EXPECT_DOUBLE_EQ(g.points[4].x, 0.5);
  EXPECT_DOUBLE_EQ(g.points[5].x, 1.0);
  EXPECT_DOUBLE_EQ(g.points[5].y, 0.5);
  EXPECT_THROW(grid_space(0, 1, 1.0), DomainError);
}

TEST(Kernels, RbfAndDensity) {
  StateSpace s = grid_space(2, 1, 1.0);
  const RealMatrix k = rbf_kernel(s, 2.0);
  EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
  EXPECT_NEAR(k(0, 1), std::exp(-0.25), 1e-15);
  EXPECT_THROW(density_kernel(s, 1.0), DomainError);
  s.densities = std::vector<double>{2.0, 0.5};
  const RealMatrix d = density_kernel(s, 2.0);
  EXPECT_NEAR(d(0, 0), 4.0, 1e-15);
  EXPECT_NEAR(d(0, 1), std::exp(-0.25), 1e-15);
  EXPECT_THROW(rbf_kernel(s, 0.0), DomainError);
}

TEST(Kernels, CorrelationKernel) {
  ReturnsTable t;
  t.tickers = {"A", "B", "C"};
  t.values.resize(4, 3);
  t.values << 1, 2, 1, 2, 4, -1, 3, 6, -1, 4, 8, 1;
  const RealMatrix k = correlation_kernel(t);
  EXPECT_NEAR(k(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(k(0, 2), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(k(2, 2), 1.0);
  const RealMatrix raw = correlation_kernel(t, false);
  EXPECT_NEAR(raw(0, 1), (2 + 8 + 18 + 32) / 4.0, 1e-12);
  t.values.col(2).setConstant(1.0);
  EXPECT_THROW(correlation_kernel(t), DomainError);
}

TEST(Parse, SpaceFile) {
  std::istringstream in("id,x,y,density,label\nA,0,0,1.5,Union\n\"1,2\",1,2.5,0.5,\"King, West\"\n");
  const StateSpace s = parse_space(in);
  ASSERT_EQ(s.size(), 2U);
  EXPECT_EQ(s.points[1].id, "1,2");
  EXPECT_DOUBLE_EQ(s.points[1].y, 2.5);
  EXPECT_EQ((*s.densities)[0], 1.5);
  EXPECT_EQ((*s.labels)[1], "King, West");
}

TEST(Parse, SpaceErrorsCarryLineNumbers) {
  std::istringstream bad("id,x,y\nA,0,0\nB,zero,1\n");
  try {
    parse_space(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream dup("id,x,y\nA,0,0\nA,1,1\n");
  EXPECT_THROW(parse_space(dup), DomainError);
  std::istringstream header("name,x,y\n");
  EXPECT_THROW(parse_space(header), ParseError);
}

TEST(Parse, ReturnsPricesModeAndMissing) {
  std::istringstream in("date,A,B,C\n2024-01-01,100,50,10\n2024-01-02,110,NA,11\n2024-01-03,99,52,12.1\n");
  int warnings = 0;
  auto prev = set_warning_handler([&](const std::string&) { ++warnings; });
  const ReturnsTable t = parse_returns(in, ReturnsMode::Prices);
  set_warning_handler(prev);
  EXPECT_EQ(warnings, 1);
  EXPECT_EQ(t.tickers, (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(t.dropped, (std::vector<std::string>{"B"}));
  ASSERT_EQ(t.values.rows(), 2);
  EXPECT_NEAR(t.values(0, 0), std::log(1.1), 1e-15);
  EXPECT_NEAR(t.values(1, 1), std::log(1.1), 1e-12);
  EXPECT_EQ(t.days.front(), "2024-01-02");

  std::istringstream neg("date,A\n2024-01-01,1\n2024-01-02,-1\n2024-01-03,1\n");
  EXPECT_THROW(parse_returns(neg, ReturnsMode::Prices), ParseError);
  std::istringstream one("date,A\n2024-01-01,0.1\n");
  EXPECT_THROW(parse_returns(one, ReturnsMode::Returns), ParseError);
}

TEST(Csv, SplitAndEscape) {
  EXPECT_EQ(csv::split_line("a, \"b,c\" ,d"), (std::vector<std::string>{"a", "b,c", "d"}));
  EXPECT_EQ(csv::split_line("\"x\"\"y\""), (std::vector<std::string>{"x\"y"}));
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("q\""), "\"q\"\"\"");
}
