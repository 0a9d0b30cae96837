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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gbspp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 3;

/// One sample, as written to a JSONL line.
struct RunRecord {
  std::string process;
  std::string kernel;
  std::optional<std::string> flavor;
  std::optional<double> scale_c;
  std::optional<double> target_mean;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Length-m photon counts, clicks or 0/1 membership.
  std::vector<int> pattern;
  std::optional<double> log_probability;
  /// Set when the sampler substituted an approximate route.
  std::optional<std::string> method;

  bool operator==(const RunRecord&) const = default;
};

std::string serialize(const RunRecord& record);
/// Throws ParseError on malformed input.
RunRecord parse_record(std::string_view line);
std::vector<RunRecord> read_records(std::istream& in);

struct BenchRow {
  std::string op;
  int size = 0;
  double median_seconds = 0.0;
};

/// Median per-sample wall time of the thermal classical sampler at each size.
std::vector<BenchRow> bench_classical(const std::vector<int>& sizes, int repetitions, std::uint64_t seed);
/// Least-squares slope of log(time) against log(size).
double fit_exponent(const std::vector<BenchRow>& rows);

/// Runs one command line (args excludes the program name). Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gbspp::cli
