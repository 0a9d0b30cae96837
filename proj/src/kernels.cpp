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

#include "gbspp/kernels.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace gbspp {

namespace csv {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t\r");
    const auto e = f.find_last_not_of(" \t\r");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace csv

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "line " << line << ": " << what;
  throw ParseError(os.str());
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

void StateSpace::validate() const {
  std::set<std::string> seen;
  for (const auto& p : points) {
    if (!seen.insert(p.id).second) throw DomainError("state space: duplicate id '" + p.id + "'");
  }
  if (densities) {
    if (densities->size() != points.size()) throw DomainError("state space: densities length mismatch");
    for (double d : *densities)
      if (!(d >= 0)) throw DomainError("state space: densities must be non-negative");
  }
  if (labels && labels->size() != points.size()) throw DomainError("state space: labels length mismatch");
}

ReturnsMode parse_returns_mode(std::string_view name) {
  if (name == "prices") return ReturnsMode::Prices;
  if (name == "returns") return ReturnsMode::Returns;
  throw DomainError("unknown returns mode '" + std::string(name) + "'");
}

StateSpace grid_space(int nx, int ny, double spacing) {
  if (nx < 1 || ny < 1) throw DomainError("grid_space: nx and ny must be positive");
  if (!(spacing > 0)) throw DomainError("grid_space: spacing must be positive");
  StateSpace s;
  s.points.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int r = 0; r < ny; ++r)
    for (int c = 0; c < nx; ++c)
      s.points.push_back({std::to_string(r) + "," + std::to_string(c), c * spacing, r * spacing});
  return s;
}

RealMatrix rbf_kernel(const StateSpace& space, double sigma) {
  if (!(sigma > 0)) throw DomainError("rbf_kernel: sigma must be positive");
  const auto m = static_cast<Eigen::Index>(space.size());
  RealMatrix k(m, m);
  const double inv = 1.0 / (sigma * sigma);
  for (Eigen::Index i = 0; i < m; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dx = space.points[i].x - space.points[j].x;
      const double dy = space.points[i].y - space.points[j].y;
      k(i, j) = k(j, i) = std::exp(-(dx * dx + dy * dy) * inv);
    }
  }
  return k;
}

RealMatrix density_kernel(const StateSpace& space, double sigma) {
  if (!space.densities) throw DomainError("density_kernel: state space has no densities");
  space.validate();
  const auto m = static_cast<Eigen::Index>(space.size());
  const RealVector d = Eigen::Map<const RealVector>(space.densities->data(), m);
  return d.asDiagonal() * rbf_kernel(space, sigma) * d.asDiagonal();
}

RealMatrix correlation_kernel(const ReturnsTable& returns, bool standardize) {
  const Eigen::Index n = returns.values.rows();
  if (n < 2) throw DomainError("correlation_kernel: need at least two days of returns");
  RealMatrix r = returns.values;
  if (standardize) {
    for (Eigen::Index t = 0; t < r.cols(); ++t) {
      r.col(t).array() -= r.col(t).mean();
      const double sd = std::sqrt(r.col(t).squaredNorm() / static_cast<double>(n));
      if (!(sd > 0)) {
        const std::string name = t < static_cast<Eigen::Index>(returns.tickers.size()) ? returns.tickers[t] : std::to_string(t);
        throw DomainError("correlation_kernel: ticker '" + name + "' has zero variance");
      }
      r.col(t) /= sd;
    }
  }
  RealMatrix k = r.transpose() * r / static_cast<double>(n);
  k = (k + k.transpose()) / 2.0;
  if (standardize) k.diagonal().setOnes();
  return k;
}

StateSpace parse_space(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw ParseError("space file is empty");
  const auto header = csv::split_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "x" || header[2] != "y")
    parse_fail(line_no, "space header must start with id,x,y");
  int density_col = -1;
  int label_col = -1;
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c] == "density" && density_col < 0) {
      density_col = static_cast<int>(c);
    } else if (header[c] == "label" && label_col < 0) {
      label_col = static_cast<int>(c);
    } else {
      parse_fail(line_no, "unexpected column '" + header[c] + "'");
    }
  }

  StateSpace s;
  std::vector<double> densities;
  std::vector<std::string> labels;
  while (next_line(in, line, line_no)) {
    const auto f = csv::split_line(line);
    if (f.size() != header.size()) parse_fail(line_no, "expected " + std::to_string(header.size()) + " fields");
    SpacePoint p{f[0], 0.0, 0.0};
    if (p.id.empty()) parse_fail(line_no, "empty id");
    if (!parse_double(f[1], p.x) || !parse_double(f[2], p.y)) parse_fail(line_no, "coordinates must be numbers");
    if (density_col >= 0) {
      double d = 0.0;
      if (!parse_double(f[static_cast<std::size_t>(density_col)], d) || d < 0)
        parse_fail(line_no, "density must be a non-negative number");
      densities.push_back(d);
    }
    if (label_col >= 0) labels.push_back(f[static_cast<std::size_t>(label_col)]);
    s.points.push_back(std::move(p));
  }
  if (density_col >= 0) s.densities = std::move(densities);
  if (label_col >= 0) s.labels = std::move(labels);
  s.validate();
  return s;
}

StateSpace load_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open space file " + path.string());
  return parse_space(in);
}

ReturnsTable parse_returns(std::istream& in, ReturnsMode mode) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw ParseError("returns file is empty");
  const auto header = csv::split_line(line);
  if (header.size() < 2 || header[0] != "date") parse_fail(line_no, "returns header must be date,<ticker>,...");
  const std::size_t n_tickers = header.size() - 1;

  std::vector<std::string> days;
  std::vector<std::vector<double>> rows;
  std::vector<bool> missing(n_tickers, false);
  while (next_line(in, line, line_no)) {
    const auto f = csv::split_line(line);
    if (f.size() != header.size()) parse_fail(line_no, "expected " + std::to_string(header.size()) + " fields");
    if (f[0].empty()) parse_fail(line_no, "empty date");
    std::vector<double> row(n_tickers, 0.0);
    for (std::size_t t = 0; t < n_tickers; ++t) {
      const std::string& cell = f[t + 1];
      if (is_missing(cell)) {
        missing[t] = true;
        continue;
      }
      if (!parse_double(cell, row[t])) parse_fail(line_no, "value '" + cell + "' is not a number");
      if (mode == ReturnsMode::Prices && row[t] <= 0) parse_fail(line_no, "prices must be positive");
    }
    days.push_back(f[0]);
    rows.push_back(std::move(row));
  }

  ReturnsTable out;
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < n_tickers; ++t) {
    if (missing[t]) {
      out.dropped.push_back(header[t + 1]);
      warn("dropping ticker '" + header[t + 1] + "' with missing data");
    } else {
      keep.push_back(t);
      out.tickers.push_back(header[t + 1]);
    }
  }

  const std::size_t first = mode == ReturnsMode::Prices ? 1 : 0;
  const std::size_t n_days = rows.size() > first ? rows.size() - first : 0;
  if (n_days < 2) throw ParseError("returns file has fewer than 2 usable days");
  out.values.resize(static_cast<Eigen::Index>(n_days), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t d = 0; d < n_days; ++d) {
    out.days.push_back(days[d + first]);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const std::size_t t = keep[k];
      out.values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
          mode == ReturnsMode::Prices ? std::log(rows[d + 1][t] / rows[d][t]) : rows[d][t];
    }
  }
  return out;
}

ReturnsTable load_returns(const std::filesystem::path& path, ReturnsMode mode) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open returns file " + path.string());
  return parse_returns(in, mode);
}

}  // namespace gbspp
