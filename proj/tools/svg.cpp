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

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <sstream>

namespace gbspp::cli::svg {
namespace {

constexpr double kSize = 800.0;
constexpr double kMargin = 40.0;

const char* const kPalette[] = {"#cfe2f3", "#d9ead3", "#fff2cc", "#f4cccc", "#d9d2e9", "#fce5cd",
                                "#d0e0e3", "#ead1dc", "#e6f0c2", "#c9daf8", "#f9d9b8", "#dde7d0"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Maps data coordinates into the viewport; y grows upward in data and downward in SVG.
class Canvas {
 public:
  explicit Canvas(const BBox& box) : box_(box) {
    const double span = std::max(box.width(), box.height());
    scale_ = (kSize - 2 * kMargin) / (span > 0 ? span : 1.0);
    os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" "
           "viewBox=\"0 0 800 800\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
  }

  double x(double v) const { return kMargin + (v - box_.xmin) * scale_; }
  double y(double v) const { return kSize - kMargin - (v - box_.ymin) * scale_; }
  double scale() const { return scale_; }

  void rect(double x0, double y0, double x1, double y1, const char* fill) {
    // Data rectangle [x0,x1] x [y0,y1].
    os_ << "<rect x=\"" << fmt(x(x0)) << "\" y=\"" << fmt(y(y1)) << "\" width=\"" << fmt((x1 - x0) * scale_)
        << "\" height=\"" << fmt((y1 - y0) * scale_) << "\" fill=\"" << fill << "\" stroke=\"none\"/>\n";
  }

  void circle(double cx, double cy, double r, const char* fill, const char* stroke) {
    os_ << "<circle cx=\"" << fmt(x(cx)) << "\" cy=\"" << fmt(y(cy)) << "\" r=\"" << fmt(r) << "\" fill=\"" << fill
        << "\" stroke=\"" << stroke << "\"/>\n";
  }

  void axes() {
    const double x0 = x(box_.xmin);
    const double x1 = x(box_.xmax);
    const double y0 = y(box_.ymin);
    const double y1 = y(box_.ymax);
    os_ << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1) << "\" y2=\"" << fmt(y0)
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0) << "\" y2=\"" << fmt(y1)
        << "\" stroke=\"black\"/>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  BBox box_;
  double scale_ = 1.0;
  std::ostringstream os_;
};

void background(Canvas& c, const StateSpace& space) {
  for (const auto& p : space.points) c.circle(p.x, p.y, 2.0, "#bbbbbb", "none");
}

void selected_points(Canvas& c, const StateSpace& space, std::span<const int> selected) {
  for (int i : selected) {
    const auto& p = space.points[static_cast<std::size_t>(i)];
    c.circle(p.x, p.y, 5.0, "#1f4e79", "black");
  }
}

}  // namespace

std::string scatter(const StateSpace& space, std::span<const int> selected, const BBox& box) {
  Canvas c(box);
  c.axes();
  background(c, space);
  selected_points(c, space, selected);
  return c.finish();
}

std::string marks(const StateSpace& space, std::span<const int> counts, const BBox& box) {
  Canvas c(box);
  c.axes();
  const int top = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& p = space.points[i];
    if (counts[i] == 0 || top == 0) {
      c.circle(p.x, p.y, 2.0, "#bbbbbb", "none");
    } else {
      // Area proportional to the count.
      c.circle(p.x, p.y, 2.0 + 10.0 * std::sqrt(static_cast<double>(counts[i]) / top), "#b45f06", "black");
    }
  }
  return c.finish();
}

std::string voronoi(const StateSpace& space, std::span<const int> selected, const BBox& box,
                    const std::vector<int>& owner, int res) {
  Canvas c(box);
  const double dx = box.width() / res;
  const double dy = box.height() / res;
  for (int r = 0; r < res; ++r) {
    // Runs of equal owner along a row become one rectangle.
    int start = 0;
    for (int col = 1; col <= res; ++col) {
      const int who = owner[static_cast<std::size_t>(r) * res + start];
      if (col < res && owner[static_cast<std::size_t>(r) * res + col] == who) continue;
      c.rect(box.xmin + start * dx, box.ymin + r * dy, box.xmin + col * dx, box.ymin + (r + 1) * dy,
             kPalette[static_cast<std::size_t>(who) % std::size(kPalette)]);
      start = col;
    }
  }
  c.axes();
  background(c, space);
  selected_points(c, space, selected);
  return c.finish();
}

}  // namespace gbspp::cli::svg
