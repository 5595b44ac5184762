// Copyright 2026 The wwb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wwb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace wwb {

namespace {

constexpr int kWidth = 640, kHeight = 420;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!std::isfinite(xmin) || !std::isfinite(ymin))
    throw std::runtime_error("svg: no finite points to plot");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double pw = kWidth - kMarginL - kMarginR;
  const double ph = kHeight - kMarginT - kMarginB;
  auto px = [&](double x) { return kMarginL + pw * (x - xmin) / (xmax - xmin); };
  auto py = [&](double y) {
    return kHeight - kMarginB - ph * (y - ymin) / (ymax - ymin);
  };

  std::ofstream f(path);
  if (!f) throw std::runtime_error("svg: cannot write " + path);
  f.precision(8);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
    << "' height='" << kHeight << "'>\n"
    << "<rect width='100%' height='100%' fill='white'/>\n"
    << "<text x='" << kWidth / 2 << "' y='20' text-anchor='middle' "
    << "font-family='sans-serif' font-size='14'>" << title << "</text>\n"
    << "<text x='" << kWidth / 2 << "' y='" << kHeight - 12
    << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
    << x_label << "</text>\n"
    << "<text x='16' y='" << kHeight / 2
    << "' text-anchor='middle' font-family='sans-serif' font-size='12' "
    << "transform='rotate(-90 16 " << kHeight / 2 << ")'>" << y_label
    << "</text>\n"
    << "<rect x='" << kMarginL << "' y='" << kMarginT << "' width='" << pw
    << "' height='" << ph << "' fill='none' stroke='black'/>\n";

  // Axis ticks.
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    const double y = ymin + (ymax - ymin) * i / 4.0;
    f << "<text x='" << px(x) << "' y='" << kHeight - kMarginB + 16
      << "' text-anchor='middle' font-family='sans-serif' font-size='10'>"
      << x << "</text>\n";
    f << "<text x='" << kMarginL - 6 << "' y='" << py(y) + 3
      << "' text-anchor='end' font-family='sans-serif' font-size='10'>" << y
      << "</text>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto* color = kColors[si % 8];
    f << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' "
      << "points='";
    for (const auto& [x, y] : series[si].points)
      f << px(x) << "," << py(y) << " ";
    f << "'/>\n";
    f << "<text x='" << kWidth - kMarginR - 140 << "' y='"
      << kMarginT + 16 + 14 * static_cast<int>(si)
      << "' font-family='sans-serif' font-size='11' fill='" << color << "'>"
      << series[si].label << "</text>\n";
  }
  f << "</svg>\n";
}

void write_heatmap(const std::string& path, const std::string& title,
                   const Eigen::MatrixXd& values) {
  const Eigen::Index T = values.rows(), F = values.cols();
  if (T == 0 || F == 0) throw std::runtime_error("svg: empty heatmap");
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  const int cell = std::max<int>(1, static_cast<int>(512 / std::max(T, F)));
  const int w = static_cast<int>(T) * cell, h = static_cast<int>(F) * cell;

  std::ofstream f(path);
  if (!f) throw std::runtime_error("svg: cannot write " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
    << h + 24 << "'>\n"
    << "<text x='4' y='14' font-family='sans-serif' font-size='12'>" << title
    << "</text>\n";
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index k = 0; k < F; ++k) {
      const int v =
          static_cast<int>(255.0 * (values(t, k) - lo) / span + 0.5);
      // Frequency runs bottom-up like a spectrogram.
      f << "<rect x='" << t * cell << "' y='" << 24 + (F - 1 - k) * cell
        << "' width='" << cell << "' height='" << cell << "' fill='rgb(" << v
        << "," << v << "," << v << ")'/>\n";
    }
  f << "</svg>\n";
}

}  // namespace wwb
