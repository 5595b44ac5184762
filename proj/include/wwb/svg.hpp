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

#ifndef WWB_SVG_HPP_
#define WWB_SVG_HPP_

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace wwb {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Self-contained line plot, no display server needed.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

// Grayscale spectrogram-style rendering, rows drawn bottom-up.
void write_heatmap(const std::string& path, const std::string& title,
                   const Eigen::MatrixXd& values);

}  // namespace wwb

#endif  // WWB_SVG_HPP_
