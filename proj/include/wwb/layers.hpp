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

#ifndef WWB_LAYERS_HPP_
#define WWB_LAYERS_HPP_

#include <Eigen/Dense>

#include "wwb/rng.hpp"

namespace wwb {

enum class RunMode { kTrain, kEval };

// y = x W^T + b, applied row-wise over time.
struct AffineParams {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;  // out
};

// Two affine layers with tanh, inverted dropout between them.
struct PrenetParams {
  AffineParams a1;
  AffineParams a2;
  double dropout_p = 0.0;
};

inline Eigen::MatrixXd affine_forward(const Eigen::MatrixXd& x,
                                      const AffineParams& p) {
  return (x * p.W.transpose()).rowwise() + p.b.transpose();
}

// Accumulates into gp; returns gradient w.r.t. x.
inline Eigen::MatrixXd affine_backward(const Eigen::MatrixXd& x,
                                       const AffineParams& p,
                                       const Eigen::MatrixXd& g,
                                       AffineParams* gp) {
  gp->W.noalias() += g.transpose() * x;
  gp->b.noalias() += g.colwise().sum().transpose();
  return g * p.W;
}

// Inverted dropout: entries are 0 or 1/(1-p) so eval mode needs no rescale.
inline Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols,
                                    double p, RngStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = rng.uniform() < p ? 0.0 : keep;
  return m;
}

struct PrenetTape {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y1;    // tanh of first affine
  Eigen::MatrixXd mask;  // dropout mask (empty in eval mode / p == 0)
  Eigen::MatrixXd y1d;   // after dropout
  Eigen::MatrixXd y2;    // tanh of second affine
};

inline Eigen::MatrixXd prenet_forward(const Eigen::MatrixXd& x,
                                      const PrenetParams& p, RunMode mode,
                                      RngStream& rng, PrenetTape* tape) {
  Eigen::MatrixXd y1 = affine_forward(x, p.a1).array().tanh();
  Eigen::MatrixXd y1d;
  Eigen::MatrixXd mask;
  if (mode == RunMode::kTrain && p.dropout_p > 0.0) {
    mask = dropout_mask(y1.rows(), y1.cols(), p.dropout_p, rng);
    y1d = y1.cwiseProduct(mask);
  } else {
    y1d = y1;
  }
  Eigen::MatrixXd y2 = affine_forward(y1d, p.a2).array().tanh();
  if (tape) {
    tape->x = x;
    tape->y1 = std::move(y1);
    tape->mask = std::move(mask);
    tape->y1d = y1d;
    tape->y2 = y2;
  }
  return y2;
}

inline Eigen::MatrixXd prenet_backward(const PrenetTape& tape,
                                       const PrenetParams& p,
                                       const Eigen::MatrixXd& g,
                                       PrenetParams* gp) {
  const Eigen::MatrixXd g2 =
      g.cwiseProduct((1.0 - tape.y2.array().square()).matrix());
  Eigen::MatrixXd g1d = affine_backward(tape.y1d, p.a2, g2, &gp->a2);
  if (tape.mask.size() > 0) g1d = g1d.cwiseProduct(tape.mask);
  const Eigen::MatrixXd g1 =
      g1d.cwiseProduct((1.0 - tape.y1.array().square()).matrix());
  return affine_backward(tape.x, p.a1, g1, &gp->a1);
}

}  // namespace wwb

#endif  // WWB_LAYERS_HPP_
