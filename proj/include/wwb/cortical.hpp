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

#ifndef WWB_CORTICAL_HPP_
#define WWB_CORTICAL_HPP_

#include <Eigen/Dense>
#include <vector>

#include "wwb/layers.hpp"
#include "wwb/strf.hpp"

namespace wwb {

// Magnitude response of the STRF bank: time x frequency x rate x scale,
// stored as per-(rate, scale) planes. Nonnegative everywhere; time and
// frequency extents match the input spectrogram ("same" convolution).
struct CorticalTensor {
  std::vector<Eigen::MatrixXd> planes;  // index r * n_scales + s, each T x F
  std::vector<double> rates;
  std::vector<double> scales;

  const Eigen::MatrixXd& plane(int r, int s) const {
    return planes[static_cast<std::size_t>(r) * scales.size() + s];
  }
};

// What the backward pass needs: the winning complex response per
// (rate, scale) cell and which phase won (ties toward the lowest index).
struct CorticalTape {
  std::vector<Eigen::MatrixXcd> z_win;
  std::vector<Eigen::MatrixXi> phase_win;
  int n_rates = 0;
  int n_scales = 0;
};

// Complex "same" 2D convolution with every bank filter (run separably via
// the rank-1 factorization), elementwise modulus, then max over the phase
// pair, yielding rate x scale magnitude planes.
CorticalTensor cortical_transform(const Eigen::MatrixXd& spec_values,
                                  const StrfFilterBank& bank,
                                  CorticalTape* tape = nullptr);

// Gradient of a scalar w.r.t. the input spectrogram given gradients w.r.t.
// every magnitude plane. Modulus subgradient at 0 is 0.
Eigen::MatrixXd cortical_backward(const CorticalTape& tape,
                                  const StrfFilterBank& bank,
                                  const std::vector<Eigen::MatrixXd>& g_planes);

// Max over the scale axis -> one T x F plane per rate.
std::vector<Eigen::MatrixXd> rategram(const CorticalTensor& ct,
                                      std::vector<Eigen::MatrixXi>* argmax =
                                          nullptr);
// Max over the rate axis -> one T x F plane per scale.
std::vector<Eigen::MatrixXd> scalegram(const CorticalTensor& ct,
                                       std::vector<Eigen::MatrixXi>* argmax =
                                           nullptr);

// Learnable part of the cortical frontend. The 1x1 convolution mixes the
// concatenated rategram/scalegram channels back down to out_channels, the
// heavily dropped-out spectrogram is added as a residual, then a small
// prenet is applied.
struct CorticalFrontendParams {
  AffineParams mix;  // out_channels x (F * (n_rates + n_scales))
  PrenetParams prenet;
  double dropout_residual_p = 0.9;
  double dropout_feature_p = 0.1;
  int out_channels = 0;
};

struct FrontendTape {
  CorticalTape cortical;
  std::vector<Eigen::MatrixXi> rate_argmax;
  std::vector<Eigen::MatrixXi> scale_argmax;
  Eigen::MatrixXd concat;         // T x F*(R+S)
  Eigen::MatrixXd feat_mask;      // empty when not applied
  Eigen::MatrixXd concat_dropped;
  Eigen::MatrixXd res_mask;       // empty when not applied
  PrenetTape prenet;
  bool valid = false;
};

Eigen::MatrixXd frontend_forward(const Eigen::MatrixXd& spec_values,
                                 const StrfFilterBank& bank,
                                 const CorticalFrontendParams& params,
                                 RunMode mode, RngStream& rng,
                                 FrontendTape* tape = nullptr);

// Returns the gradient w.r.t. the input spectrogram; parameter gradients
// are accumulated into g_params. STRF taps are frozen and get none.
Eigen::MatrixXd frontend_backward(const FrontendTape& tape,
                                  const StrfFilterBank& bank,
                                  const CorticalFrontendParams& params,
                                  const Eigen::MatrixXd& g,
                                  CorticalFrontendParams* g_params);

}  // namespace wwb

#endif  // WWB_CORTICAL_HPP_
