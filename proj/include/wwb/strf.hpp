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

#ifndef WWB_STRF_HPP_
#define WWB_STRF_HPP_

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace wwb {

// One spectro-temporal receptive field: rate (temporal modulation, Hz),
// scale (spectral modulation, cycles/octave) and a direction phase.
struct StrfParams {
  double scale_psi = 1.0;    // cycles/octave
  double rate_omega = 4.0;   // Hz
  int phase_phi = 1;         // +1 or -1; -1 conjugates the rate factor
  double alpha = 3.5;
  double omega1 = 1.0;       // rate-axis unit normalizer
  double omega2 = 1.0;       // scale-axis unit normalizer
  int filter_len_t = 32;     // taps along time (frames)
  int filter_len_f = 32;     // taps along frequency (mel channels)
  double frame_hop_s = 0.010;
  double channels_per_octave = 9.17;
};

struct StrfFilter {
  Eigen::MatrixXcd taps;  // filter_len_t x filter_len_f, time axis first
  // 1D factors the taps are the outer product of; kept so the cortical
  // convolution can run separably.
  Eigen::VectorXcd rate_taps;   // analytic, already conjugated for phi=-1
  Eigen::VectorXcd scale_taps;  // analytic, zero-mean
  StrfParams params;
};

struct StrfGridConfig {
  std::vector<double> scales = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> rates = {4.0, 8.0, 16.0, 32.0};
  std::vector<int> phases = {1, -1};
  double alpha = 3.5;
  double omega1 = 1.0;
  double omega2 = 1.0;
  int filter_len_t = 32;
  int filter_len_f = 32;
  double frame_hop_s = 0.010;
  double channels_per_octave = 9.17;  // n_mels / log2(f_max/f_min) by default
};

// Ordering is scale-major, then rate, then phase: the default grids give
// 6 * 4 * 2 = 48 filters.
struct StrfFilterBank {
  std::vector<StrfFilter> filters;
  StrfGridConfig grid;

  std::vector<double> rate_axis() const { return grid.rates; }
  std::vector<double> scale_axis() const { return grid.scales; }
};

// Transfer function of the scale response: (o2*y/psi)^2 * exp(1-(o2*y/psi)^2).
// Peaks at 1 when o2*y/psi = 1.
double scale_response_fourier(double y, double psi, double omega2);

// Real impulse response of the scale filter: inverse DFT of the sampled
// transfer function with even symmetry, centered and de-meaned (|mean|<1e-9).
Eigen::VectorXd scale_impulse_response(double psi, double omega2, int n_points,
                                       double channels_per_octave);

// Gamma-like rate impulse response on the frame-time grid; u = omega1*omega*t:
//   r(t) = u^2 * omega * exp(-alpha*u) * sin(2*pi*u).
Eigen::VectorXd rate_impulse_response(double omega, double omega1, double alpha,
                                      int n_points, double frame_hop_s);

// Frequency-domain analytic signal: keep DC and Nyquist, double positive
// frequencies, zero negatives. Real part equals the input.
Eigen::VectorXcd analytic_signal(const Eigen::VectorXd& x);

StrfFilter build_strf(const StrfParams& params);
StrfFilterBank build_bank(const StrfGridConfig& grid);

// CTNS tensor of shape (n, 2, len_t, len_f) with real/imag planes plus a
// sidecar text header (<path>.hdr) listing the parameter grid in order.
void save_bank(const std::string& path, const StrfFilterBank& bank);
StrfFilterBank load_bank(const std::string& path);

}  // namespace wwb

#endif  // WWB_STRF_HPP_
