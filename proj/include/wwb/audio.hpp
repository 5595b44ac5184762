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

#ifndef WWB_AUDIO_HPP_
#define WWB_AUDIO_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace wwb {

// Mono PCM audio normalized to [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;
};

// Log-mel filter bank energy features; rows are frames, columns mel channels.
struct MelSpectrogram {
  Eigen::MatrixXd values;  // time x n_mels, log-energy
  double frame_hop_s = 0.010;
  double frame_len_s = 0.025;
  int n_mels = 64;
  double log_floor = 1e-10;

  Eigen::Index frames() const { return values.rows(); }
};

struct FrontendConfig {
  double frame_len_s = 0.025;
  double frame_hop_s = 0.010;
  int n_mels = 64;
  double f_min_hz = 60.0;
  double f_max_hz = 7600.0;
  double log_floor = 1e-10;
  int sample_rate_hz = 16000;
};

// RIFF/WAVE PCM16 mono reader. Samples are scaled by 1/32768.
Waveform load_wav(const std::string& path);
// PCM16 mono writer, used by the synthetic dataset tooling.
void write_wav(const std::string& path, const Waveform& wave);

double mel_of_hz(double f_hz);
double hz_of_mel(double mel);

// Power spectrogram: periodic Hann window, one-sided spectrum,
// fft_size = next power of two >= window length, bins = fft_size/2 + 1.
Eigen::MatrixXd stft_power(const Waveform& wave, double frame_len_s,
                           double frame_hop_s);

// Triangular mel filters (n_mels x bins), equally spaced on the mel scale.
Eigen::MatrixXd mel_matrix(int fft_size, int n_mels, int sample_rate_hz,
                           double f_min_hz, double f_max_hz);

// values = log(mel_matrix * power + log_floor).
MelSpectrogram lfbe(const Waveform& wave, const FrontendConfig& cfg);

}  // namespace wwb

#endif  // WWB_AUDIO_HPP_
