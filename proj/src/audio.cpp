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

#include "wwb/audio.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "wwb/fft.hpp"

namespace wwb {

namespace {
constexpr double kPi = 3.14159265358979323846;

template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("wav: truncated file");
  return v;
}

template <typename T>
void write_le(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

}  // namespace

Waveform load_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("wav: cannot open " + path);

  char tag[4];
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "RIFF", 4) != 0)
    throw std::runtime_error("wav: not a RIFF file: " + path);
  read_le<std::uint32_t>(f);  // riff size, unused
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "WAVE", 4) != 0)
    throw std::runtime_error("wav: not a WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  Waveform wave;

  while (f.read(tag, 4)) {
    const auto chunk_size = read_le<std::uint32_t>(f);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(f);
      channels = read_le<std::uint16_t>(f);
      rate = read_le<std::uint32_t>(f);
      read_le<std::uint32_t>(f);  // byte rate
      read_le<std::uint16_t>(f);  // block align
      bits = read_le<std::uint16_t>(f);
      if (chunk_size > 16) f.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("wav: data before fmt chunk");
      if (format != 1)
        throw std::runtime_error("wav: format=" + std::to_string(format) +
                                 " unsupported (PCM only)");
      if (channels != 1)
        throw std::runtime_error("wav: channels=" + std::to_string(channels) +
                                 " unsupported");
      if (bits != 16)
        throw std::runtime_error("wav: bits=" + std::to_string(bits) +
                                 " unsupported");
      if (rate != 16000)
        throw std::runtime_error("wav: sample_rate=" + std::to_string(rate) +
                                 " unsupported (16000 required)");
      const std::size_t n = chunk_size / 2;
      wave.samples.resize(n);
      wave.sample_rate_hz = static_cast<int>(rate);
      for (std::size_t i = 0; i < n; ++i) {
        const auto s = read_le<std::int16_t>(f);
        wave.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return wave;
    } else {
      f.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw std::runtime_error("wav: no data chunk in " + path);
}

void write_wav(const std::string& path, const Waveform& wave) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("wav: cannot open for write " + path);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(wave.samples.size() * 2);
  f.write("RIFF", 4);
  write_le<std::uint32_t>(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_le<std::uint32_t>(f, 16);
  write_le<std::uint16_t>(f, 1);  // PCM
  write_le<std::uint16_t>(f, 1);  // mono
  write_le<std::uint32_t>(f, static_cast<std::uint32_t>(wave.sample_rate_hz));
  write_le<std::uint32_t>(f,
                          static_cast<std::uint32_t>(wave.sample_rate_hz * 2));
  write_le<std::uint16_t>(f, 2);
  write_le<std::uint16_t>(f, 16);
  f.write("data", 4);
  write_le<std::uint32_t>(f, data_bytes);
  for (double v : wave.samples) {
    double x = v * 32768.0;
    if (x > 32767.0) x = 32767.0;
    if (x < -32768.0) x = -32768.0;
    write_le<std::int16_t>(f, static_cast<std::int16_t>(std::lrint(x)));
  }
  if (!f) throw std::runtime_error("wav: write failed " + path);
}

double mel_of_hz(double f_hz) { return 2595.0 * std::log10(1.0 + f_hz / 700.0); }

double hz_of_mel(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Eigen::MatrixXd stft_power(const Waveform& wave, double frame_len_s,
                           double frame_hop_s) {
  if (!(frame_hop_s > 0.0) || frame_len_s < frame_hop_s)
    throw std::runtime_error("stft: require frame_len_s >= frame_hop_s > 0");
  const int sr = wave.sample_rate_hz;
  const auto window = static_cast<std::size_t>(std::lround(frame_len_s * sr));
  const auto hop = static_cast<std::size_t>(std::lround(frame_hop_s * sr));
  if (wave.samples.size() < window)
    throw std::runtime_error(
        "stft: input too short, need at least " + std::to_string(window) +
        " samples, got " + std::to_string(wave.samples.size()));

  const std::size_t n_frames = (wave.samples.size() - window) / hop + 1;
  const std::size_t fft_size = next_pow2(window);
  const std::size_t n_bins = fft_size / 2 + 1;

  // Periodic Hann window.
  std::vector<double> hann(window);
  for (std::size_t i = 0; i < window; ++i)
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                   static_cast<double>(window));

  Eigen::MatrixXd power(static_cast<Eigen::Index>(n_frames),
                        static_cast<Eigen::Index>(n_bins));
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t i = 0; i < window; ++i)
      buf[i] = wave.samples[t * hop + i] * hann[i];
    for (std::size_t i = window; i < fft_size; ++i) buf[i] = 0.0;
    fft(buf, /*inverse=*/false);
    for (std::size_t k = 0; k < n_bins; ++k)
      power(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) =
          std::norm(buf[k]);
  }
  return power;
}

Eigen::MatrixXd mel_matrix(int fft_size, int n_mels, int sample_rate_hz,
                           double f_min_hz, double f_max_hz) {
  if (!(f_min_hz < f_max_hz) || f_max_hz > sample_rate_hz / 2.0)
    throw std::runtime_error("mel_matrix: require f_min < f_max <= sr/2");
  const int n_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate_hz) / fft_size;

  // n_mels + 2 edge points equally spaced in mel.
  std::vector<double> edges(n_mels + 2);
  const double mel_lo = mel_of_hz(f_min_hz);
  const double mel_hi = mel_of_hz(f_max_hz);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[i] = hz_of_mel(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    bool any = false;
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      if (w > 0.0) {
        fb(m, k) = w;
        any = true;
      }
    }
    if (!any)
      throw std::runtime_error(
          "mel_matrix: filter " + std::to_string(m) +
          " is empty; n_mels too large for fft_size " +
          std::to_string(fft_size));
  }
  return fb;
}

MelSpectrogram lfbe(const Waveform& wave, const FrontendConfig& cfg) {
  const Eigen::MatrixXd power =
      stft_power(wave, cfg.frame_len_s, cfg.frame_hop_s);
  const auto window =
      static_cast<std::size_t>(std::lround(cfg.frame_len_s * wave.sample_rate_hz));
  const int fft_size = static_cast<int>(next_pow2(window));
  const Eigen::MatrixXd fb = mel_matrix(fft_size, cfg.n_mels,
                                        wave.sample_rate_hz, cfg.f_min_hz,
                                        cfg.f_max_hz);
  MelSpectrogram spec;
  spec.values = ((power * fb.transpose()).array() + cfg.log_floor).log();
  spec.frame_hop_s = cfg.frame_hop_s;
  spec.frame_len_s = cfg.frame_len_s;
  spec.n_mels = cfg.n_mels;
  spec.log_floor = cfg.log_floor;
  return spec;
}

}  // namespace wwb
