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

#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "wwb/audio.hpp"

namespace {

wwb::Waveform sine(double f_hz, double seconds, double amp = 0.5,
                   int sr = 16000) {
  wwb::Waveform w;
  w.sample_rate_hz = sr;
  w.samples.resize(static_cast<std::size_t>(seconds * sr));
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * f_hz *
                                  static_cast<double>(i) / sr);
  return w;
}

}  // namespace

TEST_CASE("mel scale matches the published anchor points") {
  // 1 kHz maps to roughly 1000 mel by construction of the 2595 constant.
  CHECK(wwb::mel_of_hz(1000.0) == doctest::Approx(999.99).epsilon(1e-3));
  CHECK(wwb::mel_of_hz(0.0) == 0.0);
  CHECK(wwb::hz_of_mel(wwb::mel_of_hz(440.0)) == doctest::Approx(440.0));
}

TEST_CASE("frame count follows the hop arithmetic") {
  // 1 s at 25 ms window / 10 ms hop: floor((16000-400)/160)+1 = 98.
  const auto p = wwb::stft_power(sine(1000.0, 1.0), 0.025, 0.010);
  CHECK(p.rows() == 98);
  // 400-sample window -> fft_size 512 -> 257 one-sided bins.
  CHECK(p.cols() == 257);
}

TEST_CASE("stft power concentrates at the tone bin, matching a direct DFT") {
  const wwb::Waveform w = sine(1000.0, 0.2);
  const auto p = wwb::stft_power(w, 0.025, 0.010);
  Eigen::Index peak;
  p.row(3).maxCoeff(&peak);
  // Bin spacing 16000/512 = 31.25 Hz; 1000 Hz lands at bin 32.
  CHECK(peak == 32);

  // Direct DFT of the windowed frame 3 at the peak bin, periodic Hann.
  const int win = 400, fft = 512, hop = 160;
  std::complex<double> acc = 0.0;
  for (int n = 0; n < win; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / win);
    const double x = w.samples[static_cast<std::size_t>(3 * hop + n)] * hann;
    const double ang = -2.0 * std::numbers::pi * 32.0 * n / fft;
    acc += x * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  CHECK(p(3, 32) == doctest::Approx(std::norm(acc)).epsilon(1e-9));
}

TEST_CASE("lfbe shifts by log 16 when the waveform is scaled by 4") {
  wwb::FrontendConfig cfg;
  cfg.n_mels = 16;
  wwb::Waveform w = sine(1000.0, 0.3);
  const auto a = wwb::lfbe(w, cfg);
  for (auto& s : w.samples) s *= 4.0 / 3.0;  // stay within [-1, 1]
  const auto b = wwb::lfbe(w, cfg);
  // Filters that actually carry the tone shift by log((4/3)^2) exactly;
  // others sit at the floor.
  const double shift = std::log(16.0 / 9.0);
  bool checked = false;
  for (Eigen::Index t = 0; t < a.values.rows(); ++t)
    for (Eigen::Index m = 0; m < a.values.cols(); ++m)
      if (a.values(t, m) > std::log(cfg.log_floor) + 20.0) {
        CHECK(b.values(t, m) - a.values(t, m) ==
              doctest::Approx(shift).epsilon(1e-6));
        checked = true;
      }
  CHECK(checked);
}

TEST_CASE("mel filters partition the band") {
  const auto fb = wwb::mel_matrix(512, 16, 16000, 60.0, 7600.0);
  CHECK(fb.rows() == 16);
  CHECK(fb.cols() == 257);
  CHECK(fb.minCoeff() >= 0.0);
  // Every filter is nonempty; discrete bins land near, not on, the apex.
  for (Eigen::Index m = 0; m < fb.rows(); ++m) {
    CHECK(fb.row(m).maxCoeff() > 0.5);
    CHECK(fb.row(m).maxCoeff() <= 1.0);
  }
}

TEST_CASE("wav io round-trips within quantization") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "wwb_roundtrip.wav";
  const wwb::Waveform w = sine(440.0, 0.05);
  wwb::write_wav(p.string(), w);
  const wwb::Waveform r = wwb::load_wav(p.string());
  REQUIRE(r.samples.size() == w.samples.size());
  CHECK(r.sample_rate_hz == 16000);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
  fs::remove(p);
}

TEST_CASE("wav reader names the offending field") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "wwb_bad.wav";
  {
    // Stereo header, no payload.
    std::ofstream os(p, std::ios::binary);
    auto u32 = [&](std::uint32_t v) {
      os.write(reinterpret_cast<const char*>(&v), 4);
    };
    auto u16 = [&](std::uint16_t v) {
      os.write(reinterpret_cast<const char*>(&v), 2);
    };
    os.write("RIFF", 4);
    u32(36);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    u32(16);
    u16(1);      // PCM
    u16(2);      // channels
    u32(16000);  // sample rate
    u32(64000);
    u16(4);
    u16(16);
    os.write("data", 4);
    u32(0);
  }
  CHECK_THROWS_WITH_AS(wwb::load_wav(p.string()),
                       doctest::Contains("channels"), std::runtime_error);
  fs::remove(p);
}

TEST_CASE("too-short input is rejected with the minimum length") {
  wwb::Waveform w = sine(440.0, 0.01);  // shorter than one 25 ms window
  CHECK_THROWS_AS(wwb::stft_power(w, 0.025, 0.010), std::runtime_error);
}
