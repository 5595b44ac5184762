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
#include <numbers>

#include "wwb/strf.hpp"

TEST_CASE("default grid yields 48 filters of 32x32 taps, scale-major") {
  const wwb::StrfFilterBank bank = wwb::build_bank(wwb::StrfGridConfig{});
  REQUIRE(bank.filters.size() == 48);
  for (const auto& f : bank.filters) {
    CHECK(f.taps.rows() == 32);
    CHECK(f.taps.cols() == 32);
  }
  // Ordering: scale outer, rate middle, phase inner.
  CHECK(bank.filters[0].params.scale_psi == 0.25);
  CHECK(bank.filters[0].params.rate_omega == 4.0);
  CHECK(bank.filters[0].params.phase_phi == 1);
  CHECK(bank.filters[1].params.phase_phi == -1);
  CHECK(bank.filters[2].params.rate_omega == 8.0);
  CHECK(bank.filters[8].params.scale_psi == 0.5);
}

TEST_CASE("phase pairs are conjugate in rate: equal elementwise magnitudes") {
  const wwb::StrfFilterBank bank = wwb::build_bank(wwb::StrfGridConfig{});
  for (std::size_t i = 0; i + 1 < bank.filters.size(); i += 2) {
    const auto& up = bank.filters[i].taps;
    const auto& down = bank.filters[i + 1].taps;
    CHECK((up.cwiseAbs() - down.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("scale transfer function peaks at 1 at its preferred scale") {
  for (double psi : {0.25, 1.0, 8.0}) {
    // Unit argument: omega2 * y / psi = 1.
    CHECK(wwb::scale_response_fourier(psi, psi, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wwb::scale_response_fourier(0.0, psi, 1.0) == 0.0);
    // Strictly below 1 away from the peak.
    CHECK(wwb::scale_response_fourier(1.7 * psi, psi, 1.0) < 1.0);
  }
}

TEST_CASE("rate impulse response starts at zero and oscillates at the rate") {
  const auto r = wwb::rate_impulse_response(8.0, 1.0, 3.5, 64, 0.010);
  CHECK(r(0) == 0.0);
  CHECK(r.cwiseAbs().maxCoeff() > 0.0);
  // Zero crossings at u = k/2, i.e. every 1/(2*omega) seconds = 6.25 frames.
  // sin(2*pi*u) changes sign across each crossing; check the first one.
  // u(t) = 8 t; crossing at t = 1/16 s = frame 6.25.
  CHECK(r(6) * r(7) <= 0.0);
}

TEST_CASE("scale impulse response has zero mean and even spectrum symmetry") {
  const auto s = wwb::scale_impulse_response(1.0, 1.0, 32, 9.17);
  CHECK(std::abs(s.mean()) < 1e-9);
  CHECK(s.size() == 32);
  // Real impulse response of a real, even transfer function: symmetric
  // about the center tap.
  for (int k = 1; k < 16; ++k)
    CHECK(s(16 - k) == doctest::Approx(s(16 + k)).epsilon(1e-9));
}

TEST_CASE("scale filters beyond the channel density are rejected") {
  CHECK_THROWS_AS(wwb::scale_impulse_response(8.0, 1.0, 32, 4.0),
                  std::runtime_error);
  // At the default density 9.17 channels/octave, psi = 8 is representable.
  CHECK_NOTHROW(wwb::scale_impulse_response(8.0, 1.0, 32, 9.17));
}

TEST_CASE("scale impulse response transfer matches the analytic curve") {
  // Independent oracle: DFT the impulse response back and compare with the
  // closed-form transfer function at each positive grid frequency.
  const int n = 64;
  const double c = 9.17, psi = 2.0;
  const auto h = wwb::scale_impulse_response(psi, 1.0, n, c);
  for (int k = 1; k < n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int m = 0; m < n; ++m) {
      const double ang = -2.0 * std::numbers::pi * k * m / n;
      acc += h(m) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    const double y = c * k / n;  // cycles/octave at DFT bin k
    const double expected = wwb::scale_response_fourier(y, psi, 1.0);
    // The centering rotation only changes the phase, not the magnitude;
    // DC removal shifts every bin by the tiny subtracted mean.
    CHECK(std::abs(acc) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("analytic signal preserves the real part and kills negatives") {
  Eigen::VectorXd x(16);
  for (int i = 0; i < 16; ++i) x(i) = std::cos(0.7 * i) + 0.2 * i;
  const auto a = wwb::analytic_signal(x);
  for (int i = 0; i < 16; ++i)
    CHECK(a(i).real() == doctest::Approx(x(i)).epsilon(1e-10));
}

TEST_CASE("taps factor as the rate/scale outer product") {
  const wwb::StrfFilterBank bank = wwb::build_bank(wwb::StrfGridConfig{});
  const auto& f = bank.filters[10];
  const Eigen::MatrixXcd outer = f.rate_taps * f.scale_taps.transpose();
  CHECK((outer - f.taps).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bank round-trips through disk bit-exactly") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "wwb_bank.ctns";
  wwb::StrfGridConfig grid;
  grid.scales = {0.5, 2.0};
  grid.rates = {4.0, 16.0};
  const wwb::StrfFilterBank bank = wwb::build_bank(grid);
  wwb::save_bank(p.string(), bank);
  const wwb::StrfFilterBank loaded = wwb::load_bank(p.string());
  REQUIRE(loaded.filters.size() == bank.filters.size());
  for (std::size_t i = 0; i < bank.filters.size(); ++i)
    CHECK((loaded.filters[i].taps - bank.filters[i].taps)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  fs::remove(p);
  fs::remove(p.string() + ".hdr");
}
