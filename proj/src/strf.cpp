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

#include "wwb/strf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wwb/ctns.hpp"
#include "wwb/fft.hpp"

namespace wwb {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double scale_response_fourier(double y, double psi, double omega2) {
  const double x = omega2 * y / psi;
  const double x2 = x * x;
  return x2 * std::exp(1.0 - x2);
}

Eigen::VectorXd scale_impulse_response(double psi, double omega2, int n_points,
                                       double channels_per_octave) {
  if (n_points < 2) throw std::runtime_error("strf: scale filter needs >= 2 taps");
  if (psi <= 0.0) throw std::runtime_error("strf: psi must be positive");
  // The sampled scale grid covers [0, channels_per_octave] cyc/oct across the
  // DFT bins; a peak scale beyond that cannot be represented at all.
  const double max_scale = omega2 * channels_per_octave;
  if (psi > max_scale) {
    std::ostringstream msg;
    msg << "strf: psi=" << psi << " beyond the scale grid; maximum "
        << "representable scale is " << max_scale
        << " cyc/oct at channels_per_octave=" << channels_per_octave;
    throw std::runtime_error(msg.str());
  }

  const int n = n_points;
  const double dy = channels_per_octave / n;  // cyc/oct per DFT bin
  std::vector<std::complex<double>> spectrum(n);
  for (int k = 0; k <= n / 2; ++k)
    spectrum[k] = scale_response_fourier(k * dy, psi, omega2);
  for (int k = n / 2 + 1; k < n; ++k) spectrum[k] = spectrum[n - k];

  fft(spectrum, /*inverse=*/true);
  Eigen::VectorXd r(n);
  // Center the even-symmetric response, then force zero DC.
  for (int i = 0; i < n; ++i) r(i) = spectrum[(i + n / 2) % n].real();
  r.array() -= r.mean();
  return r;
}

Eigen::VectorXd rate_impulse_response(double omega, double omega1, double alpha,
                                      int n_points, double frame_hop_s) {
  if (n_points < 2) throw std::runtime_error("strf: rate filter needs >= 2 taps");
  if (omega <= 0.0) throw std::runtime_error("strf: omega must be positive");
  Eigen::VectorXd r(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double t = i * frame_hop_s;
    const double u = omega1 * omega * t;  // dimensionless time
    r(i) = u * u * omega * std::exp(-alpha * u) * std::sin(2.0 * kPi * u);
  }
  return r;
}

Eigen::VectorXcd analytic_signal(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::runtime_error("strf: analytic signal needs length >= 2");
  std::vector<std::complex<double>> buf(n);
  for (int i = 0; i < n; ++i) buf[i] = x(i);
  fft(buf, /*inverse=*/false);
  // Keep DC (and Nyquist for even n), double positive, zero negative.
  const int half = n / 2;
  for (int k = 1; k < n; ++k) {
    if (n % 2 == 0 && k == half) continue;
    if (k < half || (n % 2 == 1 && k <= half))
      buf[k] *= 2.0;
    else
      buf[k] = 0.0;
  }
  fft(buf, /*inverse=*/true);
  Eigen::VectorXcd z(n);
  for (int i = 0; i < n; ++i) z(i) = buf[i];
  return z;
}

StrfFilter build_strf(const StrfParams& p) {
  if (p.phase_phi != 1 && p.phase_phi != -1)
    throw std::runtime_error("strf: phase must be +1 or -1");
  StrfFilter f;
  f.params = p;
  const Eigen::VectorXd rt = rate_impulse_response(
      p.rate_omega, p.omega1, p.alpha, p.filter_len_t, p.frame_hop_s);
  const Eigen::VectorXd st = scale_impulse_response(
      p.scale_psi, p.omega2, p.filter_len_f, p.channels_per_octave);
  Eigen::VectorXcd art = analytic_signal(rt);
  const Eigen::VectorXcd ast = analytic_signal(st);
  if (p.phase_phi == -1) art = art.conjugate();
  f.rate_taps = art;
  f.scale_taps = ast;
  f.taps = art * ast.transpose();  // time axis first
  return f;
}

StrfFilterBank build_bank(const StrfGridConfig& grid) {
  if (grid.scales.empty() || grid.rates.empty() || grid.phases.empty())
    throw std::runtime_error("strf: empty parameter grid");
  StrfFilterBank bank;
  bank.grid = grid;
  for (double psi : grid.scales)
    for (double omega : grid.rates)
      for (int phi : grid.phases) {
        StrfParams p;
        p.scale_psi = psi;
        p.rate_omega = omega;
        p.phase_phi = phi;
        p.alpha = grid.alpha;
        p.omega1 = grid.omega1;
        p.omega2 = grid.omega2;
        p.filter_len_t = grid.filter_len_t;
        p.filter_len_f = grid.filter_len_f;
        p.frame_hop_s = grid.frame_hop_s;
        p.channels_per_octave = grid.channels_per_octave;
        bank.filters.push_back(build_strf(p));
      }
  return bank;
}

void save_bank(const std::string& path, const StrfFilterBank& bank) {
  const auto n = bank.filters.size();
  const int lt = bank.grid.filter_len_t;
  const int lf = bank.grid.filter_len_f;
  CtnsTensor t;
  t.dtype = 1;
  t.dims = {n, 2, static_cast<std::uint64_t>(lt), static_cast<std::uint64_t>(lf)};
  t.data.resize(n * 2 * lt * lf);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& taps = bank.filters[i].taps;
    for (int a = 0; a < lt; ++a)
      for (int b = 0; b < lf; ++b) {
        t.data[((i * 2 + 0) * lt + a) * lf + b] = taps(a, b).real();
        t.data[((i * 2 + 1) * lt + a) * lf + b] = taps(a, b).imag();
      }
  }
  write_ctns(path, t);

  std::ofstream hdr(path + ".hdr");
  if (!hdr) throw std::runtime_error("strf: cannot write header " + path + ".hdr");
  hdr.precision(17);
  const auto& g = bank.grid;
  hdr << "alpha=" << g.alpha << "\nomega1=" << g.omega1
      << "\nomega2=" << g.omega2 << "\nfilter_len_t=" << g.filter_len_t
      << "\nfilter_len_f=" << g.filter_len_f
      << "\nframe_hop_s=" << g.frame_hop_s
      << "\nchannels_per_octave=" << g.channels_per_octave << "\n";
  hdr << "# index scale_psi rate_omega phase_phi\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = bank.filters[i].params;
    hdr << i << " " << p.scale_psi << " " << p.rate_omega << " " << p.phase_phi
        << "\n";
  }
}

StrfFilterBank load_bank(const std::string& path) {
  std::ifstream hdr(path + ".hdr");
  if (!hdr) throw std::runtime_error("strf: missing header " + path + ".hdr");
  StrfGridConfig grid;
  grid.scales.clear();
  grid.rates.clear();
  grid.phases.clear();
  std::string line;
  std::vector<StrfParams> order;
  while (std::getline(hdr, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      const std::string key = line.substr(0, eq);
      const double val = std::stod(line.substr(eq + 1));
      if (key == "alpha") grid.alpha = val;
      else if (key == "omega1") grid.omega1 = val;
      else if (key == "omega2") grid.omega2 = val;
      else if (key == "filter_len_t") grid.filter_len_t = static_cast<int>(val);
      else if (key == "filter_len_f") grid.filter_len_f = static_cast<int>(val);
      else if (key == "frame_hop_s") grid.frame_hop_s = val;
      else if (key == "channels_per_octave") grid.channels_per_octave = val;
      else throw std::runtime_error("strf: unknown header key " + key);
    } else {
      std::istringstream ss(line);
      std::size_t idx;
      StrfParams p;
      ss >> idx >> p.scale_psi >> p.rate_omega >> p.phase_phi;
      if (!ss) throw std::runtime_error("strf: bad header row: " + line);
      order.push_back(p);
    }
  }
  for (const auto& p : order) {
    if (std::find(grid.scales.begin(), grid.scales.end(), p.scale_psi) ==
        grid.scales.end())
      grid.scales.push_back(p.scale_psi);
    if (std::find(grid.rates.begin(), grid.rates.end(), p.rate_omega) ==
        grid.rates.end())
      grid.rates.push_back(p.rate_omega);
    if (std::find(grid.phases.begin(), grid.phases.end(), p.phase_phi) ==
        grid.phases.end())
      grid.phases.push_back(p.phase_phi);
  }

  StrfFilterBank bank = build_bank(grid);
  // Verify the rebuilt taps against the stored tensor so a stale header
  // cannot silently mismatch the payload.
  const CtnsTensor t = read_ctns(path);
  if (t.dims.size() != 4 || t.dims[0] != bank.filters.size() ||
      t.dims[1] != 2 ||
      t.dims[2] != static_cast<std::uint64_t>(grid.filter_len_t) ||
      t.dims[3] != static_cast<std::uint64_t>(grid.filter_len_f))
    throw std::runtime_error("strf: bank tensor shape mismatch in " + path);
  const int lt = grid.filter_len_t, lf = grid.filter_len_f;
  for (std::size_t i = 0; i < bank.filters.size(); ++i)
    for (int a = 0; a < lt; ++a)
      for (int b = 0; b < lf; ++b) {
        const double re = t.data[((i * 2 + 0) * lt + a) * lf + b];
        const double im = t.data[((i * 2 + 1) * lt + a) * lf + b];
        const auto tap = bank.filters[i].taps(a, b);
        if (std::abs(tap.real() - re) > 1e-12 ||
            std::abs(tap.imag() - im) > 1e-12)
          throw std::runtime_error("strf: bank payload disagrees with header " +
                                   path);
      }
  return bank;
}

}  // namespace wwb
