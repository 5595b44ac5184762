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

#include "wwb/cortical.hpp"

#include <cmath>
#include <stdexcept>

namespace wwb {

namespace {

// "same" convolution along rows (time): out(t,:) = sum_a h(a) x(t-a+c, :),
// zero padding, kernel center c = len/2.
Eigen::MatrixXcd conv_time(const Eigen::MatrixXcd& x,
                           const Eigen::VectorXcd& h) {
  const Eigen::Index T = x.rows();
  const Eigen::Index L = h.size();
  const Eigen::Index c = L / 2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(T, x.cols());
  for (Eigen::Index a = 0; a < L; ++a) {
    const Eigen::Index d = a - c;  // out row = in row + d
    const Eigen::Index lo = std::max<Eigen::Index>(0, -d);
    const Eigen::Index hi = std::min<Eigen::Index>(T, T - d);
    if (hi > lo)
      out.middleRows(lo + d, hi - lo) += h(a) * x.middleRows(lo, hi - lo);
  }
  return out;
}

Eigen::MatrixXcd adj_time(const Eigen::MatrixXcd& g,
                          const Eigen::VectorXcd& h) {
  const Eigen::Index T = g.rows();
  const Eigen::Index L = h.size();
  const Eigen::Index c = L / 2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(T, g.cols());
  for (Eigen::Index a = 0; a < L; ++a) {
    const Eigen::Index d = a - c;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -d);
    const Eigen::Index hi = std::min<Eigen::Index>(T, T - d);
    if (hi > lo)
      out.middleRows(lo, hi - lo) +=
          std::conj(h(a)) * g.middleRows(lo + d, hi - lo);
  }
  return out;
}

Eigen::MatrixXcd conv_freq(const Eigen::MatrixXcd& x,
                           const Eigen::VectorXcd& h) {
  const Eigen::Index F = x.cols();
  const Eigen::Index L = h.size();
  const Eigen::Index c = L / 2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(x.rows(), F);
  for (Eigen::Index a = 0; a < L; ++a) {
    const Eigen::Index d = a - c;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -d);
    const Eigen::Index hi = std::min<Eigen::Index>(F, F - d);
    if (hi > lo)
      out.middleCols(lo + d, hi - lo) += h(a) * x.middleCols(lo, hi - lo);
  }
  return out;
}

Eigen::MatrixXcd adj_freq(const Eigen::MatrixXcd& g,
                          const Eigen::VectorXcd& h) {
  const Eigen::Index F = g.cols();
  const Eigen::Index L = h.size();
  const Eigen::Index c = L / 2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(g.rows(), F);
  for (Eigen::Index a = 0; a < L; ++a) {
    const Eigen::Index d = a - c;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -d);
    const Eigen::Index hi = std::min<Eigen::Index>(F, F - d);
    if (hi > lo)
      out.middleCols(lo, hi - lo) +=
          std::conj(h(a)) * g.middleCols(lo + d, hi - lo);
  }
  return out;
}

// Bank layout is scale-major, then rate, then phase (see build_bank).
const StrfFilter& bank_filter(const StrfFilterBank& bank, int s, int r,
                              int p) {
  const int R = static_cast<int>(bank.grid.rates.size());
  const int P = static_cast<int>(bank.grid.phases.size());
  return bank.filters[static_cast<std::size_t>((s * R + r) * P + p)];
}

}  // namespace

CorticalTensor cortical_transform(const Eigen::MatrixXd& x,
                                  const StrfFilterBank& bank,
                                  CorticalTape* tape) {
  const int S = static_cast<int>(bank.grid.scales.size());
  const int R = static_cast<int>(bank.grid.rates.size());
  const int P = static_cast<int>(bank.grid.phases.size());
  if (bank.filters.size() != static_cast<std::size_t>(S * R * P))
    throw std::runtime_error("cortical: bank size does not match its grid");
  if (x.cols() < bank.grid.filter_len_f)
    throw std::runtime_error(
        "cortical: spectrogram has " + std::to_string(x.cols()) +
        " channels, narrower than the filter frequency extent " +
        std::to_string(bank.grid.filter_len_f));
  if (x.rows() < bank.grid.filter_len_t)
    throw std::runtime_error("cortical: need at least " +
                             std::to_string(bank.grid.filter_len_t) +
                             " frames, got " + std::to_string(x.rows()));

  CorticalTensor ct;
  ct.rates = bank.grid.rates;
  ct.scales = bank.grid.scales;
  ct.planes.assign(static_cast<std::size_t>(R * S), Eigen::MatrixXd());
  if (tape) {
    tape->z_win.assign(static_cast<std::size_t>(R * S), Eigen::MatrixXcd());
    tape->phase_win.assign(static_cast<std::size_t>(R * S), Eigen::MatrixXi());
    tape->n_rates = R;
    tape->n_scales = S;
  }

  const Eigen::MatrixXcd xc = x.cast<std::complex<double>>();
  for (int s = 0; s < S; ++s) {
    // The scale factor is shared across rates and phases.
    const Eigen::MatrixXcd zf =
        conv_freq(xc, bank_filter(bank, s, 0, 0).scale_taps);
    for (int r = 0; r < R; ++r) {
      Eigen::MatrixXd best_mag;
      Eigen::MatrixXcd best_z;
      Eigen::MatrixXi best_p;
      for (int p = 0; p < P; ++p) {
        const Eigen::MatrixXcd z =
            conv_time(zf, bank_filter(bank, s, r, p).rate_taps);
        const Eigen::MatrixXd mag = z.cwiseAbs();
        if (p == 0) {
          best_mag = mag;
          best_z = z;
          best_p = Eigen::MatrixXi::Zero(mag.rows(), mag.cols());
        } else {
          for (Eigen::Index i = 0; i < mag.rows(); ++i)
            for (Eigen::Index j = 0; j < mag.cols(); ++j)
              if (mag(i, j) > best_mag(i, j)) {  // ties keep lowest index
                best_mag(i, j) = mag(i, j);
                best_z(i, j) = z(i, j);
                best_p(i, j) = p;
              }
        }
      }
      const std::size_t idx = static_cast<std::size_t>(r) * S + s;
      ct.planes[idx] = std::move(best_mag);
      if (tape) {
        tape->z_win[idx] = std::move(best_z);
        tape->phase_win[idx] = std::move(best_p);
      }
    }
  }
  return ct;
}

Eigen::MatrixXd cortical_backward(const CorticalTape& tape,
                                  const StrfFilterBank& bank,
                                  const std::vector<Eigen::MatrixXd>& g_planes) {
  const int S = tape.n_scales;
  const int R = tape.n_rates;
  const int P = static_cast<int>(bank.grid.phases.size());
  if (g_planes.size() != static_cast<std::size_t>(R * S))
    throw std::runtime_error("cortical: plane gradient count mismatch");

  const Eigen::Index T = g_planes[0].rows();
  const Eigen::Index F = g_planes[0].cols();
  Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(T, F);
  for (int s = 0; s < S; ++s) {
    Eigen::MatrixXcd gzf = Eigen::MatrixXcd::Zero(T, F);
    for (int r = 0; r < R; ++r) {
      const std::size_t idx = static_cast<std::size_t>(r) * S + s;
      const auto& z = tape.z_win[idx];
      const auto& pw = tape.phase_win[idx];
      const auto& gm = g_planes[idx];
      // d|z|/dz with the subgradient at 0 defined as 0.
      Eigen::MatrixXcd gz(T, F);
      for (Eigen::Index i = 0; i < T; ++i)
        for (Eigen::Index j = 0; j < F; ++j) {
          const double m = std::abs(z(i, j));
          gz(i, j) = m > 0.0 ? gm(i, j) * z(i, j) / m
                             : std::complex<double>(0.0, 0.0);
        }
      for (int p = 0; p < P; ++p) {
        Eigen::MatrixXcd gz_p = Eigen::MatrixXcd::Zero(T, F);
        bool any = false;
        for (Eigen::Index i = 0; i < T; ++i)
          for (Eigen::Index j = 0; j < F; ++j)
            if (pw(i, j) == p && gz(i, j) != std::complex<double>(0.0, 0.0)) {
              gz_p(i, j) = gz(i, j);
              any = true;
            }
        if (any) gzf += adj_time(gz_p, bank_filter(bank, s, r, p).rate_taps);
      }
    }
    gx += adj_freq(gzf, bank_filter(bank, s, 0, 0).scale_taps).real();
  }
  return gx;
}

std::vector<Eigen::MatrixXd> rategram(const CorticalTensor& ct,
                                      std::vector<Eigen::MatrixXi>* argmax) {
  const int R = static_cast<int>(ct.rates.size());
  const int S = static_cast<int>(ct.scales.size());
  std::vector<Eigen::MatrixXd> out(R);
  if (argmax) argmax->assign(R, Eigen::MatrixXi());
  for (int r = 0; r < R; ++r) {
    Eigen::MatrixXd best = ct.plane(r, 0);
    Eigen::MatrixXi bi = Eigen::MatrixXi::Zero(best.rows(), best.cols());
    for (int s = 1; s < S; ++s) {
      const auto& pl = ct.plane(r, s);
      for (Eigen::Index i = 0; i < best.rows(); ++i)
        for (Eigen::Index j = 0; j < best.cols(); ++j)
          if (pl(i, j) > best(i, j)) {
            best(i, j) = pl(i, j);
            bi(i, j) = s;
          }
    }
    out[r] = std::move(best);
    if (argmax) (*argmax)[r] = std::move(bi);
  }
  return out;
}

std::vector<Eigen::MatrixXd> scalegram(const CorticalTensor& ct,
                                       std::vector<Eigen::MatrixXi>* argmax) {
  const int R = static_cast<int>(ct.rates.size());
  const int S = static_cast<int>(ct.scales.size());
  std::vector<Eigen::MatrixXd> out(S);
  if (argmax) argmax->assign(S, Eigen::MatrixXi());
  for (int s = 0; s < S; ++s) {
    Eigen::MatrixXd best = ct.plane(0, s);
    Eigen::MatrixXi bi = Eigen::MatrixXi::Zero(best.rows(), best.cols());
    for (int r = 1; r < R; ++r) {
      const auto& pl = ct.plane(r, s);
      for (Eigen::Index i = 0; i < best.rows(); ++i)
        for (Eigen::Index j = 0; j < best.cols(); ++j)
          if (pl(i, j) > best(i, j)) {
            best(i, j) = pl(i, j);
            bi(i, j) = r;
          }
    }
    out[s] = std::move(best);
    if (argmax) (*argmax)[s] = std::move(bi);
  }
  return out;
}

Eigen::MatrixXd frontend_forward(const Eigen::MatrixXd& x,
                                 const StrfFilterBank& bank,
                                 const CorticalFrontendParams& params,
                                 RunMode mode, RngStream& rng,
                                 FrontendTape* tape) {
  const Eigen::Index T = x.rows();
  const Eigen::Index F = x.cols();
  const int R = static_cast<int>(bank.grid.rates.size());
  const int S = static_cast<int>(bank.grid.scales.size());
  if (params.out_channels != F)
    throw std::runtime_error(
        "frontend: out_channels must equal the mel channel count for the "
        "residual addition (out_channels=" +
        std::to_string(params.out_channels) +
        ", n_mels=" + std::to_string(F) + ")");
  if (params.mix.W.cols() != F * (R + S))
    throw std::runtime_error("frontend: mix weights expect " +
                             std::to_string(params.mix.W.cols()) +
                             " channels, got " + std::to_string(F * (R + S)));

  FrontendTape local;
  FrontendTape& tp = tape ? *tape : local;

  const CorticalTensor ct = cortical_transform(x, bank, &tp.cortical);
  const auto rg = rategram(ct, &tp.rate_argmax);
  const auto sg = scalegram(ct, &tp.scale_argmax);

  // Channel layout: rategram channels first (r-major over frequency),
  // then scalegram channels (s-major over frequency).
  Eigen::MatrixXd concat(T, F * (R + S));
  for (int r = 0; r < R; ++r) concat.middleCols(r * F, F) = rg[r];
  for (int s = 0; s < S; ++s) concat.middleCols((R + s) * F, F) = sg[s];

  Eigen::MatrixXd dropped;
  if (mode == RunMode::kTrain && params.dropout_feature_p > 0.0) {
    tp.feat_mask = dropout_mask(T, concat.cols(), params.dropout_feature_p, rng);
    dropped = concat.cwiseProduct(tp.feat_mask);
  } else {
    tp.feat_mask.resize(0, 0);
    dropped = concat;
  }

  Eigen::MatrixXd mixed = affine_forward(dropped, params.mix);

  if (mode == RunMode::kTrain && params.dropout_residual_p > 0.0) {
    tp.res_mask = dropout_mask(T, F, params.dropout_residual_p, rng);
    mixed += x.cwiseProduct(tp.res_mask);
  } else {
    tp.res_mask.resize(0, 0);
    mixed += x;
  }

  const Eigen::MatrixXd out =
      prenet_forward(mixed, params.prenet, mode, rng, &tp.prenet);
  tp.concat = std::move(concat);
  tp.concat_dropped = std::move(dropped);
  tp.valid = true;
  return out;
}

Eigen::MatrixXd frontend_backward(const FrontendTape& tape,
                                  const StrfFilterBank& bank,
                                  const CorticalFrontendParams& params,
                                  const Eigen::MatrixXd& g,
                                  CorticalFrontendParams* g_params) {
  if (!tape.valid)
    throw std::runtime_error("frontend: backward without a matching forward");
  const int R = static_cast<int>(bank.grid.rates.size());
  const int S = static_cast<int>(bank.grid.scales.size());
  const Eigen::Index T = tape.concat.rows();
  const Eigen::Index F = tape.concat.cols() / (R + S);

  const Eigen::MatrixXd g_mixed =
      prenet_backward(tape.prenet, params.prenet, g, &g_params->prenet);

  // Residual branch.
  Eigen::MatrixXd gx = tape.res_mask.size() > 0
                           ? g_mixed.cwiseProduct(tape.res_mask)
                           : g_mixed;

  Eigen::MatrixXd g_dropped =
      affine_backward(tape.concat_dropped, params.mix, g_mixed, &g_params->mix);
  if (tape.feat_mask.size() > 0)
    g_dropped = g_dropped.cwiseProduct(tape.feat_mask);

  // Route concat gradients through the two max-pools back onto the planes.
  std::vector<Eigen::MatrixXd> g_planes(
      static_cast<std::size_t>(R * S), Eigen::MatrixXd::Zero(T, F));
  for (int r = 0; r < R; ++r) {
    const Eigen::MatrixXd grg = g_dropped.middleCols(r * F, F);
    const auto& am = tape.rate_argmax[r];
    for (Eigen::Index i = 0; i < T; ++i)
      for (Eigen::Index j = 0; j < F; ++j)
        g_planes[static_cast<std::size_t>(r) * S + am(i, j)](i, j) += grg(i, j);
  }
  for (int s = 0; s < S; ++s) {
    const Eigen::MatrixXd gsg = g_dropped.middleCols((R + s) * F, F);
    const auto& am = tape.scale_argmax[s];
    for (Eigen::Index i = 0; i < T; ++i)
      for (Eigen::Index j = 0; j < F; ++j)
        g_planes[static_cast<std::size_t>(am(i, j)) * S + s](i, j) += gsg(i, j);
  }

  gx += cortical_backward(tape.cortical, bank, g_planes);
  return gx;
}

}  // namespace wwb
