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

#include "wwb/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wwb/ctns.hpp"

namespace wwb {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  const double s = std::sqrt(2.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = s * rng.normal();
  return m;
}

AffineParams init_affine(int out, int in, RngStream& rng) {
  return {glorot(out, in, rng), Eigen::VectorXd::Zero(out)};
}

HighwayParams init_highway(int width, RngStream& rng) {
  HighwayParams p;
  p.Wt = glorot(width, width, rng);
  // Negative gate bias starts the block near the carry path.
  p.bt = Eigen::VectorXd::Constant(width, -1.0);
  p.Wh = glorot(width, width, rng);
  p.bh = Eigen::VectorXd::Zero(width);
  return p;
}

}  // namespace

std::string architecture_name(Architecture a) {
  return a == Architecture::kBaseline ? "baseline" : "cortical";
}

Architecture architecture_from_name(const std::string& name) {
  if (name == "baseline") return Architecture::kBaseline;
  if (name == "cortical") return Architecture::kCortical;
  throw std::runtime_error("network: unknown architecture '" + name + "'");
}

Eigen::MatrixXd highway_forward(const Eigen::MatrixXd& x,
                                const HighwayParams& p, HighwayTape* tape) {
  const Eigen::MatrixXd t = sigmoid(affine_forward(x, {p.Wt, p.bt}));
  const Eigen::MatrixXd h = affine_forward(x, {p.Wh, p.bh}).array().tanh();
  Eigen::MatrixXd y =
      t.cwiseProduct(h) + (1.0 - t.array()).matrix().cwiseProduct(x);
  if (tape) {
    tape->x = x;
    tape->t = t;
    tape->h = h;
  }
  return y;
}

Eigen::MatrixXd highway_backward(const HighwayTape& tape,
                                 const HighwayParams& p,
                                 const Eigen::MatrixXd& g, HighwayParams* gp) {
  const Eigen::MatrixXd gh = g.cwiseProduct(tape.t);
  const Eigen::MatrixXd gt = g.cwiseProduct(tape.h - tape.x);
  Eigen::MatrixXd gx = g.cwiseProduct((1.0 - tape.t.array()).matrix());

  const Eigen::MatrixXd g_pre_t =
      gt.cwiseProduct(tape.t.cwiseProduct((1.0 - tape.t.array()).matrix()));
  const Eigen::MatrixXd g_pre_h =
      gh.cwiseProduct((1.0 - tape.h.array().square()).matrix());

  gp->Wt.noalias() += g_pre_t.transpose() * tape.x;
  gp->bt.noalias() += g_pre_t.colwise().sum().transpose();
  gp->Wh.noalias() += g_pre_h.transpose() * tape.x;
  gp->bh.noalias() += g_pre_h.colwise().sum().transpose();
  gx.noalias() += g_pre_t * p.Wt;
  gx.noalias() += g_pre_h * p.Wh;
  return gx;
}

Eigen::MatrixXd bottleneck_context(const Eigen::MatrixXd& h, int left,
                                   int right) {
  const Eigen::Index T = h.rows();
  const Eigen::Index b = h.cols();
  const int window = left + 1 + right;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T, window * b);
  for (int k = 0; k < window; ++k) {
    const int offset = k - left;  // source frame = t + offset
    const Eigen::Index lo = std::max<Eigen::Index>(0, -offset);
    const Eigen::Index hi = std::min<Eigen::Index>(T, T - offset);
    if (hi > lo)
      out.block(lo, k * b, hi - lo, b) = h.middleRows(lo + offset, hi - lo);
  }
  return out;
}

Eigen::MatrixXd bottleneck_context_backward(const Eigen::MatrixXd& g,
                                            Eigen::Index frames, int width,
                                            int left, int right) {
  const int window = left + 1 + right;
  Eigen::MatrixXd gh = Eigen::MatrixXd::Zero(frames, width);
  for (int k = 0; k < window; ++k) {
    const int offset = k - left;
    const Eigen::Index lo = std::max<Eigen::Index>(0, -offset);
    const Eigen::Index hi = std::min<Eigen::Index>(frames, frames - offset);
    if (hi > lo)
      gh.middleRows(lo + offset, hi - lo) += g.block(lo, k * width, hi - lo,
                                                     width);
  }
  return gh;
}

ModelParams init_params(const ModelConfig& cfg,
                        std::shared_ptr<const StrfFilterBank> bank,
                        RngStream rng) {
  ModelParams p;
  p.cfg = cfg;
  p.prenet.a1 = init_affine(cfg.prenet_hidden, cfg.n_mels, rng);
  p.prenet.a2 = init_affine(cfg.highway_width, cfg.prenet_hidden, rng);
  p.prenet.dropout_p = cfg.prenet_dropout;
  for (int i = 0; i < cfg.n_feature_blocks; ++i)
    p.feature_blocks.push_back(init_highway(cfg.highway_width, rng));
  p.bottleneck = init_affine(cfg.bottleneck_width, cfg.highway_width, rng);
  for (int i = 0; i < cfg.n_classifier_blocks; ++i)
    p.classifier_blocks.push_back(init_highway(cfg.classifier_width(), rng));
  p.output = init_affine(kNumClasses, cfg.classifier_width(), rng);

  if (cfg.arch == Architecture::kCortical) {
    if (!bank)
      throw std::runtime_error("network: cortical architecture needs a bank");
    const int R = static_cast<int>(bank->grid.rates.size());
    const int S = static_cast<int>(bank->grid.scales.size());
    CorticalFrontendParams fe;
    fe.out_channels = cfg.n_mels;
    fe.mix = init_affine(cfg.n_mels, cfg.n_mels * (R + S), rng);
    fe.prenet.a1 = init_affine(cfg.frontend_prenet_hidden, cfg.n_mels, rng);
    fe.prenet.a2 = init_affine(cfg.n_mels, cfg.frontend_prenet_hidden, rng);
    fe.prenet.dropout_p = 0.0;
    fe.dropout_residual_p = cfg.dropout_residual_p;
    fe.dropout_feature_p = cfg.dropout_feature_p;
    p.frontend = std::move(fe);
    p.bank = std::move(bank);
  }
  return p;
}

Eigen::MatrixXd forward(const MelSpectrogram& spec, const ModelParams& params,
                        RunMode mode, RngStream rng, Tape* tape) {
  if (spec.values.cols() != params.cfg.n_mels)
    throw std::runtime_error("network: spectrogram has " +
                             std::to_string(spec.values.cols()) +
                             " mel channels, model expects " +
                             std::to_string(params.cfg.n_mels));
  Tape local;
  Tape& tp = tape ? *tape : local;
  tp.mode = mode;
  tp.input = spec.values;

  Eigen::MatrixXd x = spec.values;
  if (params.cfg.arch == Architecture::kCortical) {
    RngStream fe_rng = rng.derive(0xfe);
    x = frontend_forward(x, *params.bank, *params.frontend, mode, fe_rng,
                         &tp.frontend);
  }

  RngStream pn_rng = rng.derive(0x11);
  x = prenet_forward(x, params.prenet, mode, pn_rng, &tp.prenet);

  tp.feature_blocks.resize(params.feature_blocks.size());
  for (std::size_t i = 0; i < params.feature_blocks.size(); ++i)
    x = highway_forward(x, params.feature_blocks[i], &tp.feature_blocks[i]);

  tp.bottleneck_in = x;
  Eigen::MatrixXd bn = affine_forward(x, params.bottleneck);
  Eigen::MatrixXd ctx = bottleneck_context(bn, params.cfg.context_left,
                                           params.cfg.context_right);
  tp.context_out = ctx;

  tp.classifier_blocks.resize(params.classifier_blocks.size());
  for (std::size_t i = 0; i < params.classifier_blocks.size(); ++i)
    ctx = highway_forward(ctx, params.classifier_blocks[i],
                          &tp.classifier_blocks[i]);

  tp.output_in = ctx;
  tp.valid = true;
  return affine_forward(ctx, params.output);
}

GradientBundle zero_gradients(const ModelParams& params) {
  GradientBundle g;
  auto zero_affine = [](const AffineParams& p) {
    return AffineParams{Eigen::MatrixXd::Zero(p.W.rows(), p.W.cols()),
                        Eigen::VectorXd::Zero(p.b.size())};
  };
  auto zero_highway = [](const HighwayParams& p) {
    HighwayParams z;
    z.Wt = Eigen::MatrixXd::Zero(p.Wt.rows(), p.Wt.cols());
    z.bt = Eigen::VectorXd::Zero(p.bt.size());
    z.Wh = Eigen::MatrixXd::Zero(p.Wh.rows(), p.Wh.cols());
    z.bh = Eigen::VectorXd::Zero(p.bh.size());
    return z;
  };
  g.prenet.a1 = zero_affine(params.prenet.a1);
  g.prenet.a2 = zero_affine(params.prenet.a2);
  g.prenet.dropout_p = params.prenet.dropout_p;
  for (const auto& b : params.feature_blocks)
    g.feature_blocks.push_back(zero_highway(b));
  g.bottleneck = zero_affine(params.bottleneck);
  for (const auto& b : params.classifier_blocks)
    g.classifier_blocks.push_back(zero_highway(b));
  g.output = zero_affine(params.output);
  if (params.frontend) {
    CorticalFrontendParams fe;
    fe.mix = zero_affine(params.frontend->mix);
    fe.prenet.a1 = zero_affine(params.frontend->prenet.a1);
    fe.prenet.a2 = zero_affine(params.frontend->prenet.a2);
    fe.prenet.dropout_p = params.frontend->prenet.dropout_p;
    fe.dropout_residual_p = params.frontend->dropout_residual_p;
    fe.dropout_feature_p = params.frontend->dropout_feature_p;
    fe.out_channels = params.frontend->out_channels;
    g.frontend = std::move(fe);
  }
  return g;
}

BackwardResult backward(const Tape& tape, const ModelParams& params,
                        const Eigen::MatrixXd& upstream) {
  if (!tape.valid)
    throw std::runtime_error("network: backward without a matching forward tape");
  BackwardResult res;
  res.grads = zero_gradients(params);

  Eigen::MatrixXd g =
      affine_backward(tape.output_in, params.output, upstream,
                      &res.grads.output);
  for (std::size_t i = params.classifier_blocks.size(); i-- > 0;)
    g = highway_backward(tape.classifier_blocks[i], params.classifier_blocks[i],
                         g, &res.grads.classifier_blocks[i]);

  g = bottleneck_context_backward(g, tape.bottleneck_in.rows(),
                                  params.cfg.bottleneck_width,
                                  params.cfg.context_left,
                                  params.cfg.context_right);
  g = affine_backward(tape.bottleneck_in, params.bottleneck, g,
                      &res.grads.bottleneck);

  for (std::size_t i = params.feature_blocks.size(); i-- > 0;)
    g = highway_backward(tape.feature_blocks[i], params.feature_blocks[i], g,
                         &res.grads.feature_blocks[i]);

  g = prenet_backward(tape.prenet, params.prenet, g, &res.grads.prenet);

  if (params.cfg.arch == Architecture::kCortical)
    g = frontend_backward(tape.frontend, *params.bank, *params.frontend, g,
                          &*res.grads.frontend);

  res.input_grad = std::move(g);
  return res;
}

namespace {

template <typename Fn>
void visit_affine(const std::string& name, AffineParams& p, Fn&& fn) {
  fn(name + ".W", p.W.data(), static_cast<std::size_t>(p.W.size()));
  fn(name + ".b", p.b.data(), static_cast<std::size_t>(p.b.size()));
}

template <typename Fn>
void visit_highway(const std::string& name, HighwayParams& p, Fn&& fn) {
  fn(name + ".Wt", p.Wt.data(), static_cast<std::size_t>(p.Wt.size()));
  fn(name + ".bt", p.bt.data(), static_cast<std::size_t>(p.bt.size()));
  fn(name + ".Wh", p.Wh.data(), static_cast<std::size_t>(p.Wh.size()));
  fn(name + ".bh", p.bh.data(), static_cast<std::size_t>(p.bh.size()));
}

template <typename Fn>
void visit_all(ModelParams& params, Fn&& fn) {
  visit_affine("prenet.a1", params.prenet.a1, fn);
  visit_affine("prenet.a2", params.prenet.a2, fn);
  for (std::size_t i = 0; i < params.feature_blocks.size(); ++i)
    visit_highway("feature." + std::to_string(i), params.feature_blocks[i], fn);
  visit_affine("bottleneck", params.bottleneck, fn);
  for (std::size_t i = 0; i < params.classifier_blocks.size(); ++i)
    visit_highway("classifier." + std::to_string(i),
                  params.classifier_blocks[i], fn);
  visit_affine("output", params.output, fn);
  if (params.frontend) {
    visit_affine("frontend.mix", params.frontend->mix, fn);
    visit_affine("frontend.prenet.a1", params.frontend->prenet.a1, fn);
    visit_affine("frontend.prenet.a2", params.frontend->prenet.a2, fn);
  }
}

template <typename Fn>
void visit_all_grads(GradientBundle& g, Fn&& fn) {
  visit_affine("prenet.a1", g.prenet.a1, fn);
  visit_affine("prenet.a2", g.prenet.a2, fn);
  for (std::size_t i = 0; i < g.feature_blocks.size(); ++i)
    visit_highway("feature." + std::to_string(i), g.feature_blocks[i], fn);
  visit_affine("bottleneck", g.bottleneck, fn);
  for (std::size_t i = 0; i < g.classifier_blocks.size(); ++i)
    visit_highway("classifier." + std::to_string(i), g.classifier_blocks[i],
                  fn);
  visit_affine("output", g.output, fn);
  if (g.frontend) {
    visit_affine("frontend.mix", g.frontend->mix, fn);
    visit_affine("frontend.prenet.a1", g.frontend->prenet.a1, fn);
    visit_affine("frontend.prenet.a2", g.frontend->prenet.a2, fn);
  }
}

}  // namespace

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  visit_all(const_cast<ModelParams&>(*this),
            [&n](const std::string&, double*, std::size_t k) { n += k; });
  return n;
}

void for_each_param(ModelParams& params, const ParamVisitor& fn) {
  visit_all(params, fn);
}

void for_each_grad(GradientBundle& grads, const ParamVisitor& fn) {
  visit_all_grads(grads, fn);
}

void for_each_param(const ModelParams& params, GradientBundle& grads,
                    const std::function<void(const std::string&, double*,
                                             double*, std::size_t)>& fn) {
  std::vector<std::pair<std::string, std::pair<double*, std::size_t>>> ps, gs;
  visit_all(const_cast<ModelParams&>(params),
            [&ps](const std::string& name, double* d, std::size_t n) {
              ps.push_back({name, {d, n}});
            });
  visit_all_grads(grads,
                  [&gs](const std::string& name, double* d, std::size_t n) {
                    gs.push_back({name, {d, n}});
                  });
  if (ps.size() != gs.size())
    throw std::runtime_error("network: gradient bundle does not mirror params");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].first != gs[i].first || ps[i].second.second != gs[i].second.second)
      throw std::runtime_error("network: gradient bundle mismatch at " +
                               ps[i].first);
    fn(ps[i].first, ps[i].second.first, gs[i].second.first,
       ps[i].second.second);
  }
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const std::string& config_hash) {
  std::ofstream blob(path, std::ios::binary);
  if (!blob) throw std::runtime_error("checkpoint: cannot write " + path);
  std::ofstream man(path + ".manifest");
  if (!man)
    throw std::runtime_error("checkpoint: cannot write " + path + ".manifest");
  man.precision(17);
  const auto& cfg = params.cfg;
  man << "arch=" << architecture_name(cfg.arch) << "\n"
      << "config_hash=" << config_hash << "\n"
      << "n_mels=" << cfg.n_mels << "\n"
      << "prenet_hidden=" << cfg.prenet_hidden << "\n"
      << "highway_width=" << cfg.highway_width << "\n"
      << "n_feature_blocks=" << cfg.n_feature_blocks << "\n"
      << "bottleneck_width=" << cfg.bottleneck_width << "\n"
      << "context_left=" << cfg.context_left << "\n"
      << "context_right=" << cfg.context_right << "\n"
      << "n_classifier_blocks=" << cfg.n_classifier_blocks << "\n"
      << "prenet_dropout=" << cfg.prenet_dropout << "\n"
      << "frontend_prenet_hidden=" << cfg.frontend_prenet_hidden << "\n"
      << "dropout_residual_p=" << cfg.dropout_residual_p << "\n"
      << "dropout_feature_p=" << cfg.dropout_feature_p << "\n";

  std::uint64_t offset = 0;
  visit_all(const_cast<ModelParams&>(params),
            [&](const std::string& name, double* data, std::size_t n) {
              CtnsTensor t;
              t.dtype = 1;
              t.dims = {n};
              t.data.assign(data, data + n);
              man << "tensor " << name << " " << n << " " << offset << "\n";
              write_ctns(blob, t);
              offset = static_cast<std::uint64_t>(blob.tellp());
            });
}

ModelParams load_checkpoint(const std::string& path,
                            std::shared_ptr<const StrfFilterBank> bank,
                            std::string* config_hash) {
  std::ifstream man(path + ".manifest");
  if (!man)
    throw std::runtime_error("checkpoint: missing manifest " + path +
                             ".manifest");
  ModelConfig cfg;
  std::string hash;
  std::vector<std::pair<std::string, std::uint64_t>> tensors;
  std::string line;
  while (std::getline(man, line)) {
    if (line.empty()) continue;
    if (line.rfind("tensor ", 0) == 0) {
      std::istringstream ss(line.substr(7));
      std::string name;
      std::uint64_t n, off;
      ss >> name >> n >> off;
      if (!ss) throw std::runtime_error("checkpoint: bad tensor row: " + line);
      tensors.push_back({name, off});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("checkpoint: bad manifest line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "arch") cfg.arch = architecture_from_name(val);
    else if (key == "config_hash") hash = val;
    else if (key == "n_mels") cfg.n_mels = std::stoi(val);
    else if (key == "prenet_hidden") cfg.prenet_hidden = std::stoi(val);
    else if (key == "highway_width") cfg.highway_width = std::stoi(val);
    else if (key == "n_feature_blocks") cfg.n_feature_blocks = std::stoi(val);
    else if (key == "bottleneck_width") cfg.bottleneck_width = std::stoi(val);
    else if (key == "context_left") cfg.context_left = std::stoi(val);
    else if (key == "context_right") cfg.context_right = std::stoi(val);
    else if (key == "n_classifier_blocks")
      cfg.n_classifier_blocks = std::stoi(val);
    else if (key == "prenet_dropout") cfg.prenet_dropout = std::stod(val);
    else if (key == "frontend_prenet_hidden")
      cfg.frontend_prenet_hidden = std::stoi(val);
    else if (key == "dropout_residual_p")
      cfg.dropout_residual_p = std::stod(val);
    else if (key == "dropout_feature_p") cfg.dropout_feature_p = std::stod(val);
    else throw std::runtime_error("checkpoint: unknown manifest key " + key);
  }
  if (config_hash) *config_hash = hash;

  ModelParams params = init_params(cfg, std::move(bank), RngStream(0));
  std::ifstream blob(path, std::ios::binary);
  if (!blob) throw std::runtime_error("checkpoint: missing blob " + path);
  std::size_t idx = 0;
  visit_all(params, [&](const std::string& name, double* data, std::size_t n) {
    if (idx >= tensors.size() || tensors[idx].first != name)
      throw std::runtime_error("checkpoint: manifest order mismatch at " + name);
    blob.seekg(static_cast<std::streamoff>(tensors[idx].second));
    const CtnsTensor t = read_ctns(blob);
    if (t.num_elements() != n)
      throw std::runtime_error("checkpoint: tensor size mismatch at " + name);
    std::copy(t.data.begin(), t.data.end(), data);
    ++idx;
  });
  if (idx != tensors.size())
    throw std::runtime_error("checkpoint: extra tensors in manifest");
  return params;
}

}  // namespace wwb
