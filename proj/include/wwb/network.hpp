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

#ifndef WWB_NETWORK_HPP_
#define WWB_NETWORK_HPP_

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wwb/audio.hpp"
#include "wwb/cortical.hpp"
#include "wwb/layers.hpp"
#include "wwb/strf.hpp"

namespace wwb {

enum class Architecture { kBaseline, kCortical };

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

// Frame labels {-1, 0, 1} = other-speech / no-speech / wake-word are encoded
// as class indices {0, 1, 2} throughout.
inline constexpr int kClassOtherSpeech = 0;
inline constexpr int kClassNoSpeech = 1;
inline constexpr int kClassWakeWord = 2;
inline constexpr int kNumClasses = 3;

// Srivastava-style gated block: y = T.*H + (1-T).*x with
// T = sigmoid(x Wt^T + bt), H = tanh(x Wh^T + bh).
struct HighwayParams {
  Eigen::MatrixXd Wt;
  Eigen::VectorXd bt;
  Eigen::MatrixXd Wh;
  Eigen::VectorXd bh;
};

struct ModelConfig {
  Architecture arch = Architecture::kBaseline;
  int n_mels = 64;
  int prenet_hidden = 128;
  int highway_width = 64;
  int n_feature_blocks = 4;
  int bottleneck_width = 20;
  int context_left = 20;
  int context_right = 10;
  int n_classifier_blocks = 6;
  double prenet_dropout = 0.1;
  // Cortical frontend.
  int frontend_prenet_hidden = 64;
  double dropout_residual_p = 0.9;
  double dropout_feature_p = 0.1;

  int classifier_width() const {
    return (context_left + 1 + context_right) * bottleneck_width;
  }
};

struct ModelParams {
  ModelConfig cfg;
  PrenetParams prenet;                         // n_mels -> hidden -> width
  std::vector<HighwayParams> feature_blocks;   // width
  AffineParams bottleneck;                     // width -> b
  std::vector<HighwayParams> classifier_blocks;  // (31*b)
  AffineParams output;                         // 31*b -> 3
  std::optional<CorticalFrontendParams> frontend;
  std::shared_ptr<const StrfFilterBank> bank;  // frozen, never trained

  std::size_t parameter_count() const;
};

struct GradientBundle {
  PrenetParams prenet;
  std::vector<HighwayParams> feature_blocks;
  AffineParams bottleneck;
  std::vector<HighwayParams> classifier_blocks;
  AffineParams output;
  std::optional<CorticalFrontendParams> frontend;
};

struct HighwayTape {
  Eigen::MatrixXd x, t, h;
};

struct Tape {
  bool valid = false;
  RunMode mode = RunMode::kEval;
  Eigen::MatrixXd input;  // spectrogram values
  FrontendTape frontend;
  PrenetTape prenet;
  std::vector<HighwayTape> feature_blocks;
  Eigen::MatrixXd bottleneck_in;
  Eigen::MatrixXd context_out;
  std::vector<HighwayTape> classifier_blocks;
  Eigen::MatrixXd output_in;
};

Eigen::MatrixXd highway_forward(const Eigen::MatrixXd& x,
                                const HighwayParams& p,
                                HighwayTape* tape = nullptr);
Eigen::MatrixXd highway_backward(const HighwayTape& tape,
                                 const HighwayParams& p,
                                 const Eigen::MatrixXd& g, HighwayParams* gp);

// Frame t concatenates frames t-left .. t+right, zero-padded at the edges.
Eigen::MatrixXd bottleneck_context(const Eigen::MatrixXd& h, int left,
                                   int right);
Eigen::MatrixXd bottleneck_context_backward(const Eigen::MatrixXd& g,
                                            Eigen::Index frames, int width,
                                            int left, int right);

// Deterministic initialization; the cortical variant gets a frontend and
// keeps a reference to the (frozen) bank.
ModelParams init_params(const ModelConfig& cfg,
                        std::shared_ptr<const StrfFilterBank> bank,
                        RngStream rng);

// Logits, one row of 3 per frame. Eval mode is deterministic.
Eigen::MatrixXd forward(const MelSpectrogram& spec, const ModelParams& params,
                        RunMode mode, RngStream rng, Tape* tape = nullptr);

// Exact gradients of <logits, upstream> w.r.t. every parameter and the input.
struct BackwardResult {
  GradientBundle grads;
  Eigen::MatrixXd input_grad;  // time x n_mels
};
BackwardResult backward(const Tape& tape, const ModelParams& params,
                        const Eigen::MatrixXd& upstream);

GradientBundle zero_gradients(const ModelParams& params);

// Visits every learnable array (STRF taps excluded by construction).
using ParamVisitor =
    std::function<void(const std::string& name, double* data, std::size_t n)>;
void for_each_param(ModelParams& params, const ParamVisitor& fn);
void for_each_grad(GradientBundle& grads, const ParamVisitor& fn);
void for_each_param(const ModelParams& params, GradientBundle& grads,
                    const std::function<void(const std::string& name,
                                             double* param, double* grad,
                                             std::size_t n)>& fn);

// Checkpoint: <path> is a binary blob of CTNS tensors, <path>.manifest the
// text index (architecture tag, config, config hash, name/shape/offset rows).
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const std::string& config_hash);
ModelParams load_checkpoint(const std::string& path,
                            std::shared_ptr<const StrfFilterBank> bank,
                            std::string* config_hash = nullptr);

}  // namespace wwb

#endif  // WWB_NETWORK_HPP_
