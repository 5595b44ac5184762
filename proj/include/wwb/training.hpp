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

#ifndef WWB_TRAINING_HPP_
#define WWB_TRAINING_HPP_

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "wwb/audio.hpp"
#include "wwb/network.hpp"

namespace wwb {

struct LabeledClip {
  MelSpectrogram spec;
  std::vector<int> labels;  // one class index per frame
  std::string source_id;
  double snr_db = 0.0;
};

// Weighted mean over frames of -log softmax(logits)[label].
double cross_entropy(const Eigen::MatrixXd& logits,
                     const std::vector<int>& labels,
                     const std::array<double, 3>& weights = {1.0, 1.0, 1.0});

// Loss plus its gradient w.r.t. the logits ((softmax - onehot) scaled).
double cross_entropy_grad(const Eigen::MatrixXd& logits,
                          const std::vector<int>& labels,
                          const std::array<double, 3>& weights,
                          Eigen::MatrixXd* g_logits);

struct SynthConfig {
  double minutes = 20.0;
  double clip_seconds = 2.0;
  double positive_rate = 0.15;  // target fraction of wake-word frames
  double snr_db_min = 10.0;
  double snr_db_max = 30.0;
  FrontendConfig frontend;
};

// Deterministic synthetic wake-word task. Positives are a fixed 500 ms
// two-formant chirp template with randomized pitch shift and time stretch
// (+-20%); negatives are other chirp/tone patterns; background is filtered
// noise at a sampled SNR.
std::vector<LabeledClip> synth_dataset(const SynthConfig& cfg,
                                       std::uint64_t seed);

// Same generator but also yields waveforms so clips can be written to disk.
struct SynthClip {
  Waveform wave;
  LabeledClip clip;
};
std::vector<SynthClip> synth_dataset_waves(const SynthConfig& cfg,
                                           std::uint64_t seed);

// CSV manifest: "wav_path,label_path"; label file holds one class index per
// frame. Frame-count mismatches are rejected.
std::vector<LabeledClip> load_manifest(const std::string& path,
                                       const FrontendConfig& cfg);
void write_manifest(const std::string& dir, const std::string& manifest_path,
                    const std::vector<SynthClip>& clips);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 8;
  int epochs = 4;
  std::uint64_t seed = 0;
  std::array<double, 3> class_weights = {1.0, 1.0, 1.0};
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  ModelParams params;  // best-validation checkpoint
  std::vector<EpochStats> history;
  double best_val_accuracy = 0.0;
};

// Adam on the frame cross-entropy; fully deterministic given (cfg.seed,
// initialization). Aborts with a diagnostic if the loss goes non-finite.
TrainResult train(const ModelParams& init, const std::vector<LabeledClip>& data,
                  const std::vector<LabeledClip>& val, const TrainConfig& cfg);

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history);

}  // namespace wwb

#endif  // WWB_TRAINING_HPP_
