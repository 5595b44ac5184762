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

#ifndef WWB_ATTACKS_HPP_
#define WWB_ATTACKS_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "wwb/eval.hpp"
#include "wwb/network.hpp"
#include "wwb/training.hpp"

namespace wwb {

enum class AttackMethod { kFgsm, kPgd, kDeepfool, kCw };

std::string attack_method_name(AttackMethod m);
AttackMethod attack_method_from_name(const std::string& name);

struct AttackConfig {
  AttackMethod method = AttackMethod::kPgd;
  double epsilon = 0.1;          // l-inf bound, log-mel units
  int target_label = kClassNoSpeech;
  // 0 means "method default": FGSM/DeepFool/CW run 4000 iterations evaluated
  // every 400; PGD runs 250 examples of 100 inner iterations evaluated every
  // 25 examples.
  int iterations = 0;
  int eval_every = 0;
  int pgd_inner_iterations = 0;
  double step_size = 0.0;        // 0 -> epsilon / 10
  double cw_c = 1.0;
  double overshoot = 0.02;
  std::uint64_t seed = 0;
  int delta_frames = 100;        // universal window length

  // Defaults resolved; never mutates stored zeros.
  int resolved_iterations() const {
    if (iterations > 0) return iterations;
    return method == AttackMethod::kPgd ? 250 : 4000;
  }
  int resolved_eval_every() const {
    if (eval_every > 0) return eval_every;
    return method == AttackMethod::kPgd ? 25 : 400;
  }
  int resolved_pgd_inner() const {
    return pgd_inner_iterations > 0 ? pgd_inner_iterations : 100;
  }
  double resolved_step_size() const {
    return step_size > 0.0 ? step_size : epsilon / 10.0;
  }
};

struct UniversalPerturbation {
  Eigen::MatrixXd delta;  // delta_frames x n_mels
  double epsilon = 0.0;
  std::vector<HistoryPoint> history;
  Eigen::MatrixXd best_delta;
  double best_accuracy = 1.0;
};

struct AttackResult {
  UniversalPerturbation perturbation;
  double clean_accuracy = 0.0;
  double attacked_accuracy = 0.0;  // of best_delta on the test clips
  double snr_db = 0.0;             // of best_delta
};

// Elementwise clamp to [-eps, eps]; idempotent.
Eigen::MatrixXd project_linf(const Eigen::MatrixXd& delta, double epsilon);

// Single signed-gradient step toward the target: x' = x - eps*sign(grad l).
Eigen::MatrixXd fgsm_step(const MelSpectrogram& spec, int target_label,
                          const ModelParams& model, double epsilon);

// Multiclass linearization over frame-mean logits; returns the smallest
// candidate step scaled by (1 + overshoot), or zero if the frame-mean
// prediction already differs from its argmax... see implementation notes.
Eigen::MatrixXd deepfool_step(const MelSpectrogram& spec,
                              const ModelParams& model, double overshoot);

// Universal attack: one delta shared across clips, tiled at a random offset
// per visited example, best_delta selected by minimum test mask accuracy.
AttackResult universal_attack(const ModelParams& model,
                              const std::vector<LabeledClip>& attack_train,
                              const std::vector<LabeledClip>& attack_test,
                              const AttackConfig& cfg);

// AttackResult directory: delta.ctns, best_delta.ctns, history.csv,
// config.txt (resolved config + model hash).
void save_attack_result(const std::string& dir, const AttackResult& result,
                        const AttackConfig& cfg,
                        const std::string& model_hash);

}  // namespace wwb

#endif  // WWB_ATTACKS_HPP_
