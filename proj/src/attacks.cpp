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

#include "wwb/attacks.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "wwb/ctns.hpp"
#include "wwb/rng.hpp"

namespace wwb {
namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Gradient of the mean targeted cross entropy w.r.t. the (perturbed) input.
Eigen::MatrixXd targeted_input_grad(const LabeledClip& clip,
                                    const ModelParams& model,
                                    const Eigen::MatrixXd& delta,
                                    Eigen::Index offset, int target) {
  MelSpectrogram spec = clip.spec;
  if (delta.size() > 0) spec.values = apply_delta(spec.values, delta, offset);
  Tape tape;
  const Eigen::MatrixXd logits =
      forward(spec, model, RunMode::kEval, RngStream(0), &tape);
  std::vector<int> tl(static_cast<std::size_t>(logits.rows()), target);
  Eigen::MatrixXd g_logits;
  cross_entropy_grad(logits, tl, {1.0, 1.0, 1.0}, &g_logits);
  return backward(tape, model, g_logits).input_grad;
}

// Accumulates a full-clip input gradient into the tiled window.
Eigen::MatrixXd fold_to_window(const Eigen::MatrixXd& gin, Eigen::Index window,
                               Eigen::Index offset) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(window, gin.cols());
  for (Eigen::Index t = 0; t < gin.rows(); ++t)
    g.row((t + offset) % window) += gin.row(t);
  return g;
}

// Gradient of the frame-mean logit margin z[a] - z[b] w.r.t. the input.
Eigen::MatrixXd margin_input_grad(const MelSpectrogram& spec,
                                  const ModelParams& model, int a, int b,
                                  Eigen::RowVector3d* mean_logits) {
  Tape tape;
  const Eigen::MatrixXd logits =
      forward(spec, model, RunMode::kEval, RngStream(0), &tape);
  if (mean_logits) *mean_logits = logits.colwise().mean();
  Eigen::MatrixXd up = Eigen::MatrixXd::Zero(logits.rows(), kNumClasses);
  const double w = 1.0 / static_cast<double>(logits.rows());
  up.col(a).setConstant(w);
  up.col(b).setConstant(-w);
  return backward(tape, model, up).input_grad;
}

}  // namespace

std::string attack_method_name(AttackMethod m) {
  switch (m) {
    case AttackMethod::kFgsm: return "fgsm";
    case AttackMethod::kPgd: return "pgd";
    case AttackMethod::kDeepfool: return "deepfool";
    case AttackMethod::kCw: return "cw";
  }
  throw std::logic_error("attacks: bad method enum");
}

AttackMethod attack_method_from_name(const std::string& name) {
  if (name == "fgsm") return AttackMethod::kFgsm;
  if (name == "pgd") return AttackMethod::kPgd;
  if (name == "deepfool") return AttackMethod::kDeepfool;
  if (name == "cw") return AttackMethod::kCw;
  throw std::runtime_error("attacks: unknown method '" + name + "'");
}

Eigen::MatrixXd project_linf(const Eigen::MatrixXd& delta, double epsilon) {
  if (epsilon < 0.0) throw std::runtime_error("attacks: negative epsilon");
  return delta.array().min(epsilon).max(-epsilon);
}

Eigen::MatrixXd fgsm_step(const MelSpectrogram& spec, int target_label,
                          const ModelParams& model, double epsilon) {
  LabeledClip clip;
  clip.spec = spec;
  const Eigen::MatrixXd g =
      targeted_input_grad(clip, model, Eigen::MatrixXd(), 0, target_label);
  return -epsilon * g.unaryExpr(&sign_of);
}

Eigen::MatrixXd deepfool_step(const MelSpectrogram& spec,
                              const ModelParams& model, double overshoot) {
  Eigen::RowVector3d z;
  // First pass just reads the frame-mean logits; gradient reused below.
  Eigen::MatrixXd w0 = margin_input_grad(spec, model, 0, 0, &z);
  Eigen::Index k;
  z.maxCoeff(&k);
  double best_dist = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_step = Eigen::MatrixXd::Zero(spec.values.rows(),
                                                    spec.values.cols());
  for (int j = 0; j < kNumClasses; ++j) {
    if (j == static_cast<int>(k)) continue;
    const Eigen::MatrixXd w =
        margin_input_grad(spec, model, j, static_cast<int>(k), nullptr);
    const double wn2 = w.squaredNorm();
    if (wn2 <= 0.0) continue;
    const double f = z(j) - z(k);  // <= 0 at the current prediction
    const double dist = std::abs(f) / std::sqrt(wn2);
    if (dist < best_dist) {
      best_dist = dist;
      best_step = ((std::abs(f) + 1e-12) / wn2) * w;
    }
  }
  return (1.0 + overshoot) * best_step;
}

AttackResult universal_attack(const ModelParams& model,
                              const std::vector<LabeledClip>& attack_train,
                              const std::vector<LabeledClip>& attack_test,
                              const AttackConfig& cfg) {
  if (attack_train.empty() || attack_test.empty())
    throw std::runtime_error("attacks: empty attack split");
  if (cfg.delta_frames <= 0)
    throw std::runtime_error("attacks: delta_frames must be positive");
  const Eigen::Index W = cfg.delta_frames;
  const Eigen::Index F = attack_train.front().spec.values.cols();
  const double step = cfg.resolved_step_size();
  const int iters = cfg.resolved_iterations();
  const int eval_every = cfg.resolved_eval_every();

  AttackResult res;
  res.perturbation.epsilon = cfg.epsilon;
  res.perturbation.delta = Eigen::MatrixXd::Zero(W, F);
  res.clean_accuracy = mask_accuracy(model, attack_test, Eigen::MatrixXd());
  res.perturbation.best_delta = res.perturbation.delta;
  res.perturbation.best_accuracy = res.clean_accuracy;

  Eigen::MatrixXd& delta = res.perturbation.delta;
  RngStream rng(cfg.seed);

  auto evaluate = [&](int at_step) {
    const double acc = mask_accuracy(model, attack_test, delta);
    const double snr = snr_db(attack_test, delta);
    res.perturbation.history.push_back({at_step, acc, snr});
    if (acc < res.perturbation.best_accuracy) {
      res.perturbation.best_accuracy = acc;
      res.perturbation.best_delta = delta;
    }
  };

  for (int i = 0; i < iters; ++i) {
    const LabeledClip& clip =
        attack_train[static_cast<std::size_t>(i) % attack_train.size()];
    const auto offset = static_cast<Eigen::Index>(
        rng.derive(static_cast<std::uint64_t>(i)).uniform_int(
            static_cast<std::uint64_t>(W)));
    switch (cfg.method) {
      case AttackMethod::kFgsm: {
        const Eigen::MatrixXd g = fold_to_window(
            targeted_input_grad(clip, model, delta, offset, cfg.target_label),
            W, offset);
        delta -= step * g.unaryExpr(&sign_of);
        break;
      }
      case AttackMethod::kPgd: {
        // One "iteration" visits one example and descends on it repeatedly.
        const int inner = cfg.resolved_pgd_inner();
        for (int s = 0; s < inner; ++s) {
          const Eigen::MatrixXd g = fold_to_window(
              targeted_input_grad(clip, model, delta, offset,
                                  cfg.target_label),
              W, offset);
          delta -= step * g.unaryExpr(&sign_of);
          delta = project_linf(delta, cfg.epsilon);
        }
        break;
      }
      case AttackMethod::kDeepfool: {
        MelSpectrogram spec = clip.spec;
        spec.values = apply_delta(spec.values, delta, offset);
        Eigen::RowVector3d z;
        margin_input_grad(spec, model, 0, 0, &z);
        Eigen::Index pred;
        z.maxCoeff(&pred);
        if (static_cast<int>(pred) == cfg.target_label) break;
        // Targeted variant: step across the boundary toward the target.
        const Eigen::MatrixXd w = margin_input_grad(
            spec, model, cfg.target_label, static_cast<int>(pred), nullptr);
        const double wn2 = w.squaredNorm();
        if (wn2 <= 0.0) break;
        const double f = z(cfg.target_label) - z(pred);
        delta += fold_to_window(
            (1.0 + cfg.overshoot) * ((std::abs(f) + 1e-12) / wn2) * w, W,
            offset);
        break;
      }
      case AttackMethod::kCw: {
        Eigen::MatrixXd g = fold_to_window(
            targeted_input_grad(clip, model, delta, offset, cfg.target_label),
            W, offset);
        g += 2.0 * cfg.cw_c * delta;  // squared-l2 size penalty
        delta -= step * g;
        break;
      }
    }
    delta = project_linf(delta, cfg.epsilon);
    if ((i + 1) % eval_every == 0 || i + 1 == iters) evaluate(i + 1);
  }

  res.attacked_accuracy = res.perturbation.best_accuracy;
  res.snr_db = snr_db(attack_test, res.perturbation.best_delta);
  return res;
}

void save_attack_result(const std::string& dir, const AttackResult& result,
                        const AttackConfig& cfg,
                        const std::string& model_hash) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto write_mat = [](const fs::path& p, const Eigen::MatrixXd& m) {
    CtnsTensor t;
    t.dims = {static_cast<std::uint64_t>(m.rows()),
              static_cast<std::uint64_t>(m.cols())};
    t.data.resize(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        t.data[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    write_ctns(p.string(), t);
  };
  write_mat(fs::path(dir) / "delta.ctns", result.perturbation.delta);
  write_mat(fs::path(dir) / "best_delta.ctns", result.perturbation.best_delta);

  std::ofstream hist(fs::path(dir) / "history.csv");
  hist << "step,accuracy,snr_db\n";
  hist.precision(12);
  for (const auto& p : result.perturbation.history)
    hist << p.step << "," << p.accuracy << "," << p.snr_db << "\n";

  std::ofstream txt(fs::path(dir) / "config.txt");
  txt.precision(17);
  txt << "method=" << attack_method_name(cfg.method) << "\n"
      << "epsilon=" << cfg.epsilon << "\n"
      << "target_label=" << cfg.target_label << "\n"
      << "iterations=" << cfg.resolved_iterations() << "\n"
      << "eval_every=" << cfg.resolved_eval_every() << "\n"
      << "pgd_inner_iterations=" << cfg.resolved_pgd_inner() << "\n"
      << "step_size=" << cfg.resolved_step_size() << "\n"
      << "cw_c=" << cfg.cw_c << "\n"
      << "overshoot=" << cfg.overshoot << "\n"
      << "seed=" << cfg.seed << "\n"
      << "delta_frames=" << cfg.delta_frames << "\n"
      << "model_hash=" << model_hash << "\n"
      << "clean_accuracy=" << result.clean_accuracy << "\n"
      << "attacked_accuracy=" << result.attacked_accuracy << "\n"
      << "snr_db=" << result.snr_db << "\n";
}

}  // namespace wwb
