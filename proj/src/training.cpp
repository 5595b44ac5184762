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

#include "wwb/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "wwb/rng.hpp"

namespace wwb {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double cross_entropy(const Eigen::MatrixXd& logits,
                     const std::vector<int>& labels,
                     const std::array<double, 3>& weights) {
  return cross_entropy_grad(logits, labels, weights, nullptr);
}

double cross_entropy_grad(const Eigen::MatrixXd& logits,
                          const std::vector<int>& labels,
                          const std::array<double, 3>& weights,
                          Eigen::MatrixXd* g_logits) {
  const Eigen::Index T = logits.rows();
  if (static_cast<Eigen::Index>(labels.size()) != T)
    throw std::runtime_error("cross_entropy: label count != frame count");
  if (g_logits) g_logits->setZero(T, logits.cols());

  double loss = 0.0, wsum = 0.0;
  Eigen::VectorXd probs(logits.cols());
  for (Eigen::Index t = 0; t < T; ++t) {
    const int y = labels[static_cast<std::size_t>(t)];
    if (y < 0 || y >= logits.cols())
      throw std::runtime_error("cross_entropy: label " + std::to_string(y) +
                               " outside {0,1,2}");
    const double m = logits.row(t).maxCoeff();
    probs = (logits.row(t).array() - m).exp();
    const double z = probs.sum();
    probs /= z;
    const double w = weights[static_cast<std::size_t>(y)];
    loss += -w * std::log(probs(y));
    wsum += w;
    if (g_logits) {
      g_logits->row(t) = w * probs.transpose();
      (*g_logits)(t, y) -= w;
    }
  }
  if (wsum <= 0.0) throw std::runtime_error("cross_entropy: zero total weight");
  if (g_logits) *g_logits /= wsum;
  return loss / wsum;
}

namespace {

struct EventSpan {
  std::size_t begin = 0, end = 0;  // samples
  int label = kClassNoSpeech;
};

// A wake word is a fixed two-formant rising chirp template, randomized in
// pitch and duration; negatives are spectrally distant tones and falling
// chirps.
void render_event(std::vector<double>& out, std::size_t at, double dur_s,
                  int label, double pitch, int sr, RngStream& rng) {
  const auto n = static_cast<std::size_t>(dur_s * sr);
  for (std::size_t i = 0; i < n && at + i < out.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    const double frac = static_cast<double>(i) / static_cast<double>(n);
    const double env = 0.5 * (1.0 - std::cos(2.0 * kPi * frac));  // Hann
    double v = 0.0;
    if (label == kClassWakeWord) {
      const double sweep = 1.0 + 0.3 * frac;  // gentle upward chirp
      const double f1 = 500.0 * pitch * sweep;
      const double f2 = 1500.0 * pitch * sweep;
      v = 0.5 * std::sin(2.0 * kPi * f1 * t) +
          0.35 * std::sin(2.0 * kPi * f2 * t);
    } else {
      if (pitch < 1.0) {  // reuse the pitch draw to pick a negative pattern
        const double f = 2500.0 + 1000.0 * pitch;
        v = 0.6 * std::sin(2.0 * kPi * f * t);
      } else {
        const double f = 3200.0 - 1200.0 * frac;
        v = 0.6 * std::sin(2.0 * kPi * f * t);
      }
    }
    out[at + i] += env * v;
  }
  (void)rng;
}

struct ClipPlan {
  Waveform wave;
  std::vector<EventSpan> spans;
  double snr_db = 0.0;
};

ClipPlan synth_clip(const SynthConfig& cfg, RngStream rng) {
  const int sr = cfg.frontend.sample_rate_hz;
  const auto n_samples = static_cast<std::size_t>(cfg.clip_seconds * sr);

  // Event mix solving for the target positive-frame coverage; the +-2 frame
  // label smear widens each wake span by about 40 ms, include that here.
  const double gap_mean = 0.4, wake_mean = 0.5 + 0.04, neg_mean = 0.45;
  const double p = cfg.positive_rate;
  const double denom = wake_mean - p * (wake_mean - neg_mean);
  const double q = p * (gap_mean + neg_mean) / denom;
  if (!(q > 0.0) || q > 1.0)
    throw std::runtime_error(
        "synth: positive_rate " + std::to_string(p) +
        " infeasible for the event-length distribution");

  ClipPlan plan;
  plan.wave.sample_rate_hz = sr;
  plan.wave.samples.assign(n_samples, 0.0);
  plan.snr_db = rng.uniform(cfg.snr_db_min, cfg.snr_db_max);

  std::size_t cursor = static_cast<std::size_t>(rng.uniform(0.05, 0.3) * sr);
  while (cursor < n_samples) {
    const bool wake = rng.uniform() < q;
    const int label = wake ? kClassWakeWord : kClassOtherSpeech;
    double dur, pitch;
    if (wake) {
      pitch = rng.uniform(0.8, 1.2);   // +-20% pitch shift
      dur = 0.5 * rng.uniform(0.8, 1.2);  // +-20% time stretch
    } else {
      pitch = rng.uniform(0.6, 1.4);
      dur = rng.uniform(0.3, 0.6);
    }
    const auto dur_n = static_cast<std::size_t>(dur * sr);
    if (cursor + dur_n > n_samples) break;
    render_event(plan.wave.samples, cursor, dur, label, pitch, sr, rng);
    plan.spans.push_back({cursor, cursor + dur_n, label});
    cursor += dur_n;
    cursor += static_cast<std::size_t>(rng.uniform(0.25, 0.55) * sr);
  }

  // Background: one-pole low-passed noise at the sampled SNR relative to the
  // rendered event power.
  double sig_pow = 0.0;
  std::size_t sig_n = 0;
  for (const auto& s : plan.spans)
    for (std::size_t i = s.begin; i < s.end; ++i) {
      sig_pow += plan.wave.samples[i] * plan.wave.samples[i];
      ++sig_n;
    }
  if (sig_n > 0 && plan.snr_db < 100.0) {
    sig_pow /= static_cast<double>(sig_n);
    const double noise_rms =
        std::sqrt(sig_pow) * std::pow(10.0, -plan.snr_db / 20.0);
    double state = 0.0;
    // Calibrate the filter's RMS response on the fly.
    const double a = 0.25;
    std::vector<double> noise(n_samples);
    double npow = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      state += a * (rng.normal() - state);
      noise[i] = state;
      npow += state * state;
    }
    const double scale = noise_rms / std::sqrt(npow / n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
      plan.wave.samples[i] += scale * noise[i];
  }

  // Keep within [-1, 1].
  double peak = 0.0;
  for (double v : plan.wave.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.95) {
    const double s = 0.95 / peak;
    for (double& v : plan.wave.samples) v *= s;
  }
  return plan;
}

std::vector<int> spans_to_labels(const ClipPlan& plan, const MelSpectrogram& spec,
                                 int sr) {
  const auto T = static_cast<std::size_t>(spec.frames());
  const auto hop = static_cast<std::size_t>(std::lround(spec.frame_hop_s * sr));
  const auto win = static_cast<std::size_t>(std::lround(spec.frame_len_s * sr));
  std::vector<int> labels(T, kClassNoSpeech);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t center = t * hop + win / 2;
    for (const auto& s : plan.spans)
      if (center >= s.begin && center < s.end) {
        labels[t] = s.label;
        break;
      }
  }
  // +-2 frame smear around word boundaries, into silence only.
  std::vector<int> smeared = labels;
  for (std::size_t t = 0; t < T; ++t) {
    if (labels[t] == kClassNoSpeech) continue;
    for (int d = -2; d <= 2; ++d) {
      const auto u = static_cast<long>(t) + d;
      if (u >= 0 && u < static_cast<long>(T) &&
          labels[static_cast<std::size_t>(u)] == kClassNoSpeech)
        smeared[static_cast<std::size_t>(u)] = labels[t];
    }
  }
  return smeared;
}

}  // namespace

std::vector<SynthClip> synth_dataset_waves(const SynthConfig& cfg,
                                           std::uint64_t seed) {
  const auto n_clips = static_cast<std::size_t>(
      std::lround(cfg.minutes * 60.0 / cfg.clip_seconds));
  if (n_clips == 0) throw std::runtime_error("synth: zero clips requested");
  RngStream base(seed);
  std::vector<SynthClip> out;
  out.reserve(n_clips);
  for (std::size_t i = 0; i < n_clips; ++i) {
    const ClipPlan plan = synth_clip(cfg, base.derive(i));
    SynthClip sc;
    sc.clip.spec = lfbe(plan.wave, cfg.frontend);
    sc.clip.labels = spans_to_labels(plan, sc.clip.spec,
                                     cfg.frontend.sample_rate_hz);
    sc.clip.source_id = "synth-" + std::to_string(i);
    sc.clip.snr_db = plan.snr_db;
    sc.wave = std::move(plan.wave);
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<LabeledClip> synth_dataset(const SynthConfig& cfg,
                                       std::uint64_t seed) {
  auto waves = synth_dataset_waves(cfg, seed);
  std::vector<LabeledClip> out;
  out.reserve(waves.size());
  for (auto& w : waves) out.push_back(std::move(w.clip));
  return out;
}

std::vector<LabeledClip> load_manifest(const std::string& path,
                                       const FrontendConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("manifest: cannot open " + path);
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<LabeledClip> clips;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("manifest: bad row (want wav_path,label_path): " +
                               line);
    auto resolve = [&base](const std::string& p) {
      const std::filesystem::path fp(p);
      return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    const std::string wav_path = resolve(line.substr(0, comma));
    const std::string label_path = resolve(line.substr(comma + 1));

    LabeledClip clip;
    clip.spec = lfbe(load_wav(wav_path), cfg);
    clip.source_id = wav_path;
    std::ifstream lf(label_path);
    if (!lf) throw std::runtime_error("manifest: missing labels " + label_path);
    int v;
    while (lf >> v) clip.labels.push_back(v);
    if (static_cast<Eigen::Index>(clip.labels.size()) != clip.spec.frames())
      throw std::runtime_error(
          "manifest: " + label_path + " has " +
          std::to_string(clip.labels.size()) + " labels but " + wav_path +
          " yields " + std::to_string(clip.spec.frames()) + " frames");
    clips.push_back(std::move(clip));
  }
  return clips;
}

void write_manifest(const std::string& dir, const std::string& manifest_path,
                    const std::vector<SynthClip>& clips) {
  std::filesystem::create_directories(dir);
  std::ofstream man(manifest_path);
  if (!man) throw std::runtime_error("manifest: cannot write " + manifest_path);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    std::ostringstream stem;
    stem << "clip" << i;
    const std::string wav = stem.str() + ".wav";
    const std::string lab = stem.str() + ".labels";
    write_wav((std::filesystem::path(dir) / wav).string(), clips[i].wave);
    std::ofstream lf(std::filesystem::path(dir) / lab);
    for (int v : clips[i].clip.labels) lf << v << "\n";
    man << wav << "," << lab << "\n";
  }
}

namespace {

double frame_accuracy(const Eigen::MatrixXd& logits,
                      const std::vector<int>& labels) {
  int correct = 0;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index am;
    logits.row(t).maxCoeff(&am);
    if (static_cast<int>(am) == labels[static_cast<std::size_t>(t)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

}  // namespace

TrainResult train(const ModelParams& init, const std::vector<LabeledClip>& data,
                  const std::vector<LabeledClip>& val, const TrainConfig& cfg) {
  if (data.empty()) throw std::runtime_error("train: empty dataset");
  ModelParams params = init;
  GradientBundle adam_m = zero_gradients(params);
  GradientBundle adam_v = zero_gradients(params);

  RngStream base(cfg.seed);
  TrainResult result;
  result.params = params;
  result.best_val_accuracy = -1.0;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Deterministic shuffle.
    RngStream shuffle_rng = base.derive(0x5eed0000ULL + epoch);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);

    double epoch_loss = 0.0, epoch_acc = 0.0;
    std::size_t clips_seen = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      GradientBundle acc = zero_gradients(params);
      bool any = false;
      for (std::size_t i = start; i < end; ++i) {
        const auto& clip = data[order[i]];
        RngStream fwd_rng =
            base.derive((static_cast<std::uint64_t>(epoch) << 32) ^ order[i]);
        Tape tape;
        const Eigen::MatrixXd logits =
            forward(clip.spec, params, RunMode::kTrain, fwd_rng, &tape);
        Eigen::MatrixXd g_logits;
        const double loss = cross_entropy_grad(logits, clip.labels,
                                               cfg.class_weights, &g_logits);
        if (!std::isfinite(loss))
          throw std::runtime_error(
              "train: loss diverged (non-finite) at epoch " +
              std::to_string(epoch) + " clip " + std::to_string(order[i]));
        epoch_loss += loss;
        epoch_acc += frame_accuracy(logits, clip.labels);
        ++clips_seen;
        g_logits /= static_cast<double>(end - start);
        BackwardResult back = backward(tape, params, g_logits);
        // Accumulate into the batch gradient.
        std::vector<std::pair<double*, std::size_t>> dst;
        for_each_grad(acc, [&dst](const std::string&, double* d, std::size_t n) {
          dst.push_back({d, n});
        });
        std::size_t k = 0;
        for_each_grad(back.grads,
                      [&dst, &k](const std::string&, double* d, std::size_t n) {
                        Eigen::Map<Eigen::VectorXd>(dst[k].first, n) +=
                            Eigen::Map<const Eigen::VectorXd>(d, n);
                        ++k;
                      });
        any = true;
      }
      if (!any) continue;
      ++step;
      // Adam update with bias correction.
      const double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      std::vector<std::pair<double*, std::size_t>> gs, ms, vs;
      for_each_grad(acc, [&gs](const std::string&, double* d, std::size_t n) {
        gs.push_back({d, n});
      });
      for_each_grad(adam_m, [&ms](const std::string&, double* d, std::size_t n) {
        ms.push_back({d, n});
      });
      for_each_grad(adam_v, [&vs](const std::string&, double* d, std::size_t n) {
        vs.push_back({d, n});
      });
      std::size_t k = 0;
      for_each_param(params, [&](const std::string&, double* p, std::size_t n) {
        Eigen::Map<Eigen::VectorXd> pv(p, n);
        Eigen::Map<Eigen::VectorXd> g(gs[k].first, n);
        Eigen::Map<Eigen::VectorXd> m(ms[k].first, n);
        Eigen::Map<Eigen::VectorXd> v(vs[k].first, n);
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v.array().matrix() +
            (1.0 - cfg.beta2) * g.array().square().matrix();
        pv.array() -= cfg.learning_rate * (m.array() / b1t) /
                      ((v.array() / b2t).sqrt() + cfg.adam_eps);
        ++k;
      });
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(clips_seen);
    stats.train_accuracy = epoch_acc / static_cast<double>(clips_seen);

    if (!val.empty()) {
      double vloss = 0.0, vacc = 0.0;
      for (const auto& clip : val) {
        const Eigen::MatrixXd logits =
            forward(clip.spec, params, RunMode::kEval, RngStream(0));
        vloss += cross_entropy(logits, clip.labels, cfg.class_weights);
        vacc += frame_accuracy(logits, clip.labels);
      }
      stats.val_loss = vloss / static_cast<double>(val.size());
      stats.val_accuracy = vacc / static_cast<double>(val.size());
      if (stats.val_accuracy > result.best_val_accuracy) {
        result.best_val_accuracy = stats.val_accuracy;
        result.params = params;
      }
    } else {
      result.params = params;
    }
    result.history.push_back(stats);
  }
  if (val.empty()) result.best_val_accuracy = 0.0;
  return result;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("history: cannot write " + path);
  f << "epoch,split,loss,accuracy\n";
  f.precision(12);
  for (const auto& h : history) {
    f << h.epoch << ",train," << h.train_loss << "," << h.train_accuracy
      << "\n";
    f << h.epoch << ",val," << h.val_loss << "," << h.val_accuracy << "\n";
  }
}

}  // namespace wwb
