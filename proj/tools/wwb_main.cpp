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

// wwb: wake-word robustness workbench.
//
//   wwb filters --config run.cfg --out bank.ctns
//   wwb synth   --config run.cfg --out data/
//   wwb train   --config run.cfg --data data/manifest.csv --arch cortical \
//               --out model.ckpt
//   wwb attack  --config run.cfg --checkpoint model.ckpt --method pgd \
//               --eps 0.015 --trials 4 --out attacks/pgd/
//   wwb eval    --config run.cfg --checkpoint model.ckpt \
//               [--delta attacks/pgd/trial0/best_delta.ctns] --out eval/
//   wwb report  --in attacks/pgd/trial0 [--in ...] --out report/
//
// Every command exits 0 on success and nonzero after printing a single
// "error: ..." line on stderr.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "wwb/attacks.hpp"
#include "wwb/config.hpp"
#include "wwb/ctns.hpp"
#include "wwb/eval.hpp"
#include "wwb/network.hpp"
#include "wwb/strf.hpp"
#include "wwb/training.hpp"

namespace fs = std::filesystem;

namespace {

std::uint64_t stage_seed(std::uint64_t master, std::uint64_t tag) {
  return wwb::RngStream(master).derive(tag).next_u64();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

std::shared_ptr<const wwb::StrfFilterBank> bank_for(const wwb::RunConfig& cfg) {
  return std::make_shared<const wwb::StrfFilterBank>(
      wwb::build_bank(wwb::resolved_strf_grid(cfg)));
}

std::vector<wwb::LabeledClip> load_or_synth(const wwb::RunConfig& cfg,
                                            const std::string& manifest,
                                            std::uint64_t tag) {
  if (!manifest.empty()) return wwb::load_manifest(manifest, cfg.frontend);
  wwb::SynthConfig sc = cfg.synth;
  sc.frontend = cfg.frontend;
  return wwb::synth_dataset(sc, stage_seed(cfg.seed, tag));
}

// Deterministic head/tail split by clip index.
void split_clips(const std::vector<wwb::LabeledClip>& all, double head_frac,
                 std::vector<wwb::LabeledClip>* head,
                 std::vector<wwb::LabeledClip>* tail) {
  const auto cut = static_cast<std::size_t>(
      head_frac * static_cast<double>(all.size()));
  head->assign(all.begin(), all.begin() + static_cast<long>(cut));
  tail->assign(all.begin() + static_cast<long>(cut), all.end());
  if (head->empty() || tail->empty())
    throw std::runtime_error("split leaves an empty side (" +
                             std::to_string(all.size()) + " clips)");
}

Eigen::MatrixXd read_matrix_ctns(const std::string& path) {
  const wwb::CtnsTensor t = wwb::read_ctns(path);
  if (t.dims.size() != 2)
    throw std::runtime_error("expected rank-2 tensor in " + path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.dims[0]),
                    static_cast<Eigen::Index>(t.dims[1]));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = t.data[static_cast<std::size_t>(r * m.cols() + c)];
  return m;
}

std::map<std::string, std::string> read_kv(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot open " + p.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos)
      kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

int cmd_filters(const wwb::RunConfig& cfg, const std::string& out) {
  const wwb::StrfFilterBank bank = wwb::build_bank(wwb::resolved_strf_grid(cfg));
  wwb::save_bank(out, bank);
  write_text(out + ".confighash", wwb::config_hash(cfg) + "\n");
  std::cout << "filters: " << bank.filters.size() << " written to " << out
            << "\n";
  return 0;
}

int cmd_synth(const wwb::RunConfig& cfg, const std::string& out) {
  wwb::SynthConfig sc = cfg.synth;
  sc.frontend = cfg.frontend;
  const auto clips = wwb::synth_dataset_waves(sc, stage_seed(cfg.seed, 0x5d));
  fs::create_directories(out);
  wwb::write_manifest(out, (fs::path(out) / "manifest.csv").string(), clips);
  write_text(fs::path(out) / "config_hash.txt", wwb::config_hash(cfg) + "\n");
  std::cout << "synth: " << clips.size() << " clips in " << out << "\n";
  return 0;
}

int cmd_train(const wwb::RunConfig& cfg, const std::string& data,
              const std::string& arch, const std::string& out) {
  wwb::ModelConfig mc = cfg.model;
  mc.arch = wwb::architecture_from_name(arch);
  mc.n_mels = cfg.frontend.n_mels;
  std::shared_ptr<const wwb::StrfFilterBank> bank;
  if (mc.arch == wwb::Architecture::kCortical) bank = bank_for(cfg);

  const auto all = load_or_synth(cfg, data, 0x5d);
  std::vector<wwb::LabeledClip> train_set, val_set;
  split_clips(all, 0.9, &train_set, &val_set);

  wwb::TrainConfig tc = cfg.train;
  tc.seed = stage_seed(cfg.seed, 0x7a);
  const wwb::ModelParams init = wwb::init_params(
      mc, bank, wwb::RngStream(stage_seed(cfg.seed, 0x1217)));
  const wwb::TrainResult result = wwb::train(init, train_set, val_set, tc);

  wwb::save_checkpoint(out, result.params, wwb::config_hash(cfg));
  wwb::write_history_csv(out + ".history.csv", result.history);
  std::cout << "train: best validation accuracy " << result.best_val_accuracy
            << ", checkpoint " << out << "\n";
  return 0;
}

int cmd_attack(const wwb::RunConfig& cfg, const std::string& checkpoint,
               const std::string& method, double eps, const std::string& data,
               int trials, const std::string& label, bool force,
               const std::string& out) {
  std::string ckpt_hash;
  std::shared_ptr<const wwb::StrfFilterBank> bank = bank_for(cfg);
  const wwb::ModelParams model =
      wwb::load_checkpoint(checkpoint, bank, &ckpt_hash);
  const std::string hash = wwb::config_hash(cfg);
  if (ckpt_hash != hash && !force)
    throw std::runtime_error("config hash mismatch: checkpoint " + ckpt_hash +
                             " vs config " + hash + " (use --force to override)");

  const auto all = load_or_synth(cfg, data, 0xa77);
  std::vector<wwb::LabeledClip> atk_train, atk_test;
  split_clips(all, 0.8, &atk_train, &atk_test);

  wwb::AttackConfig ac = cfg.attack;
  if (!method.empty()) ac.method = wwb::attack_method_from_name(method);
  if (eps > 0.0) ac.epsilon = eps;

  fs::create_directories(out);
  for (int t = 0; t < trials; ++t) {
    wwb::AttackConfig trial_cfg = ac;
    trial_cfg.seed = stage_seed(cfg.seed, 0xa77a00 + static_cast<std::uint64_t>(t));
    const wwb::AttackResult res =
        wwb::universal_attack(model, atk_train, atk_test, trial_cfg);
    const fs::path dir = fs::path(out) / ("trial" + std::to_string(t));
    wwb::save_attack_result(dir.string(), res, trial_cfg, ckpt_hash);
    if (!label.empty())
      write_text(dir / "label.txt", label + "\n");
    std::cout << "attack " << wwb::attack_method_name(trial_cfg.method)
              << " trial " << t << ": clean " << res.clean_accuracy
              << " attacked " << res.attacked_accuracy << " snr_db "
              << res.snr_db << "\n";
  }
  return 0;
}

int cmd_eval(const wwb::RunConfig& cfg, const std::string& checkpoint,
             const std::string& delta_path, const std::string& data,
             bool force, const std::string& out) {
  std::string ckpt_hash;
  std::shared_ptr<const wwb::StrfFilterBank> bank = bank_for(cfg);
  const wwb::ModelParams model =
      wwb::load_checkpoint(checkpoint, bank, &ckpt_hash);
  const std::string hash = wwb::config_hash(cfg);
  if (ckpt_hash != hash && !force)
    throw std::runtime_error("config hash mismatch: checkpoint " + ckpt_hash +
                             " vs config " + hash + " (use --force to override)");

  const auto all = load_or_synth(cfg, data, 0xa77);
  std::vector<wwb::LabeledClip> unused, test;
  split_clips(all, 0.8, &unused, &test);

  Eigen::MatrixXd delta;
  if (!delta_path.empty()) delta = read_matrix_ctns(delta_path);

  const double acc = wwb::mask_accuracy(model, test, delta);
  const double snr = wwb::snr_db(test, delta);
  std::vector<double> thresholds;
  for (int i = 0; i < cfg.eval.det_thresholds; ++i)
    thresholds.push_back(static_cast<double>(i) /
                         static_cast<double>(cfg.eval.det_thresholds - 1));
  const wwb::DetCurve det = wwb::det_curve(model, test, thresholds, delta);
  const double auc = wwb::det_auc(det, cfg.eval.fa_per_hour_cap);

  fs::create_directories(out);
  std::ostringstream csv;
  csv.precision(12);
  csv << "mask_accuracy,snr_db,det_auc\n" << acc << "," << snr << "," << auc
      << "\n";
  write_text(fs::path(out) / "metrics.csv", csv.str());
  std::ostringstream dcsv;
  dcsv.precision(12);
  dcsv << "threshold,fa_per_hour,miss_rate\n";
  for (const auto& p : det.points)
    dcsv << p.threshold << "," << p.fa_per_hour << "," << p.miss_rate << "\n";
  write_text(fs::path(out) / "det.csv", dcsv.str());
  write_text(fs::path(out) / "config_hash.txt", hash + "\n");
  std::cout << "eval: mask_accuracy " << acc << " snr_db " << snr
            << " det_auc " << auc << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  if (inputs.empty()) throw std::runtime_error("report: no --in directories");
  wwb::Report report;
  // Accuracy points grouped by label (label.txt if present, else method).
  std::map<std::string, std::map<double, std::vector<double>>> acc;
  std::map<std::string, std::map<double, std::vector<double>>> snr;
  for (const auto& in : inputs) {
    const auto kv = read_kv(fs::path(in) / "config.txt");
    std::string label = kv.count("method") ? kv.at("method") : "attack";
    if (fs::exists(fs::path(in) / "label.txt")) {
      std::ifstream ls(fs::path(in) / "label.txt");
      std::getline(ls, label);
    }
    const double eps = std::stod(kv.at("epsilon"));
    acc[label][eps].push_back(std::stod(kv.at("attacked_accuracy")));
    snr[label][eps].push_back(std::stod(kv.at("snr_db")));

    std::vector<wwb::HistoryPoint> hist;
    std::ifstream hs(fs::path(in) / "history.csv");
    std::string line;
    std::getline(hs, line);  // header
    while (std::getline(hs, line)) {
      wwb::HistoryPoint p;
      std::istringstream ls(line);
      char comma;
      ls >> p.step >> comma >> p.accuracy >> comma >> p.snr_db;
      hist.push_back(p);
    }
    const std::string name =
        label + "_" + fs::path(in).filename().string();
    report.histories.emplace_back(name, std::move(hist));
    report.noise_renderings.emplace_back(
        name, read_matrix_ctns((fs::path(in) / "best_delta.ctns").string()));
  }
  for (const auto& [label, by_eps] : acc) {
    wwb::AccuracyCurve curve;
    curve.label = label;
    for (const auto& [eps, vals] : by_eps) {
      wwb::AccuracyPoint p;
      p.epsilon = eps;
      double m = 0.0;
      for (double v : vals) m += v;
      m /= static_cast<double>(vals.size());
      double s2 = 0.0;
      for (double v : vals) s2 += (v - m) * (v - m);
      p.mean_accuracy = m;
      p.std_accuracy = std::sqrt(s2 / static_cast<double>(vals.size()));
      double sm = 0.0;
      for (double v : snr[label][eps]) sm += v;
      p.mean_snr_db = sm / static_cast<double>(snr[label][eps].size());
      curve.points.push_back(p);
    }
    report.accuracy_curves.push_back(std::move(curve));
  }
  wwb::emit_report(report, out);
  std::cout << "report: " << inputs.size() << " inputs to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wake-word robustness workbench"};
  app.require_subcommand(1);

  std::string config_path, out, data, checkpoint, method, arch = "baseline";
  std::string delta_path, label;
  std::vector<std::string> inputs;
  double eps = 0.0;
  int trials = 1;
  bool force = false;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")
        ->required();
    sub->add_option("--out", out, "output path")->required();
  };

  CLI::App* sc_filters = app.add_subcommand("filters", "build the STRF bank");
  add_config(sc_filters);

  CLI::App* sc_synth = app.add_subcommand("synth", "synthesize a dataset");
  add_config(sc_synth);

  CLI::App* sc_train = app.add_subcommand("train", "train a detector");
  add_config(sc_train);
  sc_train->add_option("--data", data, "manifest CSV (default: synthesize)");
  sc_train->add_option("--arch", arch, "baseline|cortical");

  CLI::App* sc_attack = app.add_subcommand("attack", "universal attack trials");
  add_config(sc_attack);
  sc_attack->add_option("--checkpoint", checkpoint)->required();
  sc_attack->add_option("--method", method, "fgsm|pgd|deepfool|cw");
  sc_attack->add_option("--eps", eps, "l-inf bound override");
  sc_attack->add_option("--data", data, "manifest CSV (default: synthesize)");
  sc_attack->add_option("--trials", trials, "independent trials");
  sc_attack->add_option("--label", label, "report grouping label");
  sc_attack->add_flag("--force", force, "ignore config hash mismatch");

  CLI::App* sc_eval = app.add_subcommand("eval", "accuracy, SNR, DET");
  add_config(sc_eval);
  sc_eval->add_option("--checkpoint", checkpoint)->required();
  sc_eval->add_option("--delta", delta_path, "perturbation CTNS");
  sc_eval->add_option("--data", data, "manifest CSV (default: synthesize)");
  sc_eval->add_flag("--force", force, "ignore config hash mismatch");

  CLI::App* sc_report = app.add_subcommand("report", "CSV/SVG summary");
  sc_report->add_option("--in", inputs, "attack trial directories");
  sc_report->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_report->parsed()) return cmd_report(inputs, out);
    const wwb::RunConfig cfg = wwb::load_run_config(config_path);
    if (sc_filters->parsed()) return cmd_filters(cfg, out);
    if (sc_synth->parsed()) return cmd_synth(cfg, out);
    if (sc_train->parsed()) return cmd_train(cfg, data, arch, out);
    if (sc_attack->parsed())
      return cmd_attack(cfg, checkpoint, method, eps, data, trials, label,
                        force, out);
    if (sc_eval->parsed())
      return cmd_eval(cfg, checkpoint, delta_path, data, force, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
