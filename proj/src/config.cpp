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

#include "wwb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace wwb {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double d;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number '" + v + "' for " + key);
  }
  if (pos != v.size())
    throw std::runtime_error("config: bad number '" + v + "' for " + key);
  return d;
}

long long parse_int(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  long long i;
  try {
    i = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer '" + v + "' for " + key);
  }
  if (pos != v.size())
    throw std::runtime_error("config: bad integer '" + v + "' for " + key);
  return i;
}

struct Field {
  std::string section, key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define WWB_FIELD_D(sec, name, ref)                                         \
  {sec, name, [](const RunConfig& c) { return fmt_double(c.ref); },         \
   [](RunConfig& c, const std::string& v) {                                 \
     c.ref = parse_double(v, sec "." name);                                 \
   }}
#define WWB_FIELD_I(sec, name, ref)                                         \
  {sec, name, [](const RunConfig& c) { return std::to_string(c.ref); },     \
   [](RunConfig& c, const std::string& v) {                                 \
     c.ref = static_cast<decltype(c.ref)>(parse_int(v, sec "." name));      \
   }}

std::vector<Field> field_table() {
  std::vector<Field> f = {
      WWB_FIELD_I("run", "seed", seed),

      WWB_FIELD_D("frontend", "frame_len_s", frontend.frame_len_s),
      WWB_FIELD_D("frontend", "frame_hop_s", frontend.frame_hop_s),
      WWB_FIELD_I("frontend", "n_mels", frontend.n_mels),
      WWB_FIELD_D("frontend", "f_min_hz", frontend.f_min_hz),
      WWB_FIELD_D("frontend", "f_max_hz", frontend.f_max_hz),
      WWB_FIELD_D("frontend", "log_floor", frontend.log_floor),
      WWB_FIELD_I("frontend", "sample_rate_hz", frontend.sample_rate_hz),

      WWB_FIELD_D("strf", "alpha", strf.alpha),
      WWB_FIELD_D("strf", "omega1", strf.omega1),
      WWB_FIELD_D("strf", "omega2", strf.omega2),
      WWB_FIELD_I("strf", "filter_len_t", strf.filter_len_t),
      WWB_FIELD_I("strf", "filter_len_f", strf.filter_len_f),

      {"model", "arch",
       [](const RunConfig& c) { return architecture_name(c.model.arch); },
       [](RunConfig& c, const std::string& v) {
         c.model.arch = architecture_from_name(v);
       }},
      WWB_FIELD_I("model", "n_mels", model.n_mels),
      WWB_FIELD_I("model", "prenet_hidden", model.prenet_hidden),
      WWB_FIELD_I("model", "highway_width", model.highway_width),
      WWB_FIELD_I("model", "n_feature_blocks", model.n_feature_blocks),
      WWB_FIELD_I("model", "bottleneck_width", model.bottleneck_width),
      WWB_FIELD_I("model", "context_left", model.context_left),
      WWB_FIELD_I("model", "context_right", model.context_right),
      WWB_FIELD_I("model", "n_classifier_blocks", model.n_classifier_blocks),
      WWB_FIELD_D("model", "prenet_dropout", model.prenet_dropout),
      WWB_FIELD_I("model", "frontend_prenet_hidden",
                  model.frontend_prenet_hidden),
      WWB_FIELD_D("model", "dropout_residual_p", model.dropout_residual_p),
      WWB_FIELD_D("model", "dropout_feature_p", model.dropout_feature_p),

      WWB_FIELD_D("synth", "minutes", synth.minutes),
      WWB_FIELD_D("synth", "clip_seconds", synth.clip_seconds),
      WWB_FIELD_D("synth", "positive_rate", synth.positive_rate),
      WWB_FIELD_D("synth", "snr_db_min", synth.snr_db_min),
      WWB_FIELD_D("synth", "snr_db_max", synth.snr_db_max),

      WWB_FIELD_D("train", "learning_rate", train.learning_rate),
      WWB_FIELD_D("train", "beta1", train.beta1),
      WWB_FIELD_D("train", "beta2", train.beta2),
      WWB_FIELD_D("train", "adam_eps", train.adam_eps),
      WWB_FIELD_I("train", "batch_size", train.batch_size),
      WWB_FIELD_I("train", "epochs", train.epochs),
      WWB_FIELD_I("train", "seed", train.seed),
      WWB_FIELD_D("train", "weight_other_speech", train.class_weights[0]),
      WWB_FIELD_D("train", "weight_no_speech", train.class_weights[1]),
      WWB_FIELD_D("train", "weight_wake_word", train.class_weights[2]),

      {"attack", "method",
       [](const RunConfig& c) { return attack_method_name(c.attack.method); },
       [](RunConfig& c, const std::string& v) {
         c.attack.method = attack_method_from_name(v);
       }},
      WWB_FIELD_D("attack", "epsilon", attack.epsilon),
      WWB_FIELD_I("attack", "target_label", attack.target_label),
      WWB_FIELD_I("attack", "iterations", attack.iterations),
      WWB_FIELD_I("attack", "eval_every", attack.eval_every),
      WWB_FIELD_I("attack", "pgd_inner_iterations",
                  attack.pgd_inner_iterations),
      WWB_FIELD_D("attack", "step_size", attack.step_size),
      WWB_FIELD_D("attack", "cw_c", attack.cw_c),
      WWB_FIELD_D("attack", "overshoot", attack.overshoot),
      WWB_FIELD_I("attack", "seed", attack.seed),
      WWB_FIELD_I("attack", "delta_frames", attack.delta_frames),

      WWB_FIELD_I("eval", "det_thresholds", eval.det_thresholds),
      WWB_FIELD_D("eval", "fa_per_hour_cap", eval.fa_per_hour_cap),
  };
  return f;
}

#undef WWB_FIELD_D
#undef WWB_FIELD_I

const std::vector<std::string> kSectionOrder = {
    "run", "frontend", "strf", "model", "synth", "train", "attack", "eval"};

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  const auto fields = field_table();
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: malformed section at line " +
                                 std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(kSectionOrder.begin(), kSectionOrder.end(), section) ==
          kSectionOrder.end())
        throw std::runtime_error("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key=value at line " +
                               std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw std::runtime_error("config: key '" + key + "' outside a section");
    const auto it =
        std::find_if(fields.begin(), fields.end(), [&](const Field& f) {
          return f.section == section && f.key == key;
        });
    if (it == fields.end())
      throw std::runtime_error("config: unknown key '" + section + "." + key +
                               "'");
    it->set(cfg, value);
  }
  cfg.synth.frontend = cfg.frontend;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  const auto fields = field_table();
  std::ostringstream os;
  for (const auto& sec : kSectionOrder) {
    os << "[" << sec << "]\n";
    std::vector<const Field*> in_sec;
    for (const auto& f : fields)
      if (f.section == sec) in_sec.push_back(&f);
    std::sort(in_sec.begin(), in_sec.end(),
              [](const Field* a, const Field* b) { return a->key < b->key; });
    for (const auto* f : in_sec)
      os << f->key << " = " << f->get(cfg) << "\n";
  }
  return os.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  return fnv1a_hex(serialize_run_config(cfg));
}

StrfGridConfig resolved_strf_grid(const RunConfig& cfg) {
  StrfGridConfig g = cfg.strf;
  g.frame_hop_s = cfg.frontend.frame_hop_s;
  g.channels_per_octave =
      cfg.frontend.n_mels /
      std::log2(cfg.frontend.f_max_hz / cfg.frontend.f_min_hz);
  return g;
}

}  // namespace wwb
