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

#ifndef WWB_CONFIG_HPP_
#define WWB_CONFIG_HPP_

#include <string>

#include "wwb/attacks.hpp"
#include "wwb/audio.hpp"
#include "wwb/network.hpp"
#include "wwb/strf.hpp"
#include "wwb/training.hpp"

namespace wwb {

struct EvalConfig {
  int det_thresholds = 50;
  double fa_per_hour_cap = 100.0;
};

// One experiment's worth of knobs, in INI-style sections. Parsing rejects
// unknown sections and keys so silently misspelled knobs cannot slip
// through a run.
struct RunConfig {
  std::uint64_t seed = 0;  // master seed; per-stage streams derive from it
  FrontendConfig frontend;
  StrfGridConfig strf;  // hop and channel density follow `frontend`
  ModelConfig model;
  SynthConfig synth;  // synth.frontend mirrors `frontend` after parse
  TrainConfig train;
  AttackConfig attack;
  EvalConfig eval;
};

// Grid config with frame hop and channels/octave derived from the
// frontend geometry.
StrfGridConfig resolved_strf_grid(const RunConfig& cfg);

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Canonical form: fixed section order, keys sorted within each section,
// "key = value" with 17 significant digits. Equal configs serialize to
// identical bytes.
std::string serialize_run_config(const RunConfig& cfg);

// FNV-1a 64 of the canonical serialization, as 16 lowercase hex digits.
// Stamped into checkpoints and reports so artifacts from mismatched
// configurations are refused by default.
std::string config_hash(const RunConfig& cfg);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace wwb

#endif  // WWB_CONFIG_HPP_
