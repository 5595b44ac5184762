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

#include <doctest.h>

#include "wwb/config.hpp"

TEST_CASE("canonical serialization is a parse fixed point") {
  wwb::RunConfig cfg;
  cfg.seed = 1234;
  cfg.model.arch = wwb::Architecture::kCortical;
  cfg.attack.epsilon = 0.00375;
  cfg.train.learning_rate = 3e-4;
  const std::string text = wwb::serialize_run_config(cfg);
  const wwb::RunConfig parsed = wwb::parse_run_config(text);
  CHECK(wwb::serialize_run_config(parsed) == text);
  CHECK(wwb::config_hash(parsed) == wwb::config_hash(cfg));
  CHECK(parsed.seed == 1234);
  CHECK(parsed.attack.epsilon == 0.00375);
  CHECK(parsed.model.arch == wwb::Architecture::kCortical);
}

TEST_CASE("different configs hash differently") {
  wwb::RunConfig a, b;
  b.train.epochs = a.train.epochs + 1;
  CHECK(wwb::config_hash(a) != wwb::config_hash(b));
  CHECK(wwb::config_hash(a).size() == 16);
}

TEST_CASE("fnv1a matches its reference vectors") {
  // Standard FNV-1a 64 test vectors.
  CHECK(wwb::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(wwb::fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(wwb::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_WITH_AS(wwb::parse_run_config("[train]\nlerning_rate = 0.1\n"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(wwb::parse_run_config("[destroy]\nx = 1\n"),
                       doctest::Contains("unknown section"),
                       std::runtime_error);
  CHECK_THROWS_AS(wwb::parse_run_config("epochs = 1\n"), std::runtime_error);
  CHECK_THROWS_AS(wwb::parse_run_config("[train]\nepochs = banana\n"),
                  std::runtime_error);
}

TEST_CASE("comments and spacing are tolerated") {
  const auto cfg = wwb::parse_run_config(
      "# experiment\n[train]\n  epochs=9 # short run\n\n[attack]\n"
      "method = cw\n");
  CHECK(cfg.train.epochs == 9);
  CHECK(cfg.attack.method == wwb::AttackMethod::kCw);
}

TEST_CASE("synth inherits the frontend geometry") {
  const auto cfg =
      wwb::parse_run_config("[frontend]\nn_mels = 24\nf_min_hz = 100\n");
  CHECK(cfg.synth.frontend.n_mels == 24);
  CHECK(cfg.synth.frontend.f_min_hz == 100.0);
}

TEST_CASE("strf grid follows the frontend channel density") {
  wwb::RunConfig cfg;
  cfg.frontend.n_mels = 64;
  cfg.frontend.f_min_hz = 60.0;
  cfg.frontend.f_max_hz = 7600.0;
  const auto grid = wwb::resolved_strf_grid(cfg);
  // 64 channels over log2(7600/60) ~ 6.98 octaves ~ 9.17 channels/octave.
  CHECK(grid.channels_per_octave == doctest::Approx(9.17).epsilon(1e-3));
  CHECK(grid.frame_hop_s == cfg.frontend.frame_hop_s);
}
