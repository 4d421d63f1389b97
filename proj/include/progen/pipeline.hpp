/**
 * Copyright 2026 the progen authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef PROGEN_PIPELINE_HPP
#define PROGEN_PIPELINE_HPP

#include <string>

#include "progen/corpus.hpp"
#include "progen/genmodel.hpp"
#include "progen/importance.hpp"
#include "progen/metrics.hpp"
#include "progen/staging.hpp"

namespace progen {

struct CorpusPaths {
  std::string train;
  std::string dev;
  std::string test;
};

struct GenerationConfig {
  std::size_t samples = 100;
  bool conditional = false;
  std::string prompt_source = "dev";  // corpus split supplying prompts
  std::string gold_source = "dev";    // corpus split supplying gold skeletons
};

// One declarative document drives the whole pipeline. Presets progen-2/3/4
// select the stage count and its coverage schedule; everything else has
// defaults (top_p 0.95, 1024 max tokens, noise 0.1/0.05/0.025/0.0125).
struct RunConfig {
  CorpusPaths corpus;
  TokenizerConfig tokenizer;
  StagePlan stages = StagePlan::preset(2);
  NoiseConfig noise = NoiseConfig::defaults();
  std::size_t planner_order = 4;
  std::size_t refiner_order = 3;
  SmoothingConfig smoothing;
  DecoderConfig decoder;
  GenerationConfig generation;
  MetricConfig metrics;
  std::string output_dir = "out";

  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string to_json_text() const;

  void validate() const;

  // Artifact locations under output_dir.
  std::string vocab_dir() const;
  std::string stage_manifest_path() const;
  std::string pairs_dir() const;
  std::string clean_pairs_path(std::size_t stage) const;
  std::string noised_pairs_path(std::size_t stage) const;
  std::string models_dir() const;
  std::string model_path(std::size_t stage) const;
  std::string generated_corpus_path() const;
  std::string traces_path() const;
  std::string report_path() const;
  std::string manifest_path() const;
};

struct GenerateOptions {
  std::size_t samples = 0;    // 0: use config value
  std::string mode = "full";  // "full" or "gold-plan:<k>"
};

void cmd_build_vocab(const RunConfig& config);
void cmd_extract(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_generate(const RunConfig& config, const GenerateOptions& options = {});
MetricReport cmd_evaluate(const RunConfig& config, const std::string& generated_path,
                          const std::string& reference_path);

/// build-vocab -> extract -> train -> generate -> evaluate, with per-step
/// digest caching: a step re-runs only when its inputs or config changed.
MetricReport cmd_run(const RunConfig& config);

/// Content digest used for artifact lineage (hex FNV-1a over file bytes).
std::string file_digest(const std::string& path);

}  // namespace progen

#endif
