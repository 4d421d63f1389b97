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

// Command-line front end; all pipeline work goes through the C API in
// progen.h so the CLI exercises exactly what library consumers get.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "progen.h"

namespace {

struct ConfigDeleter {
  void operator()(progen_config* c) const { progen_config_free(c); }
};
using ConfigPtr = std::unique_ptr<progen_config, ConfigDeleter>;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string seed;
  int stages = 0;
  long long samples = -1;
  std::string mode = "full";
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_config = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "run configuration JSON");
  if (needs_config) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory override");
  cmd->add_option("--seed", opts.seed, "seed override (decoder and noise)");
  cmd->add_option("--stages", opts.stages, "stage count override (applies preset)")
      ->check(CLI::Range(1, 9));
}

[[noreturn]] void die(progen_status status, const std::string& context) {
  nlohmann::json err{{"error",
                      {{"status", static_cast<int>(status)},
                       {"context", context},
                       {"message", progen_last_error()}}}};
  std::cerr << err.dump() << std::endl;
  std::exit(static_cast<int>(status));
}

void check(progen_status status, const std::string& context) {
  if (status != PROGEN_OK) die(status, context);
}

ConfigPtr load_config(const CommonOptions& opts) {
  progen_config* raw = nullptr;
  check(progen_config_load(opts.config_path.c_str(), &raw), "config");
  ConfigPtr config(raw);
  if (!opts.out_dir.empty())
    check(progen_config_set(config.get(), "out", opts.out_dir.c_str()), "config");
  if (!opts.seed.empty())
    check(progen_config_set(config.get(), "seed", opts.seed.c_str()), "config");
  if (opts.stages > 0)
    check(progen_config_set(config.get(), "stages", std::to_string(opts.stages).c_str()),
          "config");
  if (opts.samples >= 0)
    check(progen_config_set(config.get(), "samples", std::to_string(opts.samples).c_str()),
          "config");
  return config;
}

void print_report(const std::string& report_json) {
  nlohmann::json report = nlohmann::json::parse(report_json);
  auto row = [&](const char* name, const char* key) {
    if (!report.contains(key)) return;
    std::printf("%-10s", name);
    for (const auto& [n, v] : report[key].items())
      std::printf("  n=%s %8.4f", n.c_str(), v.get<double>());
    std::printf("\n");
  };
  std::printf("metric     values\n");
  row("MSJ", "msj");
  row("B-BLEU", "b_bleu");
  row("F-BLEU", "f_bleu");
  row("HA-BLEU", "ha_bleu");
  std::printf("%-10s  %10.6f\n", "TID", report["tid"].get<double>());
  for (const auto& [label, v] : report["fbd"].items())
    std::printf("%-10s  %10.6f  (%s)\n", "FBD", v.get<double>(), label.c_str());
  if (report.contains("meta") && report["meta"].contains("warnings"))
    for (const auto& w : report["meta"]["warnings"])
      std::printf("warning: %s\n", w.get<std::string>().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"staged coarse-to-fine text generation pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(progen_version()); });

  // synth
  std::string synth_out = "corpus.jsonl";
  std::size_t synth_docs = 1000;
  std::string synth_seed = "42";
  bool synth_prompts = false;
  auto* synth = app.add_subcommand("synth", "write a deterministic sample corpus");
  synth->add_option("--out", synth_out, "output corpus path");
  synth->add_option("--docs", synth_docs, "number of documents");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_flag("--prompts", synth_prompts, "attach topic prompts to documents");

  CommonOptions build_opts, extract_opts, train_opts, gen_opts, eval_opts, run_opts;
  auto* build = app.add_subcommand("build-vocab", "construct stage vocabularies");
  add_common(build, build_opts);
  auto* extract = app.add_subcommand("extract", "extract and noise stage training pairs");
  add_common(extract, extract_opts);
  auto* train = app.add_subcommand("train", "train one generator per stage");
  add_common(train, train_opts);

  auto* gen = app.add_subcommand("generate", "sample documents through the stage chain");
  add_common(gen, gen_opts);
  gen->add_option("--samples", gen_opts.samples, "number of samples");
  gen->add_option("--mode", gen_opts.mode, "full or gold-plan:<k>");

  std::string eval_generated, eval_reference;
  auto* eval = app.add_subcommand("evaluate", "score generated text against a reference set");
  add_common(eval, eval_opts);
  eval->add_option("--generated", eval_generated, "generated corpus path")->required();
  eval->add_option("--reference", eval_reference, "reference corpus path")->required();

  auto* run = app.add_subcommand("run", "full pipeline with artifact caching");
  add_common(run, run_opts);
  run->add_option("--samples", run_opts.samples, "number of samples");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    std::uint64_t seed = std::stoull(synth_seed);
    check(progen_make_synthetic_corpus(synth_out.c_str(), synth_docs, seed,
                                       synth_prompts ? 1 : 0),
          "synth");
    std::printf("wrote %s\n", synth_out.c_str());
    return 0;
  }

  if (build->parsed()) {
    ConfigPtr config = load_config(build_opts);
    check(progen_cmd_build_vocab(config.get()), "build-vocab");
    std::printf("build-vocab: done\n");
    return 0;
  }
  if (extract->parsed()) {
    ConfigPtr config = load_config(extract_opts);
    check(progen_cmd_extract(config.get()), "extract");
    std::printf("extract: done\n");
    return 0;
  }
  if (train->parsed()) {
    ConfigPtr config = load_config(train_opts);
    check(progen_cmd_train(config.get()), "train");
    std::printf("train: done\n");
    return 0;
  }
  if (gen->parsed()) {
    ConfigPtr config = load_config(gen_opts);
    std::size_t samples = gen_opts.samples > 0 ? static_cast<std::size_t>(gen_opts.samples) : 0;
    check(progen_cmd_generate(config.get(), samples, gen_opts.mode.c_str()), "generate");
    std::printf("generate: done\n");
    return 0;
  }
  if (eval->parsed()) {
    ConfigPtr config = load_config(eval_opts);
    char* report = nullptr;
    check(progen_cmd_evaluate(config.get(), eval_generated.c_str(),
                              eval_reference.c_str(), &report),
          "evaluate");
    print_report(report);
    progen_string_free(report);
    return 0;
  }
  if (run->parsed()) {
    ConfigPtr config = load_config(run_opts);
    char* report = nullptr;
    check(progen_cmd_run(config.get(), &report), "run");
    print_report(report);
    progen_string_free(report);
    return 0;
  }
  return 0;
}
