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
#include "progen.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "progen/error.hpp"
#include "progen/pipeline.hpp"
#include "progen/synthetic.hpp"

using namespace progen;

struct progen_config {
  RunConfig config;
};

namespace {

thread_local std::string t_last_error = "";

progen_status status_of(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::EmptyInput:
    case Errc::DimMismatch:
      return PROGEN_ERR_INVALID_ARG;
    case Errc::Io:
      return PROGEN_ERR_IO;
    case Errc::Parse:
      return PROGEN_ERR_PARSE;
    case Errc::Config:
      return PROGEN_ERR_CONFIG;
    case Errc::DuplicateId:
    case Errc::EmptyCorpus:
    case Errc::WordNotInDocument:
    case Errc::WordNotInCorpus:
    case Errc::MissingPool:
    case Errc::MissingCondition:
      return PROGEN_ERR_DATA;
    case Errc::UnknownSymbol:
    case Errc::CorruptModel:
    case Errc::KindMismatch:
      return PROGEN_ERR_MODEL;
    case Errc::StaleArtifact:
      return PROGEN_ERR_STATE;
    case Errc::Internal:
      return PROGEN_ERR_INTERNAL;
  }
  return PROGEN_ERR_INTERNAL;
}

template <typename Fn>
progen_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return PROGEN_OK;
  } catch (const Error& e) {
    t_last_error = std::string(errc_name(e.code())) + ": " + e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return PROGEN_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return PROGEN_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

progen_status invalid_arg(const char* message) {
  t_last_error = message;
  return PROGEN_ERR_INVALID_ARG;
}

}  // namespace

extern "C" {

const char* progen_version(void) { return "0.1.0"; }

const char* progen_last_error(void) { return t_last_error.c_str(); }

progen_status progen_config_load(const char* path, progen_config** out) {
  if (!path || !out) return invalid_arg("progen_config_load: NULL argument");
  return guarded([&] {
    auto* handle = new progen_config{RunConfig::load(path)};
    *out = handle;
  });
}

progen_status progen_config_parse(const char* json_text, progen_config** out) {
  if (!json_text || !out) return invalid_arg("progen_config_parse: NULL argument");
  return guarded([&] {
    auto* handle = new progen_config{RunConfig::from_json_text(json_text)};
    *out = handle;
  });
}

void progen_config_free(progen_config* config) { delete config; }

progen_status progen_config_set(progen_config* config, const char* key,
                                const char* value) {
  if (!config || !key || !value) return invalid_arg("progen_config_set: NULL argument");
  return guarded([&] {
    const std::string k = key;
    const std::string v = value;
    if (k == "output_dir" || k == "out") {
      config->config.output_dir = v;
    } else if (k == "seed") {
      const auto seed = static_cast<std::uint64_t>(std::stoull(v));
      config->config.decoder.seed = seed;
      config->config.noise.seed = seed;
    } else if (k == "stages") {
      config->config.stages = StagePlan::preset(std::stoull(v));
    } else if (k == "samples") {
      config->config.generation.samples = std::stoull(v);
    } else {
      fail(Errc::InvalidArgument, "unknown config key \"" + k + "\"");
    }
    config->config.validate();
  });
}

progen_status progen_config_dump(const progen_config* config, char** out_json) {
  if (!config || !out_json) return invalid_arg("progen_config_dump: NULL argument");
  return guarded([&] { *out_json = dup_string(config->config.to_json_text()); });
}

void progen_string_free(char* s) { std::free(s); }

progen_status progen_cmd_build_vocab(const progen_config* config) {
  if (!config) return invalid_arg("progen_cmd_build_vocab: NULL config");
  return guarded([&] { cmd_build_vocab(config->config); });
}

progen_status progen_cmd_extract(const progen_config* config) {
  if (!config) return invalid_arg("progen_cmd_extract: NULL config");
  return guarded([&] { cmd_extract(config->config); });
}

progen_status progen_cmd_train(const progen_config* config) {
  if (!config) return invalid_arg("progen_cmd_train: NULL config");
  return guarded([&] { cmd_train(config->config); });
}

progen_status progen_cmd_generate(const progen_config* config, size_t samples,
                                  const char* mode) {
  if (!config) return invalid_arg("progen_cmd_generate: NULL config");
  return guarded([&] {
    GenerateOptions options;
    options.samples = samples;
    if (mode && *mode) options.mode = mode;
    cmd_generate(config->config, options);
  });
}

progen_status progen_cmd_evaluate(const progen_config* config,
                                  const char* generated_path,
                                  const char* reference_path, char** out_report_json) {
  if (!config || !generated_path || !reference_path)
    return invalid_arg("progen_cmd_evaluate: NULL argument");
  return guarded([&] {
    MetricReport report =
        cmd_evaluate(config->config, generated_path, reference_path);
    if (out_report_json) *out_report_json = dup_string(report.to_json());
  });
}

progen_status progen_cmd_run(const progen_config* config, char** out_report_json) {
  if (!config) return invalid_arg("progen_cmd_run: NULL config");
  return guarded([&] {
    MetricReport report = cmd_run(config->config);
    if (out_report_json) *out_report_json = dup_string(report.to_json());
  });
}

progen_status progen_make_synthetic_corpus(const char* path, size_t docs,
                                           uint64_t seed, int with_prompts) {
  if (!path) return invalid_arg("progen_make_synthetic_corpus: NULL path");
  return guarded([&] {
    SyntheticConfig cfg;
    if (docs > 0) cfg.docs = docs;
    cfg.seed = seed;
    cfg.with_prompts = with_prompts != 0;
    save_corpus(make_synthetic_corpus(cfg), path);
  });
}

}  // extern "C"
