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
#include "progen/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "progen/error.hpp"
#include "progen/rng.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace progen {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json tokenizer_json(const TokenizerConfig& t) {
  return json{{"lowercase", t.lowercase},
              {"keep_sentence_boundary", t.keep_sentence_boundary},
              {"min_doc_tokens", t.min_doc_tokens},
              {"max_doc_tokens", t.max_doc_tokens}};
}

json stages_json(const StagePlan& p) {
  return json{{"k", p.k},
              {"coverage_targets", p.coverage_targets},
              {"always_include",
               std::vector<Token>(p.always_include.begin(), p.always_include.end())}};
}

json noise_json(const NoiseConfig& n) {
  json probs = json::object();
  for (const auto& [order, p] : n.replace_prob) probs[std::to_string(order)] = p;
  return json{{"replace_prob", probs}, {"seed", n.seed}};
}

json generator_json(const RunConfig& c) {
  return json{{"planner_order", c.planner_order},
              {"refiner_order", c.refiner_order},
              {"lambda", c.smoothing.lambda},
              {"level_ratio", c.smoothing.level_ratio}};
}

json decoder_json(const DecoderConfig& d) {
  return json{{"top_p", d.top_p},
              {"max_tokens", d.max_tokens},
              {"temperature", d.temperature},
              {"seed", d.seed}};
}

json generation_json(const GenerationConfig& g) {
  return json{{"samples", g.samples},
              {"conditional", g.conditional},
              {"prompt_source", g.prompt_source},
              {"gold_source", g.gold_source}};
}

json metrics_json(const MetricConfig& m) {
  json emb = json::object();
  for (const auto& [label, files] : m.embedding_files)
    emb[label] = json{{"generated", files.generated}, {"reference", files.reference}};
  return json{{"ngram_orders", m.ngram_orders},
              {"fallback_dim", m.fallback_dim},
              {"use_fallback", m.use_fallback_embeddings},
              {"epsilon", m.epsilon},
              {"embeddings", emb}};
}

std::string slice_digest(const json& j) { return hex64(fnv1a(j.dump())); }

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  require(!j.is_discarded() && j.is_object(), Errc::Parse, "malformed run config JSON");

  RunConfig c;
  if (j.contains("preset")) {
    std::string preset = j["preset"].get<std::string>();
    require(preset.rfind("progen-", 0) == 0 && preset.size() == 8, Errc::Config,
            "unknown preset \"" + preset + "\" (expected progen-2/3/4)");
    c.stages = StagePlan::preset(static_cast<std::size_t>(preset[7] - '0'));
  }
  if (j.contains("corpus")) {
    const json& p = j["corpus"];
    c.corpus.train = p.value("train", "");
    c.corpus.dev = p.value("dev", "");
    c.corpus.test = p.value("test", "");
  }
  if (j.contains("tokenizer")) {
    const json& t = j["tokenizer"];
    c.tokenizer.lowercase = t.value("lowercase", c.tokenizer.lowercase);
    c.tokenizer.keep_sentence_boundary =
        t.value("keep_sentence_boundary", c.tokenizer.keep_sentence_boundary);
    c.tokenizer.min_doc_tokens = t.value("min_doc_tokens", c.tokenizer.min_doc_tokens);
    c.tokenizer.max_doc_tokens = t.value("max_doc_tokens", c.tokenizer.max_doc_tokens);
  }
  if (j.contains("stages")) {
    const json& s = j["stages"];
    if (s.contains("k") && !s.contains("coverage_targets")) {
      c.stages = StagePlan::preset(s["k"].get<std::size_t>());
    } else if (s.contains("coverage_targets")) {
      c.stages.coverage_targets = s["coverage_targets"].get<std::vector<double>>();
      c.stages.k = s.value("k", c.stages.coverage_targets.size());
    }
    if (s.contains("always_include")) {
      c.stages.always_include.clear();
      for (const auto& t : s["always_include"])
        c.stages.always_include.insert(t.get<std::string>());
    }
  }
  if (j.contains("noise")) {
    const json& nj = j["noise"];
    if (nj.contains("replace_prob")) {
      c.noise.replace_prob.clear();
      for (auto it = nj["replace_prob"].begin(); it != nj["replace_prob"].end(); ++it)
        c.noise.replace_prob[std::stoull(it.key())] = it.value().get<double>();
    }
    c.noise.seed = nj.value("seed", c.noise.seed);
  }
  if (j.contains("generator")) {
    const json& g = j["generator"];
    c.planner_order = g.value("planner_order", c.planner_order);
    c.refiner_order = g.value("refiner_order", c.refiner_order);
    c.smoothing.lambda = g.value("lambda", c.smoothing.lambda);
    c.smoothing.level_ratio = g.value("level_ratio", c.smoothing.level_ratio);
  }
  if (j.contains("decoder")) {
    const json& d = j["decoder"];
    c.decoder.top_p = d.value("top_p", c.decoder.top_p);
    c.decoder.max_tokens = d.value("max_tokens", c.decoder.max_tokens);
    c.decoder.temperature = d.value("temperature", c.decoder.temperature);
    c.decoder.seed = d.value("seed", c.decoder.seed);
  }
  if (j.contains("generation")) {
    const json& g = j["generation"];
    c.generation.samples = g.value("samples", c.generation.samples);
    c.generation.conditional = g.value("conditional", c.generation.conditional);
    c.generation.prompt_source = g.value("prompt_source", c.generation.prompt_source);
    c.generation.gold_source = g.value("gold_source", c.generation.gold_source);
  }
  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    if (m.contains("ngram_orders"))
      c.metrics.ngram_orders = m["ngram_orders"].get<std::vector<std::size_t>>();
    c.metrics.fallback_dim = m.value("fallback_dim", c.metrics.fallback_dim);
    c.metrics.use_fallback_embeddings =
        m.value("use_fallback", c.metrics.use_fallback_embeddings);
    c.metrics.epsilon = m.value("epsilon", c.metrics.epsilon);
    if (m.contains("embeddings")) {
      for (auto it = m["embeddings"].begin(); it != m["embeddings"].end(); ++it) {
        EmbeddingFilePair pair;
        pair.generated = it.value().at("generated").get<std::string>();
        pair.reference = it.value().at("reference").get<std::string>();
        c.metrics.embedding_files[it.key()] = pair;
      }
    }
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["corpus"] = json{{"train", corpus.train}, {"dev", corpus.dev}, {"test", corpus.test}};
  j["tokenizer"] = tokenizer_json(tokenizer);
  j["stages"] = stages_json(stages);
  j["noise"] = noise_json(noise);
  j["generator"] = generator_json(*this);
  j["decoder"] = decoder_json(decoder);
  j["generation"] = generation_json(generation);
  j["metrics"] = metrics_json(metrics);
  j["output_dir"] = output_dir;
  return j.dump(2);
}

void RunConfig::validate() const {
  tokenizer.validate();
  stages.validate();
  noise.validate();
  decoder.validate();
  require(planner_order >= 1 && refiner_order >= 1, Errc::Config,
          "generator orders must be >= 1");
  require(!output_dir.empty(), Errc::Config, "output_dir must not be empty");
}

std::string RunConfig::vocab_dir() const { return (fs::path(output_dir) / "vocab").string(); }
std::string RunConfig::stage_manifest_path() const {
  return (fs::path(vocab_dir()) / "stage_manifest.json").string();
}
std::string RunConfig::pairs_dir() const { return (fs::path(output_dir) / "pairs").string(); }
std::string RunConfig::clean_pairs_path(std::size_t stage) const {
  return (fs::path(pairs_dir()) / ("stage_" + std::to_string(stage) + ".clean.jsonl")).string();
}
std::string RunConfig::noised_pairs_path(std::size_t stage) const {
  return (fs::path(pairs_dir()) / ("stage_" + std::to_string(stage) + ".noised.jsonl")).string();
}
std::string RunConfig::models_dir() const { return (fs::path(output_dir) / "models").string(); }
std::string RunConfig::model_path(std::size_t stage) const {
  return (fs::path(models_dir()) / ("stage_" + std::to_string(stage) + ".model")).string();
}
std::string RunConfig::generated_corpus_path() const {
  return (fs::path(output_dir) / "gen" / "generated.jsonl").string();
}
std::string RunConfig::traces_path() const {
  return (fs::path(output_dir) / "gen" / "traces.jsonl").string();
}
std::string RunConfig::report_path() const {
  return (fs::path(output_dir) / "report.json").string();
}
std::string RunConfig::manifest_path() const {
  return (fs::path(output_dir) / "manifest.json").string();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open file for digest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return hex64(fnv1a(buf.str()));
}

// ---------------------------------------------------------------------------
// Run manifest

namespace {

class Manifest {
 public:
  explicit Manifest(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in.good()) {
      data_ = json{{"version", kVersion}, {"steps", json::object()}};
      return;
    }
    data_ = json::parse(in, nullptr, false);
    if (data_.is_discarded() || !data_.is_object())
      data_ = json{{"version", kVersion}, {"steps", json::object()}};
    if (!data_.contains("steps")) data_["steps"] = json::object();
  }

  bool has_step(const std::string& name) const { return data_["steps"].contains(name); }

  const json& step(const std::string& name) const { return data_["steps"].at(name); }

  /// True when the recorded step matches the given inputs/config digest and
  /// all recorded outputs still exist with their recorded digests.
  bool fresh(const std::string& name, const json& inputs,
             const std::string& config_digest) const {
    if (!has_step(name)) return false;
    const json& s = step(name);
    if (s.value("config_digest", "") != config_digest) return false;
    if (s.value("inputs", json::object()) != inputs) return false;
    if (!s.contains("outputs")) return false;
    for (auto it = s["outputs"].begin(); it != s["outputs"].end(); ++it) {
      if (!fs::exists(it.key())) return false;
      if (file_digest(it.key()) != it.value().get<std::string>()) return false;
    }
    return true;
  }

  void record(const std::string& name, const json& inputs,
              const std::string& config_digest,
              const std::vector<std::string>& outputs, double duration_ms,
              const json& extra = json::object()) {
    json out = json::object();
    for (const std::string& path : outputs) out[path] = file_digest(path);
    json s{{"inputs", inputs},
           {"config_digest", config_digest},
           {"outputs", out},
           {"duration_ms", duration_ms}};
    for (auto it = extra.begin(); it != extra.end(); ++it) s[it.key()] = it.value();
    data_["steps"][name] = s;
    save();
  }

 private:
  void save() const {
    fs::create_directories(fs::path(path_).parent_path());
    std::ofstream out(path_, std::ios::binary);
    require(out.good(), Errc::Io, "cannot write manifest: " + path_);
    out << data_.dump(2) << "\n";
  }

  std::string path_;
  json data_;
};

class StepTimer {
 public:
  StepTimer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void require_file(const std::string& path, const std::string& what) {
  require(!path.empty(), Errc::Config, what + " path not configured");
  require(fs::exists(path), Errc::Config, what + " not found: " + path);
}

Corpus load_split(const RunConfig& config, const std::string& which) {
  std::string path;
  Split split = Split::Train;
  if (which == "train") {
    path = config.corpus.train;
  } else if (which == "dev") {
    path = config.corpus.dev;
    split = Split::Dev;
  } else if (which == "test") {
    path = config.corpus.test;
    split = Split::Test;
  } else {
    fail(Errc::Config, "unknown corpus split \"" + which + "\"");
  }
  require_file(path, which + " corpus");
  return load_corpus(path, config.tokenizer, split);
}

json vocab_inputs(const RunConfig& config) {
  require_file(config.corpus.train, "train corpus");
  return json{{"corpus.train", file_digest(config.corpus.train)}};
}

std::string vocab_config_digest(const RunConfig& config) {
  return slice_digest(json{{"tokenizer", tokenizer_json(config.tokenizer)},
                           {"stages", stages_json(config.stages)}});
}

/// Extract and later steps verify their upstream record instead of trusting
/// whatever artifacts lie around.
void check_upstream(const Manifest& manifest, const std::string& step,
                    const json& expected_inputs, const std::string& expected_config,
                    const std::string& hint) {
  require(manifest.has_step(step), Errc::StaleArtifact,
          "no recorded \"" + step + "\" step; " + hint);
  const json& s = manifest.step(step);
  require(s.value("config_digest", "") == expected_config &&
              s.value("inputs", json::object()) == expected_inputs,
          Errc::StaleArtifact,
          "\"" + step + "\" artifacts are stale (config or inputs changed); " + hint);
  if (!s.contains("outputs")) return;
  for (auto it = s["outputs"].begin(); it != s["outputs"].end(); ++it) {
    require(fs::exists(it.key()) && file_digest(it.key()) == it.value().get<std::string>(),
            Errc::StaleArtifact, "artifact changed on disk: " + it.key() + "; " + hint);
  }
}

std::vector<std::string> vocab_outputs(const RunConfig& config) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= config.stages.k; ++k)
    out.push_back((fs::path(config.vocab_dir()) / ("vocab_stage_" + std::to_string(k) + ".tsv")).string());
  out.push_back(config.stage_manifest_path());
  return out;
}

std::vector<std::string> pair_outputs(const RunConfig& config) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= config.stages.k; ++k) {
    out.push_back(config.clean_pairs_path(k));
    out.push_back(config.noised_pairs_path(k));
  }
  return out;
}

std::vector<std::string> model_outputs(const RunConfig& config) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= config.stages.k; ++k) out.push_back(config.model_path(k));
  return out;
}

json extract_inputs(const RunConfig& config) {
  json inputs = vocab_inputs(config);
  for (const std::string& path : vocab_outputs(config)) {
    require(fs::exists(path), Errc::StaleArtifact,
            "missing vocabulary artifact: " + path + "; run build-vocab first");
    inputs["vocab:" + fs::path(path).filename().string()] = file_digest(path);
  }
  return inputs;
}

std::string extract_config_digest(const RunConfig& config) {
  return slice_digest(json{{"tokenizer", tokenizer_json(config.tokenizer)},
                           {"stages", stages_json(config.stages)},
                           {"noise", noise_json(config.noise)}});
}

json train_inputs(const RunConfig& config) {
  json inputs = json::object();
  for (std::size_t k = 1; k <= config.stages.k; ++k) {
    std::string path = k == 1 ? config.clean_pairs_path(k) : config.noised_pairs_path(k);
    require(fs::exists(path), Errc::StaleArtifact,
            "missing pair file: " + path + "; run extract first");
    inputs["pairs:stage_" + std::to_string(k)] = file_digest(path);
  }
  return inputs;
}

std::string train_config_digest(const RunConfig& config) {
  return slice_digest(json{{"generator", generator_json(config)},
                           {"stages_k", config.stages.k}});
}

std::string split_path(const RunConfig& config, const std::string& which) {
  if (which == "train") return config.corpus.train;
  if (which == "dev") return config.corpus.dev;
  if (which == "test") return config.corpus.test;
  fail(Errc::Config, "unknown corpus split \"" + which + "\"");
}

json generate_inputs(const RunConfig& config, const GenerateOptions& options) {
  json inputs = json::object();
  for (std::size_t k = 1; k <= config.stages.k; ++k) {
    std::string path = config.model_path(k);
    require(fs::exists(path), Errc::StaleArtifact,
            "missing model file: " + path + "; run train first");
    inputs["model:stage_" + std::to_string(k)] = file_digest(path);
  }
  inputs["vocab:manifest"] = file_digest(config.stage_manifest_path());
  if (options.mode.rfind("gold-plan:", 0) == 0) {
    std::string path = split_path(config, config.generation.gold_source);
    require_file(path, "gold-plan source corpus");
    inputs["gold_source"] = file_digest(path);
  }
  if (config.generation.conditional) {
    std::string path = split_path(config, config.generation.prompt_source);
    require_file(path, "prompt source corpus");
    inputs["prompt_source"] = file_digest(path);
  }
  return inputs;
}

struct ParsedMode {
  bool gold = false;
  std::size_t start_stage = 2;
};

ParsedMode parse_mode(const std::string& mode, std::size_t k_stages) {
  ParsedMode out;
  if (mode == "full" || mode.empty()) return out;
  require(mode.rfind("gold-plan:", 0) == 0, Errc::InvalidArgument,
          "unknown generation mode \"" + mode + "\" (expected full or gold-plan:<k>)");
  out.gold = true;
  std::size_t stage = 0;
  try {
    stage = std::stoull(mode.substr(10));
  } catch (const std::exception&) {
    fail(Errc::InvalidArgument, "bad gold-plan stage in mode \"" + mode + "\"");
  }
  require(stage >= 2 && stage <= k_stages, Errc::InvalidArgument,
          "gold-plan stage must be in [2, K]; got " + std::to_string(stage));
  out.start_stage = stage;
  return out;
}

}  // namespace

void cmd_build_vocab(const RunConfig& config) {
  config.validate();
  Manifest manifest(config.manifest_path());
  StepTimer timer;

  json inputs = vocab_inputs(config);
  Corpus train = load_split(config, "train");
  require(!train.empty(), Errc::EmptyCorpus, "train corpus has no usable documents");

  ImportanceTable table = build_importance_table(train);
  StageVocabulary vocabs = build_stage_vocabularies(table, train, config.stages);
  write_stage_vocabularies(vocabs, table, train, config.stages, config.vocab_dir());

  manifest.record("build-vocab", inputs, vocab_config_digest(config),
                  vocab_outputs(config), timer.ms());
}

void cmd_extract(const RunConfig& config) {
  config.validate();
  Manifest manifest(config.manifest_path());
  StepTimer timer;

  check_upstream(manifest, "build-vocab", vocab_inputs(config),
                 vocab_config_digest(config), "run build-vocab first");
  json inputs = extract_inputs(config);

  Corpus train = load_split(config, "train");
  StageVocabulary vocabs = read_stage_vocabularies(config.stage_manifest_path());
  PairExtraction extraction = make_pairs(train, vocabs);

  fs::create_directories(config.pairs_dir());
  const std::size_t max_order =
      config.noise.replace_prob.empty() ? 0 : config.noise.replace_prob.rbegin()->first;
  json drops = json::object();
  for (std::size_t k = 1; k <= config.stages.k; ++k) {
    const auto& pairs = extraction.per_stage[k - 1];
    write_pairs(pairs, config.clean_pairs_path(k));
    drops["stage_" + std::to_string(k)] = extraction.dropped_per_stage[k - 1];

    // Stage 1 inputs are prompts, not extracted sequences; they are never
    // noised. Later stages draw replacements from their own clean inputs.
    if (k == 1 || !config.noise.enabled()) {
      write_pairs(pairs, config.noised_pairs_path(k));
      continue;
    }
    NgramPool pool;
    for (const TrainingPair& p : pairs) pool.add_sequence(p.input, max_order);
    std::vector<TrainingPair> noised;
    noised.reserve(pairs.size());
    for (const TrainingPair& p : pairs) {
      Rng rng(derive_seed(config.noise.seed, p.source_id));
      TrainingPair np = p;
      np.input = noise(p.input, config.noise, pool, rng);
      np.noised = true;
      noised.push_back(std::move(np));
    }
    write_pairs(noised, config.noised_pairs_path(k));
  }

  manifest.record("extract", inputs, extract_config_digest(config),
                  pair_outputs(config), timer.ms(), json{{"dropped", drops}});
}

void cmd_train(const RunConfig& config) {
  config.validate();
  Manifest manifest(config.manifest_path());
  StepTimer timer;

  check_upstream(manifest, "extract", extract_inputs(config),
                 extract_config_digest(config), "run extract first");
  json inputs = train_inputs(config);

  fs::create_directories(config.models_dir());
  json read_sets = json::object();
  for (std::size_t k = 1; k <= config.stages.k; ++k) {
    const std::string pair_path =
        k == 1 ? config.clean_pairs_path(k) : config.noised_pairs_path(k);
    std::vector<TrainingPair> pairs = read_pairs(pair_path);
    require(!pairs.empty(), Errc::EmptyInput,
            "no training pairs for stage " + std::to_string(k) + " in " + pair_path);
    read_sets["stage_" + std::to_string(k)] = std::vector<std::string>{pair_path};

    if (k == 1) {
      PlannerModel planner =
          PlannerModel::train(pairs, config.planner_order, config.smoothing);
      planner.save(config.model_path(k));
    } else {
      RefinerModel refiner =
          RefinerModel::train(pairs, config.refiner_order, config.smoothing);
      refiner.set_stage(k);
      refiner.save(config.model_path(k));
    }
  }

  manifest.record("train", inputs, train_config_digest(config), model_outputs(config),
                  timer.ms(), json{{"read_sets", read_sets}});
}

void cmd_generate(const RunConfig& config, const GenerateOptions& options) {
  config.validate();
  Manifest manifest(config.manifest_path());
  StepTimer timer;

  check_upstream(manifest, "train", train_inputs(config), train_config_digest(config),
                 "run train first");

  StageVocabulary vocabs = read_stage_vocabularies(config.stage_manifest_path());
  StageModels models;
  models.planner = PlannerModel::load(config.model_path(1));
  for (std::size_t k = 2; k <= config.stages.k; ++k)
    models.refiners.push_back(RefinerModel::load(config.model_path(k)));

  ParsedMode mode = parse_mode(options.mode, config.stages.k);
  json inputs = generate_inputs(config, options);

  std::vector<GenerationTrace> traces;
  std::vector<std::string> source_ids;
  if (mode.gold) {
    Corpus source = load_split(config, config.generation.gold_source);
    require(!source.empty(), Errc::EmptyCorpus, "gold-plan source corpus is empty");
    for (const Document& d : source.documents) {
      Rng rng(derive_seed(config.decoder.seed, d.id));
      traces.push_back(
          gold_plan_generate(models, vocabs, d, mode.start_stage, config.decoder, rng));
      source_ids.push_back(d.id);
    }
  } else {
    const std::size_t samples =
        options.samples > 0 ? options.samples : config.generation.samples;
    require(samples >= 1, Errc::Config, "samples must be >= 1");

    std::vector<TokenSeq> prompts;
    if (config.generation.conditional) {
      Corpus source = load_split(config, config.generation.prompt_source);
      for (const Document& d : source.documents)
        if (!d.condition.empty()) prompts.push_back(d.condition);
      require(!prompts.empty(), Errc::MissingCondition,
              "conditional generation requested but the " +
                  config.generation.prompt_source + " corpus has no prompts");
    }
    for (std::size_t i = 0; i < samples; ++i) {
      Rng rng(derive_seed(config.decoder.seed, static_cast<std::uint64_t>(i)));
      TokenSeq condition;
      if (!prompts.empty()) condition = prompts[i % prompts.size()];
      traces.push_back(generate(models, vocabs, condition, config.decoder, rng));
      source_ids.push_back("");
    }
  }

  fs::create_directories(fs::path(config.generated_corpus_path()).parent_path());
  Corpus generated;
  char idbuf[32];
  for (std::size_t i = 0; i < traces.size(); ++i) {
    Document d;
    std::snprintf(idbuf, sizeof(idbuf), "gen-%06zu", i + 1);
    d.id = idbuf;
    d.tokens = traces[i].final_output();
    d.condition = traces[i].condition;
    generated.documents.push_back(std::move(d));
  }
  save_corpus(generated, config.generated_corpus_path());

  {
    std::ofstream out(config.traces_path(), std::ios::binary);
    require(out.good(), Errc::Io, "cannot write traces: " + config.traces_path());
    for (std::size_t i = 0; i < traces.size(); ++i) {
      json rec;
      std::snprintf(idbuf, sizeof(idbuf), "gen-%06zu", i + 1);
      rec["id"] = idbuf;
      if (!source_ids[i].empty()) rec["source_id"] = source_ids[i];
      rec["start_stage"] = traces[i].start_stage;
      rec["condition"] = traces[i].condition;
      rec["stages"] = traces[i].stage_outputs;
      out << rec.dump() << "\n";
    }
  }

  json extra{{"mode", options.mode.empty() ? "full" : options.mode},
             {"samples", traces.size()}};
  manifest.record("generate", inputs, slice_digest(json{
                      {"decoder", decoder_json(config.decoder)},
                      {"generation", generation_json(config.generation)},
                      {"mode", options.mode}}),
                  {config.generated_corpus_path(), config.traces_path()}, timer.ms(),
                  extra);
}

MetricReport cmd_evaluate(const RunConfig& config, const std::string& generated_path,
                          const std::string& reference_path) {
  config.validate();
  Manifest manifest(config.manifest_path());
  StepTimer timer;

  require_file(generated_path, "generated corpus");
  require_file(reference_path, "reference corpus");
  Corpus generated = load_corpus(generated_path, config.tokenizer, Split::Test);
  Corpus reference = load_corpus(reference_path, config.tokenizer, Split::Test);

  // Lineage by digest, not path, so identical inputs yield identical reports
  // regardless of where the run lives on disk.
  MetricReport report = evaluate(generated, reference, config.metrics);
  report.meta["generated_digest"] = file_digest(generated_path);
  report.meta["reference_digest"] = file_digest(reference_path);
  report.meta["metrics_config_digest"] = slice_digest(metrics_json(config.metrics));

  fs::create_directories(fs::path(config.report_path()).parent_path());
  std::ofstream out(config.report_path(), std::ios::binary);
  require(out.good(), Errc::Io, "cannot write report: " + config.report_path());
  out << report.to_json() << "\n";
  out.close();

  json inputs{{"generated", file_digest(generated_path)},
              {"reference", file_digest(reference_path)}};
  manifest.record("evaluate", inputs, slice_digest(metrics_json(config.metrics)),
                  {config.report_path()}, timer.ms());
  return report;
}

MetricReport cmd_run(const RunConfig& config) {
  config.validate();
  Manifest manifest(config.manifest_path());

  if (!manifest.fresh("build-vocab", vocab_inputs(config), vocab_config_digest(config)))
    cmd_build_vocab(config);

  {
    Manifest m(config.manifest_path());
    if (!m.fresh("extract", extract_inputs(config), extract_config_digest(config)))
      cmd_extract(config);
  }
  {
    Manifest m(config.manifest_path());
    if (!m.fresh("train", train_inputs(config), train_config_digest(config)))
      cmd_train(config);
  }
  {
    GenerateOptions options;
    Manifest m(config.manifest_path());
    if (!m.fresh("generate", generate_inputs(config, options),
                 slice_digest(json{{"decoder", decoder_json(config.decoder)},
                                   {"generation", generation_json(config.generation)},
                                   {"mode", options.mode}})))
      cmd_generate(config, options);
  }
  return cmd_evaluate(config, config.generated_corpus_path(), config.corpus.test);
}

}  // namespace progen
