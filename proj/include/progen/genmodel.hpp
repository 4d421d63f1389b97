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
#ifndef PROGEN_GENMODEL_HPP
#define PROGEN_GENMODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "progen/corpus.hpp"
#include "progen/importance.hpp"
#include "progen/rng.hpp"
#include "progen/staging.hpp"

namespace progen {

// Reserved symbols. The tokenizer folds control bytes into whitespace, so
// corpus tokens can never collide with these.
namespace sym {
inline const std::string bos = "\x01B";   // history padding
inline const std::string eos = "\x01E";   // planner stop symbol
inline const std::string sep = "\x01S";   // condition/output boundary
inline const std::string emit = "\x01A";  // refiner action: emit pending anchor (stop at end)
inline const std::string end = "\x01Z";   // pending-anchor sentinel once the queue is empty
inline const std::string unk = "\x01U";   // likelihood bucket for out-of-alphabet insertions
}  // namespace sym

struct SmoothingConfig {
  double lambda = 0.1;       // add-lambda floor at the context-free level
  double level_ratio = 2.0;  // default weight of level l is ratio^l
  std::vector<double> level_weights;  // explicit override; resolved at train time

  std::vector<double> weights_for(std::size_t levels) const;
};

struct DecoderConfig {
  double top_p = 0.95;
  std::size_t max_tokens = 1024;
  double temperature = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Nucleus sampling: temperature, sort (ties keep input order), smallest
/// prefix with cumulative mass >= top_p, renormalize, draw.
std::string sample_next(const std::vector<std::pair<std::string, double>>& dist,
                        const DecoderConfig& cfg, Rng& rng);

namespace detail {

// Leveled context -> continuation counts with interpolated backoff: levels
// whose context was observed contribute their ML estimate, weighted and
// renormalized per state; the context-free level carries an add-lambda floor
// over the whole alphabet so every symbol keeps positive probability.
class LeveledCounts {
 public:
  explicit LeveledCounts(std::size_t levels = 1) : tables_(levels) {}

  std::size_t levels() const { return tables_.size(); }
  std::size_t alphabet_size() const { return alphabet_.size(); }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::string& symbol(std::uint32_t id) const { return alphabet_[id]; }
  std::int64_t symbol_id(const std::string& s) const;

  std::uint32_t intern(const std::string& symbol);
  void observe(std::size_t level, const std::string& ctx, std::uint32_t symbol);

  /// Sorts the alphabet and context entries; required before queries.
  void finalize();

  /// Full next-symbol distribution, indexed like alphabet().
  std::vector<double> distribution(const std::vector<std::string>& keys,
                                   const SmoothingConfig& sc) const;
  double prob(const std::vector<std::string>& keys, std::uint32_t symbol,
              const SmoothingConfig& sc) const;

  void save(std::ostream& out) const;
  void load(std::istream& in, const std::string& path);

 private:
  struct Ctx {
    std::uint64_t total = 0;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> items;  // sorted by id
  };

  std::vector<double> norm_weights(const std::vector<const Ctx*>& observed,
                                   const SmoothingConfig& sc) const;

  std::vector<std::string> alphabet_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::unordered_map<std::string, Ctx>> tables_;
  bool finalized_ = false;
};

}  // namespace detail

// Stage-1 generator: an interpolated count LM over [condition, SEP, target]
// sequences. Only target tokens and EOS are ever predicted, so the output
// alphabet is exactly the training targets' vocabulary.
class PlannerModel {
 public:
  PlannerModel() : counts_(1) {}

  static PlannerModel train(const std::vector<TrainingPair>& pairs,
                            std::size_t order, SmoothingConfig smoothing = {});

  TokenSeq generate(const TokenSeq& condition, const DecoderConfig& cfg,
                    Rng& rng) const;
  double log_likelihood(const TokenSeq& target, const TokenSeq& condition = {}) const;

  std::size_t order() const { return order_; }
  const std::vector<std::string>& alphabet() const { return counts_.alphabet(); }
  const SmoothingConfig& smoothing() const { return smoothing_; }

  void save(const std::string& path) const;
  static PlannerModel load(const std::string& path);

 private:
  std::vector<std::string> context_keys(const TokenSeq& hist) const;

  std::size_t order_ = 4;
  SmoothingConfig smoothing_;
  detail::LeveledCounts counts_;
};

// Refinement generator: walks the previous stage's tokens as an anchor queue
// and decides, action by action, whether to emit the pending anchor or to
// insert a vocabulary token before it. Anchors are emitted in order, always.
class RefinerModel {
 public:
  RefinerModel() : counts_(1) {}

  static RefinerModel train(const std::vector<TrainingPair>& pairs,
                            std::size_t order, SmoothingConfig smoothing = {});

  /// generate_stage for refinement stages: input is the anchor queue.
  TokenSeq generate(const TokenSeq& anchors, const DecoderConfig& cfg,
                    Rng& rng) const;
  double log_likelihood(const TokenSeq& input, const TokenSeq& target) const;

  std::size_t order() const { return order_; }
  std::size_t stage() const { return stage_; }
  void set_stage(std::size_t stage) { stage_ = stage; }
  const std::vector<std::string>& action_alphabet() const { return counts_.alphabet(); }
  const SmoothingConfig& smoothing() const { return smoothing_; }

  void save(const std::string& path) const;
  static RefinerModel load(const std::string& path);

 private:
  std::vector<std::string> context_keys(const std::string& anchor,
                                        const TokenSeq& hist) const;
  template <typename Fn>
  static void walk_pair(const TrainingPair& pair, Fn&& step);

  std::size_t order_ = 3;
  std::size_t stage_ = 2;
  SmoothingConfig smoothing_;
  detail::LeveledCounts counts_;
};

struct GenerationTrace {
  TokenSeq condition;
  std::vector<TokenSeq> stage_outputs;  // one entry per stage
  std::size_t start_stage = 1;          // > 1 when earlier stages are a gold skeleton

  const TokenSeq& final_output() const { return stage_outputs.back(); }
};

struct StageModels {
  PlannerModel planner;
  std::vector<RefinerModel> refiners;  // stages 2..K

  std::size_t num_stages() const { return 1 + refiners.size(); }
};

/// Full chain: condition -> c_1 -> ... -> c_K.
GenerationTrace generate(const StageModels& models, const StageVocabulary& vocabs,
                         const TokenSeq& condition, const DecoderConfig& cfg,
                         Rng& rng);

/// Replaces stages before start_stage with the skeleton extracted from a
/// real document, then refines as usual.
GenerationTrace gold_plan_generate(const StageModels& models,
                                   const StageVocabulary& vocabs,
                                   const Document& doc, std::size_t start_stage,
                                   const DecoderConfig& cfg, Rng& rng);

}  // namespace progen

#endif
