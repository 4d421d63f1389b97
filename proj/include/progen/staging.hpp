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
#ifndef PROGEN_STAGING_HPP
#define PROGEN_STAGING_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "progen/corpus.hpp"
#include "progen/importance.hpp"
#include "progen/rng.hpp"

namespace progen {

struct IntermediateSequence {
  std::size_t stage = 1;
  TokenSeq tokens;
  std::string source_id;
};

/// Order-preserving filter of the document by vocabulary membership.
TokenSeq extract(const TokenSeq& tokens, const std::set<Token>& vocab);
IntermediateSequence extract(const Document& d, const std::set<Token>& vocab,
                             std::size_t stage);

struct TrainingPair {
  std::size_t stage = 1;
  std::string source_id;
  TokenSeq input;   // stage-(k-1) sequence, or the condition for stage 1
  TokenSeq target;  // stage-k sequence
  bool noised = false;
};

struct PairExtraction {
  std::vector<std::vector<TrainingPair>> per_stage;  // index 0 = stage 1
  std::vector<std::size_t> dropped_per_stage;        // empty-target drops
};

PairExtraction make_pairs(const Corpus& corpus, const StageVocabulary& vocabs);

struct NoiseConfig {
  std::map<std::size_t, double> replace_prob;  // n in {1,2,3,4} -> probability
  std::uint64_t seed = 0;

  static NoiseConfig defaults();  // 0.1 / 0.05 / 0.025 / 0.0125
  bool enabled() const;
  void validate() const;
};

// Replacement population: n-grams of a stage's clean training inputs, so
// injected tokens stay inside the stage's input vocabulary.
class NgramPool {
 public:
  void add_sequence(const TokenSeq& seq, std::size_t max_order);
  bool has(std::size_t n) const;
  std::size_t size(std::size_t n) const;
  /// Uniform by multiplicity.
  TokenSeq sample(std::size_t n, Rng& rng) const;

 private:
  std::vector<TokenSeq> sequences_;
  std::map<std::size_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> grams_;
};

// One left-to-right sweep; at each untouched position tries n = 4..1 and on
// success swaps in a pool n-gram of the same length, then jumps past it.
TokenSeq noise(const TokenSeq& seq, const NoiseConfig& cfg, const NgramPool& pool,
               Rng& rng);

struct AnchorAlignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // input pos -> target pos
  std::vector<std::size_t> unmatched_inputs;

  bool total() const { return unmatched_inputs.empty(); }
};

// LCS alignment; ties resolved by matching each input token to its earliest
// feasible target position. Clean stage pairs align totally.
AnchorAlignment align(const TokenSeq& input, const TokenSeq& target);

void write_pairs(const std::vector<TrainingPair>& pairs, const std::string& path);
std::vector<TrainingPair> read_pairs(const std::string& path);

}  // namespace progen

#endif
