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
#ifndef PROGEN_IMPORTANCE_HPP
#define PROGEN_IMPORTANCE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "progen/corpus.hpp"

namespace progen {

struct ImportanceEntry {
  double importance = 0.0;
  std::uint64_t doc_freq = 0;
  std::uint64_t corpus_freq = 0;
};

// Domain word importance: the average of a word's tf-idf scores over the
// documents that contain it, with tf(w,d) = count(w,d)/|d| and
// idf(w) = ln(N / DF(w)).
struct ImportanceTable {
  std::map<Token, ImportanceEntry> entries;
  std::size_t corpus_size = 0;

  double idf(const Token& w) const;
};

double tf_idf(const Token& w, const Document& d, const ImportanceTable& table);
double importance(const Token& w, const Corpus& corpus);
ImportanceTable build_importance_table(const Corpus& corpus);

/// Fraction of token occurrences in the corpus covered by the vocabulary.
double coverage(const std::set<Token>& vocab, const Corpus& corpus);

struct StagePlan {
  std::size_t k = 2;
  std::vector<double> coverage_targets;  // strictly increasing, last == 1.0
  std::set<Token> always_include{kBoundaryToken};

  /// Coverage schedules for K in {2,3,4}: [0.25], [0.15,0.25], [0.15,0.20,0.25],
  /// each followed by the final full-vocabulary stage.
  static StagePlan preset(std::size_t k);
  void validate() const;
};

struct StageVocabulary {
  std::vector<std::set<Token>> stages;  // V_1 ⊂ ... ⊂ V_K
  std::vector<Token> ranking;           // full importance ordering

  std::size_t num_stages() const { return stages.size(); }
  const std::set<Token>& stage(std::size_t k) const;  // 1-based
};

// Ranks tokens by importance (ties: corpus frequency, then lexicographic)
// and takes the smallest ranked prefix reaching each stage's coverage
// target; the final stage is the full vocabulary.
StageVocabulary build_stage_vocabularies(const ImportanceTable& table,
                                         const Corpus& corpus,
                                         const StagePlan& plan);

struct StageVocabFiles {
  std::vector<std::string> files;
  std::vector<double> achieved_coverages;
};

StageVocabFiles write_stage_vocabularies(const StageVocabulary& vocabs,
                                         const ImportanceTable& table,
                                         const Corpus& corpus,
                                         const StagePlan& plan,
                                         const std::string& out_dir);

StageVocabulary read_stage_vocabularies(const std::string& manifest_path);

}  // namespace progen

#endif
