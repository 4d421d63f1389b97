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
#ifndef PROGEN_CORPUS_HPP
#define PROGEN_CORPUS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace progen {

using Token = std::string;
using TokenSeq = std::vector<Token>;

/// The sentence/paragraph boundary token produced by the tokenizer.
inline const Token kBoundaryToken = "\n";

struct TokenizerConfig {
  bool lowercase = true;
  bool keep_sentence_boundary = true;
  std::size_t min_doc_tokens = 1;
  std::size_t max_doc_tokens = 1000000;

  void validate() const;
};

struct Document {
  std::string id;
  TokenSeq tokens;
  TokenSeq condition;  // prompt tokens; empty for unconditional tasks
};

enum class Split { Train, Dev, Test };

const char* split_name(Split s);

struct Corpus {
  std::vector<Document> documents;
  Split split = Split::Train;

  bool empty() const { return documents.empty(); }
  std::size_t size() const { return documents.size(); }
};

enum class CorpusFormat { Auto, JsonLines, PlainText };

struct LoadReport {
  std::size_t kept = 0;
  std::size_t dropped_short = 0;
  std::size_t dropped_long = 0;
};

// Word-level tokenization: whitespace-separated, ASCII punctuation split
// into single-character tokens, newline runs collapsed to one boundary
// token. Control bytes count as whitespace, so tokens never collide with
// the model sentinel symbols.
TokenSeq tokenize(std::string_view text, const TokenizerConfig& cfg);

/// Inverse of tokenize up to whitespace: joins tokens with single spaces.
std::string detokenize(const TokenSeq& tokens);

Corpus load_corpus(const std::string& path, const TokenizerConfig& cfg,
                   Split split, CorpusFormat format = CorpusFormat::Auto,
                   LoadReport* report = nullptr);

void save_corpus(const Corpus& corpus, const std::string& path);

/// Deterministic shuffle-and-partition; floor-based sizes, remainder to train.
std::array<Corpus, 3> split_corpus(const Corpus& corpus,
                                   std::array<double, 3> ratios,
                                   std::uint64_t seed);

struct NgramProfile {
  std::size_t order = 1;
  std::map<std::string, std::uint64_t> counts;  // key = ngram_key(...)
  std::uint64_t total = 0;

  void add(const TokenSeq& tokens);
};

/// Joins an n-gram into a single map key (tokens never contain the separator).
std::string ngram_key(const TokenSeq& tokens, std::size_t start, std::size_t n);
TokenSeq ngram_unkey(const std::string& key);

NgramProfile ngram_profile(const std::vector<TokenSeq>& docs, std::size_t n);

}  // namespace progen

#endif
