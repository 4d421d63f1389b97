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
#ifndef PROGEN_SYNTHETIC_HPP
#define PROGEN_SYNTHETIC_HPP

#include <cstdint>

#include "progen/corpus.hpp"

namespace progen {

// Deterministic sample data: topic-clustered documents with a Zipfian mix of
// frequent filler words and topic keywords, sentence boundaries, and light
// punctuation. Useful for demos and end-to-end runs without external data.
struct SyntheticConfig {
  std::size_t docs = 1000;
  std::size_t vocab_words = 2000;
  std::size_t min_len = 80;
  std::size_t max_len = 320;
  std::size_t topics = 20;
  std::uint64_t seed = 42;
  bool with_prompts = false;
};

Corpus make_synthetic_corpus(const SyntheticConfig& cfg);

}  // namespace progen

#endif
