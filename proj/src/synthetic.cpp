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
#include "progen/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>

#include "progen/error.hpp"
#include "progen/rng.hpp"

namespace progen {

namespace {

std::vector<std::string> make_words(std::size_t n) {
  static const char* syllables[] = {
      "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu",
      "na", "pe", "ri", "so", "tu", "va", "we", "xi", "yo", "zu",
  };
  const std::size_t s = std::size(syllables);
  std::vector<std::string> words;
  words.reserve(n);
  for (std::size_t i = 0; words.size() < n; ++i) {
    std::string w = syllables[(i / (s * s)) % s];
    w += syllables[(i / s) % s];
    w += syllables[i % s];
    words.push_back(std::move(w));
  }
  return words;
}

/// Zipf-like draw over [0, n): rank weights 1/(r+2).
std::size_t zipf_draw(std::size_t n, Rng& rng, const std::vector<double>& cum) {
  double r = rng.real() * cum[n - 1];
  auto it = std::lower_bound(cum.begin(), cum.begin() + n, r);
  return static_cast<std::size_t>(it - cum.begin());
}

std::vector<double> zipf_cum(std::size_t n) {
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    acc += 1.0 / static_cast<double>(r + 2);
    cum[r] = acc;
  }
  return cum;
}

}  // namespace

Corpus make_synthetic_corpus(const SyntheticConfig& cfg) {
  require(cfg.docs >= 1, Errc::InvalidArgument, "synthetic corpus needs >= 1 document");
  require(cfg.vocab_words >= cfg.topics + 50, Errc::InvalidArgument,
          "synthetic vocabulary too small for the topic layout");
  require(cfg.max_len >= cfg.min_len && cfg.min_len >= 10, Errc::InvalidArgument,
          "bad synthetic length bounds");

  const std::vector<std::string> words = make_words(cfg.vocab_words);
  const std::size_t n_common = std::min<std::size_t>(cfg.vocab_words / 6, 300);
  const std::size_t n_keywords = cfg.vocab_words - n_common;
  const std::size_t per_topic = n_keywords / cfg.topics;

  const std::vector<double> common_cum = zipf_cum(n_common);
  const std::vector<double> topic_cum = zipf_cum(per_topic);

  Rng rng(cfg.seed);
  Corpus corpus;
  corpus.split = Split::Train;
  corpus.documents.reserve(cfg.docs);

  char idbuf[32];
  for (std::size_t doc = 0; doc < cfg.docs; ++doc) {
    const std::size_t topic = rng.uniform(cfg.topics);
    const std::size_t topic_base = n_common + topic * per_topic;
    const std::size_t target_len =
        cfg.min_len + rng.uniform(cfg.max_len - cfg.min_len + 1);

    Document d;
    std::snprintf(idbuf, sizeof(idbuf), "synth-%05zu", doc + 1);
    d.id = idbuf;
    d.tokens.reserve(target_len + 32);

    while (d.tokens.size() < target_len) {
      const std::size_t sentence_len = 6 + rng.uniform(14);
      for (std::size_t i = 0; i < sentence_len; ++i) {
        double r = rng.real();
        if (r < 0.50) {
          d.tokens.push_back(words[zipf_draw(n_common, rng, common_cum)]);
        } else if (r < 0.92) {
          d.tokens.push_back(words[topic_base + zipf_draw(per_topic, rng, topic_cum)]);
        } else {
          d.tokens.push_back(words[rng.uniform(cfg.vocab_words)]);
        }
        if (i + 1 < sentence_len && rng.real() < 0.04) d.tokens.push_back(",");
      }
      d.tokens.push_back(".");
      d.tokens.push_back(kBoundaryToken);
    }

    if (cfg.with_prompts) {
      d.condition.push_back(words[topic_base]);
      if (per_topic > 1) d.condition.push_back(words[topic_base + 1]);
    }
    corpus.documents.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace progen
