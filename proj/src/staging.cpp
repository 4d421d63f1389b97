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
#include "progen/staging.hpp"

#include <algorithm>
#include <fstream>

#include "progen/error.hpp"

#include <json.hpp>

namespace progen {

TokenSeq extract(const TokenSeq& tokens, const std::set<Token>& vocab) {
  TokenSeq out;
  for (const Token& t : tokens)
    if (vocab.count(t)) out.push_back(t);
  return out;
}

IntermediateSequence extract(const Document& d, const std::set<Token>& vocab,
                             std::size_t stage) {
  IntermediateSequence seq;
  seq.stage = stage;
  seq.source_id = d.id;
  seq.tokens = extract(d.tokens, vocab);
  return seq;
}

PairExtraction make_pairs(const Corpus& corpus, const StageVocabulary& vocabs) {
  const std::size_t k_stages = vocabs.num_stages();
  require(k_stages >= 1, Errc::InvalidArgument, "stage vocabulary is empty");

  PairExtraction out;
  out.per_stage.resize(k_stages);
  out.dropped_per_stage.assign(k_stages, 0);

  for (const Document& d : corpus.documents) {
    TokenSeq prev;  // extract(d, V_{k-1}); unused for stage 1
    for (std::size_t k = 1; k <= k_stages; ++k) {
      TokenSeq target = extract(d.tokens, vocabs.stage(k));
      if (target.empty()) {
        ++out.dropped_per_stage[k - 1];
        prev = std::move(target);
        continue;
      }
      TrainingPair pair;
      pair.stage = k;
      pair.source_id = d.id;
      pair.input = k == 1 ? d.condition : prev;
      pair.target = target;
      out.per_stage[k - 1].push_back(pair);
      prev = std::move(target);
    }
  }
  return out;
}

NoiseConfig NoiseConfig::defaults() {
  NoiseConfig cfg;
  cfg.replace_prob = {{1, 0.1}, {2, 0.05}, {3, 0.025}, {4, 0.0125}};
  return cfg;
}

bool NoiseConfig::enabled() const {
  for (const auto& [n, p] : replace_prob)
    if (p > 0) return true;
  return false;
}

void NoiseConfig::validate() const {
  for (const auto& [n, p] : replace_prob) {
    require(n >= 1, Errc::Config, "noise n-gram order must be >= 1");
    require(p >= 0.0 && p <= 1.0, Errc::Config,
            "noise probability must be in [0,1]");
  }
}

void NgramPool::add_sequence(const TokenSeq& seq, std::size_t max_order) {
  const auto seq_idx = static_cast<std::uint32_t>(sequences_.size());
  sequences_.push_back(seq);
  for (std::size_t n = 1; n <= max_order; ++n) {
    if (seq.size() < n) continue;
    auto& slots = grams_[n];
    for (std::size_t i = 0; i + n <= seq.size(); ++i)
      slots.emplace_back(seq_idx, static_cast<std::uint32_t>(i));
  }
}

bool NgramPool::has(std::size_t n) const {
  auto it = grams_.find(n);
  return it != grams_.end() && !it->second.empty();
}

std::size_t NgramPool::size(std::size_t n) const {
  auto it = grams_.find(n);
  return it == grams_.end() ? 0 : it->second.size();
}

TokenSeq NgramPool::sample(std::size_t n, Rng& rng) const {
  auto it = grams_.find(n);
  require(it != grams_.end() && !it->second.empty(), Errc::MissingPool,
          "n-gram pool has no entries of order " + std::to_string(n));
  const auto& [seq_idx, start] = it->second[rng.uniform(it->second.size())];
  const TokenSeq& seq = sequences_[seq_idx];
  return TokenSeq(seq.begin() + start, seq.begin() + start + n);
}

TokenSeq noise(const TokenSeq& seq, const NoiseConfig& cfg, const NgramPool& pool,
               Rng& rng) {
  cfg.validate();
  std::vector<std::size_t> active;  // orders with positive probability, high to low
  for (auto it = cfg.replace_prob.rbegin(); it != cfg.replace_prob.rend(); ++it) {
    if (it->second <= 0) continue;
    require(pool.has(it->first), Errc::MissingPool,
            "noise requires a pool of order " + std::to_string(it->first));
    active.push_back(it->first);
  }

  TokenSeq out = seq;
  std::size_t i = 0;
  while (i < out.size()) {
    std::size_t advanced = 0;
    for (std::size_t n : active) {
      if (i + n > out.size()) continue;
      if (rng.real() >= cfg.replace_prob.at(n)) continue;
      TokenSeq replacement = pool.sample(n, rng);
      std::copy(replacement.begin(), replacement.end(), out.begin() + i);
      advanced = n;
      break;
    }
    i += advanced == 0 ? 1 : advanced;
  }
  return out;
}

AnchorAlignment align(const TokenSeq& input, const TokenSeq& target) {
  const std::size_t n = input.size();
  const std::size_t m = target.size();
  AnchorAlignment result;

  // Fast path: clean pairs are exact subsequences; leftmost greedy matching
  // is then the earliest-tie LCS.
  {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n && j < m; ++i) {
      while (j < m && target[j] != input[i]) ++j;
      if (j < m) pairs.emplace_back(i, j++);
    }
    if (pairs.size() == n) {
      result.pairs = std::move(pairs);
      return result;
    }
  }

  // Suffix LCS table: lcs[i][j] = LCS length of input[i:] vs target[j:].
  std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& {
    return lcs[i * (m + 1) + j];
  };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      if (input[i] == target[j])
        at(i, j) = at(i + 1, j + 1) + 1;
      else
        at(i, j) = std::max(at(i + 1, j), at(i, j + 1));
    }
  }

  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (input[i] == target[j] && at(i, j) == at(i + 1, j + 1) + 1) {
      result.pairs.emplace_back(i, j);
      ++i;
      ++j;
    } else if (at(i, j) == at(i, j + 1)) {
      ++j;  // earliest feasible target position for input[i]
    } else {
      result.unmatched_inputs.push_back(i);
      ++i;
    }
  }
  for (; i < n; ++i) result.unmatched_inputs.push_back(i);
  return result;
}

void write_pairs(const std::vector<TrainingPair>& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::Io, "cannot write pair file: " + path);
  for (const TrainingPair& p : pairs) {
    nlohmann::json rec;
    rec["stage"] = p.stage;
    rec["source_id"] = p.source_id;
    rec["input"] = p.input;
    rec["target"] = p.target;
    rec["noised"] = p.noised;
    out << rec.dump() << "\n";
  }
  require(out.good(), Errc::Io, "failed writing pair file: " + path);
}

std::vector<TrainingPair> read_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open pair file: " + path);
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object())
      fail(Errc::Parse, path + ":" + std::to_string(line_no) + ": malformed pair record");
    TrainingPair p;
    p.stage = rec.at("stage").get<std::size_t>();
    p.source_id = rec.at("source_id").get<std::string>();
    p.input = rec.at("input").get<TokenSeq>();
    p.target = rec.at("target").get<TokenSeq>();
    p.noised = rec.value("noised", false);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace progen
