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
#include "progen/importance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "progen/error.hpp"

#include <json.hpp>

namespace progen {

namespace {

std::map<Token, std::uint64_t> token_counts(const Document& d) {
  std::map<Token, std::uint64_t> counts;
  for (const Token& t : d.tokens) ++counts[t];
  return counts;
}

}  // namespace

double ImportanceTable::idf(const Token& w) const {
  auto it = entries.find(w);
  require(it != entries.end(), Errc::WordNotInCorpus,
          "word not in corpus: \"" + w + "\"");
  return std::log(static_cast<double>(corpus_size) /
                  static_cast<double>(it->second.doc_freq));
}

double tf_idf(const Token& w, const Document& d, const ImportanceTable& table) {
  std::uint64_t count = 0;
  for (const Token& t : d.tokens)
    if (t == w) ++count;
  require(count > 0, Errc::WordNotInDocument,
          "word \"" + w + "\" does not occur in document " + d.id);
  double tf = static_cast<double>(count) / static_cast<double>(d.tokens.size());
  return tf * table.idf(w);
}

double importance(const Token& w, const Corpus& corpus) {
  require(!corpus.empty(), Errc::EmptyCorpus, "importance over empty corpus");
  std::uint64_t df = 0;
  for (const Document& d : corpus.documents)
    if (std::find(d.tokens.begin(), d.tokens.end(), w) != d.tokens.end()) ++df;
  require(df > 0, Errc::WordNotInCorpus, "word not in corpus: \"" + w + "\"");

  double idf = std::log(static_cast<double>(corpus.size()) / static_cast<double>(df));
  double sum = 0.0;
  for (const Document& d : corpus.documents) {
    std::uint64_t count = 0;
    for (const Token& t : d.tokens)
      if (t == w) ++count;
    if (count == 0) continue;
    double tf = static_cast<double>(count) / static_cast<double>(d.tokens.size());
    sum += tf * idf;
  }
  return sum / static_cast<double>(df);
}

ImportanceTable build_importance_table(const Corpus& corpus) {
  require(!corpus.empty(), Errc::EmptyCorpus, "cannot build importance table: empty corpus");

  ImportanceTable table;
  table.corpus_size = corpus.size();
  for (const Document& d : corpus.documents) {
    for (const auto& [w, count] : token_counts(d)) {
      ImportanceEntry& e = table.entries[w];
      e.doc_freq += 1;
      e.corpus_freq += count;
    }
  }
  // Second pass: tf·idf accumulated in corpus order, exactly as importance()
  // computes it, then divided by DF.
  std::map<Token, double> sums;
  for (const Document& d : corpus.documents) {
    const double len = static_cast<double>(d.tokens.size());
    for (const auto& [w, count] : token_counts(d)) {
      double tf = static_cast<double>(count) / len;
      sums[w] += tf * table.idf(w);
    }
  }
  for (auto& [w, e] : table.entries)
    e.importance = sums[w] / static_cast<double>(e.doc_freq);
  return table;
}

double coverage(const std::set<Token>& vocab, const Corpus& corpus) {
  std::uint64_t covered = 0;
  std::uint64_t total = 0;
  for (const Document& d : corpus.documents) {
    total += d.tokens.size();
    for (const Token& t : d.tokens)
      if (vocab.count(t)) ++covered;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(covered) / static_cast<double>(total);
}

StagePlan StagePlan::preset(std::size_t k) {
  StagePlan plan;
  plan.k = k;
  switch (k) {
    case 1: plan.coverage_targets = {1.0}; break;
    case 2: plan.coverage_targets = {0.25, 1.0}; break;
    case 3: plan.coverage_targets = {0.15, 0.25, 1.0}; break;
    case 4: plan.coverage_targets = {0.15, 0.20, 0.25, 1.0}; break;
    default:
      fail(Errc::Config, "no stage preset for K=" + std::to_string(k));
  }
  return plan;
}

void StagePlan::validate() const {
  require(k >= 1, Errc::Config, "stage count must be >= 1");
  require(coverage_targets.size() == k, Errc::Config,
          "coverage_targets must have one entry per stage");
  double prev = 0.0;
  for (double t : coverage_targets) {
    require(t > prev, Errc::Config, "coverage targets must be strictly increasing");
    require(t <= 1.0, Errc::Config, "coverage targets must be <= 1");
    prev = t;
  }
  require(coverage_targets.back() == 1.0, Errc::Config,
          "final coverage target must be exactly 1.0");
}

const std::set<Token>& StageVocabulary::stage(std::size_t k) const {
  require(k >= 1 && k <= stages.size(), Errc::InvalidArgument,
          "stage index out of range: " + std::to_string(k));
  return stages[k - 1];
}

StageVocabulary build_stage_vocabularies(const ImportanceTable& table,
                                         const Corpus& corpus,
                                         const StagePlan& plan) {
  plan.validate();
  require(!corpus.empty(), Errc::EmptyCorpus, "cannot build vocabularies: empty corpus");

  StageVocabulary result;
  result.ranking.reserve(table.entries.size());
  for (const auto& [w, e] : table.entries) result.ranking.push_back(w);
  std::sort(result.ranking.begin(), result.ranking.end(),
            [&](const Token& a, const Token& b) {
              const ImportanceEntry& ea = table.entries.at(a);
              const ImportanceEntry& eb = table.entries.at(b);
              if (ea.importance != eb.importance) return ea.importance > eb.importance;
              if (ea.corpus_freq != eb.corpus_freq) return ea.corpus_freq > eb.corpus_freq;
              return a < b;
            });

  std::uint64_t total_occurrences = 0;
  for (const Document& d : corpus.documents) total_occurrences += d.tokens.size();

  std::set<Token> full;
  for (const auto& [w, e] : table.entries) full.insert(w);
  for (const Token& t : plan.always_include) full.insert(t);

  std::uint64_t base_covered = 0;
  for (const Token& t : plan.always_include) {
    auto it = table.entries.find(t);
    if (it != table.entries.end()) base_covered += it->second.corpus_freq;
  }

  // The reached / not-reached test uses the same expression as coverage()
  // so achieved >= target holds exactly for the emitted vocabularies.
  auto reached = [&](std::uint64_t covered, double target) {
    return static_cast<double>(covered) / static_cast<double>(total_occurrences) >= target;
  };

  result.stages.resize(plan.k);
  for (std::size_t stage = 0; stage + 1 < plan.k; ++stage) {
    const double target = plan.coverage_targets[stage];
    std::set<Token> vocab = plan.always_include;
    std::uint64_t covered = base_covered;
    for (const Token& w : result.ranking) {
      if (reached(covered, target)) break;
      if (!vocab.insert(w).second) continue;  // already in always_include
      covered += table.entries.at(w).corpus_freq;
    }
    result.stages[stage] = std::move(vocab);
  }
  result.stages[plan.k - 1] = std::move(full);
  return result;
}

namespace {

std::string vocab_file_name(std::size_t stage) {
  return "vocab_stage_" + std::to_string(stage) + ".tsv";
}

}  // namespace

StageVocabFiles write_stage_vocabularies(const StageVocabulary& vocabs,
                                         const ImportanceTable& table,
                                         const Corpus& corpus,
                                         const StagePlan& plan,
                                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::map<Token, std::size_t> rank_of;
  for (std::size_t i = 0; i < vocabs.ranking.size(); ++i)
    rank_of[vocabs.ranking[i]] = i + 1;

  StageVocabFiles out;
  for (std::size_t k = 1; k <= vocabs.num_stages(); ++k) {
    const std::set<Token>& vocab = vocabs.stage(k);
    std::vector<Token> ordered(vocab.begin(), vocab.end());
    std::sort(ordered.begin(), ordered.end(), [&](const Token& a, const Token& b) {
      std::size_t ra = rank_of.count(a) ? rank_of.at(a) : 0;
      std::size_t rb = rank_of.count(b) ? rank_of.at(b) : 0;
      if (ra != rb) return ra < rb;
      return a < b;
    });

    std::string path = (fs::path(out_dir) / vocab_file_name(k)).string();
    std::ofstream f(path, std::ios::binary);
    require(f.good(), Errc::Io, "cannot write vocabulary file: " + path);
    char buf[64];
    for (const Token& w : ordered) {
      auto it = table.entries.find(w);
      double imp = it == table.entries.end() ? 0.0 : it->second.importance;
      std::uint64_t df = it == table.entries.end() ? 0 : it->second.doc_freq;
      std::size_t rank = rank_of.count(w) ? rank_of.at(w) : 0;
      std::snprintf(buf, sizeof(buf), "%.17g", imp);
      std::string printable = w == kBoundaryToken ? "\\n" : w;
      f << rank << '\t' << printable << '\t' << buf << '\t' << df << '\n';
    }
    require(f.good(), Errc::Io, "failed writing vocabulary file: " + path);
    out.files.push_back(path);
    out.achieved_coverages.push_back(coverage(vocab, corpus));
  }

  nlohmann::json manifest;
  manifest["k"] = plan.k;
  manifest["coverage_targets"] = plan.coverage_targets;
  manifest["achieved_coverages"] = out.achieved_coverages;
  manifest["always_include"] = std::vector<Token>(plan.always_include.begin(),
                                                  plan.always_include.end());
  std::vector<std::string> names;
  for (std::size_t k = 1; k <= vocabs.num_stages(); ++k)
    names.push_back(vocab_file_name(k));
  manifest["files"] = names;

  std::string manifest_path = (fs::path(out_dir) / "stage_manifest.json").string();
  std::ofstream mf(manifest_path, std::ios::binary);
  require(mf.good(), Errc::Io, "cannot write stage manifest: " + manifest_path);
  mf << manifest.dump(2) << "\n";
  return out;
}

StageVocabulary read_stage_vocabularies(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream mf(manifest_path, std::ios::binary);
  require(mf.good(), Errc::Io, "cannot open stage manifest: " + manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(mf, nullptr, false);
  require(!manifest.is_discarded(), Errc::Parse,
          "malformed stage manifest: " + manifest_path);

  StageVocabulary vocabs;
  std::vector<std::pair<std::size_t, Token>> ranked;
  fs::path dir = fs::path(manifest_path).parent_path();
  const auto& files = manifest.at("files");
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    std::string path = (dir / files[fi].get<std::string>()).string();
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::Io, "cannot open vocabulary file: " + path);
    const bool last_stage = fi + 1 == files.size();
    std::set<Token> vocab;
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::size_t t1 = line.find('\t');
      std::size_t t2 = line.find('\t', t1 + 1);
      require(t1 != std::string::npos && t2 != std::string::npos, Errc::Parse,
              "malformed vocabulary line in " + path);
      Token w = line.substr(t1 + 1, t2 - t1 - 1);
      if (w == "\\n") w = kBoundaryToken;
      vocab.insert(w);
      if (last_stage) {
        // The full-vocabulary file carries the complete importance ordering.
        std::size_t rank = std::stoull(line.substr(0, t1));
        if (rank > 0) ranked.emplace_back(rank, w);
      }
    }
    vocabs.stages.push_back(std::move(vocab));
  }
  std::sort(ranked.begin(), ranked.end());
  vocabs.ranking.reserve(ranked.size());
  for (auto& [rank, w] : ranked) vocabs.ranking.push_back(w);
  return vocabs;
}

}  // namespace progen
