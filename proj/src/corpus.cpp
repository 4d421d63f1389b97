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
#include "progen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "progen/error.hpp"
#include "progen/rng.hpp"

#include <json.hpp>

namespace progen {

namespace {

constexpr char kNgramSep = '\x1f';

bool is_space_byte(unsigned char c) {
  // Control bytes are folded into whitespace so tokens stay printable and
  // can never collide with model sentinels.
  return c <= 0x20 || c == 0x7f;
}

bool is_punct_byte(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

}  // namespace

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
    case Errc::Config: return "Config";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::WordNotInDocument: return "WordNotInDocument";
    case Errc::WordNotInCorpus: return "WordNotInCorpus";
    case Errc::MissingPool: return "MissingPool";
    case Errc::UnknownSymbol: return "UnknownSymbol";
    case Errc::CorruptModel: return "CorruptModel";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::StaleArtifact: return "StaleArtifact";
    case Errc::MissingCondition: return "MissingCondition";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

void TokenizerConfig::validate() const {
  require(min_doc_tokens >= 1, Errc::Config, "min_doc_tokens must be >= 1");
  require(max_doc_tokens >= min_doc_tokens, Errc::Config,
          "max_doc_tokens must be >= min_doc_tokens");
}

TokenSeq tokenize(std::string_view text, const TokenizerConfig& cfg) {
  TokenSeq out;
  std::string word;
  bool in_space = false;
  bool saw_newline = false;

  auto flush_word = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  auto flush_space = [&] {
    if (in_space) {
      if (saw_newline && cfg.keep_sentence_boundary) out.push_back(kBoundaryToken);
      in_space = false;
      saw_newline = false;
    }
  };

  for (unsigned char c : text) {
    if (is_space_byte(c)) {
      flush_word();
      in_space = true;
      if (c == '\n') saw_newline = true;
      continue;
    }
    flush_space();
    if (is_punct_byte(c)) {
      flush_word();
      out.push_back(std::string(1, static_cast<char>(c)));
      continue;
    }
    if (cfg.lowercase && c < 0x80) c = static_cast<unsigned char>(std::tolower(c));
    word.push_back(static_cast<char>(c));
  }
  flush_word();
  flush_space();
  return out;
}

std::string detokenize(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

namespace {

Document make_document(std::string id, std::string text, std::string prompt,
                       const TokenizerConfig& cfg) {
  Document d;
  d.id = std::move(id);
  d.tokens = tokenize(text, cfg);
  d.condition = tokenize(prompt, cfg);
  return d;
}

}  // namespace

Corpus load_corpus(const std::string& path, const TokenizerConfig& cfg,
                   Split split, CorpusFormat format, LoadReport* report) {
  cfg.validate();
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open corpus file: " + path);

  Corpus corpus;
  corpus.split = split;
  LoadReport local;
  std::set<std::string> seen_ids;

  std::string line;
  std::size_t line_no = 0;
  CorpusFormat fmt = format;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (fmt == CorpusFormat::Auto)
      fmt = line[line.find_first_not_of(" \t\r")] == '{' ? CorpusFormat::JsonLines
                                                         : CorpusFormat::PlainText;

    Document doc;
    if (fmt == CorpusFormat::JsonLines) {
      nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.is_object())
        fail(Errc::Parse, path + ":" + std::to_string(line_no) + ": malformed record");
      if (!rec.contains("id") || !rec["id"].is_string())
        fail(Errc::Parse, path + ":" + std::to_string(line_no) + ": missing string \"id\"");
      if (!rec.contains("text") || !rec["text"].is_string())
        fail(Errc::Parse, path + ":" + std::to_string(line_no) + ": missing string \"text\"");
      std::string prompt;
      if (rec.contains("prompt")) {
        if (!rec["prompt"].is_string())
          fail(Errc::Parse, path + ":" + std::to_string(line_no) + ": \"prompt\" must be a string");
        prompt = rec["prompt"].get<std::string>();
      }
      doc = make_document(rec["id"].get<std::string>(), rec["text"].get<std::string>(),
                          prompt, cfg);
    } else {
      doc = make_document("doc-" + std::to_string(line_no), line, "", cfg);
    }

    if (!seen_ids.insert(doc.id).second)
      fail(Errc::DuplicateId,
           path + ":" + std::to_string(line_no) + ": duplicate document id \"" + doc.id + "\"");

    if (doc.tokens.size() < cfg.min_doc_tokens) {
      ++local.dropped_short;
      continue;
    }
    if (doc.tokens.size() > cfg.max_doc_tokens) {
      ++local.dropped_long;
      continue;
    }
    ++local.kept;
    corpus.documents.push_back(std::move(doc));
  }
  if (report) *report = local;
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::Io, "cannot write corpus file: " + path);
  for (const Document& d : corpus.documents) {
    nlohmann::json rec;
    rec["id"] = d.id;
    rec["text"] = detokenize(d.tokens);
    if (!d.condition.empty()) rec["prompt"] = detokenize(d.condition);
    out << rec.dump() << "\n";
  }
  require(out.good(), Errc::Io, "failed writing corpus file: " + path);
}

std::array<Corpus, 3> split_corpus(const Corpus& corpus,
                                   std::array<double, 3> ratios,
                                   std::uint64_t seed) {
  double sum = 0;
  for (double r : ratios) {
    require(r >= 0, Errc::InvalidArgument, "split ratio must be nonnegative");
    sum += r;
  }
  require(std::fabs(sum - 1.0) <= 1e-9, Errc::InvalidArgument,
          "split ratios must sum to 1");

  std::vector<std::size_t> index(corpus.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  Rng rng(seed);
  for (std::size_t i = index.size(); i > 1; --i)
    std::swap(index[i - 1], index[rng.uniform(i)]);

  const std::size_t n = corpus.size();
  std::size_t n_train = static_cast<std::size_t>(std::floor(ratios[0] * static_cast<double>(n)));
  std::size_t n_dev = static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(n)));
  std::size_t n_test = static_cast<std::size_t>(std::floor(ratios[2] * static_cast<double>(n)));
  n_train += n - (n_train + n_dev + n_test);  // remainder goes to train

  std::array<Corpus, 3> parts;
  parts[0].split = Split::Train;
  parts[1].split = Split::Dev;
  parts[2].split = Split::Test;
  for (std::size_t i = 0; i < n; ++i) {
    const Document& d = corpus.documents[index[i]];
    if (i < n_train)
      parts[0].documents.push_back(d);
    else if (i < n_train + n_dev)
      parts[1].documents.push_back(d);
    else
      parts[2].documents.push_back(d);
  }
  return parts;
}

std::string ngram_key(const TokenSeq& tokens, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) key.push_back(kNgramSep);
    key += tokens[start + i];
  }
  return key;
}

TokenSeq ngram_unkey(const std::string& key) {
  TokenSeq out;
  std::string cur;
  for (char c : key) {
    if (c == kNgramSep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void NgramProfile::add(const TokenSeq& tokens) {
  if (tokens.size() < order) return;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++counts[ngram_key(tokens, i, order)];
    ++total;
  }
}

NgramProfile ngram_profile(const std::vector<TokenSeq>& docs, std::size_t n) {
  require(n >= 1, Errc::InvalidArgument, "n-gram order must be >= 1");
  NgramProfile profile;
  profile.order = n;
  for (const TokenSeq& doc : docs) profile.add(doc);
  return profile;
}

}  // namespace progen
