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
#ifndef PROGEN_METRICS_HPP
#define PROGEN_METRICS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "progen/corpus.hpp"
#include "progen/importance.hpp"

namespace progen {

/// MS-Jaccard: Jaccard similarity of the two sets' normalized n-gram
/// frequency profiles, Σ min(fA, fB) / Σ max(fA, fB).
double msj(const std::vector<TokenSeq>& set_a, const std::vector<TokenSeq>& set_b,
           std::size_t n);

// Corpus-level BLEU-n with the whole reference set as a shared pool:
// clipped modified precisions for k = 1..n, add-1 smoothing when a
// higher-order precision has zero matches, geometric mean, brevity penalty
// from closest-length references.
double corpus_bleu(const std::vector<TokenSeq>& hypotheses,
                   const std::vector<TokenSeq>& references, std::size_t n);

double forward_bleu(const std::vector<TokenSeq>& generated,
                    const std::vector<TokenSeq>& test, std::size_t n);
double backward_bleu(const std::vector<TokenSeq>& generated,
                     const std::vector<TokenSeq>& test, std::size_t n);
double harmonic_bleu(const std::vector<TokenSeq>& generated,
                     const std::vector<TokenSeq>& test, std::size_t n);

/// Euclidean distance (x100) between the two sets' mean tf-idf vectors in
/// the reference corpus feature space.
double tid(const std::vector<TokenSeq>& set_a, const std::vector<TokenSeq>& set_b,
           const Corpus& reference);

inline constexpr double kTidScale = 100.0;

struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<double>>> vectors;
  std::string label;
};

EmbeddingSet read_embeddings(const std::string& path);
void write_embeddings(const EmbeddingSet& set, const std::string& path);

/// Self-contained stand-in for external encoders: documents projected onto
/// the reference corpus's top-d tf-idf dimensions (ranked by total mass).
EmbeddingSet tfidf_fallback_embeddings(const std::vector<Document>& docs,
                                       const Corpus& reference, std::size_t dim);

struct GaussianStats {
  std::vector<double> mean;
  std::vector<std::vector<double>> covariance;  // symmetric, regularized
  std::size_t count = 0;

  std::size_t dim() const { return mean.size(); }
};

GaussianStats gaussian_stats(const EmbeddingSet& set, double epsilon = 1e-6);

struct FrechetDiag {
  double clamped_magnitude = 0.0;  // |most negative eigenvalue| clamped to 0
};

/// |μA − μB|² + tr(ΣA + ΣB − 2(ΣA ΣB)^{1/2}), square roots by symmetric
/// eigendecomposition with negative eigenvalues clamped to zero.
double frechet_distance(const GaussianStats& a, const GaussianStats& b,
                        FrechetDiag* diag = nullptr);

double fbd(const EmbeddingSet& generated, const EmbeddingSet& reference,
           double epsilon = 1e-6, FrechetDiag* diag = nullptr);

struct EmbeddingFilePair {
  std::string generated;
  std::string reference;
};

struct MetricConfig {
  std::vector<std::size_t> ngram_orders{2, 3, 4, 5};
  std::map<std::string, EmbeddingFilePair> embedding_files;  // label -> files
  bool use_fallback_embeddings = true;
  std::size_t fallback_dim = 32;
  double epsilon = 1e-6;
};

struct MetricReport {
  std::map<std::size_t, double> msj;
  std::map<std::size_t, double> f_bleu;
  std::map<std::size_t, double> b_bleu;
  std::map<std::size_t, double> ha_bleu;
  double tid = 0.0;
  std::map<std::string, double> fbd;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> meta;

  std::string to_json() const;
  static MetricReport from_json(const std::string& text);
};

// Embeddings for generated/reference come from the file pairs named in the
// config or, when none are given, from the tf-idf fallback embedder.
MetricReport evaluate(const Corpus& generated, const Corpus& reference,
                      const MetricConfig& config);

}  // namespace progen

#endif
