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
#include "progen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "progen/error.hpp"

#include <json.hpp>

namespace progen {

namespace {

std::vector<TokenSeq> corpus_docs(const Corpus& c) {
  std::vector<TokenSeq> out;
  out.reserve(c.size());
  for (const Document& d : c.documents) out.push_back(d.tokens);
  return out;
}

}  // namespace

double msj(const std::vector<TokenSeq>& set_a, const std::vector<TokenSeq>& set_b,
           std::size_t n) {
  require(!set_a.empty() && !set_b.empty(), Errc::EmptyInput,
          "msj requires two nonempty document sets");
  NgramProfile pa = ngram_profile(set_a, n);
  NgramProfile pb = ngram_profile(set_b, n);
  const double ta = static_cast<double>(pa.total);
  const double tb = static_cast<double>(pb.total);

  double min_sum = 0.0;
  double max_sum = 0.0;
  auto ia = pa.counts.begin();
  auto ib = pb.counts.begin();
  while (ia != pa.counts.end() || ib != pb.counts.end()) {
    double fa = 0.0, fb = 0.0;
    if (ib == pb.counts.end() || (ia != pa.counts.end() && ia->first < ib->first)) {
      fa = static_cast<double>(ia->second) / ta;
      ++ia;
    } else if (ia == pa.counts.end() || ib->first < ia->first) {
      fb = static_cast<double>(ib->second) / tb;
      ++ib;
    } else {
      fa = static_cast<double>(ia->second) / ta;
      fb = static_cast<double>(ib->second) / tb;
      ++ia;
      ++ib;
    }
    min_sum += std::min(fa, fb);
    max_sum += std::max(fa, fb);
  }
  if (max_sum == 0.0) return 0.0;  // both profiles empty (all docs shorter than n)
  return min_sum / max_sum;
}

double corpus_bleu(const std::vector<TokenSeq>& hypotheses,
                   const std::vector<TokenSeq>& references, std::size_t n) {
  require(n >= 1, Errc::InvalidArgument, "BLEU order must be >= 1");
  require(!hypotheses.empty() && !references.empty(), Errc::EmptyInput,
          "corpus_bleu requires nonempty hypothesis and reference sets");

  // Per-order clip profile: the max count of each k-gram in any single reference.
  std::vector<std::map<std::string, std::uint64_t>> ref_max(n);
  for (const TokenSeq& ref : references) {
    for (std::size_t k = 1; k <= n; ++k) {
      NgramProfile p;
      p.order = k;
      p.add(ref);
      for (const auto& [g, c] : p.counts) {
        auto& slot = ref_max[k - 1][g];
        slot = std::max(slot, c);
      }
    }
  }

  std::vector<std::uint64_t> match(n, 0), total(n, 0);
  std::uint64_t hyp_len = 0;
  std::uint64_t eff_ref_len = 0;
  for (const TokenSeq& hyp : hypotheses) {
    hyp_len += hyp.size();
    // Effective reference length: the closest reference length (ties: shorter).
    std::uint64_t best = references.front().size();
    for (const TokenSeq& ref : references) {
      auto diff = [&](std::uint64_t r) {
        return r > hyp.size() ? r - hyp.size() : hyp.size() - r;
      };
      if (diff(ref.size()) < diff(best) ||
          (diff(ref.size()) == diff(best) && ref.size() < best))
        best = ref.size();
    }
    eff_ref_len += best;

    for (std::size_t k = 1; k <= n; ++k) {
      if (hyp.size() < k) continue;
      NgramProfile p;
      p.order = k;
      p.add(hyp);
      total[k - 1] += p.total;
      const auto& clip = ref_max[k - 1];
      for (const auto& [g, c] : p.counts) {
        auto it = clip.find(g);
        if (it != clip.end()) match[k - 1] += std::min(c, it->second);
      }
    }
  }

  double log_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double p;
    if (total[k - 1] == 0) {
      p = 0.0;  // no k-grams at all; degenerate, forces zero
    } else if (match[k - 1] == 0 && k >= 2) {
      p = 1.0 / static_cast<double>(total[k - 1] + 1);  // add-1 smoothing
    } else {
      p = static_cast<double>(match[k - 1]) / static_cast<double>(total[k - 1]);
    }
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  double geo = std::exp(log_sum / static_cast<double>(n));

  double bp = 1.0;
  if (hyp_len < eff_ref_len)
    bp = std::exp(1.0 - static_cast<double>(eff_ref_len) / static_cast<double>(hyp_len));
  return bp * geo;
}

double forward_bleu(const std::vector<TokenSeq>& generated,
                    const std::vector<TokenSeq>& test, std::size_t n) {
  return corpus_bleu(generated, test, n);
}

double backward_bleu(const std::vector<TokenSeq>& generated,
                     const std::vector<TokenSeq>& test, std::size_t n) {
  return corpus_bleu(test, generated, n);
}

double harmonic_bleu(const std::vector<TokenSeq>& generated,
                     const std::vector<TokenSeq>& test, std::size_t n) {
  double f = forward_bleu(generated, test, n);
  double b = backward_bleu(generated, test, n);
  if (f + b == 0.0) return 0.0;
  return 2.0 * f * b / (f + b);
}

namespace {

struct IdfSpace {
  std::map<Token, std::pair<double, std::size_t>> idf;  // token -> (idf, dim index)
};

IdfSpace reference_space(const Corpus& reference) {
  require(!reference.empty(), Errc::EmptyCorpus, "empty reference corpus");
  std::map<Token, std::uint64_t> df;
  for (const Document& d : reference.documents) {
    std::map<Token, bool> seen;
    for (const Token& t : d.tokens) seen.emplace(t, true);
    for (const auto& [t, _] : seen) ++df[t];
  }
  IdfSpace space;
  std::size_t index = 0;
  const double n_docs = static_cast<double>(reference.size());
  for (const auto& [t, d] : df)
    space.idf[t] = {std::log(n_docs / static_cast<double>(d)), index++};
  return space;
}

std::map<std::size_t, double> tfidf_vector(const TokenSeq& doc, const IdfSpace& space) {
  std::map<Token, std::uint64_t> counts;
  for (const Token& t : doc) ++counts[t];
  std::map<std::size_t, double> vec;
  const double len = static_cast<double>(doc.size());
  for (const auto& [t, c] : counts) {
    auto it = space.idf.find(t);
    if (it == space.idf.end()) continue;  // out-of-reference tokens ignored
    vec[it->second.second] = (static_cast<double>(c) / len) * it->second.first;
  }
  return vec;
}

std::map<std::size_t, double> mean_tfidf(const std::vector<TokenSeq>& docs,
                                         const IdfSpace& space) {
  std::map<std::size_t, double> mean;
  for (const TokenSeq& doc : docs)
    for (const auto& [dim, v] : tfidf_vector(doc, space)) mean[dim] += v;
  const double n = static_cast<double>(docs.size());
  for (auto& [dim, v] : mean) v /= n;
  return mean;
}

}  // namespace

double tid(const std::vector<TokenSeq>& set_a, const std::vector<TokenSeq>& set_b,
           const Corpus& reference) {
  require(!set_a.empty() && !set_b.empty(), Errc::EmptyInput,
          "tid requires two nonempty document sets");
  IdfSpace space = reference_space(reference);
  std::map<std::size_t, double> ma = mean_tfidf(set_a, space);
  std::map<std::size_t, double> mb = mean_tfidf(set_b, space);

  double sq = 0.0;
  auto ia = ma.begin();
  auto ib = mb.begin();
  while (ia != ma.end() || ib != mb.end()) {
    double da = 0.0, db = 0.0;
    if (ib == mb.end() || (ia != ma.end() && ia->first < ib->first)) {
      da = ia->second;
      ++ia;
    } else if (ia == ma.end() || ib->first < ia->first) {
      db = ib->second;
      ++ib;
    } else {
      da = ia->second;
      db = ib->second;
      ++ia;
      ++ib;
    }
    sq += (da - db) * (da - db);
  }
  return kTidScale * std::sqrt(sq);
}

EmbeddingSet read_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open embedding file: " + path);

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::Parse,
          "empty embedding file: " + path);
  EmbeddingSet set;
  {
    std::istringstream head(line);
    std::string f1, f2;
    head >> f1 >> f2;
    require(f1.rfind("dim=", 0) == 0 && f2.rfind("label=", 0) == 0, Errc::Parse,
            "malformed embedding header in " + path);
    set.dim = std::stoull(f1.substr(4));
    set.label = f2.substr(6);
    require(set.dim >= 1, Errc::Parse, "embedding dim must be >= 1 in " + path);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    require(tab != std::string::npos, Errc::Parse,
            path + ":" + std::to_string(line_no) + ": missing tab separator");
    std::vector<double> vec;
    vec.reserve(set.dim);
    std::istringstream vals(line.substr(tab + 1));
    double v;
    while (vals >> v) vec.push_back(v);
    require(vec.size() == set.dim, Errc::Parse,
            path + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(set.dim) + " values");
    set.vectors.emplace_back(line.substr(0, tab), std::move(vec));
  }
  return set;
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::Io, "cannot write embedding file: " + path);
  out << "dim=" << set.dim << " label=" << set.label << "\n";
  char buf[64];
  for (const auto& [id, vec] : set.vectors) {
    out << id;
    for (std::size_t i = 0; i < vec.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", vec[i]);
      out << (i == 0 ? "\t" : " ") << buf;
    }
    out << "\n";
  }
  require(out.good(), Errc::Io, "failed writing embedding file: " + path);
}

EmbeddingSet tfidf_fallback_embeddings(const std::vector<Document>& docs,
                                       const Corpus& reference, std::size_t dim) {
  require(dim >= 1, Errc::InvalidArgument, "fallback embedding dim must be >= 1");
  IdfSpace space = reference_space(reference);

  // Rank reference dimensions by total tf-idf mass, ties lexicographic.
  std::map<std::size_t, double> mass;
  std::vector<const Token*> token_of(space.idf.size());
  for (const auto& [t, entry] : space.idf) token_of[entry.second] = &t;
  for (const Document& d : reference.documents)
    for (const auto& [dim_idx, v] : tfidf_vector(d.tokens, space)) mass[dim_idx] += v;

  std::vector<std::size_t> dims;
  for (const auto& [dim_idx, _] : mass) dims.push_back(dim_idx);
  std::sort(dims.begin(), dims.end(), [&](std::size_t a, std::size_t b) {
    if (mass[a] != mass[b]) return mass[a] > mass[b];
    return *token_of[a] < *token_of[b];
  });
  dims.resize(std::min(dim, dims.size()));

  EmbeddingSet set;
  set.dim = dim;
  set.label = "tfidf-fallback";
  for (const Document& d : docs) {
    std::map<std::size_t, double> vec = tfidf_vector(d.tokens, space);
    std::vector<double> projected(dim, 0.0);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      auto it = vec.find(dims[i]);
      if (it != vec.end()) projected[i] = it->second;
    }
    set.vectors.emplace_back(d.id, std::move(projected));
  }
  return set;
}

GaussianStats gaussian_stats(const EmbeddingSet& set, double epsilon) {
  require(set.vectors.size() >= 2, Errc::InvalidArgument,
          "gaussian_stats needs at least 2 vectors");
  const std::size_t d = set.dim;
  for (const auto& [id, v] : set.vectors)
    require(v.size() == d, Errc::DimMismatch,
            "embedding dim mismatch for document " + id);

  GaussianStats stats;
  stats.count = set.vectors.size();
  stats.mean.assign(d, 0.0);
  for (const auto& [id, v] : set.vectors)
    for (std::size_t i = 0; i < d; ++i) stats.mean[i] += v[i];
  const double n = static_cast<double>(stats.count);
  for (double& m : stats.mean) m /= n;

  stats.covariance.assign(d, std::vector<double>(d, 0.0));
  for (const auto& [id, v] : set.vectors)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        stats.covariance[i][j] += (v[i] - stats.mean[i]) * (v[j] - stats.mean[j]);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) stats.covariance[i][j] /= (n - 1.0);

  // Symmetrize and regularize.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      double s = 0.5 * (stats.covariance[i][j] + stats.covariance[j][i]);
      stats.covariance[i][j] = s;
      stats.covariance[j][i] = s;
    }
    stats.covariance[i][i] += epsilon;
  }
  return stats;
}

namespace {

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& m) {
  const auto d = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = m[i][j];
  return out;
}

/// Symmetric PSD square root; negative eigenvalues clamp to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double* clamped) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  require(es.info() == Eigen::Success, Errc::Internal,
          "eigendecomposition failed in frechet_distance");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0) {
      if (clamped) *clamped = std::max(*clamped, -ev(i));
      ev(i) = 0.0;
    }
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const GaussianStats& a, const GaussianStats& b,
                        FrechetDiag* diag) {
  require(a.dim() == b.dim(), Errc::DimMismatch,
          "frechet_distance: dimension mismatch");
  const std::size_t d = a.dim();
  require(d >= 1, Errc::InvalidArgument, "frechet_distance: empty statistics");

  double mean_sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    require(std::isfinite(a.mean[i]) && std::isfinite(b.mean[i]), Errc::InvalidArgument,
            "frechet_distance: non-finite mean");
    const double delta = a.mean[i] - b.mean[i];
    mean_sq += delta * delta;
  }

  Eigen::MatrixXd ca = to_eigen(a.covariance);
  Eigen::MatrixXd cb = to_eigen(b.covariance);
  require(ca.allFinite() && cb.allFinite(), Errc::InvalidArgument,
          "frechet_distance: non-finite covariance");

  double clamped = 0.0;
  Eigen::MatrixXd s = psd_sqrt(ca, &clamped);
  Eigen::MatrixXd inner = s * cb * s;
  inner = 0.5 * (inner + inner.transpose());  // symmetrize against round-off
  Eigen::MatrixXd cross = psd_sqrt(inner, &clamped);

  if (diag) diag->clamped_magnitude = clamped;
  double trace_term = ca.trace() + cb.trace() - 2.0 * cross.trace();
  double result = mean_sq + trace_term;
  return result < 0.0 ? 0.0 : result;
}

double fbd(const EmbeddingSet& generated, const EmbeddingSet& reference,
           double epsilon, FrechetDiag* diag) {
  require(generated.dim == reference.dim, Errc::DimMismatch,
          "fbd: embedding dimension mismatch");
  require(generated.label == reference.label, Errc::InvalidArgument,
          "fbd: embedding label mismatch: \"" + generated.label + "\" vs \"" +
              reference.label + "\"");
  return frechet_distance(gaussian_stats(generated, epsilon),
                          gaussian_stats(reference, epsilon), diag);
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  auto per_n = [](const std::map<std::size_t, double>& m) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [n, v] : m) out[std::to_string(n)] = v;
    return out;
  };
  j["msj"] = per_n(msj);
  j["f_bleu"] = per_n(f_bleu);
  j["b_bleu"] = per_n(b_bleu);
  j["ha_bleu"] = per_n(ha_bleu);
  j["tid"] = tid;
  j["fbd"] = nlohmann::json::object();
  for (const auto& [label, v] : fbd) j["fbd"][label] = v;
  j["meta"] = nlohmann::json::object();
  for (const auto& [k, v] : meta) j["meta"][k] = v;
  if (!warnings.empty()) j["meta"]["warnings"] = warnings;
  return j.dump(2);
}

MetricReport MetricReport::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MetricReport r;
  auto per_n = [](const nlohmann::json& m) {
    std::map<std::size_t, double> out;
    for (auto it = m.begin(); it != m.end(); ++it)
      out[std::stoull(it.key())] = it.value().get<double>();
    return out;
  };
  r.msj = per_n(j.at("msj"));
  r.f_bleu = per_n(j.at("f_bleu"));
  r.b_bleu = per_n(j.at("b_bleu"));
  r.ha_bleu = per_n(j.at("ha_bleu"));
  r.tid = j.at("tid").get<double>();
  for (auto it = j.at("fbd").begin(); it != j.at("fbd").end(); ++it)
    r.fbd[it.key()] = it.value().get<double>();
  if (j.contains("meta")) {
    for (auto it = j["meta"].begin(); it != j["meta"].end(); ++it) {
      if (it.key() == "warnings") {
        r.warnings = it.value().get<std::vector<std::string>>();
      } else if (it.value().is_string()) {
        r.meta[it.key()] = it.value().get<std::string>();
      }
    }
  }
  return r;
}

MetricReport evaluate(const Corpus& generated, const Corpus& reference,
                      const MetricConfig& config) {
  require(!generated.empty() && !reference.empty(), Errc::EmptyCorpus,
          "evaluate requires nonempty generated and reference corpora");

  std::vector<TokenSeq> gen_docs = corpus_docs(generated);
  std::vector<TokenSeq> ref_docs = corpus_docs(reference);

  MetricReport report;
  for (std::size_t n : config.ngram_orders) {
    report.msj[n] = msj(gen_docs, ref_docs, n);
    double f = forward_bleu(gen_docs, ref_docs, n);
    double b = backward_bleu(gen_docs, ref_docs, n);
    report.f_bleu[n] = f;
    report.b_bleu[n] = b;
    report.ha_bleu[n] = f + b == 0.0 ? 0.0 : 2.0 * f * b / (f + b);
  }
  report.tid = tid(gen_docs, ref_docs, reference);

  for (const auto& [label, files] : config.embedding_files) {
    EmbeddingSet ge, re;
    try {
      ge = read_embeddings(files.generated);
      re = read_embeddings(files.reference);
    } catch (const Error& e) {
      report.warnings.push_back("fbd label \"" + label + "\" skipped: " + e.what());
      continue;
    }
    FrechetDiag diag;
    report.fbd[label] = fbd(ge, re, config.epsilon, &diag);
    if (diag.clamped_magnitude > 1e-6)
      report.warnings.push_back("fbd label \"" + label + "\": clamped eigenvalue " +
                                std::to_string(diag.clamped_magnitude));
  }
  if (config.embedding_files.empty() && config.use_fallback_embeddings) {
    EmbeddingSet ge =
        tfidf_fallback_embeddings(generated.documents, reference, config.fallback_dim);
    EmbeddingSet re =
        tfidf_fallback_embeddings(reference.documents, reference, config.fallback_dim);
    FrechetDiag diag;
    report.fbd[ge.label] = fbd(ge, re, config.epsilon, &diag);
    if (diag.clamped_magnitude > 1e-6)
      report.warnings.push_back("fbd fallback: clamped eigenvalue " +
                                std::to_string(diag.clamped_magnitude));
  }
  if (report.fbd.empty())
    report.warnings.push_back("no embeddings available; fbd omitted");

  report.meta["generated_docs"] = std::to_string(generated.size());
  report.meta["reference_docs"] = std::to_string(reference.size());
  report.meta["tid_scale"] = "x100 euclidean";
  return report;
}

}  // namespace progen
