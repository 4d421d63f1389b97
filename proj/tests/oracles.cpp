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
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace oracles {

namespace {

std::size_t count_of(const std::string& w, const Tokens& doc) {
  std::size_t c = 0;
  for (const auto& t : doc)
    if (t == w) ++c;
  return c;
}

std::map<Tokens, std::size_t> ngram_counts(const Tokens& doc, std::size_t n) {
  std::map<Tokens, std::size_t> counts;
  if (doc.size() < n) return counts;
  for (std::size_t i = 0; i + n <= doc.size(); ++i)
    ++counts[Tokens(doc.begin() + i, doc.begin() + i + n)];
  return counts;
}

std::map<Tokens, std::size_t> ngram_counts(const std::vector<Tokens>& docs,
                                           std::size_t n) {
  std::map<Tokens, std::size_t> counts;
  for (const Tokens& doc : docs)
    for (const auto& [g, c] : ngram_counts(doc, n)) counts[g] += c;
  return counts;
}

}  // namespace

double importance(const std::string& w, const std::vector<Tokens>& docs) {
  std::size_t df = 0;
  for (const Tokens& d : docs)
    if (count_of(w, d) > 0) ++df;
  if (df == 0) return 0.0;
  double idf = std::log(static_cast<double>(docs.size()) / static_cast<double>(df));
  double sum = 0.0;
  for (const Tokens& d : docs) {
    std::size_t c = count_of(w, d);
    if (c == 0) continue;
    sum += (static_cast<double>(c) / static_cast<double>(d.size())) * idf;
  }
  return sum / static_cast<double>(df);
}

double coverage(const std::set<std::string>& vocab, const std::vector<Tokens>& docs) {
  std::size_t covered = 0, total = 0;
  for (const Tokens& d : docs) {
    total += d.size();
    for (const auto& t : d)
      if (vocab.count(t)) ++covered;
  }
  return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                           std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

double sweep_replaced_fraction(const std::map<std::size_t, double>& replace_prob,
                               std::size_t positions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<std::size_t, double>> orders(replace_prob.rbegin(),
                                                     replace_prob.rend());
  std::size_t pos = 0, replaced = 0;
  while (pos < positions) {
    std::size_t advance = 1;
    for (const auto& [n, p] : orders) {
      if (p <= 0.0) continue;
      if (unit(rng) < p) {
        replaced += n;
        advance = n;
        break;
      }
    }
    pos += advance;
  }
  return static_cast<double>(replaced) / static_cast<double>(pos);
}

double msj(const std::vector<Tokens>& a, const std::vector<Tokens>& b, std::size_t n) {
  auto ca = ngram_counts(a, n);
  auto cb = ngram_counts(b, n);
  double ta = 0, tb = 0;
  for (const auto& [g, c] : ca) ta += static_cast<double>(c);
  for (const auto& [g, c] : cb) tb += static_cast<double>(c);

  std::set<Tokens> grams;
  for (const auto& [g, c] : ca) grams.insert(g);
  for (const auto& [g, c] : cb) grams.insert(g);

  double mins = 0, maxs = 0;
  for (const Tokens& g : grams) {
    double fa = ca.count(g) ? static_cast<double>(ca[g]) / ta : 0.0;
    double fb = cb.count(g) ? static_cast<double>(cb[g]) / tb : 0.0;
    mins += std::min(fa, fb);
    maxs += std::max(fa, fb);
  }
  return maxs == 0 ? 0.0 : mins / maxs;
}

double bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
            std::size_t n) {
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t match = 0, total = 0;
    // Clip against the best per-reference count of each k-gram.
    std::map<Tokens, std::size_t> best;
    for (const Tokens& r : refs)
      for (const auto& [g, c] : ngram_counts(r, k))
        best[g] = std::max(best[g], c);
    for (const Tokens& h : hyps) {
      if (h.size() < k) continue;
      total += h.size() - k + 1;
      for (const auto& [g, c] : ngram_counts(h, k))
        if (best.count(g)) match += std::min(c, best[g]);
    }
    double p;
    if (total == 0)
      p = 0.0;
    else if (match == 0 && k >= 2)
      p = 1.0 / static_cast<double>(total + 1);
    else
      p = static_cast<double>(match) / static_cast<double>(total);
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }

  std::size_t hyp_len = 0, ref_len = 0;
  for (const Tokens& h : hyps) {
    hyp_len += h.size();
    std::size_t best = refs.front().size();
    auto diff = [&](std::size_t r) {
      return r > h.size() ? r - h.size() : h.size() - r;
    };
    for (const Tokens& r : refs)
      if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best))
        best = r.size();
    ref_len += best;
  }
  double bp = hyp_len < ref_len
                  ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len))
                  : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(n));
}

double tid(const std::vector<Tokens>& a, const std::vector<Tokens>& b,
           const std::vector<Tokens>& reference) {
  std::map<std::string, std::size_t> df;
  for (const Tokens& d : reference) {
    std::set<std::string> seen(d.begin(), d.end());
    for (const auto& t : seen) ++df[t];
  }
  auto idf = [&](const std::string& t) {
    return std::log(static_cast<double>(reference.size()) /
                    static_cast<double>(df.at(t)));
  };
  auto mean_vec = [&](const std::vector<Tokens>& docs) {
    std::map<std::string, double> mean;
    for (const Tokens& d : docs) {
      std::map<std::string, std::size_t> counts;
      for (const auto& t : d) ++counts[t];
      for (const auto& [t, c] : counts) {
        if (!df.count(t)) continue;
        mean[t] += (static_cast<double>(c) / static_cast<double>(d.size())) * idf(t);
      }
    }
    for (auto& [t, v] : mean) v /= static_cast<double>(docs.size());
    return mean;
  };
  std::map<std::string, double> ma = mean_vec(a);
  std::map<std::string, double> mb = mean_vec(b);
  std::set<std::string> keys;
  for (const auto& [t, v] : ma) keys.insert(t);
  for (const auto& [t, v] : mb) keys.insert(t);
  double sq = 0;
  for (const auto& t : keys) {
    double da = ma.count(t) ? ma[t] : 0.0;
    double db = mb.count(t) ? mb[t] : 0.0;
    sq += (da - db) * (da - db);
  }
  return 100.0 * std::sqrt(sq);
}

double frechet_diagonal(const std::vector<double>& mu_a, const std::vector<double>& var_a,
                        const std::vector<double>& mu_b, const std::vector<double>& var_b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i)
    sum += frechet_1d(mu_a[i], var_a[i], mu_b[i], var_b[i]);
  return sum;
}

double NormalSampler::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  std::mt19937_64 rng(seed_ ^ (counter_++ * 0x9e3779b97f4a7c15ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u1 = unit(rng);
  double u2 = unit(rng);
  while (u1 <= 1e-300) u1 = unit(rng);
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace oracles
