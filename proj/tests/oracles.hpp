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

// Deliberately naive reference implementations, independent of the library
// code paths they check. Keep them simple and obviously correct.

#ifndef PROGEN_TESTS_ORACLES_HPP
#define PROGEN_TESTS_ORACLES_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracles {

using Tokens = std::vector<std::string>;

/// Average tf-idf over documents containing w (double loop).
double importance(const std::string& w, const std::vector<Tokens>& docs);

double coverage(const std::set<std::string>& vocab, const std::vector<Tokens>& docs);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// Monte-Carlo estimate of the replaced-token fraction of the noising sweep
/// (largest order first, jump past replaced spans).
double sweep_replaced_fraction(const std::map<std::size_t, double>& replace_prob,
                               std::size_t positions, std::uint64_t seed);

double msj(const std::vector<Tokens>& a, const std::vector<Tokens>& b, std::size_t n);

double bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
            std::size_t n);

double tid(const std::vector<Tokens>& a, const std::vector<Tokens>& b,
           const std::vector<Tokens>& reference);

inline double frechet_1d(double mu1, double var1, double mu2, double var2);

/// Componentwise closed form for diagonal covariances.
double frechet_diagonal(const std::vector<double>& mu_a, const std::vector<double>& var_a,
                        const std::vector<double>& mu_b, const std::vector<double>& var_b);

/// Standard normal draw (Box-Muller over a splittable counter stream).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : seed_(seed) {}
  double next();

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace oracles

#include <cmath>

inline double oracles::frechet_1d(double mu1, double var1, double mu2, double var2) {
  double ds = std::sqrt(var1) - std::sqrt(var2);
  return (mu1 - mu2) * (mu1 - mu2) + ds * ds;
}

#endif
