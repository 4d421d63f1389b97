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
#include "progen/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "progen/error.hpp"

namespace progen {

namespace {

constexpr char kJoin = '\x1f';

std::string join_window(const TokenSeq& hist, std::size_t len,
                        const std::string* prefix = nullptr) {
  std::string key;
  if (prefix) {
    key += *prefix;
    if (len > 0) key.push_back(kJoin);
  }
  const std::size_t have = hist.size();
  for (std::size_t i = 0; i < len; ++i) {
    if (i > 0) key.push_back(kJoin);
    // BOS-padded window over the last `len` symbols.
    if (len - i > have)
      key += sym::bos;
    else
      key += hist[have - (len - i)];
  }
  return key;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string pct_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  static const char hex[] = "0123456789ABCDEF";
  for (unsigned char c : s) {
    if (c <= 0x20 || c == 0x7f || c == '%') {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xf]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::string pct_unescape(const std::string& s, const std::string& path) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    require(i + 2 < s.size(), Errc::CorruptModel, "bad escape in model file: " + path);
    auto nib = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      fail(Errc::CorruptModel, "bad escape in model file: " + path);
    };
    out.push_back(static_cast<char>(nib(s[i + 1]) * 16 + nib(s[i + 2])));
    i += 2;
  }
  return out;
}

std::string read_field(std::istringstream& line, const std::string& path) {
  std::string raw;
  require(static_cast<bool>(line >> raw) && raw[0] == ':', Errc::CorruptModel,
          "malformed string field in model file: " + path);
  return pct_unescape(raw.substr(1), path);
}

/// Shared nucleus-sampling core over an index-aligned probability vector.
/// Ties keep ascending index order.
std::size_t nucleus_sample(const std::vector<double>& probs,
                           const DecoderConfig& cfg, Rng& rng) {
  require(!probs.empty(), Errc::EmptyInput, "sample_next: empty distribution");

  std::vector<std::pair<double, std::size_t>> items;
  items.reserve(probs.size());
  if (cfg.temperature == 1.0) {
    for (std::size_t i = 0; i < probs.size(); ++i) items.emplace_back(probs[i], i);
  } else {
    double sum = 0.0;
    for (double p : probs) sum += std::pow(p, 1.0 / cfg.temperature);
    for (std::size_t i = 0; i < probs.size(); ++i)
      items.emplace_back(std::pow(probs[i], 1.0 / cfg.temperature) / sum, i);
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  double mass = 0.0;
  std::size_t keep = items.size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    mass += items[i].first;
    if (mass >= cfg.top_p) {
      keep = i + 1;
      break;
    }
  }

  double r = rng.real() * mass;
  double cum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    cum += items[i].first;
    if (r < cum) return items[i].second;
  }
  return items[keep - 1].second;
}

}  // namespace

std::vector<double> SmoothingConfig::weights_for(std::size_t levels) const {
  require(levels >= 1, Errc::InvalidArgument, "model needs at least one level");
  if (!level_weights.empty()) {
    require(level_weights.size() == levels, Errc::Config,
            "level_weights must have one entry per backoff level");
    return level_weights;
  }
  std::vector<double> w(levels);
  double v = 1.0;
  for (std::size_t i = 0; i < levels; ++i, v *= level_ratio) w[i] = v;
  return w;
}

void DecoderConfig::validate() const {
  require(top_p > 0.0 && top_p <= 1.0, Errc::Config, "top_p must be in (0,1]");
  require(max_tokens >= 1, Errc::Config, "max_tokens must be >= 1");
  require(temperature > 0.0, Errc::Config, "temperature must be positive");
}

std::string sample_next(const std::vector<std::pair<std::string, double>>& dist,
                        const DecoderConfig& cfg, Rng& rng) {
  cfg.validate();
  require(!dist.empty(), Errc::EmptyInput, "sample_next: empty distribution");
  std::vector<double> probs;
  probs.reserve(dist.size());
  for (const auto& [s, p] : dist) probs.push_back(p);
  return dist[nucleus_sample(probs, cfg, rng)].first;
}

namespace detail {

std::int64_t LeveledCounts::symbol_id(const std::string& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::uint32_t LeveledCounts::intern(const std::string& symbol) {
  auto it = ids_.find(symbol);
  if (it != ids_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(alphabet_.size());
  alphabet_.push_back(symbol);
  ids_.emplace(symbol, id);
  return id;
}

void LeveledCounts::observe(std::size_t level, const std::string& ctx,
                            std::uint32_t symbol) {
  Ctx& c = tables_[level][ctx];
  c.total += 1;
  for (auto& [id, count] : c.items) {
    if (id == symbol) {
      ++count;
      return;
    }
  }
  c.items.emplace_back(symbol, 1);
}

void LeveledCounts::finalize() {
  // Lexicographic alphabet gives a platform-independent stable symbol order.
  std::vector<std::uint32_t> order(alphabet_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return alphabet_[a] < alphabet_[b];
  });
  std::vector<std::uint32_t> remap(alphabet_.size());
  std::vector<std::string> sorted(alphabet_.size());
  for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
    remap[order[rank]] = rank;
    sorted[rank] = alphabet_[order[rank]];
  }
  alphabet_ = std::move(sorted);
  ids_.clear();
  for (std::uint32_t i = 0; i < alphabet_.size(); ++i) ids_.emplace(alphabet_[i], i);

  for (auto& table : tables_) {
    for (auto& [ctx, c] : table) {
      for (auto& [id, count] : c.items) id = remap[id];
      std::sort(c.items.begin(), c.items.end());
    }
  }
  finalized_ = true;
}

std::vector<double> LeveledCounts::norm_weights(
    const std::vector<const Ctx*>& observed, const SmoothingConfig& sc) const {
  std::vector<double> w = sc.weights_for(tables_.size());
  double sum = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (!observed[l]) w[l] = 0.0;
    sum += w[l];
  }
  require(sum > 0, Errc::Internal, "model has no observed context levels");
  for (double& v : w) v /= sum;
  return w;
}

std::vector<double> LeveledCounts::distribution(
    const std::vector<std::string>& keys, const SmoothingConfig& sc) const {
  require(finalized_, Errc::Internal, "model not finalized");
  require(keys.size() == tables_.size(), Errc::Internal, "level/key mismatch");

  std::vector<const Ctx*> observed(tables_.size(), nullptr);
  for (std::size_t l = 0; l < tables_.size(); ++l) {
    auto it = tables_[l].find(keys[l]);
    if (it != tables_[l].end() && it->second.total > 0) observed[l] = &it->second;
  }
  std::vector<double> w = norm_weights(observed, sc);

  const double a = static_cast<double>(alphabet_.size());
  std::vector<double> probs(alphabet_.size(), 0.0);
  for (std::size_t l = 0; l < tables_.size(); ++l) {
    if (!observed[l]) continue;
    const Ctx& c = *observed[l];
    if (l == 0) {
      const double denom = static_cast<double>(c.total) + sc.lambda * a;
      const double floor = w[l] * sc.lambda / denom;
      for (double& p : probs) p += floor;
      for (const auto& [id, count] : c.items)
        probs[id] += w[l] * static_cast<double>(count) / denom;
    } else {
      const double denom = static_cast<double>(c.total);
      for (const auto& [id, count] : c.items)
        probs[id] += w[l] * static_cast<double>(count) / denom;
    }
  }
  return probs;
}

double LeveledCounts::prob(const std::vector<std::string>& keys,
                           std::uint32_t symbol, const SmoothingConfig& sc) const {
  require(finalized_, Errc::Internal, "model not finalized");
  require(keys.size() == tables_.size(), Errc::Internal, "level/key mismatch");

  std::vector<const Ctx*> observed(tables_.size(), nullptr);
  for (std::size_t l = 0; l < tables_.size(); ++l) {
    auto it = tables_[l].find(keys[l]);
    if (it != tables_[l].end() && it->second.total > 0) observed[l] = &it->second;
  }
  std::vector<double> w = norm_weights(observed, sc);

  const double a = static_cast<double>(alphabet_.size());
  double p = 0.0;
  for (std::size_t l = 0; l < tables_.size(); ++l) {
    if (!observed[l]) continue;
    const Ctx& c = *observed[l];
    std::uint64_t count = 0;
    auto it = std::lower_bound(c.items.begin(), c.items.end(),
                               std::make_pair(symbol, std::uint64_t{0}));
    if (it != c.items.end() && it->first == symbol) count = it->second;
    if (l == 0) {
      const double denom = static_cast<double>(c.total) + sc.lambda * a;
      p += w[l] * sc.lambda / denom;
      if (count) p += w[l] * static_cast<double>(count) / denom;
    } else if (count) {
      p += w[l] * static_cast<double>(count) / static_cast<double>(c.total);
    }
  }
  return p;
}

void LeveledCounts::save(std::ostream& out) const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const std::string& s : alphabet_) hash = fnv1a(s, hash);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));

  out << "alphabet " << alphabet_.size() << " " << hex << "\n";
  for (const std::string& s : alphabet_) out << ":" << pct_escape(s) << "\n";
  out << "levels " << tables_.size() << "\n";
  for (std::size_t l = 0; l < tables_.size(); ++l) {
    std::vector<const std::string*> keys;
    keys.reserve(tables_[l].size());
    for (const auto& [ctx, c] : tables_[l]) keys.push_back(&ctx);
    std::sort(keys.begin(), keys.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    out << "level " << l << " " << keys.size() << "\n";
    for (const std::string* ctx : keys) {
      const Ctx& c = tables_[l].at(*ctx);
      out << ":" << pct_escape(*ctx) << " " << c.total << " " << c.items.size();
      for (const auto& [id, count] : c.items) out << " " << id << " " << count;
      out << "\n";
    }
  }
}

void LeveledCounts::load(std::istream& in, const std::string& path) {
  std::string line, word;
  require(static_cast<bool>(std::getline(in, line)), Errc::CorruptModel,
          "truncated model file: " + path);
  std::istringstream head(line);
  std::size_t n_symbols = 0;
  std::string stored_hash;
  head >> word >> n_symbols >> stored_hash;
  require(word == "alphabet", Errc::CorruptModel, "missing alphabet in model file: " + path);

  alphabet_.clear();
  ids_.clear();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n_symbols; ++i) {
    require(static_cast<bool>(std::getline(in, line)) && !line.empty() && line[0] == ':',
            Errc::CorruptModel, "truncated model file: " + path);
    std::string s = pct_unescape(line.substr(1), path);
    hash = fnv1a(s, hash);
    ids_.emplace(s, static_cast<std::uint32_t>(alphabet_.size()));
    alphabet_.push_back(std::move(s));
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  require(stored_hash == hex, Errc::CorruptModel,
          "vocabulary hash mismatch in model file: " + path);

  require(static_cast<bool>(std::getline(in, line)), Errc::CorruptModel,
          "truncated model file: " + path);
  std::istringstream lv(line);
  std::size_t n_levels = 0;
  lv >> word >> n_levels;
  require(word == "levels" && n_levels >= 1, Errc::CorruptModel,
          "missing levels in model file: " + path);
  tables_.assign(n_levels, {});

  for (std::size_t l = 0; l < n_levels; ++l) {
    require(static_cast<bool>(std::getline(in, line)), Errc::CorruptModel,
            "truncated model file: " + path);
    std::istringstream lh(line);
    std::size_t level = 0, n_ctx = 0;
    lh >> word >> level >> n_ctx;
    require(word == "level" && level == l, Errc::CorruptModel,
            "malformed level header in model file: " + path);
    for (std::size_t c = 0; c < n_ctx; ++c) {
      require(static_cast<bool>(std::getline(in, line)), Errc::CorruptModel,
              "truncated model file: " + path);
      std::istringstream ls(line);
      std::string ctx = read_field(ls, path);
      Ctx entry;
      std::size_t n_items = 0;
      require(static_cast<bool>(ls >> entry.total >> n_items), Errc::CorruptModel,
              "malformed context line in model file: " + path);
      entry.items.reserve(n_items);
      std::uint64_t check_total = 0;
      for (std::size_t k = 0; k < n_items; ++k) {
        std::uint32_t id = 0;
        std::uint64_t count = 0;
        require(static_cast<bool>(ls >> id >> count) && id < alphabet_.size(),
                Errc::CorruptModel, "malformed count record in model file: " + path);
        entry.items.emplace_back(id, count);
        check_total += count;
      }
      require(check_total == entry.total, Errc::CorruptModel,
              "inconsistent totals in model file: " + path);
      tables_[l].emplace(std::move(ctx), std::move(entry));
    }
  }
  finalized_ = true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Planner

std::vector<std::string> PlannerModel::context_keys(const TokenSeq& hist) const {
  std::vector<std::string> keys(order_);
  for (std::size_t l = 0; l < order_; ++l) keys[l] = join_window(hist, l);
  return keys;
}

PlannerModel PlannerModel::train(const std::vector<TrainingPair>& pairs,
                                 std::size_t order, SmoothingConfig smoothing) {
  require(!pairs.empty(), Errc::EmptyInput, "train_planner: no training pairs");
  require(order >= 1, Errc::InvalidArgument, "planner order must be >= 1");

  PlannerModel m;
  m.order_ = order;
  m.smoothing_ = smoothing;
  m.smoothing_.level_weights = smoothing.weights_for(order);
  m.counts_ = detail::LeveledCounts(order);
  m.counts_.intern(sym::eos);

  for (const TrainingPair& pair : pairs) {
    TokenSeq hist;
    hist.reserve(order - 1 + pair.input.size() + 1 + pair.target.size());
    for (std::size_t i = 0; i + 1 < order; ++i) hist.push_back(sym::bos);
    hist.insert(hist.end(), pair.input.begin(), pair.input.end());
    hist.push_back(sym::sep);

    auto observe_step = [&](const std::string& symbol) {
      std::uint32_t id = m.counts_.intern(symbol);
      for (std::size_t l = 0; l < order; ++l)
        m.counts_.observe(l, join_window(hist, l), id);
      hist.push_back(symbol);
    };
    for (const Token& t : pair.target) observe_step(t);
    observe_step(sym::eos);
  }
  m.counts_.finalize();
  return m;
}

TokenSeq PlannerModel::generate(const TokenSeq& condition, const DecoderConfig& cfg,
                                Rng& rng) const {
  cfg.validate();
  TokenSeq hist;
  for (std::size_t i = 0; i + 1 < order_; ++i) hist.push_back(sym::bos);
  hist.insert(hist.end(), condition.begin(), condition.end());
  hist.push_back(sym::sep);

  TokenSeq out;
  while (out.size() < cfg.max_tokens) {
    std::vector<double> probs = counts_.distribution(context_keys(hist), smoothing_);
    const std::string& symbol = counts_.symbol(
        static_cast<std::uint32_t>(nucleus_sample(probs, cfg, rng)));
    if (symbol == sym::eos) break;
    out.push_back(symbol);
    hist.push_back(symbol);
  }
  return out;
}

double PlannerModel::log_likelihood(const TokenSeq& target,
                                    const TokenSeq& condition) const {
  TokenSeq hist;
  for (std::size_t i = 0; i + 1 < order_; ++i) hist.push_back(sym::bos);
  hist.insert(hist.end(), condition.begin(), condition.end());
  hist.push_back(sym::sep);

  double ll = 0.0;
  auto step = [&](const std::string& symbol) {
    std::int64_t id = counts_.symbol_id(symbol);
    require(id >= 0, Errc::UnknownSymbol,
            "symbol outside planner alphabet: \"" + symbol + "\"");
    ll += std::log(counts_.prob(context_keys(hist), static_cast<std::uint32_t>(id),
                                smoothing_));
    hist.push_back(symbol);
  };
  for (const Token& t : target) step(t);
  step(sym::eos);
  return ll;
}

// ---------------------------------------------------------------------------
// Refiner

std::vector<std::string> RefinerModel::context_keys(const std::string& anchor,
                                                    const TokenSeq& hist) const {
  // Level 0: context-free. Level 1: anchor alone. Level 1+j: anchor plus the
  // last j emitted tokens.
  std::vector<std::string> keys(order_ + 2);
  keys[0] = "";
  keys[1] = join_window(hist, 0, &anchor);
  for (std::size_t j = 1; j <= order_; ++j) keys[1 + j] = join_window(hist, j, &anchor);
  return keys;
}

template <typename Fn>
void RefinerModel::walk_pair(const TrainingPair& pair, Fn&& step) {
  AnchorAlignment al = align(pair.input, pair.target);
  // Unmatched inputs (noise that the clean target dropped) never become
  // emit observations; the walk skips over them.
  std::size_t a = 0;
  TokenSeq hist;
  hist.reserve(pair.target.size());
  for (std::size_t t = 0; t < pair.target.size(); ++t) {
    const bool is_emit = a < al.pairs.size() && al.pairs[a].second == t;
    const std::string& anchor =
        a < al.pairs.size() ? pair.input[al.pairs[a].first] : sym::end;
    step(anchor, hist, is_emit ? sym::emit : pair.target[t]);
    if (is_emit) ++a;
    hist.push_back(pair.target[t]);
  }
  step(sym::end, hist, sym::emit);
}

RefinerModel RefinerModel::train(const std::vector<TrainingPair>& pairs,
                                 std::size_t order, SmoothingConfig smoothing) {
  require(!pairs.empty(), Errc::EmptyInput, "train_refiner: no training pairs");
  require(order >= 1, Errc::InvalidArgument, "refiner order must be >= 1");

  RefinerModel m;
  m.order_ = order;
  m.stage_ = pairs.front().stage;
  m.smoothing_ = smoothing;
  m.smoothing_.level_weights = smoothing.weights_for(order + 2);
  m.counts_ = detail::LeveledCounts(order + 2);
  m.counts_.intern(sym::emit);
  m.counts_.intern(sym::unk);

  for (const TrainingPair& pair : pairs) {
    walk_pair(pair, [&](const std::string& anchor, const TokenSeq& hist,
                        const std::string& action) {
      std::uint32_t id = m.counts_.intern(action);
      std::vector<std::string> keys = m.context_keys(anchor, hist);
      for (std::size_t l = 0; l < keys.size(); ++l) m.counts_.observe(l, keys[l], id);
    });
  }
  m.counts_.finalize();
  return m;
}

TokenSeq RefinerModel::generate(const TokenSeq& anchors, const DecoderConfig& cfg,
                                Rng& rng) const {
  cfg.validate();
  require(cfg.max_tokens >= anchors.size(), Errc::InvalidArgument,
          "max_tokens too small to emit all anchors");

  const std::int64_t emit_id = counts_.symbol_id(sym::emit);
  const std::int64_t unk_id = counts_.symbol_id(sym::unk);
  require(emit_id >= 0, Errc::Internal, "refiner missing emit action");

  TokenSeq out;
  TokenSeq hist;
  std::size_t head = 0;
  while (true) {
    const std::size_t pending = anchors.size() - head;
    const std::size_t remaining = cfg.max_tokens - out.size();
    if (remaining == pending) {
      // Token budget exactly fits the queue: flush so every anchor appears.
      for (; head < anchors.size(); ++head) out.push_back(anchors[head]);
      break;
    }
    const std::string& anchor = pending > 0 ? anchors[head] : sym::end;
    std::vector<double> probs =
        counts_.distribution(context_keys(anchor, hist), smoothing_);
    if (unk_id >= 0) {
      // The likelihood-only bucket is never generated.
      double drop = probs[static_cast<std::size_t>(unk_id)];
      probs[static_cast<std::size_t>(unk_id)] = 0.0;
      for (double& p : probs) p /= (1.0 - drop);
    }
    const std::size_t pick = nucleus_sample(probs, cfg, rng);
    const std::string& action = counts_.symbol(static_cast<std::uint32_t>(pick));
    if (static_cast<std::int64_t>(pick) == emit_id) {
      if (pending == 0) break;  // stop action at queue end
      out.push_back(anchors[head]);
      hist.push_back(anchors[head]);
      ++head;
    } else {
      out.push_back(action);
      hist.push_back(action);
    }
  }
  return out;
}

double RefinerModel::log_likelihood(const TokenSeq& input, const TokenSeq& target) const {
  const std::int64_t unk_id = counts_.symbol_id(sym::unk);
  TrainingPair pair;
  pair.input = input;
  pair.target = target;

  double ll = 0.0;
  walk_pair(pair, [&](const std::string& anchor, const TokenSeq& hist,
                      const std::string& action) {
    std::int64_t id = counts_.symbol_id(action);
    if (id < 0) id = unk_id;
    require(id >= 0, Errc::Internal, "refiner missing unk action");
    ll += std::log(counts_.prob(context_keys(anchor, hist),
                                static_cast<std::uint32_t>(id), smoothing_));
  });
  return ll;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

void save_header(std::ostream& out, const std::string& kind, std::size_t stage,
                 std::size_t order, const SmoothingConfig& sc) {
  out << "progen-model 1 " << kind << "\n";
  out << "stage " << stage << "\n";
  out << "order " << order << "\n";
  out << "lambda " << fmt_double(sc.lambda) << "\n";
  out << "ratio " << fmt_double(sc.level_ratio) << "\n";
  out << "weights";
  for (double w : sc.level_weights) out << " " << fmt_double(w);
  out << "\n";
}

struct ModelHeader {
  std::string kind;
  std::size_t stage = 0;
  std::size_t order = 0;
  SmoothingConfig smoothing;
};

ModelHeader load_header(std::istream& in, const std::string& path) {
  ModelHeader h;
  std::string line, word, magic;
  int version = 0;

  require(static_cast<bool>(std::getline(in, line)), Errc::CorruptModel,
          "truncated model file: " + path);
  std::istringstream l0(line);
  l0 >> magic >> version >> h.kind;
  require(magic == "progen-model", Errc::CorruptModel, "not a model file: " + path);
  require(version == 1, Errc::CorruptModel,
          "unsupported model file version in " + path);
  require(h.kind == "planner" || h.kind == "refiner", Errc::CorruptModel,
          "unknown model kind in " + path);

  auto next = [&](const std::string& name) -> std::istringstream {
    require(static_cast<bool>(std::getline(in, line)), Errc::CorruptModel,
            "truncated model file: " + path);
    std::istringstream ls(line);
    ls >> word;
    require(word == name, Errc::CorruptModel,
            "missing " + name + " in model file: " + path);
    return ls;
  };
  next("stage") >> h.stage;
  next("order") >> h.order;
  next("lambda") >> h.smoothing.lambda;
  next("ratio") >> h.smoothing.level_ratio;
  std::istringstream ws = next("weights");
  double w;
  while (ws >> w) h.smoothing.level_weights.push_back(w);
  require(h.order >= 1, Errc::CorruptModel, "bad order in model file: " + path);
  return h;
}

void check_trailer(std::istream& in, const std::string& path) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "end",
          Errc::CorruptModel, "truncated model file: " + path);
}

}  // namespace

void PlannerModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::Io, "cannot write model file: " + path);
  save_header(out, "planner", 1, order_, smoothing_);
  counts_.save(out);
  out << "end\n";
  require(out.good(), Errc::Io, "failed writing model file: " + path);
}

PlannerModel PlannerModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open model file: " + path);
  ModelHeader h = load_header(in, path);
  require(h.kind == "planner", Errc::KindMismatch,
          "expected a planner model, found " + h.kind + " in " + path);

  PlannerModel m;
  m.order_ = h.order;
  m.smoothing_ = h.smoothing;
  m.counts_ = detail::LeveledCounts(h.order);
  m.counts_.load(in, path);
  check_trailer(in, path);
  return m;
}

void RefinerModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::Io, "cannot write model file: " + path);
  save_header(out, "refiner", stage_, order_, smoothing_);
  counts_.save(out);
  out << "end\n";
  require(out.good(), Errc::Io, "failed writing model file: " + path);
}

RefinerModel RefinerModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open model file: " + path);
  ModelHeader h = load_header(in, path);
  require(h.kind == "refiner", Errc::KindMismatch,
          "expected a refiner model, found " + h.kind + " in " + path);

  RefinerModel m;
  m.order_ = h.order;
  m.stage_ = h.stage;
  m.smoothing_ = h.smoothing;
  m.counts_ = detail::LeveledCounts(h.order + 2);
  m.counts_.load(in, path);
  check_trailer(in, path);
  return m;
}

// ---------------------------------------------------------------------------
// Staged chain

GenerationTrace generate(const StageModels& models, const StageVocabulary& vocabs,
                         const TokenSeq& condition, const DecoderConfig& cfg,
                         Rng& rng) {
  require(models.num_stages() == vocabs.num_stages(), Errc::InvalidArgument,
          "stage/model mismatch: " + std::to_string(models.num_stages()) +
              " models vs " + std::to_string(vocabs.num_stages()) + " vocabularies");
  GenerationTrace trace;
  trace.condition = condition;
  TokenSeq current = models.planner.generate(condition, cfg, rng);
  trace.stage_outputs.push_back(current);
  for (const RefinerModel& refiner : models.refiners) {
    current = refiner.generate(current, cfg, rng);
    trace.stage_outputs.push_back(current);
  }
  return trace;
}

GenerationTrace gold_plan_generate(const StageModels& models,
                                   const StageVocabulary& vocabs,
                                   const Document& doc, std::size_t start_stage,
                                   const DecoderConfig& cfg, Rng& rng) {
  require(models.num_stages() == vocabs.num_stages(), Errc::InvalidArgument,
          "stage/model mismatch");
  const std::size_t k = models.num_stages();
  require(start_stage >= 2 && start_stage <= k, Errc::InvalidArgument,
          "gold-plan start stage must be in [2, K]");

  GenerationTrace trace;
  trace.condition = doc.condition;
  trace.start_stage = start_stage;
  trace.stage_outputs.assign(k, {});
  TokenSeq current = extract(doc.tokens, vocabs.stage(start_stage - 1));
  trace.stage_outputs[start_stage - 2] = current;
  for (std::size_t s = start_stage; s <= k; ++s) {
    current = models.refiners[s - 2].generate(current, cfg, rng);
    trace.stage_outputs[s - 1] = current;
  }
  return trace;
}

}  // namespace progen
