#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmgram/common.hpp"

namespace mmgram {

/// Word <-> dense-id map with counts. Ids are assigned by descending count,
/// ties broken lexicographically, so identical corpora always yield
/// identical vocabularies.
struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  std::unordered_map<std::string, int> index;
  std::int64_t total_tokens = 0;  // sum of retained-word occurrences
  std::int64_t min_count = 1;

  int size() const { return static_cast<int>(words.size()); }

  int id_of(std::string_view w) const {
    auto it = index.find(std::string(w));
    return it == index.end() ? -1 : it->second;
  }

  double frequency(int id) const {
    return static_cast<double>(counts[id]) / static_cast<double>(total_tokens);
  }
};

inline Vocabulary build_vocabulary(const std::vector<std::string>& tokens,
                                   std::int64_t min_count) {
  if (tokens.empty()) throw std::runtime_error("empty token stream");
  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& t : tokens) ++freq[t];

  Vocabulary v;
  v.min_count = min_count;
  for (auto& [w, c] : freq) {
    if (c >= min_count) {
      v.words.push_back(w);
      v.counts.push_back(c);
    }
  }
  if (v.words.empty())
    throw std::runtime_error("vocabulary empty after min-count filtering");

  std::vector<int> order(v.words.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (v.counts[a] != v.counts[b]) return v.counts[a] > v.counts[b];
    return v.words[a] < v.words[b];
  });

  Vocabulary out;
  out.min_count = min_count;
  out.words.reserve(order.size());
  out.counts.reserve(order.size());
  for (int i : order) {
    out.index.emplace(v.words[i], static_cast<int>(out.words.size()));
    out.words.push_back(std::move(v.words[i]));
    out.counts.push_back(v.counts[i]);
    out.total_tokens += v.counts[i];
  }
  return out;
}

inline std::vector<std::string> read_tokens(std::istream& in,
                                            bool lowercase = false) {
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) {
    if (lowercase)
      for (auto& ch : tok)
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    tokens.push_back(tok);
  }
  return tokens;
}

inline Vocabulary build_vocabulary(std::istream& in, std::int64_t min_count,
                                   bool lowercase = false) {
  return build_vocabulary(read_tokens(in, lowercase), min_count);
}

inline void dump_vocabulary(const Vocabulary& v, std::ostream& out) {
  for (int i = 0; i < v.size(); ++i)
    out << v.words[i] << '\t' << v.counts[i] << '\n';
}

/// Probability of keeping an occurrence of a word with relative frequency f
/// under subsample threshold t: min(1, sqrt(t/f)).
inline double keep_probability(double f, double t) {
  if (f <= 0.0) throw std::invalid_argument("keep_probability: f must be > 0");
  if (t <= 0.0) throw std::invalid_argument("keep_probability: t must be > 0");
  double p = std::sqrt(t / f);
  return p < 1.0 ? p : 1.0;
}

/// Map tokens to word ids, dropping out-of-vocabulary tokens.
inline std::vector<int> encode(const std::vector<std::string>& tokens,
                               const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    int id = vocab.id_of(t);
    if (id >= 0) ids.push_back(id);
  }
  return ids;
}

/// Frequent-word subsampling over an encoded id stream. t <= 0 or +inf
/// disables it. Each occurrence draws independently.
inline std::vector<int> subsample(std::span<const int> ids,
                                  const Vocabulary& vocab, double t, Rng& rng) {
  std::vector<int> kept;
  kept.reserve(ids.size());
  if (t <= 0.0 || t == std::numeric_limits<double>::infinity()) {
    kept.assign(ids.begin(), ids.end());
    return kept;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int id : ids) {
    double p = keep_probability(vocab.frequency(id), t);
    if (p >= 1.0 || unif(rng) < p) kept.push_back(id);
  }
  return kept;
}

struct ContextWindow {
  int target = -1;
  std::vector<int> contexts;  // surviving neighbors within +-window
  int window = 0;
};

/// Slide a symmetric window over the post-subsampling stream and hand each
/// (target, contexts) to fn. Subsampling shrinks effective windows because
/// discarded tokens are removed before windowing.
template <typename Fn>
void iter_windows(std::span<const int> ids, const Vocabulary& vocab, int window,
                  double t, Rng& rng, Fn&& fn) {
  std::vector<int> kept = subsample(ids, vocab, t, rng);
  ContextWindow cw;
  cw.window = window;
  const int n = static_cast<int>(kept.size());
  for (int i = 0; i < n; ++i) {
    cw.target = kept[i];
    cw.contexts.clear();
    int lo = std::max(0, i - window);
    int hi = std::min(n - 1, i + window);
    for (int j = lo; j <= hi; ++j)
      if (j != i) cw.contexts.push_back(kept[j]);
    fn(cw);
  }
}

}  // namespace mmgram
