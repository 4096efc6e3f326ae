#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmgram/common.hpp"
#include "mmgram/xmodal.hpp"

namespace mmgram {

/// Word-pair similarity benchmark (MEN / Simlex style TSV).
struct BenchmarkSet {
  struct Pair {
    std::string w1, w2;
    double gold;
  };
  std::vector<Pair> pairs;
  std::string name;
};

inline BenchmarkSet load_benchmark(std::istream& in, std::string name = "") {
  BenchmarkSet b;
  b.name = std::move(name);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    BenchmarkSet::Pair p;
    if (ss >> p.w1 >> p.w2 >> p.gold) b.pairs.push_back(std::move(p));
  }
  if (b.pairs.empty()) throw std::runtime_error("benchmark file has no pairs");
  return b;
}

using ConcretenessTable = std::map<std::string, double>;

inline ConcretenessTable load_concreteness(std::istream& in) {
  ConcretenessTable t;
  std::string w;
  double score;
  while (in >> w >> score) t[w] = score;
  if (t.empty()) throw std::runtime_error("concreteness file is empty");
  return t;
}

namespace detail {

// Average ranks, ties get the mean of the tied rank range.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::invalid_argument("correlation undefined: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length series, n >= 2");
  return detail::pearson(detail::average_ranks(xs), detail::average_ranks(ys));
}

struct SimilarityResult {
  double rho = 0.0;
  double coverage = 0.0;  // fraction of benchmark pairs scored
  std::size_t used = 0;
  std::size_t dropped = 0;
};

/// Model score = cosine of the two word embeddings; OOV pairs are dropped.
/// With grounded_only, pairs are kept only when both words are grounded.
inline SimilarityResult eval_similarity(const WordVectors& vecs,
                                        const Vocabulary& vocab,
                                        const BenchmarkSet& benchmark,
                                        const VisualStore* grounded_filter =
                                            nullptr) {
  std::vector<double> model_scores, gold_scores;
  for (const auto& p : benchmark.pairs) {
    int a = vocab.id_of(p.w1), b = vocab.id_of(p.w2);
    if (a < 0 || b < 0 || !vecs.count(a) || !vecs.count(b)) continue;
    if (grounded_filter &&
        (!grounded_filter->is_grounded(a) || !grounded_filter->is_grounded(b)))
      continue;
    model_scores.push_back(cosine(vecs.at(a), vecs.at(b)));
    gold_scores.push_back(p.gold);
  }
  if (model_scores.empty())
    throw std::runtime_error("eval_similarity: no scorable pairs");
  SimilarityResult r;
  r.used = model_scores.size();
  r.dropped = benchmark.pairs.size() - r.used;
  r.coverage = static_cast<double>(r.used) / benchmark.pairs.size();
  r.rho = spearman(model_scores, gold_scores);
  return r;
}

/// P@k percentages: share of queries whose gold label appears in the top k.
inline std::vector<double> precision_at_k(
    const std::vector<std::vector<int>>& ranked, const std::vector<int>& gold,
    const std::vector<std::size_t>& ks) {
  if (ranked.empty() || ranked.size() != gold.size())
    throw std::invalid_argument("precision_at_k: empty or mismatched queries");
  std::vector<double> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < ranked.size(); ++q) {
      const auto& r = ranked[q];
      std::size_t upto = std::min(k, r.size());
      for (std::size_t i = 0; i < upto; ++i)
        if (r[i] == gold[q]) {
          ++hits;
          break;
        }
    }
    out.push_back(100.0 * static_cast<double>(hits) / ranked.size());
  }
  return out;
}

/// Shannon entropy (nats) of a vector shifted into the positive orthant and
/// L1-normalized: x = u + max(0, -min(u)) + eps, p = x / sum(x).
inline double vector_entropy(std::span<const double> u, double eps = 1e-6) {
  if (u.size() < 2)
    throw std::invalid_argument("vector_entropy: need dim >= 2");
  double mn = u[0];
  for (double x : u) mn = std::min(mn, x);
  double shift = std::max(0.0, -mn) + eps;
  double sum = 0.0;
  for (double x : u) sum += x + shift;
  double h = 0.0;
  for (double x : u) {
    double p = (x + shift) / sum;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

/// Spearman between per-word vector entropy and human concreteness over the
/// overlapping words. An optional mapping runs each vector through M first
/// (the mapped-to-visual-space variant).
inline double concreteness_correlation(const WordVectors& vecs,
                                       const Vocabulary& vocab,
                                       const ConcretenessTable& table,
                                       const Matrix* mapping = nullptr) {
  std::vector<double> entropies, ratings;
  for (const auto& [word, score] : table) {
    int id = vocab.id_of(word);
    if (id < 0 || !vecs.count(id)) continue;
    const auto& u = vecs.at(id);
    if (mapping && mapping->rows > 0) {
      std::vector<double> z(mapping->rows);
      for (std::size_t r = 0; r < mapping->rows; ++r)
        z[r] = dot(mapping->row(r), u);
      entropies.push_back(vector_entropy(z));
    } else {
      entropies.push_back(vector_entropy(u));
    }
    ratings.push_back(score);
  }
  if (entropies.size() < 2)
    throw std::runtime_error("concreteness_correlation: overlap < 2 words");
  return spearman(entropies, ratings);
}

/// k nearest vocabulary words to `word` by cosine over the embeddings,
/// excluding the query itself.
inline std::vector<int> top_neighbors(const WordVectors& vecs,
                                      const Vocabulary& vocab, int word,
                                      std::size_t k) {
  if (word < 0 || word >= vocab.size() || !vecs.count(word))
    throw std::invalid_argument("top_neighbors: word out of vocabulary");
  if (k == 0) return {};
  LabeledVectors candidates;
  for (const auto& [id, v] : vecs)
    if (id != word) candidates.labels.push_back(id);
  if (candidates.labels.empty()) return {};
  candidates.vecs = Matrix(candidates.labels.size(), vecs.at(word).size());
  for (std::size_t i = 0; i < candidates.labels.size(); ++i) {
    const auto& v = vecs.at(candidates.labels[i]);
    std::copy(v.begin(), v.end(), candidates.vecs.row(i).begin());
  }
  return nearest_neighbors(vecs.at(word), candidates, k);
}

}  // namespace mmgram
