#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "mmgram/common.hpp"
#include "mmgram/trainer.hpp"
#include "mmgram/visual.hpp"

namespace mmgram {

/// Held-out partition of the grounded words for zero-shot evaluation.
struct ZeroShotSplit {
  std::vector<int> train_words;
  std::vector<int> test_words;
  double fraction = 0.25;
};

/// Uniform random split; exclusion-list words are forced into train.
inline ZeroShotSplit make_split(const std::vector<int>& grounded,
                                double fraction,
                                const std::unordered_set<int>& exclusion,
                                Rng& rng) {
  if (grounded.empty()) throw std::invalid_argument("make_split: empty set");
  if (fraction <= 0.0 || fraction >= 1.0)
    throw std::invalid_argument("make_split: fraction must be in (0,1)");
  std::vector<int> shuffled = grounded;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::size_t want = static_cast<std::size_t>(fraction * grounded.size());

  ZeroShotSplit split;
  split.fraction = fraction;
  for (int w : shuffled) {
    if (split.test_words.size() < want && exclusion.count(w) == 0)
      split.test_words.push_back(w);
    else
      split.train_words.push_back(w);
  }
  std::sort(split.train_words.begin(), split.train_words.end());
  std::sort(split.test_words.begin(), split.test_words.end());
  return split;
}

/// Ridge-regression linear map with intercept, fit on centered data.
struct RidgeMap {
  Eigen::MatrixXd W;   // d_out x d_in
  Eigen::VectorXd b;   // d_out
  double lambda = 0.0;

  std::vector<double> predict(std::span<const double> x) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::VectorXd y = W * xv + b;
    return std::vector<double>(y.data(), y.data() + y.size());
  }
};

/// Solve min_W |X W - Y|^2 + lambda |W|^2 via the normal equations on
/// centered data; the intercept absorbs the means.
inline RidgeMap fit_ridge(const Matrix& X, const Matrix& Y, double lambda) {
  if (X.rows < 1 || X.rows != Y.rows)
    throw std::invalid_argument("fit_ridge: need n >= 1 matching rows");
  const Eigen::Index n = static_cast<Eigen::Index>(X.rows);
  const Eigen::Index din = static_cast<Eigen::Index>(X.cols);
  const Eigen::Index dout = static_cast<Eigen::Index>(Y.cols);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      Xm(X.data.data(), n, din), Ym(Y.data.data(), n, dout);
  Eigen::RowVectorXd xmean = Xm.colwise().mean();
  Eigen::RowVectorXd ymean = Ym.colwise().mean();
  Eigen::MatrixXd Xc = Xm.rowwise() - xmean;
  Eigen::MatrixXd Yc = Ym.rowwise() - ymean;
  Eigen::MatrixXd A = Xc.transpose() * Xc +
                      lambda * Eigen::MatrixXd::Identity(din, din);
  Eigen::MatrixXd Wt = A.ldlt().solve(Xc.transpose() * Yc);  // d_in x d_out
  RidgeMap map;
  map.lambda = lambda;
  map.W = Wt.transpose();
  map.b = ymean.transpose() - map.W * xmean.transpose();
  return map;
}

/// Labeled candidate pool for cosine ranking.
struct LabeledVectors {
  std::vector<int> labels;
  Matrix vecs;
};

/// Top-k candidate labels by descending cosine to the query; ties broken by
/// candidate order.
inline std::vector<int> nearest_neighbors(std::span<const double> query,
                                          const LabeledVectors& candidates,
                                          std::size_t k) {
  if (candidates.labels.empty())
    throw std::invalid_argument("nearest_neighbors: empty candidate set");
  if (norm(query) < 1e-12)
    throw std::invalid_argument("nearest_neighbors: zero-norm query");
  const std::size_t n = candidates.labels.size();
  std::vector<std::pair<double, std::size_t>> scored(n);
  for (std::size_t i = 0; i < n; ++i)
    scored[i] = {cosine(query, candidates.vecs.row(i)), i};
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> out;
  out.reserve(std::min(k, n));
  for (std::size_t i = 0; i < std::min(k, n); ++i)
    out.push_back(candidates.labels[scored[i].second]);
  return out;
}

using WordVectors = std::map<int, std::vector<double>>;

namespace detail {

inline Matrix stack(const WordVectors& vecs, const std::vector<int>& words) {
  if (words.empty()) throw std::invalid_argument("stack: no words");
  const std::size_t dim = vecs.at(words.front()).size();
  Matrix out(words.size(), dim);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& v = vecs.at(words[i]);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

inline double fold_p_at_1(const RidgeMap& map, const WordVectors& inputs,
                          const std::vector<int>& fold,
                          const LabeledVectors& candidates) {
  int hits = 0;
  for (int w : fold) {
    auto pred = map.predict(inputs.at(w));
    auto top = nearest_neighbors(pred, candidates, 1);
    if (!top.empty() && top.front() == w) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(fold.size());
}

}  // namespace detail

/// Five-fold rotation over the test words: per rotation one fold tunes
/// lambda by P@1, three folds fit the map, the remaining fold receives
/// predictions; every test word is predicted exactly once. extra_train
/// pairs (if any) join every fit.
inline WordVectors cv_protocol(const WordVectors& inputs,
                               const WordVectors& targets,
                               const std::vector<int>& test_words,
                               const std::vector<double>& lambda_grid,
                               const LabeledVectors& tune_candidates,
                               const std::vector<int>& extra_train = {}) {
  if (test_words.size() < 5)
    throw std::invalid_argument("cv_protocol: need at least 5 test words");
  if (lambda_grid.empty())
    throw std::invalid_argument("cv_protocol: empty lambda grid");
  constexpr int kFolds = 5;
  std::vector<std::vector<int>> folds(kFolds);
  for (std::size_t i = 0; i < test_words.size(); ++i)
    folds[i % kFolds].push_back(test_words[i]);

  auto fit_on = [&](const std::vector<int>& words, double lambda) {
    std::vector<int> all = words;
    all.insert(all.end(), extra_train.begin(), extra_train.end());
    return fit_ridge(detail::stack(inputs, all), detail::stack(targets, all),
                     lambda);
  };

  WordVectors predictions;
  for (int pred_fold = 0; pred_fold < kFolds; ++pred_fold) {
    const int tune_fold = (pred_fold + 1) % kFolds;
    std::vector<int> fit_words;
    for (int f = 0; f < kFolds; ++f)
      if (f != pred_fold && f != tune_fold)
        fit_words.insert(fit_words.end(), folds[f].begin(), folds[f].end());

    double best_lambda = lambda_grid.front();
    double best_score = -1.0;
    for (double lambda : lambda_grid) {
      RidgeMap map = fit_on(fit_words, lambda);
      double score =
          detail::fold_p_at_1(map, inputs, folds[tune_fold], tune_candidates);
      if (score > best_score) {
        best_score = score;
        best_lambda = lambda;
      }
    }
    RidgeMap map = fit_on(fit_words, best_lambda);
    for (int w : folds[pred_fold]) predictions[w] = map.predict(inputs.at(w));
  }
  return predictions;
}

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  return grid;
}

/// Zero-shot image labeling: map each test visual vector into word space via
/// the CV'd ridge (all strategies), then rank the whole candidate word set by
/// cosine. For skipgram the train-split pairs augment the ridge data.
inline std::map<int, std::vector<int>> zero_shot_label(
    const WordVectors& word_vecs, const VisualStore& store,
    const ZeroShotSplit& split, Variant strategy,
    const std::vector<double>& lambda_grid = default_lambda_grid(),
    std::size_t top_k = 0) {
  WordVectors visual_in;
  for (int w : split.test_words) {
    auto v = store.vector_for(w);
    visual_in[w] = std::vector<double>(v.begin(), v.end());
  }
  for (int w : split.train_words) {
    auto v = store.vector_for(w);
    visual_in[w] = std::vector<double>(v.begin(), v.end());
  }
  LabeledVectors candidates;  // search over the whole grounded word set
  candidates.labels = store.grounded;
  candidates.vecs = detail::stack(word_vecs, store.grounded);
  if (top_k == 0) top_k = candidates.labels.size();

  std::vector<int> extra =
      strategy == Variant::skipgram ? split.train_words : std::vector<int>{};
  WordVectors preds = cv_protocol(visual_in, word_vecs, split.test_words,
                                  lambda_grid, candidates, extra);
  std::map<int, std::vector<int>> ranked;
  for (const auto& [w, p] : preds)
    ranked[w] = nearest_neighbors(p, candidates, top_k);
  return ranked;
}

/// Zero-shot image retrieval: query visual space with a word-derived vector
/// (ridge for skipgram, the embedding itself for mmA, M u for mmB) and rank
/// all grounded visual vectors.
inline std::map<int, std::vector<int>> zero_shot_retrieve(
    const WordVectors& word_vecs, const Matrix* mapping,  // M, mmB only
    const VisualStore& store, const ZeroShotSplit& split, Variant strategy,
    const std::vector<double>& lambda_grid = default_lambda_grid(),
    std::size_t top_k = 0) {
  LabeledVectors images;
  images.labels = store.grounded;
  images.vecs = store.vectors;
  if (top_k == 0) top_k = images.labels.size();

  WordVectors queries;
  if (strategy == Variant::skipgram) {
    WordVectors visual_t;
    for (int w : store.grounded) {
      auto v = store.vector_for(w);
      visual_t[w] = std::vector<double>(v.begin(), v.end());
    }
    queries = cv_protocol(word_vecs, visual_t, split.test_words, lambda_grid,
                          images, split.train_words);
  } else if (strategy == Variant::mmA) {
    for (int w : split.test_words) {
      const auto& u = word_vecs.at(w);
      if (static_cast<int>(u.size()) != store.dim)
        throw std::invalid_argument(
            "mmA retrieval requires embedding dim == visual dim");
      queries[w] = u;
    }
  } else {
    if (mapping == nullptr || mapping->rows == 0)
      throw std::invalid_argument("mmB retrieval requires the mapping matrix");
    for (int w : split.test_words) {
      const auto& u = word_vecs.at(w);
      std::vector<double> z(mapping->rows);
      for (std::size_t r = 0; r < mapping->rows; ++r)
        z[r] = dot(mapping->row(r), u);
      queries[w] = std::move(z);
    }
  }

  std::map<int, std::vector<int>> ranked;
  for (const auto& [w, q] : queries)
    ranked[w] = nearest_neighbors(q, images, top_k);
  return ranked;
}

}  // namespace mmgram
