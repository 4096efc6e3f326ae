#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmgram/common.hpp"
#include "mmgram/corpus.hpp"

namespace mmgram {

/// Fixed per-word visual vectors plus a uniform negative sampler over the
/// grounded words. Never mutated after construction.
struct VisualStore {
  std::vector<int> grounded;  // word ids, ascending
  std::unordered_map<int, int> row_of;
  Matrix vectors;  // |grounded| x dim
  int dim = 0;

  int size() const { return static_cast<int>(grounded.size()); }
  bool is_grounded(int word) const { return row_of.count(word) > 0; }

  std::span<const double> vector_for(int word) const {
    return vectors.row(row_of.at(word));
  }

  /// Order-independent content checksum, used to assert immutability across
  /// training runs.
  double checksum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < vectors.data.size(); ++i)
      s += vectors.data[i] * static_cast<double>((i % 97) + 1);
    return s;
  }
};

/// Element-wise mean of per-image feature vectors.
inline std::vector<double> aggregate_word_vector(
    const std::vector<std::vector<double>>& image_vectors) {
  if (image_vectors.empty())
    throw std::invalid_argument("aggregate_word_vector: empty image list");
  const std::size_t dim = image_vectors.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& v : image_vectors) {
    if (v.size() != dim)
      throw std::invalid_argument("aggregate_word_vector: dimension mismatch");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += v[d];
  }
  const double inv = 1.0 / static_cast<double>(image_vectors.size());
  for (auto& x : mean) x *= inv;
  return mean;
}

/// Keep the first target_dim components.
inline std::vector<double> truncate(std::span<const double> v,
                                    std::size_t target_dim) {
  if (target_dim > v.size())
    throw std::invalid_argument("truncate: target_dim exceeds vector size");
  return std::vector<double>(v.begin(), v.begin() + target_dim);
}

/// Draw k grounded-word row indices uniformly with replacement, excluding
/// `exclude`. k = 0 yields an empty draw (visual loss 0).
inline std::vector<int> sample_negative_rows(const VisualStore& store,
                                             int exclude, int k, Rng& rng) {
  if (k < 0) throw std::invalid_argument("sample_negatives: k < 0");
  std::vector<int> rows;
  if (k == 0) return rows;
  const int n = store.size();
  auto it = store.row_of.find(exclude);
  const int excl_row = it == store.row_of.end() ? -1 : it->second;
  const int choices = excl_row >= 0 ? n - 1 : n;
  if (choices < 1)
    throw std::runtime_error("sample_negatives: no candidate besides exclude");
  std::uniform_int_distribution<int> unif(0, choices - 1);
  rows.reserve(k);
  for (int i = 0; i < k; ++i) {
    int r = unif(rng);
    if (excl_row >= 0 && r >= excl_row) ++r;
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<std::vector<double>> sample_negatives(
    const VisualStore& store, int exclude, int k, Rng& rng) {
  std::vector<std::vector<double>> out;
  for (int r : sample_negative_rows(store, exclude, k, rng)) {
    auto row = store.vectors.row(r);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

/// Parse the "N d_v" visual vector format. Repeated word keys are grouped
/// and averaged (per-image input variant).
inline std::map<std::string, std::vector<double>> load_visual_vectors(
    std::istream& in) {
  std::size_t n = 0, dim = 0;
  if (!(in >> n >> dim) || dim == 0)
    throw std::runtime_error("visual file: bad header");
  std::map<std::string, std::vector<std::vector<double>>> groups;
  std::string word;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> word)) throw std::runtime_error("visual file: truncated");
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d)
      if (!(in >> v[d])) throw std::runtime_error("visual file: truncated row");
    groups[word].push_back(std::move(v));
  }
  std::map<std::string, std::vector<double>> out;
  for (auto& [w, vs] : groups) out.emplace(w, aggregate_word_vector(vs));
  return out;
}

/// Build the store against a vocabulary, truncating to target_dim when given
/// (0 keeps the native dimensionality). Words missing from the vocabulary are
/// skipped and reported through `skipped`.
inline VisualStore build_visual_store(
    const std::map<std::string, std::vector<double>>& word_vectors,
    const Vocabulary& vocab, std::size_t target_dim = 0,
    std::vector<std::string>* skipped = nullptr) {
  std::map<int, const std::vector<double>*> rows;  // sorted by word id
  std::size_t dim = 0;
  for (const auto& [w, v] : word_vectors) {
    if (dim == 0) dim = target_dim == 0 ? v.size() : target_dim;
    int id = vocab.id_of(w);
    if (id < 0) {
      if (skipped) skipped->push_back(w);
      continue;
    }
    rows.emplace(id, &v);
  }
  VisualStore store;
  store.dim = static_cast<int>(dim);
  store.vectors = Matrix(rows.size(), dim);
  int r = 0;
  for (auto& [id, v] : rows) {
    auto trunc = truncate(*v, dim);
    for (std::size_t d = 0; d < dim; ++d) store.vectors(r, d) = trunc[d];
    store.grounded.push_back(id);
    store.row_of.emplace(id, r);
    ++r;
  }
  return store;
}

inline void write_visual_store(const VisualStore& store,
                               const Vocabulary& vocab, std::ostream& out) {
  out << store.size() << ' ' << store.dim << '\n';
  for (int r = 0; r < store.size(); ++r) {
    out << vocab.words[store.grounded[r]];
    for (int d = 0; d < store.dim; ++d) out << ' ' << store.vectors(r, d);
    out << '\n';
  }
}

}  // namespace mmgram
