#pragma once

#include <cstdint>
#include <cstring>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "mmgram/common.hpp"
#include "mmgram/corpus.hpp"

namespace mmgram {

/// Word2vec-compatible embedding file: ascii header "V dim\n", then one
/// record per word. Binary records hold IEEE-754 little-endian float32.
struct EmbeddingFile {
  std::vector<std::string> words;
  Matrix vectors;
};

inline void write_embeddings(const std::vector<std::string>& words,
                             const Matrix& vectors, std::ostream& out,
                             bool binary) {
  out << words.size() << ' ' << vectors.cols << '\n';
  for (std::size_t i = 0; i < words.size(); ++i) {
    out << words[i];
    if (binary) {
      out << ' ';
      for (std::size_t d = 0; d < vectors.cols; ++d) {
        float f = static_cast<float>(vectors(i, d));
        char buf[sizeof(float)];
        std::memcpy(buf, &f, sizeof(float));
        out.write(buf, sizeof(float));
      }
      out << '\n';
    } else {
      out << std::setprecision(8);
      for (std::size_t d = 0; d < vectors.cols; ++d) out << ' ' << vectors(i, d);
      out << '\n';
    }
  }
}

inline EmbeddingFile read_embeddings(std::istream& in, bool binary) {
  std::size_t v = 0, dim = 0;
  if (!(in >> v >> dim) || dim == 0)
    throw std::runtime_error("embedding file: bad header");
  in.get();  // newline after header
  EmbeddingFile f;
  f.words.reserve(v);
  f.vectors = Matrix(v, dim);
  for (std::size_t i = 0; i < v; ++i) {
    std::string word;
    if (binary) {
      char ch;
      while (in.get(ch) && ch != ' ') word.push_back(ch);
      if (word.empty()) throw std::runtime_error("embedding file: truncated");
      for (std::size_t d = 0; d < dim; ++d) {
        char buf[sizeof(float)];
        if (!in.read(buf, sizeof(float)))
          throw std::runtime_error("embedding file: truncated record");
        float x;
        std::memcpy(&x, buf, sizeof(float));
        f.vectors(i, d) = static_cast<double>(x);
      }
      in.get();  // trailing newline
    } else {
      if (!(in >> word)) throw std::runtime_error("embedding file: truncated");
      for (std::size_t d = 0; d < dim; ++d)
        if (!(in >> f.vectors(i, d)))
          throw std::runtime_error("embedding file: truncated record");
    }
    f.words.push_back(std::move(word));
  }
  return f;
}

/// Mapping matrix (d_v x dim) as plain text: header "rows cols", one row per
/// line.
inline void write_matrix(const Matrix& m, std::ostream& out) {
  out << m.rows << ' ' << m.cols << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j)
      out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

inline Matrix read_matrix(std::istream& in) {
  std::size_t r = 0, c = 0;
  if (!(in >> r >> c) || c == 0)
    throw std::runtime_error("matrix file: bad header");
  Matrix m(r, c);
  for (auto& x : m.data)
    if (!(in >> x)) throw std::runtime_error("matrix file: truncated");
  return m;
}

/// Embedding-file contents as a word-id -> vector map against a vocabulary
/// built from the file's own word order (ids follow file order).
inline std::pair<Vocabulary, std::map<int, std::vector<double>>>
embeddings_as_vocab(const EmbeddingFile& f) {
  Vocabulary vocab;
  std::map<int, std::vector<double>> vecs;
  for (std::size_t i = 0; i < f.words.size(); ++i) {
    vocab.index.emplace(f.words[i], static_cast<int>(i));
    vocab.words.push_back(f.words[i]);
    vocab.counts.push_back(1);
    auto row = f.vectors.row(i);
    vecs[static_cast<int>(i)] = std::vector<double>(row.begin(), row.end());
  }
  vocab.total_tokens = static_cast<std::int64_t>(f.words.size());
  return {std::move(vocab), std::move(vecs)};
}

}  // namespace mmgram
