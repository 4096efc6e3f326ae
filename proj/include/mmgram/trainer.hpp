#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "mmgram/common.hpp"
#include "mmgram/corpus.hpp"
#include "mmgram/hsoftmax.hpp"
#include "mmgram/visual.hpp"

namespace mmgram {

enum class Variant { skipgram, mmA, mmB };

struct TrainingConfig {
  int dim = 300;
  int window = 5;
  double sample = 1e-3;  // subsample threshold t; <= 0 disables
  int epochs = 1;
  double alpha0 = 0.025;
  Variant variant = Variant::skipgram;
  double margin = 0.5;   // gamma
  int negatives = 0;     // k visual negatives per step
  double l2 = 0.0;       // lambda, mmB only
  int threads = 1;
  std::uint64_t seed = 1;
  std::int64_t min_count = 5;
  bool freeze_mapping = false;    // pin M (testing / identity reduction)
  bool identity_mapping = false;  // start M at I (requires d_v == dim)
};

struct EmbeddingModel {
  Matrix U;   // V x dim target embeddings
  Matrix Un;  // (V-1) x dim inner-node vectors
  Matrix M;   // d_v x dim cross-modal map, mmB only (rows = 0 otherwise)
};

inline void validate_config(const TrainingConfig& cfg,
                            const VisualStore* store) {
  if (cfg.dim <= 0) throw std::invalid_argument("dim must be > 0");
  if (cfg.window <= 0) throw std::invalid_argument("window must be > 0");
  if (cfg.margin < 0.0) throw std::invalid_argument("margin must be >= 0");
  if (cfg.negatives < 0) throw std::invalid_argument("negatives must be >= 0");
  if (cfg.l2 < 0.0) throw std::invalid_argument("l2 must be >= 0");
  if (cfg.epochs <= 0) throw std::invalid_argument("epochs must be > 0");
  if (cfg.threads <= 0) throw std::invalid_argument("threads must be > 0");
  if (cfg.variant != Variant::skipgram) {
    if (store == nullptr || store->size() == 0)
      throw std::invalid_argument("multimodal variant requires visual vectors");
    if (cfg.variant == Variant::mmA && cfg.dim != store->dim)
      throw std::invalid_argument(
          "mmA requires embedding dim == visual dim (got " +
          std::to_string(cfg.dim) + " vs " + std::to_string(store->dim) + ")");
  }
}

inline EmbeddingModel init_model(const TrainingConfig& cfg, int vocab_size,
                                 int visual_dim, Rng& rng) {
  EmbeddingModel m;
  m.U = Matrix(vocab_size, cfg.dim);
  m.Un = Matrix(vocab_size > 1 ? vocab_size - 1 : 0, cfg.dim);
  std::uniform_real_distribution<double> u_init(-0.5 / cfg.dim, 0.5 / cfg.dim);
  for (auto& x : m.U.data) x = u_init(rng);
  if (cfg.variant == Variant::mmB) {
    m.M = Matrix(visual_dim, cfg.dim);
    if (cfg.identity_mapping) {
      if (visual_dim != cfg.dim)
        throw std::invalid_argument(
            "identity_mapping requires visual dim == embedding dim");
      for (int r = 0; r < visual_dim; ++r) m.M(r, r) = 1.0;
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
      std::uniform_real_distribution<double> m_init(-bound, bound);
      for (auto& x : m.M.data) x = m_init(rng);
    }
  }
  return m;
}

/// One skip-gram ascent step on a context window: for every (target, context)
/// pair, walk the context word's Huffman path, updating the touched inner
/// nodes immediately and the target vector once per pair.
inline void ling_step(EmbeddingModel& model, const HuffmanTree& tree,
                      const ContextWindow& window, double alpha) {
  auto u = model.U.row(window.target);
  thread_local std::vector<double> acc;
  acc.assign(u.size(), 0.0);
  for (int ctx : window.contexts) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const auto& code = tree.codes[ctx];
    const auto& path = tree.paths[ctx];
    for (std::size_t i = 0; i < code.size(); ++i) {
      auto un = model.Un.row(path[i]);
      double x = dot(un, u);
      double g = alpha * ((1.0 - code[i]) - sigmoid(x));
      axpy(g, un, acc);
      axpy(g, u, un);
    }
    axpy(1.0, acc, u);
  }
}

/// Max-margin visual loss: sum over negatives of
/// max(0, gamma - cos(z, v_pos) + cos(z, v_neg)).
inline double visual_loss_A(std::span<const double> z,
                            std::span<const double> v_pos,
                            const std::vector<std::vector<double>>& negs,
                            double gamma) {
  double loss = 0.0;
  double cp = cosine(z, v_pos);
  for (const auto& vn : negs) {
    double h = gamma - cp + cosine(z, vn);
    if (h > 0.0) loss += h;
  }
  return loss;
}

namespace detail {

constexpr double kZeroNormEps = 1e-12;

// d cos(z, v) / d z = v/(|z||v|) - cos(z,v) * z/|z|^2, accumulated scaled by
// `scale` into grad. No-op when either norm is negligible (zero-vector rule).
inline void add_cosine_grad(std::span<const double> z, std::span<const double> v,
                            double scale, std::span<double> grad) {
  double nz = norm(z), nv = norm(v);
  if (nz < kZeroNormEps || nv < kZeroNormEps) return;
  double c = dot(z, v) / (nz * nv);
  double a = scale / (nz * nv);
  double b = -scale * c / (nz * nz);
  for (std::size_t d = 0; d < z.size(); ++d) grad[d] += a * v[d] + b * z[d];
}

// Hinge loss over sampled negatives and its gradient wrt z, accumulated into
// grad (caller zeroes it). Inactive hinges contribute exactly zero.
inline double hinge_loss_grad(std::span<const double> z,
                              std::span<const double> v_pos,
                              const VisualStore& store,
                              const std::vector<int>& neg_rows, double gamma,
                              std::span<double> grad) {
  if (norm(z) < kZeroNormEps) return 0.0;  // zero-vector rule: skip the term
  double cp = cosine(z, v_pos);
  double loss = 0.0;
  int active = 0;
  for (int r : neg_rows) {
    auto vn = store.vectors.row(r);
    double h = gamma - cp + cosine(z, vn);
    if (h > 0.0) {
      loss += h;
      ++active;
      add_cosine_grad(z, vn, 1.0, grad);  // descent direction on the cost
    }
  }
  if (active > 0) add_cosine_grad(z, v_pos, -static_cast<double>(active), grad);
  return loss;
}

}  // namespace detail

/// Variant A: descend the hinge cost wrt the word's embedding directly
/// (visual vectors stay fixed).
inline void visual_step_A(EmbeddingModel& model, const VisualStore& store,
                          int word, double alpha, double gamma, int k,
                          Rng& rng) {
  std::vector<int> negs = sample_negative_rows(store, word, k, rng);
  auto u = model.U.row(word);
  thread_local std::vector<double> grad;
  grad.assign(u.size(), 0.0);
  detail::hinge_loss_grad(u, store.vector_for(word), store, negs, gamma, grad);
  axpy(-alpha, grad, u);
}

/// Variant B: the hinge acts on z = M u; gradients flow to both M and u, and
/// M takes an L2 shrink once per visual step.
inline void visual_step_B(EmbeddingModel& model, const VisualStore& store,
                          int word, double alpha, double gamma, int k,
                          double lambda, Rng& rng, bool freeze_mapping = false) {
  std::vector<int> negs = sample_negative_rows(store, word, k, rng);
  auto u = model.U.row(word);
  const std::size_t dv = model.M.rows;
  const std::size_t dim = model.M.cols;
  thread_local std::vector<double> z, grad_z, grad_u;
  z.assign(dv, 0.0);
  for (std::size_t r = 0; r < dv; ++r) z[r] = dot(model.M.row(r), u);
  grad_z.assign(dv, 0.0);
  detail::hinge_loss_grad(z, store.vector_for(word), store, negs, gamma,
                          grad_z);
  // chain rule: grad_u = M^T grad_z, grad_M = grad_z u^T
  grad_u.assign(dim, 0.0);
  for (std::size_t r = 0; r < dv; ++r)
    if (grad_z[r] != 0.0) axpy(grad_z[r], model.M.row(r), grad_u);
  if (!freeze_mapping) {
    for (std::size_t r = 0; r < dv; ++r)
      if (grad_z[r] != 0.0) axpy(-alpha * grad_z[r], u, model.M.row(r));
    if (lambda > 0.0)
      for (auto& x : model.M.data) x -= alpha * lambda * x;
  }
  axpy(-alpha, grad_u, u);
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b) {
  // splitmix64 over (seed, epoch, thread)
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (a * 1315423911ULL + b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e9b5ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace detail

/// Full training loop over an encoded corpus. Workers own disjoint contiguous
/// shards and update the shared parameters without locking; exact-reproduction
/// tests run with threads = 1.
inline EmbeddingModel train(const TrainingConfig& cfg, const Vocabulary& vocab,
                            const std::vector<int>& corpus_ids,
                            const VisualStore* store) {
  validate_config(cfg, store);
  const HuffmanTree tree = build_huffman(vocab.counts);
  Rng init_rng(cfg.seed);
  EmbeddingModel model =
      init_model(cfg, vocab.size(), store ? store->dim : 0, init_rng);

  const std::int64_t total =
      static_cast<std::int64_t>(cfg.epochs) *
      static_cast<std::int64_t>(corpus_ids.size());
  if (total == 0) return model;
  std::atomic<std::int64_t> processed{0};
  const double alpha_floor = 1e-4;

  auto worker = [&](int tid, int epoch) {
    const std::size_t n = corpus_ids.size();
    const std::size_t lo = n * tid / cfg.threads;
    const std::size_t hi = n * (tid + 1) / cfg.threads;
    if (lo >= hi) return;
    Rng rng(detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), tid));

    // Subsample the shard up front, remembering each survivor's raw offset so
    // the learning-rate schedule still advances over discarded tokens.
    std::vector<int> kept;
    std::vector<std::size_t> raw_pos;
    kept.reserve(hi - lo);
    raw_pos.reserve(hi - lo);
    const bool subsampling =
        cfg.sample > 0.0 &&
        cfg.sample != std::numeric_limits<double>::infinity();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = lo; i < hi; ++i) {
      int id = corpus_ids[i];
      if (subsampling) {
        double p = keep_probability(vocab.frequency(id), cfg.sample);
        if (p < 1.0 && unif(rng) >= p) continue;
      }
      kept.push_back(id);
      raw_pos.push_back(i - lo);
    }

    ContextWindow cw;
    cw.window = cfg.window;
    const int m = static_cast<int>(kept.size());
    std::size_t reported = 0;
    for (int i = 0; i < m; ++i) {
      // advance the shared token counter by the raw tokens consumed so far
      std::size_t upto = raw_pos[i] + 1;
      std::int64_t done = processed.fetch_add(
          static_cast<std::int64_t>(upto - reported)) +
          static_cast<std::int64_t>(upto - reported);
      reported = upto;
      double frac = 1.0 - static_cast<double>(done) / static_cast<double>(total);
      double alpha = cfg.alpha0 * std::max(alpha_floor, frac);

      cw.target = kept[i];
      cw.contexts.clear();
      int wlo = std::max(0, i - cfg.window);
      int whi = std::min(m - 1, i + cfg.window);
      for (int j = wlo; j <= whi; ++j)
        if (j != i) cw.contexts.push_back(kept[j]);
      ling_step(model, tree, cw, alpha);

      if (cfg.variant != Variant::skipgram && store->is_grounded(cw.target)) {
        if (cfg.variant == Variant::mmA)
          visual_step_A(model, *store, cw.target, alpha, cfg.margin,
                        cfg.negatives, rng);
        else
          visual_step_B(model, *store, cw.target, alpha, cfg.margin,
                        cfg.negatives, cfg.l2, rng, cfg.freeze_mapping);
      }
    }
    processed.fetch_add(static_cast<std::int64_t>(hi - lo - reported));
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.threads == 1) {
      worker(0, epoch);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(cfg.threads);
      for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker, t, epoch);
      for (auto& th : pool) th.join();
    }
  }
  return model;
}

}  // namespace mmgram
