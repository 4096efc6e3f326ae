#include <catch2/catch_amalgamated.hpp>
#include <random>
#include <sstream>

#include "helpers/oracles.hpp"
#include "helpers/synthetic.hpp"
#include "mmgram/eval.hpp"

using namespace mmgram;

TEST_CASE("spearman on identical and reversed orderings") {
  std::vector<double> xs{1, 2, 3, 4, 5};
  std::vector<double> ys{10, 20, 30, 40, 50};
  CHECK(spearman(xs, ys) == Catch::Approx(1.0));
  std::vector<double> rev{50, 40, 30, 20, 10};
  CHECK(spearman(xs, rev) == Catch::Approx(-1.0));
}

TEST_CASE("spearman handles ties via average ranks") {
  std::vector<double> xs{1, 2, 2, 4};
  std::vector<double> ys{1, 3, 2, 4};
  CHECK(spearman(xs, ys) ==
        Catch::Approx(oracle::spearman_bruteforce(xs, ys)).margin(1e-12));
}

TEST_CASE("spearman matches the brute-force oracle on random data") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> val(0, 9);  // coarse values force ties
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(20), ys(20);
    for (auto& x : xs) x = val(rng);
    for (auto& y : ys) y = val(rng);
    bool degen = false;
    try {
      double got = spearman(xs, ys);
      CHECK(got == Catch::Approx(oracle::spearman_bruteforce(xs, ys)).margin(1e-10));
    } catch (const std::invalid_argument&) {
      degen = true;  // zero rank variance; oracle would divide by zero too
    }
    (void)degen;
  }
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(6);
  std::vector<double> xs(30), ys(30);
  std::uniform_real_distribution<double> unif(-5, 5);
  for (auto& x : xs) x = unif(rng);
  for (auto& y : ys) y = unif(rng);
  double base = spearman(xs, ys);
  std::vector<double> xs2 = xs, ys2 = ys;
  for (auto& x : xs2) x = std::exp(0.5 * x);
  for (auto& y : ys2) y = y * 3.0 + 7.0;
  CHECK(spearman(xs2, ys2) == Catch::Approx(base).margin(1e-12));
}

TEST_CASE("spearman rejects degenerate input") {
  CHECK_THROWS(spearman({1.0}, {2.0}));
  CHECK_THROWS(spearman({1, 2}, {1, 2, 3}));
  CHECK_THROWS(spearman({3, 3, 3}, {1, 2, 3}));  // zero rank variance
}

namespace {

struct EvalFixture {
  Vocabulary vocab;
  WordVectors vecs;
};

EvalFixture make_vectors(int n, int dim, std::uint64_t seed) {
  EvalFixture f;
  std::mt19937_64 rng(seed);
  std::vector<std::string> tokens;
  for (int i = 0; i < n; ++i) tokens.push_back("w" + std::to_string(i));
  f.vocab = build_vocabulary(tokens, 1);
  for (int i = 0; i < n; ++i) f.vecs[i] = synth::random_vector(dim, rng);
  return f;
}

}  // namespace

TEST_CASE("eval_similarity gets rho=1 when golds equal cosines") {
  EvalFixture f = make_vectors(10, 6, 2);
  BenchmarkSet bench;
  bench.name = "self";
  for (int i = 0; i < 9; ++i) {
    std::string a = f.vocab.words[i], b = f.vocab.words[i + 1];
    double gold = cosine(f.vecs[f.vocab.id_of(a)], f.vecs[f.vocab.id_of(b)]);
    bench.pairs.push_back({a, b, gold});
  }
  SimilarityResult r = eval_similarity(f.vecs, f.vocab, bench);
  CHECK(r.rho == Catch::Approx(1.0));
  CHECK(r.coverage == Catch::Approx(1.0));
}

TEST_CASE("eval_similarity drops OOV pairs and reports coverage") {
  EvalFixture f = make_vectors(6, 4, 3);
  BenchmarkSet bench;
  bench.pairs.push_back({f.vocab.words[0], f.vocab.words[1], 1.0});
  bench.pairs.push_back({f.vocab.words[1], "missing", 2.0});
  bench.pairs.push_back({f.vocab.words[2], f.vocab.words[3], 3.0});
  bench.pairs.push_back({f.vocab.words[4], f.vocab.words[5], 2.5});
  SimilarityResult r = eval_similarity(f.vecs, f.vocab, bench);
  CHECK(r.used == 3);
  CHECK(r.dropped == 1);
  CHECK(r.coverage == Catch::Approx(0.75));
}

TEST_CASE("grounded-only filter halves coverage when half the pairs qualify") {
  EvalFixture f = make_vectors(8, 4, 4);
  std::map<std::string, std::vector<double>> raw;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 4; ++i)
    raw.emplace(f.vocab.words[i], synth::random_vector(4, rng));
  VisualStore store = build_visual_store(raw, f.vocab);
  BenchmarkSet bench;
  bench.pairs.push_back({f.vocab.words[0], f.vocab.words[1], 1.0});
  bench.pairs.push_back({f.vocab.words[2], f.vocab.words[3], 2.0});
  bench.pairs.push_back({f.vocab.words[4], f.vocab.words[5], 3.0});
  bench.pairs.push_back({f.vocab.words[6], f.vocab.words[7], 2.0});
  SimilarityResult r = eval_similarity(f.vecs, f.vocab, bench, &store);
  CHECK(r.coverage == Catch::Approx(0.5));
}

TEST_CASE("precision_at_k on always-first gold is 100 at every k") {
  std::vector<std::vector<int>> ranked{{7, 1, 2}, {9, 3, 4}};
  std::vector<int> gold{7, 9};
  auto pk = precision_at_k(ranked, gold, {1, 2, 10});
  for (double p : pk) CHECK(p == 100.0);
}

TEST_CASE("precision_at_k is monotone in k and bounded") {
  std::mt19937_64 rng(12);
  const int V = 30;
  std::vector<std::vector<int>> ranked;
  std::vector<int> gold;
  for (int q = 0; q < 50; ++q) {
    std::vector<int> perm(V);
    for (int i = 0; i < V; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    ranked.push_back(perm);
    gold.push_back(static_cast<int>(rng() % V));
  }
  auto pk = precision_at_k(ranked, gold, {1, 2, 5, 10, 20, 30});
  for (std::size_t i = 1; i < pk.size(); ++i) CHECK(pk[i] >= pk[i - 1]);
  for (double p : pk) {
    CHECK(p >= 0.0);
    CHECK(p <= 100.0);
  }
  CHECK(pk.back() == 100.0);  // gold always somewhere in a full permutation
}

TEST_CASE("random rankings give P@1 near 100/V") {
  std::mt19937_64 rng(13);
  const int V = 20, Q = 4000;
  std::vector<std::vector<int>> ranked;
  std::vector<int> gold;
  for (int q = 0; q < Q; ++q) {
    std::vector<int> perm(V);
    for (int i = 0; i < V; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    ranked.push_back(perm);
    gold.push_back(static_cast<int>(rng() % V));
  }
  double p1 = precision_at_k(ranked, gold, {1})[0];
  double expect = 100.0 / V;
  double sigma = 100.0 * std::sqrt((1.0 / V) * (1.0 - 1.0 / V) / Q);
  CHECK(std::fabs(p1 - expect) <= 4.0 * sigma);
}

TEST_CASE("precision_at_k matches the brute-force oracle") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<int>> ranked;
    std::vector<int> gold;
    for (int q = 0; q < 10; ++q) {
      std::vector<int> perm(8);
      for (int i = 0; i < 8; ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      ranked.push_back(perm);
      gold.push_back(static_cast<int>(rng() % 8));
    }
    std::vector<std::size_t> ks{1, 2, 3, 8};
    CHECK(precision_at_k(ranked, gold, ks) ==
          oracle::precision_at_k_bruteforce(ranked, gold, ks));
  }
}

TEST_CASE("vector_entropy of a uniform positive vector is log d") {
  std::vector<double> u{2, 2, 2, 2};
  CHECK(vector_entropy(u) == Catch::Approx(std::log(4.0)).margin(1e-4));
}

TEST_CASE("vector_entropy of a near-one-hot vector is near zero") {
  std::vector<double> u{1e6, 1e-9, 1e-9, 1e-9};
  CHECK(vector_entropy(u) < 0.01);
}

TEST_CASE("vector_entropy matches a direct recomputation oracle") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    auto u = synth::random_vector(10, rng);
    CHECK(vector_entropy(u) ==
          Catch::Approx(oracle::entropy_bruteforce(u)).margin(1e-12));
  }
}

TEST_CASE("vector_entropy is scale-invariant on nonnegative vectors") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    auto u = synth::random_vector(8, rng, 0.1, 2.0);
    double base = vector_entropy(u);
    for (double c : {2.0, 10.0, 0.5}) {
      std::vector<double> v = u;
      for (auto& x : v) x *= c;
      // the eps shift breaks exact invariance; it is tiny relative to entries
      CHECK(vector_entropy(v) == Catch::Approx(base).margin(1e-4));
    }
  }
}

TEST_CASE("concreteness_correlation recovers a planted inverse relation") {
  EvalFixture f = make_vectors(12, 6, 17);
  ConcretenessTable table;
  // rating = -entropy makes the correlation exactly -1
  for (int i = 0; i < 12; ++i)
    table[f.vocab.words[i]] = -vector_entropy(f.vecs[i]);
  CHECK(concreteness_correlation(f.vecs, f.vocab, table) ==
        Catch::Approx(-1.0));
}

TEST_CASE("concreteness_correlation with identity map equals unmapped") {
  EvalFixture f = make_vectors(10, 5, 18);
  ConcretenessTable table;
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 10; ++i) table[f.vocab.words[i]] = unif(rng);
  Matrix identity(5, 5);
  for (int i = 0; i < 5; ++i) identity(i, i) = 1.0;
  CHECK(concreteness_correlation(f.vecs, f.vocab, table, &identity) ==
        Catch::Approx(concreteness_correlation(f.vecs, f.vocab, table)));
}

TEST_CASE("concreteness_correlation requires overlap") {
  EvalFixture f = make_vectors(4, 4, 20);
  ConcretenessTable table{{"not_there", 0.5}};
  CHECK_THROWS(concreteness_correlation(f.vecs, f.vocab, table));
}

TEST_CASE("duplicated vectors are mutual top neighbors") {
  EvalFixture f = make_vectors(6, 4, 21);
  f.vecs[1] = f.vecs[0];
  CHECK(top_neighbors(f.vecs, f.vocab, 0, 1).front() == 1);
  CHECK(top_neighbors(f.vecs, f.vocab, 1, 1).front() == 0);
}

TEST_CASE("top_neighbors matches an exhaustive sort oracle") {
  EvalFixture f = make_vectors(25, 5, 22);
  for (int w : {0, 7, 24}) {
    auto got = top_neighbors(f.vecs, f.vocab, w, 25);
    std::vector<std::pair<double, int>> expect;
    for (int i = 0; i < 25; ++i)
      if (i != w) expect.emplace_back(-cosine(f.vecs[w], f.vecs[i]), i);
    std::stable_sort(expect.begin(), expect.end());
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == expect[i].second);
  }
}

TEST_CASE("top_neighbors edge cases") {
  EvalFixture f = make_vectors(5, 4, 23);
  CHECK(top_neighbors(f.vecs, f.vocab, 2, 0).empty());
  CHECK_THROWS(top_neighbors(f.vecs, f.vocab, 99, 3));
}

TEST_CASE("benchmark and concreteness file parsing") {
  std::istringstream bin("cat\tdog\t7.5\nowl\thawk\t8.1\n");
  BenchmarkSet b = load_benchmark(bin, "toy");
  REQUIRE(b.pairs.size() == 2);
  CHECK(b.pairs[0].w1 == "cat");
  CHECK(b.pairs[1].gold == Catch::Approx(8.1));

  std::istringstream cin_("meat\t0.95\nhope\t0.12\n");
  ConcretenessTable t = load_concreteness(cin_);
  CHECK(t.at("hope") == Catch::Approx(0.12));

  std::istringstream empty("");
  CHECK_THROWS(load_benchmark(empty));
}
