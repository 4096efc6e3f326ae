// mmgram: multimodal skip-gram training and evaluation toolkit.
//
// Subcommands: train, eval-sim, zeroshot, nn, entropy.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include "mmgram/corpus.hpp"
#include "mmgram/eval.hpp"
#include "mmgram/trainer.hpp"
#include "mmgram/vector_io.hpp"
#include "mmgram/visual.hpp"
#include "mmgram/xmodal.hpp"

namespace {

using namespace mmgram;

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

Variant parse_variant(const std::string& name) {
  if (name == "skipgram") return Variant::skipgram;
  if (name == "mma") return Variant::mmA;
  if (name == "mmb") return Variant::mmB;
  throw CLI::ValidationError("--model must be skipgram, mma or mmb");
}

struct TrainFlags {
  std::string corpus, visual, output, save_map, save_vocab, model = "skipgram";
  TrainingConfig cfg;
  int visual_dim = 0;  // 0 = native
  bool binary = false;
  bool lowercase = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool require_output) {
  cmd->add_option("--corpus", f.corpus, "training corpus (plain text)")
      ->required();
  cmd->add_option("--model", f.model, "skipgram | mma | mmb");
  cmd->add_option("--visual", f.visual, "visual vector file (mma/mmb)");
  cmd->add_option("--size", f.cfg.dim, "embedding dimensionality");
  cmd->add_option("--window", f.cfg.window, "context window c");
  cmd->add_option("--sample", f.cfg.sample, "subsample threshold t (0 = off)");
  cmd->add_option("--alpha", f.cfg.alpha0, "initial learning rate");
  cmd->add_option("--epochs", f.cfg.epochs, "training epochs");
  cmd->add_option("--threads", f.cfg.threads, "worker threads");
  cmd->add_option("--seed", f.cfg.seed, "RNG seed");
  cmd->add_option("--min-count", f.cfg.min_count, "vocabulary count threshold");
  cmd->add_option("--negative-visual", f.cfg.negatives, "visual negatives k");
  cmd->add_option("--margin", f.cfg.margin, "hinge margin gamma");
  cmd->add_option("--l2", f.cfg.l2, "mapping L2 strength lambda (mmb)");
  cmd->add_option("--visual-dim", f.visual_dim,
                  "truncate visual vectors to this many dimensions "
                  "(0 = native; mma defaults to --size)");
  cmd->add_flag("--freeze-map", f.cfg.freeze_mapping,
                "keep the mmb mapping matrix fixed at its initial value");
  cmd->add_flag("--identity-map", f.cfg.identity_mapping,
                "initialize the mmb mapping matrix to the identity");
  cmd->add_flag("--lowercase", f.lowercase, "lowercase ASCII while tokenizing");
  if (require_output) {
    cmd->add_option("--output", f.output, "embedding output path")->required();
    cmd->add_flag("--binary", f.binary, "write binary records");
    cmd->add_option("--save-map", f.save_map, "write the mmb mapping matrix");
    cmd->add_option("--save-vocab", f.save_vocab, "dump word<TAB>count lines");
  }
}

// Per-variant defaults for flags the user did not set.
void apply_variant_defaults(const CLI::App* cmd, TrainFlags& f) {
  f.cfg.variant = parse_variant(f.model);
  if (cmd->count("--negative-visual") == 0)
    f.cfg.negatives = f.cfg.variant == Variant::mmA ? 20 : 5;
  if (cmd->count("--l2") == 0 && f.cfg.variant == Variant::mmB)
    f.cfg.l2 = 1e-4;
  if (f.cfg.variant == Variant::mmA && f.visual_dim == 0)
    f.visual_dim = f.cfg.dim;
}

struct LoadedCorpus {
  Vocabulary vocab;
  std::vector<int> ids;
};

LoadedCorpus load_corpus(const TrainFlags& f) {
  auto in = open_input(f.corpus);
  auto tokens = read_tokens(in, f.lowercase);
  LoadedCorpus c;
  c.vocab = build_vocabulary(tokens, f.cfg.min_count);
  c.ids = encode(tokens, c.vocab);
  return c;
}

VisualStore load_store(const TrainFlags& f, const Vocabulary& vocab) {
  auto in = open_input(f.visual);
  auto raw = load_visual_vectors(in);
  std::vector<std::string> skipped;
  VisualStore store = build_visual_store(raw, vocab, f.visual_dim, &skipped);
  if (!skipped.empty())
    std::cerr << "warning: " << skipped.size()
              << " visual words not in vocabulary, skipped\n";
  return store;
}

WordVectors model_word_vectors(const Matrix& U) {
  WordVectors vecs;
  for (std::size_t i = 0; i < U.rows; ++i) {
    auto r = U.row(i);
    vecs[static_cast<int>(i)] = std::vector<double>(r.begin(), r.end());
  }
  return vecs;
}

int cmd_train(const CLI::App* cmd, TrainFlags& f) {
  apply_variant_defaults(cmd, f);
  if (f.cfg.variant == Variant::skipgram && !f.visual.empty())
    std::cerr << "warning: --visual ignored for model skipgram\n";
  if (f.cfg.variant != Variant::skipgram && f.visual.empty())
    throw std::runtime_error("--visual is required for mma/mmb");

  LoadedCorpus corpus = load_corpus(f);
  VisualStore store;
  const VisualStore* store_ptr = nullptr;
  if (f.cfg.variant != Variant::skipgram) {
    store = load_store(f, corpus.vocab);
    store_ptr = &store;
  }
  EmbeddingModel model = train(f.cfg, corpus.vocab, corpus.ids, store_ptr);

  auto out = open_output(f.output, f.binary);
  write_embeddings(corpus.vocab.words, model.U, out, f.binary);
  if (!f.save_map.empty()) {
    if (f.cfg.variant != Variant::mmB)
      throw std::runtime_error("--save-map only applies to model mmb");
    auto mout = open_output(f.save_map);
    write_matrix(model.M, mout);
  }
  if (!f.save_vocab.empty()) {
    auto vout = open_output(f.save_vocab);
    dump_vocabulary(corpus.vocab, vout);
  }
  return 0;
}

int cmd_eval_sim(const std::string& vectors_path,
                 const std::vector<std::string>& benchmarks,
                 const std::string& visual_path, bool grounded_only,
                 bool binary) {
  auto vin = open_input(vectors_path, binary);
  auto [vocab, vecs] = embeddings_as_vocab(read_embeddings(vin, binary));
  VisualStore store;
  if (grounded_only) {
    if (visual_path.empty())
      throw std::runtime_error("--grounded-only requires --visual");
    auto in = open_input(visual_path);
    store = build_visual_store(load_visual_vectors(in), vocab);
  }
  std::cout << "benchmark\trho\tcoverage\tpairs\tdropped\n";
  for (const auto& path : benchmarks) {
    auto bin = open_input(path);
    BenchmarkSet bench = load_benchmark(bin, path);
    SimilarityResult r = eval_similarity(vecs, vocab, bench,
                                         grounded_only ? &store : nullptr);
    std::cout << path << '\t' << r.rho << '\t' << r.coverage << '\t' << r.used
              << '\t' << r.dropped << '\n';
  }
  return 0;
}

struct ZeroShotFlags {
  TrainFlags train;
  std::string vectors, map_path, exclude_path, save_split, load_split;
  std::string task = "both";
  double fraction = 0.25;
  std::vector<double> lambda_grid;
  bool binary = false;
};

void print_pk_row(const std::string& label,
                  const std::map<int, std::vector<int>>& ranked) {
  std::vector<std::vector<int>> lists;
  std::vector<int> gold;
  for (const auto& [w, r] : ranked) {
    gold.push_back(w);
    lists.push_back(r);
  }
  auto pk = precision_at_k(lists, gold, {1, 2, 10, 20, 50});
  std::cout << label;
  for (double p : pk) std::cout << '\t' << p;
  std::cout << '\n';
}

int cmd_zeroshot(const CLI::App* cmd, ZeroShotFlags& z) {
  apply_variant_defaults(cmd, z.train);
  const bool retrain = z.vectors.empty();
  // with pre-trained vectors the dimensionality comes from the files, so the
  // mma visual-dim default (truncate to --size) does not apply
  if (!retrain && cmd->count("--visual-dim") == 0) z.train.visual_dim = 0;
  if (z.lambda_grid.empty()) z.lambda_grid = default_lambda_grid();
  Variant strategy = z.train.cfg.variant;

  Vocabulary vocab;
  WordVectors vecs;
  Matrix mapping;
  VisualStore full_store;

  std::unordered_set<int> exclusion;
  ZeroShotSplit split;

  if (retrain) {
    LoadedCorpus corpus = load_corpus(z.train);
    vocab = std::move(corpus.vocab);
    full_store = load_store(z.train, vocab);
    if (!z.exclude_path.empty()) {
      auto ein = open_input(z.exclude_path);
      std::string w;
      while (ein >> w) {
        int id = vocab.id_of(w);
        if (id >= 0) exclusion.insert(id);
      }
    }
    Rng split_rng(z.train.cfg.seed);
    split = make_split(full_store.grounded, z.fraction, exclusion, split_rng);
    if (split.test_words.empty())
      std::cerr << "warning: test split is empty after exclusions\n";

    // Retrain with the test words' visual vectors withheld.
    std::map<std::string, std::vector<double>> train_only;
    for (int w : split.train_words) {
      auto v = full_store.vector_for(w);
      train_only.emplace(vocab.words[w],
                         std::vector<double>(v.begin(), v.end()));
    }
    VisualStore train_store = build_visual_store(train_only, vocab);
    const VisualStore* ptr =
        strategy == Variant::skipgram ? nullptr : &train_store;
    EmbeddingModel model = train(z.train.cfg, vocab, corpus.ids, ptr);
    vecs = model_word_vectors(model.U);
    mapping = std::move(model.M);
  } else {
    auto vin = open_input(z.vectors, z.binary);
    std::tie(vocab, vecs) = embeddings_as_vocab(read_embeddings(vin, z.binary));
    auto in = open_input(z.train.visual);
    full_store =
        build_visual_store(load_visual_vectors(in), vocab, z.train.visual_dim);
    if (!z.exclude_path.empty()) {
      auto ein = open_input(z.exclude_path);
      std::string w;
      while (ein >> w) {
        int id = vocab.id_of(w);
        if (id >= 0) exclusion.insert(id);
      }
    }
    if (!z.load_split.empty()) {
      auto sin = open_input(z.load_split);
      std::string w, part;
      while (sin >> w >> part) {
        int id = vocab.id_of(w);
        if (id < 0) continue;
        (part == "test" ? split.test_words : split.train_words).push_back(id);
      }
      std::sort(split.train_words.begin(), split.train_words.end());
      std::sort(split.test_words.begin(), split.test_words.end());
    } else {
      Rng split_rng(z.train.cfg.seed);
      split = make_split(full_store.grounded, z.fraction, exclusion, split_rng);
    }
    if (strategy == Variant::mmB) {
      if (z.map_path.empty())
        throw std::runtime_error("strategy mmb with --vectors needs --map");
      auto min = open_input(z.map_path);
      mapping = read_matrix(min);
    }
  }

  if (!z.save_split.empty()) {
    auto sout = open_output(z.save_split);
    for (int w : split.train_words) sout << vocab.words[w] << "\ttrain\n";
    for (int w : split.test_words) sout << vocab.words[w] << "\ttest\n";
  }

  std::cout << "task\tP@1\tP@2\tP@10\tP@20\tP@50\n";
  if (z.task == "label" || z.task == "both") {
    auto ranked =
        zero_shot_label(vecs, full_store, split, strategy, z.lambda_grid, 50);
    print_pk_row("label", ranked);
  }
  if (z.task == "retrieve" || z.task == "both") {
    auto ranked = zero_shot_retrieve(vecs, mapping.rows ? &mapping : nullptr,
                                     full_store, split, strategy,
                                     z.lambda_grid, 50);
    print_pk_row("retrieve", ranked);
  }
  return 0;
}

int cmd_nn(const std::string& vectors_path, const std::vector<std::string>& words,
           std::size_t top, bool binary) {
  auto vin = open_input(vectors_path, binary);
  auto [vocab, vecs] = embeddings_as_vocab(read_embeddings(vin, binary));
  for (const auto& w : words) {
    int id = vocab.id_of(w);
    if (id < 0) {
      std::cerr << "warning: " << w << " not in vocabulary\n";
      continue;
    }
    std::cout << w;
    for (int n : top_neighbors(vecs, vocab, id, top))
      std::cout << '\t' << vocab.words[n];
    std::cout << '\n';
  }
  return 0;
}

int cmd_entropy(const std::string& vectors_path, const std::string& conc_path,
                const std::string& map_path, bool binary) {
  auto vin = open_input(vectors_path, binary);
  auto [vocab, vecs] = embeddings_as_vocab(read_embeddings(vin, binary));
  auto cin_ = open_input(conc_path);
  ConcretenessTable table = load_concreteness(cin_);
  Matrix mapping;
  if (!map_path.empty()) {
    auto min = open_input(map_path);
    mapping = read_matrix(min);
  }
  const Matrix* map_ptr = mapping.rows ? &mapping : nullptr;

  std::cout << "word\tentropy\tconcreteness\n";
  std::size_t missing = 0;
  for (const auto& [word, score] : table) {
    int id = vocab.id_of(word);
    if (id < 0) {
      ++missing;
      continue;
    }
    const auto& u = vecs.at(id);
    double h;
    if (map_ptr) {
      std::vector<double> zv(map_ptr->rows);
      for (std::size_t r = 0; r < map_ptr->rows; ++r)
        zv[r] = dot(map_ptr->row(r), u);
      h = vector_entropy(zv);
    } else {
      h = vector_entropy(u);
    }
    std::cout << word << '\t' << h << '\t' << score << '\n';
  }
  if (missing)
    std::cerr << "warning: " << missing << " concreteness words not covered\n";
  double rho = concreteness_correlation(vecs, vocab, table, map_ptr);
  std::cout << "spearman\t" << rho << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimodal skip-gram toolkit"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train embeddings");
  add_train_flags(train_cmd, tf, true);

  std::string es_vectors, es_visual;
  std::vector<std::string> es_benchmarks;
  bool es_grounded = false, es_binary = false;
  auto* eval_cmd = app.add_subcommand("eval-sim", "word similarity benchmarks");
  eval_cmd->add_option("--vectors", es_vectors, "embedding file")->required();
  eval_cmd->add_option("--benchmark", es_benchmarks, "benchmark TSV file(s)")
      ->required();
  eval_cmd->add_option("--visual", es_visual, "visual file for coverage filter");
  eval_cmd->add_flag("--grounded-only", es_grounded,
                     "restrict to pairs with both words grounded");
  eval_cmd->add_flag("--binary", es_binary, "vectors are in binary mode");

  ZeroShotFlags zf;
  auto* zs_cmd = app.add_subcommand("zeroshot", "zero-shot labeling/retrieval");
  add_train_flags(zs_cmd, zf.train, false);
  zs_cmd->get_option("--corpus")->required(false);
  zs_cmd->get_option("--visual")->required();
  zs_cmd->add_option("--vectors", zf.vectors,
                     "pre-trained embeddings (skips retraining)");
  zs_cmd->add_option("--map", zf.map_path, "mapping matrix for strategy mmb");
  zs_cmd->add_option("--fraction", zf.fraction, "held-out fraction");
  zs_cmd->add_option("--exclude", zf.exclude_path, "test-fold exclusion list");
  zs_cmd->add_option("--lambda-grid", zf.lambda_grid, "ridge lambda grid");
  zs_cmd->add_option("--task", zf.task, "label | retrieve | both");
  zs_cmd->add_option("--save-split", zf.save_split, "write the split file");
  zs_cmd->add_option("--split", zf.load_split, "load a split file (with --vectors)");
  zs_cmd->add_flag("--binary", zf.binary, "vectors are in binary mode");

  std::string nn_vectors;
  std::vector<std::string> nn_words;
  std::size_t nn_top = 3;
  bool nn_binary = false;
  auto* nn_cmd = app.add_subcommand("nn", "nearest neighbors");
  nn_cmd->add_option("--vectors", nn_vectors, "embedding file")->required();
  nn_cmd->add_option("words", nn_words, "query words")->required();
  nn_cmd->add_option("--top", nn_top, "neighbors per word");
  nn_cmd->add_flag("--binary", nn_binary, "vectors are in binary mode");

  std::string en_vectors, en_conc, en_map;
  bool en_binary = false;
  auto* en_cmd = app.add_subcommand("entropy", "vector entropy vs concreteness");
  en_cmd->add_option("--vectors", en_vectors, "embedding file")->required();
  en_cmd->add_option("--concreteness", en_conc, "word<TAB>score table")
      ->required();
  en_cmd->add_option("--map", en_map, "map vectors through M first");
  en_cmd->add_flag("--binary", en_binary, "vectors are in binary mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return cmd_train(train_cmd, tf);
    if (*eval_cmd)
      return cmd_eval_sim(es_vectors, es_benchmarks, es_visual, es_grounded,
                          es_binary);
    if (*zs_cmd) {
      if (zf.vectors.empty() && zf.train.corpus.empty())
        throw std::invalid_argument("zeroshot needs --corpus or --vectors");
      return cmd_zeroshot(zs_cmd, zf);
    }
    if (*nn_cmd) return cmd_nn(nn_vectors, nn_words, nn_top, nn_binary);
    if (*en_cmd) return cmd_entropy(en_vectors, en_conc, en_map, en_binary);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
