#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "autokey/corpus_io.hpp"
#include "autokey/error.hpp"
#include "autokey/pipeline.hpp"
#include "autokey/synthetic.hpp"

namespace fs = std::filesystem;
using namespace autokey;

namespace {

struct Overrides {
  std::string config;
  std::string out_dir;
  std::string corpus;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_tfidf = false;
  bool no_genmodel = false;
};

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig::desk() : PipelineConfig::load(o.config);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (!o.corpus.empty()) cfg.corpus = o.corpus;
  if (o.seed_set) cfg.seed = o.seed;
  if (o.no_tfidf) cfg.rank.use_lexical = false;
  if (o.no_genmodel) cfg.use_genmodel = false;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autokeygen: unsupervised keyphrase generation.\n"
               "Stages share one output directory; each reads its predecessors' artifacts."};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config, "JSON config file (defaults are the desk-scale settings)")
      ->check(CLI::ExistingFile);
  app.add_option("-o,--out-dir", o.out_dir, "artifact directory (overrides config out_dir)");
  app.add_option("--seed", o.seed, "random seed (overrides config seed)")->each([&](const std::string&) {
    o.seed_set = true;
  });

  std::string input, output, store;
  bool text_vectors = false;

  auto* ingest = app.add_subcommand("ingest",
                                    "Validate and tokenize a JSONL corpus.\n"
                                    "  in:  JSONL lines {\"id\",\"title\",\"abstract\",\"keywords\"?}\n"
                                    "  out: <out-dir>/corpus.store.jsonl (or --store)");
  ingest->add_option("corpus", o.corpus, "input JSONL (overrides config corpus)");
  ingest->add_option("--store", store, "store path to write");

  app.add_subcommand("build-bank",
                     "Pool present candidates of every document into the phrase bank.\n"
                     "  in:  corpus.store.jsonl\n  out: bank.tsv");
  auto* embed = app.add_subcommand("embed",
                                   "Train skip-gram word vectors on the stored corpus.\n"
                                   "  in:  corpus.store.jsonl\n  out: vectors.bin (and vectors.txt with --text)");
  embed->add_flag("--text", text_vectors, "also write vectors.txt in word2vec text format");

  auto* rank = app.add_subcommand("rank",
                                  "Score present and bank-drawn absent candidates of every document.\n"
                                  "  in:  corpus.store.jsonl, bank.tsv, vectors.bin\n  out: ranked.jsonl");
  rank->add_flag("--no-tfidf", o.no_tfidf, "rank by embedding similarity only");

  auto* silver = app.add_subcommand("make-silver",
                                    "Take the top-5 present and top-5 absent phrases of each document.\n"
                                    "  in:  corpus.store.jsonl, bank.tsv, vectors.bin\n  out: silver.tsv");
  silver->add_flag("--no-tfidf", o.no_tfidf, "rank by embedding similarity only");

  app.add_subcommand("train-gen",
                     "Train the encoder-decoder on the silver pairs.\n"
                     "  in:  corpus.store.jsonl, silver.tsv\n  out: model.ckpt, train_log.csv, checkpoints/");

  auto* generate = app.add_subcommand(
      "generate",
      "Extract, draw from the bank, decode with the generator and rank everything together.\n"
      "  in:  bank.tsv, vectors.bin, model.ckpt, a store (--input, default corpus.store.jsonl)\n"
      "  out: predictions.jsonl lines {\"id\",\"present\":[..],\"absent\":[..]} (or --output)");
  generate->add_option("--input", input, "store of documents to label");
  generate->add_option("--output", output, "predictions path");
  generate->add_flag("--no-genmodel", o.no_genmodel, "skip the generator (bank and extraction only)");
  generate->add_flag("--no-tfidf", o.no_tfidf, "rank by embedding similarity only");

  auto* evaluate = app.add_subcommand("evaluate",
                                      "Score predictions against the keywords of a store.\n"
                                      "  in:  predictions.jsonl, store with keywords\n"
                                      "  out: eval.csv (dataset,metric,value), eval_docs.csv, table on stdout");
  evaluate->add_option("--predictions", input, "predictions path");
  evaluate->add_option("--gold", store, "store holding the gold keywords");

  auto* pipeline = app.add_subcommand("pipeline",
                                      "Run every stage on one corpus and evaluate on it.\n"
                                      "  in:  JSONL corpus\n  out: all artifacts in <out-dir>");
  pipeline->add_option("corpus", o.corpus, "input JSONL (overrides config corpus)");
  pipeline->add_flag("--no-genmodel", o.no_genmodel, "skip the generator");
  pipeline->add_flag("--no-tfidf", o.no_tfidf, "rank by embedding similarity only");

  int docs = 200;
  std::uint64_t syn_seed = 7;
  auto* synthetic = app.add_subcommand("synthetic", "Write the planted-pattern synthetic corpus as JSONL.");
  synthetic->add_option("output", output, "JSONL path")->required();
  synthetic->add_option("--documents", docs, "number of documents");
  synthetic->add_option("--corpus-seed", syn_seed, "generator seed");

  app.add_subcommand("show-config", "Print the resolved configuration as JSON.");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = resolve(o);
    auto& log = std::cerr;
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "ingest") {
      if (cfg.corpus.empty()) throw Error("ingest: no corpus given");
      auto s = run_ingest(cfg, cfg.corpus, store.empty() ? cfg.path(artifact::kStore) : fs::path(store), log);
      std::cout << s.documents << " documents ingested, " << s.skipped << " lines skipped\n";
    } else if (cmd == "build-bank") {
      run_build_bank(cfg, log);
    } else if (cmd == "embed") {
      run_embed(cfg, log, text_vectors);
    } else if (cmd == "rank") {
      run_rank(cfg, log);
    } else if (cmd == "make-silver") {
      run_make_silver(cfg, log);
    } else if (cmd == "train-gen") {
      run_train_gen(cfg, log);
    } else if (cmd == "generate") {
      run_generate(cfg, input.empty() ? cfg.path(artifact::kStore) : fs::path(input),
                   output.empty() ? cfg.path(artifact::kPredictions) : fs::path(output), log);
    } else if (cmd == "evaluate") {
      run_evaluate(cfg, input.empty() ? cfg.path(artifact::kPredictions) : fs::path(input),
                   store.empty() ? cfg.path(artifact::kStore) : fs::path(store), std::cout);
    } else if (cmd == "pipeline") {
      run_all(cfg, log);
    } else if (cmd == "synthetic") {
      SyntheticOptions so;
      so.documents = docs;
      so.seed = syn_seed;
      std::ofstream out(output, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + output);
      write_corpus_jsonl(out, synthetic_corpus(so));
    } else if (cmd == "show-config") {
      std::cout << cfg.to_json() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
