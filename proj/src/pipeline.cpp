#include "autokey/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "autokey/corpus_io.hpp"
#include "autokey/error.hpp"
#include "autokey/phrasebank.hpp"

namespace autokey {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Reads the keys of one JSON object block and rejects the ones nobody asked for.
class Block {
 public:
  Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j.is_object()) throw Error("config: \"" + name_ + "\" must be an object");
  }
  ~Block() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw Error("config: unknown key \"" + name_ + "." + k + "\"");
    }
  }
  template <class T>
  void get(const char* key, T& out) {
    seen_[key] = true;
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw Error("config: \"" + name_ + "." + key + "\" has the wrong type");
    }
  }
  const json* child(const char* key) {
    seen_[key] = true;
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

 private:
  const json& j_;
  std::string name_;
  std::unordered_map<std::string, bool> seen_;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<StoredDocument> load_store(const fs::path& path, const std::string& producer) {
  require_artifact(path, producer);
  auto store = read_store(path);
  if (store.empty()) throw Error(path.string() + " holds no documents");
  return store;
}

CandidatePhrase generated_candidate(const Generated& g) {
  std::vector<Token> tokens;
  for (const std::string& w : g.words) tokens.push_back(make_token(w));
  return CandidatePhrase::from_tokens(std::move(tokens));
}

json scored_json(const std::vector<ScoredPhrase>& list) {
  json arr = json::array();
  for (const ScoredPhrase& s : list) {
    arr.push_back({{"phrase", s.candidate.surface},
                   {"stem_key", s.candidate.stem_key},
                   {"score", s.fused},
                   {"lexical", s.lexical},
                   {"semantic", s.semantic}});
  }
  return arr;
}

std::vector<std::string> head_surfaces(const std::vector<ScoredPhrase>& list, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < list.size() && i < k; ++i) out.push_back(list[i].candidate.surface);
  return out;
}

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) {
  // splitmix64 step so stages draw independent streams from one seed
  std::uint64_t z = seed + stage * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

PipelineConfig PipelineConfig::desk() {
  PipelineConfig c;
  c.embed.dim = 100;
  c.embed.epochs = 5;
  c.train.learning_rate = 0.1;
  c.train.epochs = 60;
  c.train.batch_docs = 2;
  return c;
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: invalid JSON (") + e.what() + ")");
  }
  PipelineConfig c = desk();
  Block top(j, "config");
  std::string corpus, out_dir;
  top.get("corpus", corpus);
  top.get("out_dir", out_dir);
  if (!corpus.empty()) c.corpus = corpus;
  if (!out_dir.empty()) c.out_dir = out_dir;
  top.get("dataset", c.dataset);
  top.get("seed", c.seed);
  if (const json* b = top.child("embed")) {
    Block e(*b, "embed");
    e.get("dim", c.embed.dim);
    e.get("window", c.embed.window);
    e.get("negatives", c.embed.negatives);
    e.get("epochs", c.embed.epochs);
    e.get("learning_rate", c.embed.learning_rate);
    e.get("min_learning_rate", c.embed.min_learning_rate);
    e.get("min_count", c.embed.min_count);
  }
  if (const json* b = top.child("rank")) {
    Block r(*b, "rank");
    r.get("use_lexical", c.rank.use_lexical);
  }
  if (const json* b = top.child("model")) {
    Block m(*b, "model");
    m.get("vocab_size", c.vocab_size);
    m.get("emb_dim", c.model.emb_dim);
    m.get("hidden", c.model.hidden);
    m.get("max_source", c.model.max_source);
  }
  if (const json* b = top.child("train")) {
    Block t(*b, "train");
    t.get("learning_rate", c.train.learning_rate);
    t.get("decay", c.train.decay);
    t.get("decay_every", c.train.decay_every);
    t.get("epochs", c.train.epochs);
    t.get("batch_docs", c.train.batch_docs);
    t.get("adagrad_init", c.train.adagrad_init);
    t.get("max_grad_norm", c.train.max_grad_norm);
    t.get("checkpoint_every", c.train.checkpoint_every);
  }
  if (const json* b = top.child("decode")) {
    Block d(*b, "decode");
    d.get("beam_width", c.decode.beam_width);
    d.get("max_length", c.decode.max_length);
    d.get("bias", c.decode.bias);
    d.get("length_penalty", c.decode.length_penalty);
  }
  if (const json* b = top.child("generate")) {
    Block g(*b, "generate");
    g.get("use_genmodel", c.use_genmodel);
    g.get("top_k", c.top_k);
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string PipelineConfig::to_json() const {
  json j = {
      {"corpus", corpus.string()},
      {"out_dir", out_dir.string()},
      {"dataset", dataset},
      {"seed", seed},
      {"embed",
       {{"dim", embed.dim},
        {"window", embed.window},
        {"negatives", embed.negatives},
        {"epochs", embed.epochs},
        {"learning_rate", embed.learning_rate},
        {"min_learning_rate", embed.min_learning_rate},
        {"min_count", embed.min_count}}},
      {"rank", {{"use_lexical", rank.use_lexical}}},
      {"model",
       {{"vocab_size", vocab_size},
        {"emb_dim", model.emb_dim},
        {"hidden", model.hidden},
        {"max_source", model.max_source}}},
      {"train",
       {{"learning_rate", train.learning_rate},
        {"decay", train.decay},
        {"decay_every", train.decay_every},
        {"epochs", train.epochs},
        {"batch_docs", train.batch_docs},
        {"adagrad_init", train.adagrad_init},
        {"max_grad_norm", train.max_grad_norm},
        {"checkpoint_every", train.checkpoint_every}}},
      {"decode",
       {{"beam_width", decode.beam_width},
        {"max_length", decode.max_length},
        {"bias", decode.bias},
        {"length_penalty", decode.length_penalty}}},
      {"generate", {{"use_genmodel", use_genmodel}, {"top_k", top_k}}},
  };
  return j.dump(2);
}

void require_artifact(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw Error("missing " + path.string() + " (run `autokeygen " + producer + "` to produce it)");
  }
}

IngestSummary run_ingest(const PipelineConfig&, const fs::path& input, const fs::path& store, std::ostream& log) {
  IngestResult r = read_corpus_jsonl(input);
  for (const std::string& w : r.warnings) log << "warning: " << input.string() << ": " << w << '\n';
  if (r.records.empty()) throw Error("no valid documents in " + input.string());
  std::vector<StoredDocument> docs;
  for (const CorpusRecord& rec : r.records) docs.push_back(make_stored(rec));
  auto out = open_output(store);
  write_store(out, docs);
  log << "ingest: " << docs.size() << " documents, " << r.warnings.size() << " skipped -> " << store.string() << '\n';
  return {docs.size(), r.warnings.size(), r.warnings};
}

void run_build_bank(const PipelineConfig& cfg, std::ostream& log) {
  auto docs = documents_of(load_store(cfg.path(artifact::kStore), "ingest"));
  PhraseBank bank = PhraseBank::build(docs);
  bank.save(cfg.path(artifact::kBank));
  log << "build-bank: " << bank.entries().size() << " phrases from " << docs.size() << " documents\n";
}

void run_embed(const PipelineConfig& cfg, std::ostream& log, bool text_copy) {
  auto docs = documents_of(load_store(cfg.path(artifact::kStore), "ingest"));
  std::vector<double> losses;
  VectorTable table = train_skipgram(docs, cfg.embed, stage_seed(cfg.seed, 1), &losses);
  table.save_binary(cfg.path(artifact::kVectors));
  if (text_copy) table.save_text(cfg.out_dir / "vectors.txt");
  log << "embed: " << table.size() << " words, dim " << table.dim();
  if (!losses.empty()) log << ", final epoch loss " << losses.back();
  log << '\n';
}

namespace {

struct RankingInputs {
  std::vector<Document> corpus;
  PhraseBank bank;
  VectorTable table;
  CorpusStats stats;
};

RankingInputs load_ranking_inputs(const PipelineConfig& cfg) {
  auto docs = documents_of(load_store(cfg.path(artifact::kStore), "ingest"));
  require_artifact(cfg.path(artifact::kBank), "build-bank");
  require_artifact(cfg.path(artifact::kVectors), "embed");
  PhraseBank bank = PhraseBank::load(cfg.path(artifact::kBank));
  VectorTable table = VectorTable::load_binary(cfg.path(artifact::kVectors));
  CorpusStats stats = CorpusStats::build(docs, bank);
  return {std::move(docs), std::move(bank), std::move(table), std::move(stats)};
}

}  // namespace

void run_rank(const PipelineConfig& cfg, std::ostream& log) {
  RankingInputs in = load_ranking_inputs(cfg);
  Ranker ranker(in.stats, in.table, cfg.rank);
  auto out = open_output(cfg.path(artifact::kRanked));
  for (const Document& doc : in.corpus) {
    RankedLists r = ranker.rank_document(doc, in.bank);
    json j = {{"id", doc.id}, {"present", scored_json(r.present)}, {"absent", scored_json(r.absent)}};
    out << j.dump() << '\n';
  }
  log << "rank: " << in.corpus.size() << " documents" << (cfg.rank.use_lexical ? "" : " (embedding only)") << '\n';
}

void run_make_silver(const PipelineConfig& cfg, std::ostream& log) {
  RankingInputs in = load_ranking_inputs(cfg);
  Ranker ranker(in.stats, in.table, cfg.rank);
  auto silver = make_silver(in.corpus, in.bank, ranker);
  auto out = open_output(cfg.path(artifact::kSilver));
  write_silver_tsv(out, silver);
  log << "make-silver: " << silver.size() << " pairs\n";
}

std::vector<EpochLog> run_train_gen(const PipelineConfig& cfg, std::ostream& log) {
  auto docs = documents_of(load_store(cfg.path(artifact::kStore), "ingest"));
  require_artifact(cfg.path(artifact::kSilver), "make-silver");
  std::ifstream sin(cfg.path(artifact::kSilver), std::ios::binary);
  auto silver = read_silver_tsv(sin);
  if (silver.empty()) throw Error("train-gen: silver file is empty");

  GenModel model(build_vocab(docs, silver, cfg.vocab_size), cfg.model, stage_seed(cfg.seed, 2));
  auto examples = make_training_examples(model, docs, silver);
  std::size_t truncated = 0;
  for (const TrainingExample& ex : examples) truncated += ex.source.size() > static_cast<std::size_t>(cfg.model.max_source);
  if (truncated) log << "train-gen: " << truncated << " sources truncated to " << cfg.model.max_source << " tokens\n";

  TrainConfig tc = cfg.train;
  tc.seed = stage_seed(cfg.seed, 3);
  auto hook = [&](int epoch, const GenModel& m) {
    fs::path p = cfg.out_dir / "checkpoints" / ("model.epoch" + std::to_string(epoch) + ".ckpt");
    fs::create_directories(p.parent_path());
    m.save(p);
  };
  log << "train-gen: vocab " << model.vocab().size() << ", " << examples.size() << " documents, "
      << model.params().count() << " parameters\n";
  auto history = train(model, examples, tc, hook);
  model.save(cfg.path(artifact::kModel));

  auto csv = open_output(cfg.path(artifact::kTrainLog));
  csv << "epoch,step,mean_nll,lr\n";
  char line[128];
  for (const EpochLog& e : history) {
    std::snprintf(line, sizeof line, "%d,%lld,%.10g,%.10g\n", e.epoch, e.step, e.mean_nll, e.lr);
    csv << line;
  }
  if (!history.empty()) log << "train-gen: final mean nll " << history.back().mean_nll << '\n';
  return history;
}

void run_generate(const PipelineConfig& cfg, const fs::path& input, const fs::path& output, std::ostream& log) {
  RankingInputs in = load_ranking_inputs(cfg);
  auto targets = documents_of(load_store(input, "ingest"));
  std::optional<GenModel> model;
  if (cfg.use_genmodel) {
    require_artifact(cfg.path(artifact::kModel), "train-gen");
    model = GenModel::load(cfg.path(artifact::kModel));
  }
  Ranker ranker(in.stats, in.table, cfg.rank);
  std::vector<Prediction> preds;
  std::size_t generated_total = 0;
  for (const Document& doc : targets) {
    std::vector<CandidatePhrase> extra = in.bank.draw_absent(doc);
    if (model) {
      for (const Generated& g : biased_beam_search(*model, doc, cfg.decode)) {
        extra.push_back(generated_candidate(g));
        ++generated_total;
      }
    }
    RankedLists r = ranker.rank(doc, extract_present(doc), extra);
    preds.push_back({doc.id, head_surfaces(r.present, cfg.top_k), head_surfaces(r.absent, cfg.top_k)});
  }
  auto out = open_output(output);
  write_predictions(out, preds);
  log << "generate: " << preds.size() << " documents";
  if (model) log << ", " << generated_total << " generated phrases";
  log << " -> " << output.string() << '\n';
}

EvalReport run_evaluate(const PipelineConfig& cfg, const fs::path& predictions, const fs::path& gold_store,
                        std::ostream& log) {
  require_artifact(predictions, "generate");
  auto store = load_store(gold_store, "ingest");
  std::unordered_map<std::string, const StoredDocument*> by_id;
  for (const StoredDocument& d : store) by_id.emplace(d.doc.id, &d);
  std::vector<EvalInput> inputs;
  std::size_t no_gold = 0;
  for (const Prediction& p : read_predictions(predictions)) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw Error("evaluate: prediction for unknown document '" + p.id + "'");
    if (!it->second->keywords) {
      ++no_gold;
      continue;
    }
    EvalInput e{&it->second->doc, p.present, *it->second->keywords};
    e.predicted.insert(e.predicted.end(), p.absent.begin(), p.absent.end());
    inputs.push_back(std::move(e));
  }
  if (no_gold) log << "evaluate: " << no_gold << " documents without keywords skipped\n";
  EvalReport report = evaluate_corpus(inputs, cfg.dataset);
  std::vector<EvalReport> reports{report};
  auto csv = open_output(cfg.path(artifact::kEval));
  write_report_csv(csv, reports);
  auto docs = open_output(cfg.path(artifact::kEvalDocs));
  write_document_csv(docs, report);
  write_report_table(log, report);
  return report;
}

EvalReport run_all(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.corpus.empty()) throw Error("pipeline: no corpus given");
  fs::create_directories(cfg.out_dir);
  run_ingest(cfg, cfg.corpus, cfg.path(artifact::kStore), log);
  run_build_bank(cfg, log);
  run_embed(cfg, log);
  run_make_silver(cfg, log);
  if (cfg.use_genmodel) run_train_gen(cfg, log);
  run_generate(cfg, cfg.path(artifact::kStore), cfg.path(artifact::kPredictions), log);
  return run_evaluate(cfg, cfg.path(artifact::kPredictions), cfg.path(artifact::kStore), log);
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds) {
  for (const Prediction& p : preds) {
    json j = {{"id", p.id}, {"present", p.present}, {"absent", p.absent}};
    out << j.dump() << '\n';
  }
}

std::vector<Prediction> read_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("present").get<std::vector<std::string>>(),
                     j.at("absent").get<std::vector<std::string>>()});
    } catch (const json::exception& e) {
      throw Error(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace autokey
