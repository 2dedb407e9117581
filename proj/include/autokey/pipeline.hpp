#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "autokey/embed.hpp"
#include "autokey/genmodel.hpp"
#include "autokey/metrics.hpp"
#include "autokey/ranker.hpp"

namespace autokey {

namespace artifact {
inline constexpr const char* kStore = "corpus.store.jsonl";
inline constexpr const char* kBank = "bank.tsv";
inline constexpr const char* kVectors = "vectors.bin";
inline constexpr const char* kRanked = "ranked.jsonl";
inline constexpr const char* kSilver = "silver.tsv";
inline constexpr const char* kModel = "model.ckpt";
inline constexpr const char* kTrainLog = "train_log.csv";
inline constexpr const char* kPredictions = "predictions.jsonl";
inline constexpr const char* kEval = "eval.csv";
inline constexpr const char* kEvalDocs = "eval_docs.csv";
}  // namespace artifact

struct PipelineConfig {
  std::filesystem::path corpus;  // JSONL read by ingest
  std::filesystem::path out_dir = "autokeygen_out";
  std::string dataset = "corpus";
  std::uint64_t seed = 1;
  EmbedConfig embed;
  RankOptions rank;
  std::size_t vocab_size = 5000;
  ModelConfig model = ModelConfig::desk();
  TrainConfig train;
  DecodeConfig decode;
  bool use_genmodel = true;
  std::size_t top_k = 20;  // phrases kept per list in predictions

  // Desk-scale defaults; the full-size settings are the defaults of the
  // individual config structs.
  static PipelineConfig desk();
  // JSON object with optional blocks "embed", "rank", "model", "train",
  // "decode", "generate"; unknown keys are errors.
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  std::filesystem::path path(const char* name) const { return out_dir / name; }
};

// Throws naming the file and the subcommand that writes it when path is missing.
void require_artifact(const std::filesystem::path& path, const std::string& producer);

struct IngestSummary {
  std::size_t documents = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// Each stage reads its inputs from out_dir and writes its artifact there.
// Progress lines go to log.
IngestSummary run_ingest(const PipelineConfig& cfg, const std::filesystem::path& input,
                         const std::filesystem::path& store, std::ostream& log);
void run_build_bank(const PipelineConfig& cfg, std::ostream& log);
void run_embed(const PipelineConfig& cfg, std::ostream& log, bool text_copy = false);
void run_rank(const PipelineConfig& cfg, std::ostream& log);
void run_make_silver(const PipelineConfig& cfg, std::ostream& log);
std::vector<EpochLog> run_train_gen(const PipelineConfig& cfg, std::ostream& log);
void run_generate(const PipelineConfig& cfg, const std::filesystem::path& input, const std::filesystem::path& output,
                  std::ostream& log);
EvalReport run_evaluate(const PipelineConfig& cfg, const std::filesystem::path& predictions,
                        const std::filesystem::path& gold_store, std::ostream& log);

// ingest -> build-bank -> embed -> make-silver -> train-gen -> generate -> evaluate
// on cfg.corpus.
EvalReport run_all(const PipelineConfig& cfg, std::ostream& log);

struct Prediction {
  std::string id;
  std::vector<std::string> present;
  std::vector<std::string> absent;
};

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace autokey
