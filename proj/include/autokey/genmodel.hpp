#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "autokey/ranker.hpp"
#include "autokey/textproc.hpp"

namespace autokey {

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  // Keeps the max_size most frequent words (reserved tokens included in the
  // count); frequency ties are broken lexicographically.
  static Vocab build(const std::unordered_map<std::string, long long>& counts, std::size_t max_size);
  // words excludes the reserved tokens.
  static Vocab from_words(std::vector<std::string> words);

  int id(const std::string& word) const;
  const std::string& word(int id) const { return words_[static_cast<std::size_t>(id)]; }
  const std::string& stem_of(int id) const { return stems_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return words_.size(); }
  // All entries including the reserved tokens, by id.
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::string> stems_;
  std::unordered_map<std::string, int> ids_;
};

struct ModelConfig {
  int emb_dim = 200;
  int hidden = 256;
  int max_source = 512;

  static ModelConfig desk() { return {64, 64, 512}; }
};

// Parameter tensors; vectors are stored as single-column matrices.
struct Params {
  Eigen::MatrixXd embedding;  // emb x V, one column per word
  Eigen::MatrixXd enc_fwd_w, enc_fwd_b;
  Eigen::MatrixXd enc_bwd_w, enc_bwd_b;
  Eigen::MatrixXd bridge_w, bridge_b;  // projects [fwd_last; bwd_first] to decoder size
  Eigen::MatrixXd dec_w, dec_b;        // input: [embedding; context; previous hidden]
  Eigen::MatrixXd attn_w;              // bilinear attention score
  Eigen::MatrixXd comb_w, comb_b;      // [hidden; attended] -> output features
  Eigen::MatrixXd out_w, out_b;        // output features -> vocabulary logits

  template <class Self, class F>
  static void visit(Self& p, F&& f) {
    f("embedding", p.embedding);
    f("enc_fwd_w", p.enc_fwd_w);
    f("enc_fwd_b", p.enc_fwd_b);
    f("enc_bwd_w", p.enc_bwd_w);
    f("enc_bwd_b", p.enc_bwd_b);
    f("bridge_w", p.bridge_w);
    f("bridge_b", p.bridge_b);
    f("dec_w", p.dec_w);
    f("dec_b", p.dec_b);
    f("attn_w", p.attn_w);
    f("comb_w", p.comb_w);
    f("comb_b", p.comb_b);
    f("out_w", p.out_w);
    f("out_b", p.out_b);
  }
  template <class F>
  void for_each(F&& f) { visit(*this, f); }
  template <class F>
  void for_each(F&& f) const { visit(*this, f); }

  // Same shapes, all zeros.
  Params zeros_like() const;
  std::size_t count() const;
};

struct DecoderState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

struct Encoded {
  Eigen::MatrixXd states;   // 2H x L: forward and backward hidden states per position
  Eigen::VectorXd context;  // decoder-sized summary of the final states
  bool truncated = false;
};

struct StepOutput {
  Eigen::VectorXd probs;
  Eigen::VectorXd attention;
  DecoderState state;
};

class GenModel {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  GenModel(Vocab vocab, ModelConfig cfg, std::uint64_t seed);

  const Vocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return cfg_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }

  // Lowercased word-like and numeric tokens mapped to ids, truncated to max_source.
  std::vector<int> source_ids(const Document& doc) const;
  std::vector<int> target_ids(std::string_view phrase) const;

  Encoded encode(std::span<const int> source) const;
  DecoderState initial_state(const Encoded& enc) const;
  StepOutput decode_step(int prev, const DecoderState& state, const Encoded& enc) const;

  // Summed teacher-forced negative log-likelihood of every target (EOS appended)
  // given one source. Gradients are added into grad when it is non-null.
  double loss(std::span<const int> source, std::span<const std::vector<int>> targets, Params* grad = nullptr,
              double grad_scale = 1.0) const;

  void save(const std::filesystem::path& path) const;
  static GenModel load(const std::filesystem::path& path);
  // Also requires the checkpoint vocabulary to have expected_vocab entries.
  static GenModel load(const std::filesystem::path& path, std::size_t expected_vocab);

 private:
  GenModel() = default;
  Vocab vocab_;
  ModelConfig cfg_;
  Params params_;
};

Vocab build_vocab(std::span<const Document> corpus, std::span<const SilverPair> silver, std::size_t max_size);

struct TrainingExample {
  std::vector<int> source;
  std::vector<std::vector<int>> targets;  // one keyphrase each, no EOS
};

// One example per document with at least one silver pair; documents keep corpus order.
std::vector<TrainingExample> make_training_examples(const GenModel& model, std::span<const Document> corpus,
                                                    std::span<const SilverPair> silver);

struct TrainConfig {
  double learning_rate = 0.001;
  double decay = 0.8;  // multiplied into the learning rate every decay_every epochs
  int decay_every = 5;
  int epochs = 10;
  int batch_docs = 4;  // documents (with all of their targets) per update
  double adagrad_init = 0.1;
  double max_grad_norm = 5.0;  // 0 disables clipping
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // epochs; 0 writes none during training

  void validate() const;
  double lr_at(int epoch) const;
};

struct EpochLog {
  int epoch = 0;
  long long step = 0;
  double mean_nll = 0;
  double lr = 0;
};

using CheckpointHook = std::function<void(int epoch, const GenModel& model)>;

std::vector<EpochLog> train(GenModel& model, std::span<const TrainingExample> data, const TrainConfig& cfg,
                            const CheckpointHook& on_checkpoint = {});

struct DecodeConfig {
  int beam_width = 20;
  int max_length = 6;  // words per keyphrase, EOS excluded
  double bias = 2.0;
  double length_penalty = 1.0;  // score = sum log p / (tokens incl. EOS)^length_penalty

  void validate() const;
};

struct Generated {
  std::vector<int> ids;  // words only, EOS excluded
  std::vector<std::string> words;
  std::string stem_key;
  double score = 0;
};

// Multiplies in-document word probabilities by factor and renormalizes. A factor
// of exactly 1 leaves the distribution untouched.
void apply_bias(Eigen::VectorXd& probs, const std::vector<bool>& in_document, double factor);

// Vocabulary entries whose stem occurs among the document's stems.
std::vector<bool> in_document_mask(const Vocab& vocab, const Document& doc);

std::vector<Generated> beam_search(const GenModel& model, std::span<const int> source,
                                   const std::vector<bool>& in_document, const DecodeConfig& cfg);
std::vector<Generated> biased_beam_search(const GenModel& model, const Document& doc, const DecodeConfig& cfg);

// Orders finished hypotheses and drops empty, UNK-bearing and duplicate-stem ones.
bool generated_before(const Generated& a, const Generated& b);

}  // namespace autokey
