#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "autokey/candidates.hpp"
#include "autokey/textproc.hpp"

namespace autokey {

struct EmbedConfig {
  int dim = 300;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;  // decays linearly to min_learning_rate
  double min_learning_rate = 1e-4;
  int min_count = 1;

  void validate() const;
};

// A word vector table. Rows are finite; lookups of unknown words return null.
class VectorTable {
 public:
  VectorTable() = default;
  explicit VectorTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  void add(const std::string& word, std::span<const double> values);
  const double* find(const std::string& word) const;
  Eigen::Map<const Eigen::VectorXd> row(std::size_t i) const;
  Eigen::Map<Eigen::VectorXd> mutable_row(std::size_t i);

  // "<count> <dim>" header, then "<word> <v1> ... <vdim>" per line.
  static VectorTable load_text(const std::filesystem::path& path);
  void save_text(const std::filesystem::path& path) const;
  static VectorTable load_binary(const std::filesystem::path& path);
  void save_binary(const std::filesystem::path& path) const;

 private:
  int dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

struct Embedding {
  Eigen::VectorXd vec;
  bool oov = false;  // no in-vocabulary token contributed
};

VectorTable train_skipgram(std::span<const Document> corpus, const EmbedConfig& cfg, std::uint64_t seed,
                           std::vector<double>* epoch_loss = nullptr);

// Unweighted mean of the token vectors found in the table.
Embedding embed_phrase(const VectorTable& table, const CandidatePhrase& phrase);

// idf-weighted mean over word-like non-stopword tokens. Falls back to a plain
// mean when every weight is zero.
using IdfLookup = std::function<double(const std::string& stem)>;
Embedding embed_document(const VectorTable& table, const Document& doc, const IdfLookup& idf);

// 0 when either vector has zero norm.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace autokey
