#include "autokey/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "autokey/error.hpp"

namespace autokey {
namespace {

constexpr char kBinaryMagic[8] = {'A', 'K', 'V', 'E', 'C', 'T', '0', '1'};

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

void EmbedConfig::validate() const {
  if (dim <= 0) throw Error("embed: dim must be positive");
  if (window <= 0) throw Error("embed: window must be positive");
  if (negatives <= 0) throw Error("embed: negatives must be positive");
  if (epochs <= 0) throw Error("embed: epochs must be positive");
  if (!(learning_rate > 0) || !(min_learning_rate > 0)) throw Error("embed: learning rates must be positive");
  if (min_count <= 0) throw Error("embed: min_count must be positive");
}

VectorTable::VectorTable(int dim) : dim_(dim) {
  if (dim <= 0) throw Error("vector table dim must be positive");
}

void VectorTable::add(const std::string& word, std::span<const double> values) {
  if (static_cast<int>(values.size()) != dim_) throw Error("vector for '" + word + "' has wrong dimension");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("vector for '" + word + "' is not finite");
  }
  if (!index_.emplace(word, words_.size()).second) throw Error("duplicate word '" + word + "'");
  words_.push_back(word);
  data_.insert(data_.end(), values.begin(), values.end());
}

const double* VectorTable::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : data_.data() + it->second * static_cast<std::size_t>(dim_);
}

Eigen::Map<const Eigen::VectorXd> VectorTable::row(std::size_t i) const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data() + i * static_cast<std::size_t>(dim_), dim_);
}

Eigen::Map<Eigen::VectorXd> VectorTable::mutable_row(std::size_t i) {
  return Eigen::Map<Eigen::VectorXd>(data_.data() + i * static_cast<std::size_t>(dim_), dim_);
}

VectorTable VectorTable::load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  long long count = -1;
  int dim = 0;
  if (!std::getline(in, line)) throw Error("missing header");
  {
    std::istringstream hs(line);
    if (!(hs >> count >> dim) || count < 0 || dim <= 0) throw Error("missing header");
  }
  VectorTable table(dim);
  std::vector<double> values;
  std::size_t lineno = 1;
  while (static_cast<long long>(table.size()) < count && std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) throw Error("line " + std::to_string(lineno) + ": missing word");
    values.clear();
    double v;
    while (ls >> v) values.push_back(v);
    if (!ls.eof()) throw Error("line " + std::to_string(lineno) + ": malformed number");
    if (static_cast<int>(values.size()) != dim) {
      throw Error("line " + std::to_string(lineno) + ": expected " + std::to_string(dim) + " values");
    }
    table.add(word, values);
  }
  if (static_cast<long long>(table.size()) != count) {
    throw Error("expected " + std::to_string(count) + " vectors, found " + std::to_string(table.size()));
  }
  return table;
}

void VectorTable::save_text(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << words_.size() << ' ' << dim_ << '\n';
  char buf[32];
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i];
    const double* r = data_.data() + i * static_cast<std::size_t>(dim_);
    for (int k = 0; k < dim_; ++k) {
      std::snprintf(buf, sizeof buf, " %.17g", r[k]);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void VectorTable::save_binary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  put_u64(static_cast<std::uint64_t>(dim_));
  put_u64(words_.size());
  for (const std::string& w : words_) {
    put_u64(w.size());
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  out.write(reinterpret_cast<const char*>(data_.data()), static_cast<std::streamsize>(data_.size() * sizeof(double)));
  if (!out) throw Error("write failed: " + path.string());
}

VectorTable VectorTable::load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kBinaryMagic, sizeof magic) != 0) {
    throw Error(path.string() + ": not a vector cache");
  }
  auto get_u64 = [&]() {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(path.string() + ": truncated");
    return v;
  };
  auto dim = get_u64();
  auto count = get_u64();
  if (dim == 0 || dim > (1u << 20)) throw Error(path.string() + ": bad dimension");
  VectorTable table(static_cast<int>(dim));
  std::vector<std::string> words(count);
  for (auto& w : words) {
    auto len = get_u64();
    if (len > (1u << 20)) throw Error(path.string() + ": bad word length");
    w.resize(len);
    if (!in.read(w.data(), static_cast<std::streamsize>(len))) throw Error(path.string() + ": truncated");
  }
  std::vector<double> row(dim);
  for (const auto& w : words) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dim * sizeof(double)))) {
      throw Error(path.string() + ": truncated");
    }
    table.add(w, row);
  }
  return table;
}

VectorTable train_skipgram(std::span<const Document> corpus, const EmbedConfig& cfg, std::uint64_t seed,
                           std::vector<double>* epoch_loss) {
  cfg.validate();
  if (corpus.empty()) throw Error("embed: empty corpus");

  std::map<std::string, long long> counts;
  for (const Document& doc : corpus) {
    for (const Token& t : doc.tokens) {
      if (t.is_wordlike) ++counts[t.lower];
    }
  }
  std::vector<std::pair<std::string, long long>> vocab;
  for (auto& [w, c] : counts) {
    if (c >= cfg.min_count) vocab.emplace_back(w, c);
  }
  if (vocab.empty()) throw Error("embed: corpus has no eligible tokens");
  std::stable_sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::unordered_map<std::string, int> ids;
  for (std::size_t i = 0; i < vocab.size(); ++i) ids.emplace(vocab[i].first, static_cast<int>(i));

  std::vector<std::vector<int>> sentences;
  long long total_words = 0;
  for (const Document& doc : corpus) {
    std::vector<int> s;
    for (const Token& t : doc.tokens) {
      if (!t.is_wordlike) continue;
      auto it = ids.find(t.lower);
      if (it != ids.end()) s.push_back(it->second);
    }
    total_words += static_cast<long long>(s.size());
    if (!s.empty()) sentences.push_back(std::move(s));
  }

  // Negative sampling distribution: unigram^0.75.
  std::vector<double> cumulative(vocab.size());
  double acc = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    cumulative[i] = acc;
  }
  for (double& c : cumulative) c /= acc;

  const int dim = cfg.dim;
  const std::size_t V = vocab.size();
  std::mt19937_64 rng(seed);
  std::vector<double> input(V * static_cast<std::size_t>(dim));
  std::vector<double> output(V * static_cast<std::size_t>(dim), 0.0);
  for (double& x : input) x = (uniform01(rng) - 0.5) / dim;

  auto sample_negative = [&]() {
    double u = uniform01(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), V - 1));
  };

  std::vector<double> grad(static_cast<std::size_t>(dim));
  const double total_steps = static_cast<double>(total_words) * cfg.epochs + 1;
  long long processed = 0;
  if (epoch_loss) epoch_loss->clear();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0;
    long long pairs = 0;
    for (const auto& sentence : sentences) {
      const int n = static_cast<int>(sentence.size());
      for (int pos = 0; pos < n; ++pos, ++processed) {
        double lr = cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * (processed / total_steps);
        lr = std::max(lr, cfg.min_learning_rate);
        int reduced = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.window));
        int span = cfg.window - reduced;
        const int center = sentence[static_cast<std::size_t>(pos)];
        for (int off = -span; off <= span; ++off) {
          int cpos = pos + off;
          if (off == 0 || cpos < 0 || cpos >= n) continue;
          const int context = sentence[static_cast<std::size_t>(cpos)];
          double* in = input.data() + static_cast<std::size_t>(context) * dim;
          std::fill(grad.begin(), grad.end(), 0.0);
          for (int d = 0; d <= cfg.negatives; ++d) {
            int target;
            double label;
            if (d == 0) {
              target = center;
              label = 1.0;
            } else {
              target = sample_negative();
              if (target == center) continue;
              label = 0.0;
            }
            double* out = output.data() + static_cast<std::size_t>(target) * dim;
            double dot = 0;
            for (int k = 0; k < dim; ++k) dot += in[k] * out[k];
            loss_sum -= label > 0 ? log_sigmoid(dot) : log_sigmoid(-dot);
            double g = (label - sigmoid(dot)) * lr;
            for (int k = 0; k < dim; ++k) grad[static_cast<std::size_t>(k)] += g * out[k];
            for (int k = 0; k < dim; ++k) out[k] += g * in[k];
          }
          for (int k = 0; k < dim; ++k) in[k] += grad[static_cast<std::size_t>(k)];
          ++pairs;
        }
      }
    }
    if (epoch_loss) epoch_loss->push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }

  VectorTable table(dim);
  for (std::size_t i = 0; i < V; ++i) {
    table.add(vocab[i].first, std::span<const double>(input.data() + i * static_cast<std::size_t>(dim),
                                                      static_cast<std::size_t>(dim)));
  }
  return table;
}

Embedding embed_phrase(const VectorTable& table, const CandidatePhrase& phrase) {
  Embedding e{Eigen::VectorXd::Zero(table.dim()), true};
  int n = 0;
  for (const Token& t : phrase.tokens) {
    const double* v = table.find(t.lower);
    if (!v) continue;
    e.vec += Eigen::Map<const Eigen::VectorXd>(v, table.dim());
    ++n;
  }
  if (n > 0) {
    e.vec /= n;
    e.oov = false;
  }
  return e;
}

Embedding embed_document(const VectorTable& table, const Document& doc, const IdfLookup& idf) {
  Embedding e{Eigen::VectorXd::Zero(table.dim()), true};
  Eigen::VectorXd plain = Eigen::VectorXd::Zero(table.dim());
  double total = 0;
  int n = 0;
  for (const Token& t : doc.tokens) {
    if (!t.is_wordlike || t.is_stopword) continue;
    const double* v = table.find(t.lower);
    if (!v) continue;
    Eigen::Map<const Eigen::VectorXd> row(v, table.dim());
    double w = idf(t.stem);
    e.vec += w * row;
    plain += row;
    total += w;
    ++n;
  }
  if (n == 0) return e;
  e.oov = false;
  if (total > 0) {
    e.vec /= total;
  } else {
    e.vec = plain / n;
  }
  return e;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  return a.dot(b) / (na * nb);
}

}  // namespace autokey
