#include "autokey/genmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "autokey/error.hpp"

namespace autokey {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr char kMagic[8] = {'A', 'K', 'G', 'E', 'N', 'M', 'D', 'L'};
const char* const kReservedWords[] = {"<pad>", "<bos>", "<eos>", "<unk>"};

VectorXd sigmoid(const VectorXd& z) {
  return z.unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  });
}

VectorXd softmax(const VectorXd& z) {
  VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

struct LstmStep {
  VectorXd input;  // [x; h_prev]
  VectorXd c_prev, i, f, g, o, c, tanh_c, h;
};

LstmStep lstm_forward(const MatrixXd& w, const MatrixXd& b, VectorXd input, const VectorXd& c_prev) {
  const Eigen::Index n = c_prev.size();
  LstmStep s;
  VectorXd z = w * input + b.col(0);
  s.input = std::move(input);
  s.c_prev = c_prev;
  s.i = sigmoid(z.segment(0, n));
  s.f = sigmoid(z.segment(n, n));
  s.g = z.segment(2 * n, n).array().tanh();
  s.o = sigmoid(z.segment(3 * n, n));
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  s.tanh_c = s.c.array().tanh();
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

// dh, dc: gradients arriving at h and c. Writes gradients for the input and c_prev.
void lstm_backward(const LstmStep& s, const MatrixXd& w, const VectorXd& dh, const VectorXd& dc, MatrixXd& dw,
                   MatrixXd& db, VectorXd& dinput, VectorXd& dc_prev) {
  const Eigen::Index n = s.c.size();
  VectorXd dct = dc + dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
  VectorXd dz(4 * n);
  dz.segment(0, n) = dct.cwiseProduct(s.g).array() * s.i.array() * (1.0 - s.i.array());
  dz.segment(n, n) = dct.cwiseProduct(s.c_prev).array() * s.f.array() * (1.0 - s.f.array());
  dz.segment(2 * n, n) = dct.cwiseProduct(s.i).array() * (1.0 - s.g.array().square());
  dz.segment(3 * n, n) = dh.cwiseProduct(s.tanh_c).array() * s.o.array() * (1.0 - s.o.array());
  dc_prev = dct.cwiseProduct(s.f);
  dw.noalias() += dz * s.input.transpose();
  db.col(0) += dz;
  dinput.noalias() = w.transpose() * dz;
}

VectorXd concat(std::initializer_list<const VectorXd*> parts) {
  Eigen::Index n = 0;
  for (const VectorXd* p : parts) n += p->size();
  VectorXd out(n);
  n = 0;
  for (const VectorXd* p : parts) {
    out.segment(n, p->size()) = *p;
    n += p->size();
  }
  return out;
}

struct EncoderTrace {
  std::vector<LstmStep> fwd, bwd;  // bwd[t] is the backward cell at position t
  VectorXd summary;                // [fwd_last; bwd_first]
  Encoded enc;
};

struct DecoderTrace {
  LstmStep cell;
  VectorXd u;  // attn_w^T h
  VectorXd attention, attended, comb_in, features, probs;
};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error("checkpoint truncated");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  auto n = get<std::uint32_t>(in);
  if (n > (1u << 20)) throw Error("checkpoint corrupt: string length " + std::to_string(n));
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw Error("checkpoint truncated");
  return s;
}

bool id_sequence_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

Vocab Vocab::from_words(std::vector<std::string> words) {
  Vocab v;
  for (const char* r : kReservedWords) {
    v.ids_.emplace(r, static_cast<int>(v.words_.size()));
    v.words_.push_back(r);
    v.stems_.push_back("");
  }
  for (std::string& w : words) {
    if (w.empty()) throw Error("vocab: empty word");
    if (!v.ids_.emplace(w, static_cast<int>(v.words_.size())).second) throw Error("vocab: duplicate word '" + w + "'");
    v.stems_.push_back(stem(w));
    v.words_.push_back(std::move(w));
  }
  return v;
}

Vocab Vocab::build(const std::unordered_map<std::string, long long>& counts, std::size_t max_size) {
  if (max_size <= static_cast<std::size_t>(kReserved)) throw Error("vocab size must exceed the reserved tokens");
  std::vector<std::pair<std::string, long long>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  for (const auto& [w, n] : items) {
    if (words.size() + kReserved >= max_size) break;
    words.push_back(w);
  }
  return from_words(std::move(words));
}

int Vocab::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnk : it->second;
}

Params Params::zeros_like() const {
  Params z = *this;
  z.for_each([](const char*, MatrixXd& m) { m.setZero(); });
  return z;
}

std::size_t Params::count() const {
  std::size_t n = 0;
  for_each([&](const char*, const MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

GenModel::GenModel(Vocab vocab, ModelConfig cfg, std::uint64_t seed) : vocab_(std::move(vocab)), cfg_(cfg) {
  if (cfg_.emb_dim <= 0 || cfg_.hidden <= 0 || cfg_.max_source <= 0) throw Error("genmodel: sizes must be positive");
  const int v = static_cast<int>(vocab_.size());
  const int e = cfg_.emb_dim, h = cfg_.hidden;
  Params& p = params_;
  p.embedding.resize(e, v);
  p.enc_fwd_w.resize(4 * h, e + h);
  p.enc_fwd_b.resize(4 * h, 1);
  p.enc_bwd_w.resize(4 * h, e + h);
  p.enc_bwd_b.resize(4 * h, 1);
  p.bridge_w.resize(h, 2 * h);
  p.bridge_b.resize(h, 1);
  p.dec_w.resize(4 * h, e + 2 * h);
  p.dec_b.resize(4 * h, 1);
  p.attn_w.resize(h, 2 * h);
  p.comb_w.resize(h, 3 * h);
  p.comb_b.resize(h, 1);
  p.out_w.resize(v, h);
  p.out_b.resize(v, 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  p.for_each([&](const char*, MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = uni(rng);
    }
  });
}

std::vector<int> GenModel::source_ids(const Document& doc) const {
  std::vector<int> ids;
  for (const Token& t : doc.tokens) {
    if (!t.is_wordlike && !(t.lower.size() && std::isdigit(static_cast<unsigned char>(t.lower[0])))) continue;
    ids.push_back(vocab_.id(t.lower));
  }
  return ids;
}

std::vector<int> GenModel::target_ids(std::string_view phrase) const {
  std::vector<int> ids;
  for (const Token& t : tokenize(phrase)) {
    if (t.is_wordlike) ids.push_back(vocab_.id(t.lower));
  }
  return ids;
}

namespace {

EncoderTrace run_encoder(const Params& p, const ModelConfig& cfg, std::span<const int> source) {
  if (source.empty()) throw Error("encode: empty input");
  EncoderTrace tr;
  const std::size_t n = std::min(source.size(), static_cast<std::size_t>(cfg.max_source));
  tr.enc.truncated = n < source.size();
  const Eigen::Index h = cfg.hidden;
  tr.fwd.reserve(n);
  tr.bwd.resize(n);
  VectorXd hs = VectorXd::Zero(h), cs = VectorXd::Zero(h);
  for (std::size_t t = 0; t < n; ++t) {
    VectorXd x = p.embedding.col(source[t]);
    tr.fwd.push_back(lstm_forward(p.enc_fwd_w, p.enc_fwd_b, concat({&x, &hs}), cs));
    hs = tr.fwd.back().h;
    cs = tr.fwd.back().c;
  }
  hs.setZero();
  cs.setZero();
  for (std::size_t k = n; k-- > 0;) {
    VectorXd x = p.embedding.col(source[k]);
    tr.bwd[k] = lstm_forward(p.enc_bwd_w, p.enc_bwd_b, concat({&x, &hs}), cs);
    hs = tr.bwd[k].h;
    cs = tr.bwd[k].c;
  }
  tr.enc.states.resize(2 * h, static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    tr.enc.states.col(static_cast<Eigen::Index>(t)) << tr.fwd[t].h, tr.bwd[t].h;
  }
  tr.summary = concat({&tr.fwd.back().h, &tr.bwd.front().h});
  tr.enc.context = (p.bridge_w * tr.summary + p.bridge_b.col(0)).array().tanh();
  return tr;
}

DecoderTrace run_decoder_step(const Params& p, int prev, const DecoderState& state, const Encoded& enc) {
  DecoderTrace tr;
  VectorXd x = p.embedding.col(prev);
  tr.cell = lstm_forward(p.dec_w, p.dec_b, concat({&x, &enc.context, &state.h}), state.c);
  tr.u = p.attn_w.transpose() * tr.cell.h;
  tr.attention = softmax(enc.states.transpose() * tr.u);
  tr.attended = enc.states * tr.attention;
  tr.comb_in = concat({&tr.cell.h, &tr.attended});
  tr.features = (p.comb_w * tr.comb_in + p.comb_b.col(0)).array().tanh();
  tr.probs = softmax(p.out_w * tr.features + p.out_b.col(0));
  return tr;
}

}  // namespace

Encoded GenModel::encode(std::span<const int> source) const { return run_encoder(params_, cfg_, source).enc; }

DecoderState GenModel::initial_state(const Encoded& enc) const {
  return {enc.context, VectorXd::Zero(cfg_.hidden)};
}

StepOutput GenModel::decode_step(int prev, const DecoderState& state, const Encoded& enc) const {
  DecoderTrace tr = run_decoder_step(params_, prev, state, enc);
  return {std::move(tr.probs), std::move(tr.attention), {tr.cell.h, tr.cell.c}};
}

double GenModel::loss(std::span<const int> source, std::span<const std::vector<int>> targets, Params* grad,
                      double grad_scale) const {
  const Params& p = params_;
  const Eigen::Index h = cfg_.hidden, e = cfg_.emb_dim;
  EncoderTrace enc = run_encoder(p, cfg_, source);
  const Eigen::Index n = enc.enc.states.cols();

  MatrixXd d_states;
  VectorXd d_context;
  if (grad) {
    d_states = MatrixXd::Zero(2 * h, n);
    d_context = VectorXd::Zero(h);
  }

  double total = 0;
  std::vector<DecoderTrace> steps;
  for (const std::vector<int>& target : targets) {
    steps.clear();
    DecoderState st = initial_state(enc.enc);
    int prev = Vocab::kBos;
    for (std::size_t t = 0; t <= target.size(); ++t) {
      const int y = t < target.size() ? target[t] : Vocab::kEos;
      steps.push_back(run_decoder_step(p, prev, st, enc.enc));
      total -= std::log(steps.back().probs[y]);
      st = {steps.back().cell.h, steps.back().cell.c};
      prev = y;
    }
    if (!grad) continue;

    VectorXd dh_next = VectorXd::Zero(h), dc_next = VectorXd::Zero(h);
    VectorXd dinput, dc_prev;
    for (std::size_t t = steps.size(); t-- > 0;) {
      const DecoderTrace& s = steps[t];
      const int y = t < target.size() ? target[t] : Vocab::kEos;
      const int in_tok = t == 0 ? Vocab::kBos : target[t - 1];
      VectorXd dlogits = s.probs * grad_scale;
      dlogits[y] -= grad_scale;
      grad->out_w.noalias() += dlogits * s.features.transpose();
      grad->out_b.col(0) += dlogits;
      VectorXd dpre = (p.out_w.transpose() * dlogits).cwiseProduct((1.0 - s.features.array().square()).matrix());
      grad->comb_w.noalias() += dpre * s.comb_in.transpose();
      grad->comb_b.col(0) += dpre;
      VectorXd dcomb = p.comb_w.transpose() * dpre;
      VectorXd dh = dcomb.head(h) + dh_next;
      VectorXd dattended = dcomb.tail(2 * h);
      d_states.noalias() += dattended * s.attention.transpose();
      VectorXd da = enc.enc.states.transpose() * dattended;
      VectorXd de = s.attention.cwiseProduct((da.array() - s.attention.dot(da)).matrix());
      d_states.noalias() += s.u * de.transpose();
      VectorXd du = enc.enc.states * de;
      grad->attn_w.noalias() += s.cell.h * du.transpose();
      dh.noalias() += p.attn_w * du;
      lstm_backward(s.cell, p.dec_w, dh, dc_next, grad->dec_w, grad->dec_b, dinput, dc_prev);
      grad->embedding.col(in_tok) += dinput.head(e);
      d_context += dinput.segment(e, h);
      dh_next = dinput.tail(h);
      dc_next = dc_prev;
    }
    d_context += dh_next;
  }
  if (!grad) return total;

  VectorXd dpre = d_context.cwiseProduct((1.0 - enc.enc.context.array().square()).matrix());
  grad->bridge_w.noalias() += dpre * enc.summary.transpose();
  grad->bridge_b.col(0) += dpre;
  VectorXd dsummary = p.bridge_w.transpose() * dpre;
  d_states.col(n - 1).head(h) += dsummary.head(h);
  d_states.col(0).tail(h) += dsummary.tail(h);

  VectorXd dh_carry = VectorXd::Zero(h), dc_carry = VectorXd::Zero(h);
  VectorXd dinput, dc_prev;
  for (Eigen::Index t = n; t-- > 0;) {
    VectorXd dh = d_states.col(t).head(h) + dh_carry;
    lstm_backward(enc.fwd[t], p.enc_fwd_w, dh, dc_carry, grad->enc_fwd_w, grad->enc_fwd_b, dinput, dc_prev);
    grad->embedding.col(source[t]) += dinput.head(e);
    dh_carry = dinput.tail(h);
    dc_carry = dc_prev;
  }
  dh_carry.setZero();
  dc_carry.setZero();
  for (Eigen::Index t = 0; t < n; ++t) {
    VectorXd dh = d_states.col(t).tail(h) + dh_carry;
    lstm_backward(enc.bwd[t], p.enc_bwd_w, dh, dc_carry, grad->enc_bwd_w, grad->enc_bwd_b, dinput, dc_prev);
    grad->embedding.col(source[t]) += dinput.head(e);
    dh_carry = dinput.tail(h);
    dc_carry = dc_prev;
  }
  return total;
}

void GenModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vocab_.size()));
  put<std::int32_t>(out, cfg_.emb_dim);
  put<std::int32_t>(out, cfg_.hidden);
  put<std::int32_t>(out, cfg_.max_source);
  for (std::size_t i = Vocab::kReserved; i < vocab_.size(); ++i) put_string(out, vocab_.words()[i]);
  std::uint32_t tensors = 0;
  params_.for_each([&](const char*, const MatrixXd&) { ++tensors; });
  put<std::uint32_t>(out, tensors);
  params_.for_each([&](const char* name, const MatrixXd& m) {
    put_string(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  });
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

GenModel GenModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(path.string() + " is not a genmodel checkpoint");
  }
  auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw Error("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                std::to_string(kFormatVersion) + ")");
  }
  auto vocab_size = get<std::uint32_t>(in);
  if (vocab_size < static_cast<std::uint32_t>(Vocab::kReserved)) throw Error("checkpoint corrupt: vocab size");
  GenModel m;
  m.cfg_.emb_dim = get<std::int32_t>(in);
  m.cfg_.hidden = get<std::int32_t>(in);
  m.cfg_.max_source = get<std::int32_t>(in);
  if (m.cfg_.emb_dim <= 0 || m.cfg_.hidden <= 0 || m.cfg_.max_source <= 0) throw Error("checkpoint corrupt: config");
  std::vector<std::string> words;
  for (std::uint32_t i = Vocab::kReserved; i < vocab_size; ++i) words.push_back(get_string(in));
  m.vocab_ = Vocab::from_words(std::move(words));
  GenModel shaped(m.vocab_, m.cfg_, 0);
  m.params_ = shaped.params_;
  auto tensors = get<std::uint32_t>(in);
  std::map<std::string, MatrixXd*> slots;
  m.params_.for_each([&](const char* name, MatrixXd& t) { slots.emplace(name, &t); });
  if (tensors != slots.size()) throw Error("checkpoint has " + std::to_string(tensors) + " tensors, expected " +
                                           std::to_string(slots.size()));
  for (std::uint32_t k = 0; k < tensors; ++k) {
    std::string name = get_string(in);
    auto it = slots.find(name);
    if (it == slots.end()) throw Error("checkpoint has unknown tensor '" + name + "'");
    auto rows = get<std::uint32_t>(in);
    auto cols = get<std::uint32_t>(in);
    MatrixXd& t = *it->second;
    if (rows != t.rows() || cols != t.cols()) {
      throw Error("checkpoint tensor '" + name + "' is " + std::to_string(rows) + "x" + std::to_string(cols) +
                  ", expected " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    }
    if (!in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw Error("checkpoint truncated");
    }
    if (!t.allFinite()) throw Error("checkpoint tensor '" + name + "' has non-finite values");
    slots.erase(it);
  }
  return m;
}

GenModel GenModel::load(const std::filesystem::path& path, std::size_t expected_vocab) {
  GenModel m = load(path);
  if (m.vocab_.size() != expected_vocab) {
    throw Error("checkpoint vocab size " + std::to_string(m.vocab_.size()) + " does not match expected vocab size " +
                std::to_string(expected_vocab));
  }
  return m;
}

Vocab build_vocab(std::span<const Document> corpus, std::span<const SilverPair> silver, std::size_t max_size) {
  std::unordered_map<std::string, long long> counts;
  for (const Document& doc : corpus) {
    for (const Token& t : doc.tokens) {
      if (t.is_wordlike || (t.lower.size() && std::isdigit(static_cast<unsigned char>(t.lower[0])))) ++counts[t.lower];
    }
  }
  for (const SilverPair& p : silver) {
    for (const Token& t : tokenize(p.surface)) {
      if (t.is_wordlike) ++counts[t.lower];
    }
  }
  return Vocab::build(counts, max_size);
}

std::vector<TrainingExample> make_training_examples(const GenModel& model, std::span<const Document> corpus,
                                                    std::span<const SilverPair> silver) {
  std::unordered_map<std::string, std::vector<const SilverPair*>> by_doc;
  for (const SilverPair& p : silver) by_doc[p.doc_id].push_back(&p);
  std::vector<TrainingExample> out;
  for (const Document& doc : corpus) {
    auto it = by_doc.find(doc.id);
    if (it == by_doc.end()) continue;
    TrainingExample ex;
    ex.source = model.source_ids(doc);
    if (ex.source.empty()) continue;
    for (const SilverPair* p : it->second) {
      auto ids = model.target_ids(p->surface);
      if (!ids.empty()) ex.targets.push_back(std::move(ids));
    }
    if (!ex.targets.empty()) out.push_back(std::move(ex));
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw Error("train: learning rate must be positive");
  if (!(decay > 0) || decay_every <= 0) throw Error("train: bad decay schedule");
  if (epochs <= 0) throw Error("train: epochs must be positive");
  if (batch_docs <= 0) throw Error("train: batch size must be positive");
  if (!(adagrad_init >= 0) || !(max_grad_norm >= 0)) throw Error("train: bad optimizer settings");
  if (checkpoint_every < 0) throw Error("train: checkpoint interval must be non-negative");
}

double TrainConfig::lr_at(int epoch) const { return learning_rate * std::pow(decay, epoch / decay_every); }

std::vector<EpochLog> train(GenModel& model, std::span<const TrainingExample> data, const TrainConfig& cfg,
                            const CheckpointHook& on_checkpoint) {
  cfg.validate();
  if (data.empty()) throw Error("train: empty training set");
  std::mt19937_64 rng(cfg.seed);
  Params accum = model.params().zeros_like();
  accum.for_each([&](const char*, MatrixXd& m) { m.setConstant(cfg.adagrad_init); });
  Params grad = model.params().zeros_like();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochLog> log;
  long long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.lr_at(epoch);
    double epoch_nll = 0;
    long long epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_docs)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_docs));
      long long tokens = 0;
      for (std::size_t k = start; k < end; ++k) {
        for (const auto& t : data[order[k]].targets) tokens += static_cast<long long>(t.size()) + 1;
      }
      grad.for_each([](const char*, MatrixXd& m) { m.setZero(); });
      for (std::size_t k = start; k < end; ++k) {
        const TrainingExample& ex = data[order[k]];
        epoch_nll += model.loss(ex.source, ex.targets, &grad, 1.0 / static_cast<double>(tokens));
      }
      epoch_tokens += tokens;
      if (cfg.max_grad_norm > 0) {
        double sq = 0;
        grad.for_each([&](const char*, const MatrixXd& m) { sq += m.squaredNorm(); });
        const double norm = std::sqrt(sq);
        if (norm > cfg.max_grad_norm) {
          grad.for_each([&](const char*, MatrixXd& m) { m *= cfg.max_grad_norm / norm; });
        }
      }
      std::vector<MatrixXd*> g, a;
      grad.for_each([&](const char*, MatrixXd& m) { g.push_back(&m); });
      accum.for_each([&](const char*, MatrixXd& m) { a.push_back(&m); });
      std::size_t i = 0;
      model.params().for_each([&](const char*, MatrixXd& w) {
        a[i]->array() += g[i]->array().square();
        w.array() -= lr * g[i]->array() / (a[i]->array().sqrt() + 1e-10);
        ++i;
      });
      ++step;
    }
    log.push_back({epoch + 1, step, epoch_nll / static_cast<double>(epoch_tokens), lr});
    if (on_checkpoint && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
      on_checkpoint(epoch + 1, model);
    }
  }
  return log;
}

void DecodeConfig::validate() const {
  if (beam_width < 1) throw Error("decode: beam width must be at least 1");
  if (max_length < 1) throw Error("decode: max length must be at least 1");
  if (!(bias >= 1.0)) throw Error("decode: bias factor must be at least 1");
  if (!(length_penalty >= 0)) throw Error("decode: length penalty must be non-negative");
}

void apply_bias(VectorXd& probs, const std::vector<bool>& in_document, double factor) {
  if (factor == 1.0) return;
  double z = 0;
  for (Eigen::Index w = 0; w < probs.size(); ++w) {
    if (in_document[static_cast<std::size_t>(w)]) probs[w] *= factor;
    z += probs[w];
  }
  probs /= z;
}

std::vector<bool> in_document_mask(const Vocab& vocab, const Document& doc) {
  std::vector<bool> mask(vocab.size(), false);
  for (std::size_t i = Vocab::kReserved; i < vocab.size(); ++i) mask[i] = doc.has_stem(vocab.stem_of(static_cast<int>(i)));
  return mask;
}

bool generated_before(const Generated& a, const Generated& b) {
  if (a.score != b.score) return a.score > b.score;
  return id_sequence_less(a.ids, b.ids);
}

std::vector<Generated> beam_search(const GenModel& model, std::span<const int> source,
                                   const std::vector<bool>& in_document, const DecodeConfig& cfg) {
  cfg.validate();
  if (in_document.size() != model.vocab().size()) throw Error("beam search: mask size does not match vocab");
  const Encoded enc = model.encode(source);
  const int vocab_size = static_cast<int>(model.vocab().size());

  struct Hyp {
    std::vector<int> ids;
    double logp = 0;
    DecoderState state;
  };
  struct Expansion {
    std::size_t parent;
    int token;
    double logp;
  };
  std::vector<Hyp> live{{{}, 0.0, model.initial_state(enc)}};
  std::vector<Hyp> finished;

  for (int step = 0; step <= cfg.max_length && !live.empty(); ++step) {
    std::vector<Expansion> cands;
    std::vector<DecoderState> next_states;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const Hyp& hyp = live[k];
      StepOutput out = model.decode_step(hyp.ids.empty() ? Vocab::kBos : hyp.ids.back(), hyp.state, enc);
      apply_bias(out.probs, in_document, cfg.bias);
      next_states.push_back(std::move(out.state));
      for (int w = Vocab::kEos; w < vocab_size; ++w) {
        if (step == cfg.max_length && w != Vocab::kEos) break;
        if (!(out.probs[w] > 0)) continue;
        cands.push_back({k, w, hyp.logp + std::log(out.probs[w])});
      }
    }
    auto before = [&](const Expansion& a, const Expansion& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      const auto& pa = live[a.parent].ids;
      const auto& pb = live[b.parent].ids;
      if (pa != pb) return id_sequence_less(pa, pb);
      return a.token < b.token;
    };
    const std::size_t keep = std::min(cands.size(), static_cast<std::size_t>(cfg.beam_width));
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), before);
    std::vector<Hyp> next;
    for (std::size_t k = 0; k < keep; ++k) {
      const Expansion& c = cands[k];
      Hyp h{live[c.parent].ids, c.logp, {}};
      if (c.token == Vocab::kEos) {
        finished.push_back(std::move(h));
      } else {
        h.ids.push_back(c.token);
        h.state = next_states[c.parent];
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  std::vector<Generated> out;
  for (const Hyp& h : finished) {
    if (h.ids.empty()) continue;
    if (std::find(h.ids.begin(), h.ids.end(), Vocab::kUnk) != h.ids.end()) continue;
    Generated g;
    g.ids = h.ids;
    std::vector<std::string> stems;
    for (int id : h.ids) {
      g.words.push_back(model.vocab().word(id));
      stems.push_back(model.vocab().stem_of(id));
    }
    g.stem_key = join_stems(stems);
    g.score = h.logp / std::pow(static_cast<double>(h.ids.size() + 1), cfg.length_penalty);
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), generated_before);
  std::unordered_map<std::string, bool> seen;
  std::vector<Generated> unique;
  for (Generated& g : out) {
    if (seen.emplace(g.stem_key, true).second) unique.push_back(std::move(g));
  }
  return unique;
}

std::vector<Generated> biased_beam_search(const GenModel& model, const Document& doc, const DecodeConfig& cfg) {
  std::vector<int> source = model.source_ids(doc);
  if (source.empty()) return {};
  return beam_search(model, source, in_document_mask(model.vocab(), doc), cfg);
}

}  // namespace autokey
