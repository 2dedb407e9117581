#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "autokey/error.hpp"
#include "autokey/genmodel.hpp"
#include "doctest.h"
#include "gen_oracles.hpp"

using namespace autokey;

namespace {

std::vector<std::string> tiny_words() { return {"graph", "neural", "network", "networks"}; }

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("autokey_test_" + name);
}

}  // namespace

TEST_CASE("vocab order and reserved ids") {
  std::unordered_map<std::string, long long> counts{{"b", 3}, {"a", 3}, {"c", 5}, {"d", 1}};
  Vocab v = Vocab::build(counts, 7);
  REQUIRE(v.size() == 7);
  CHECK(v.word(Vocab::kPad) == "<pad>");
  CHECK(v.word(Vocab::kEos) == "<eos>");
  CHECK(v.word(4) == "c");
  CHECK(v.word(5) == "a");
  CHECK(v.word(6) == "b");
  CHECK(v.id("d") == Vocab::kUnk);
  CHECK_THROWS_AS(Vocab::build(counts, 4), Error);
  CHECK_THROWS_AS(Vocab::from_words({"x", "x"}), Error);
}

TEST_CASE("encode shapes, determinism and truncation") {
  std::mt19937_64 rng(3);
  GenModel m = oracle::random_model(rng, tiny_words(), 4, 3, 0.3);
  std::vector<int> src{4, 5, 6, 7, 5};
  Encoded a = m.encode(src), b = m.encode(src);
  CHECK(a.states.cols() == 5);
  CHECK(a.states.rows() == 6);
  CHECK(a.context.size() == 3);
  CHECK((a.states.array() == b.states.array()).all());
  CHECK_FALSE(a.truncated);
  CHECK_THROWS_AS(m.encode(std::vector<int>{}), Error);

  std::vector<int> long_src(100, 4);
  Encoded t = m.encode(long_src);
  CHECK(t.truncated);
  CHECK(t.states.cols() == 64);
}

TEST_CASE("encoder directions mirror each other") {
  // With both directions sharing weights, the backward states of x are the
  // forward states of reverse(x), so attention over a reversed input is the
  // reversed pattern whenever the query only sees the mirrored halves.
  std::mt19937_64 rng(11);
  GenModel m = oracle::random_model(rng, tiny_words(), 4, 3, 0.5);
  m.params().enc_bwd_w = m.params().enc_fwd_w;
  m.params().enc_bwd_b = m.params().enc_fwd_b;
  std::vector<int> x{4, 6, 5, 7, 7, 4};
  std::vector<int> r(x.rbegin(), x.rend());
  Encoded ex = m.encode(x), er = m.encode(r);
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    CHECK(ex.states.col(t).head(3).isApprox(er.states.col(n - 1 - t).tail(3), 1e-12));
  }

  // A query that weighs both halves equally gives mirrored attention.
  m.params().attn_w.leftCols(3) = m.params().attn_w.rightCols(3);
  DecoderState s{Eigen::VectorXd::Constant(3, 0.4), Eigen::VectorXd::Zero(3)};
  Encoded sx = ex, sr = er;
  sr.context = sx.context;
  auto ox = m.decode_step(Vocab::kBos, s, sx);
  auto orv = m.decode_step(Vocab::kBos, s, sr);
  for (Eigen::Index t = 0; t < n; ++t) CHECK(ox.attention[t] == doctest::Approx(orv.attention[n - 1 - t]));
}

TEST_CASE("decode_step normalizes") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    GenModel m = oracle::random_model(rng, tiny_words(), 4, 4, 1.0);
    std::vector<int> src{4, 5, 6};
    Encoded e = m.encode(src);
    DecoderState s = m.initial_state(e);
    for (int step = 0; step < 4; ++step) {
      auto out = m.decode_step(step == 0 ? Vocab::kBos : 5, s, e);
      CHECK(out.probs.sum() == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(out.attention.sum() == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(out.probs.minCoeff() >= 0.0);
      s = out.state;
    }
  }

  GenModel m(Vocab::from_words(tiny_words()), ModelConfig{4, 4, 16}, 1);
  m.params().out_w.setZero();
  m.params().out_b.setZero();
  Encoded e = m.encode(std::vector<int>{4, 5});
  auto out = m.decode_step(Vocab::kBos, m.initial_state(e), e);
  for (Eigen::Index w = 0; w < out.probs.size(); ++w) CHECK(out.probs[w] == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    GenModel m = oracle::random_model(rng, tiny_words(), 4, 4, 0.5);
    std::vector<int> src{4, 7, 5, 3, 6};
    std::vector<std::vector<int>> targets{{5, 6}, {7}, {4, 3, 6}};
    auto groups = oracle::gradient_check(m, src, targets);
    CHECK(groups.size() == 14);
    for (const auto& g : groups) {
      INFO(g.name);
      CHECK(g.max_rel < 1e-4);
    }
  }
}

TEST_CASE("beam search equals exhaustive enumeration") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    GenModel m = oracle::random_model(rng, tiny_words(), 3, 3, 1.0);
    std::vector<int> src{4, 6, 4};
    std::vector<bool> mask{false, false, false, false, true, false, true, true};
    for (double bias : {1.0, 2.0}) {
      DecodeConfig cfg;
      cfg.beam_width = 216;
      cfg.max_length = 3;
      cfg.bias = bias;
      auto beam = beam_search(m, src, mask, cfg);
      auto exact = oracle::exhaustive_decode(m, src, mask, cfg);
      CHECK(oracle::same_generated(beam, exact));
    }
  }
}

TEST_CASE("bias properties") {
  Eigen::VectorXd p(6);
  p << 0.1, 0.2, 0.05, 0.3, 0.15, 0.2;
  std::vector<bool> mask{false, true, false, true, true, false};
  Eigen::VectorXd q = p;
  apply_bias(q, mask, 1.0);
  CHECK((q.array() == p.array()).all());
  apply_bias(q, mask, 2.0);
  CHECK(q.sum() == doctest::Approx(1.0));
  const double z = 0.1 + 0.4 + 0.05 + 0.6 + 0.3 + 0.2;
  CHECK(q[1] == doctest::Approx(0.4 / z));
  CHECK(q[0] == doctest::Approx(0.1 / z));
  CHECK(q[3] > q[4]);
  CHECK(q[5] > q[0]);

  std::mt19937_64 rng(9);
  GenModel m = oracle::random_model(rng, tiny_words(), 3, 3, 1.0);
  std::vector<int> src{4, 5};
  std::vector<bool> none(m.vocab().size(), false), some{false, false, false, false, true, true, false, false};
  DecodeConfig cfg;
  cfg.bias = 1.0;
  auto plain = beam_search(m, src, none, cfg);
  auto neutral = beam_search(m, src, some, cfg);
  CHECK(oracle::same_generated(plain, neutral));

  DecodeConfig bad;
  bad.bias = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = DecodeConfig{};
  bad.beam_width = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("biased search favours document words") {
  std::mt19937_64 rng(4);
  GenModel m = oracle::random_model(rng, tiny_words(), 3, 3, 0.2);
  Document doc = Document::from_text("d", "", "graph graph");
  auto mask = in_document_mask(m.vocab(), doc);
  CHECK(mask[static_cast<std::size_t>(m.vocab().id("graph"))]);
  CHECK_FALSE(mask[static_cast<std::size_t>(m.vocab().id("neural"))]);

  DecodeConfig cfg;
  cfg.max_length = 1;
  cfg.bias = 1.0;
  auto plain = biased_beam_search(m, doc, cfg);
  cfg.bias = 50.0;
  auto biased = biased_beam_search(m, doc, cfg);
  REQUIRE_FALSE(biased.empty());
  CHECK(biased.front().words == std::vector<std::string>{"graph"});
  for (const auto& g : plain) CHECK(g.ids.size() == 1);
}

TEST_CASE("dedup by stem and unk filtering") {
  std::mt19937_64 rng(21);
  GenModel m = oracle::random_model(rng, tiny_words(), 3, 3, 1.0);
  DecodeConfig cfg;
  cfg.max_length = 2;
  cfg.beam_width = 100;
  auto out = beam_search(m, std::vector<int>{4, 5}, std::vector<bool>(8, false), cfg);
  std::set<std::string> keys;
  for (const auto& g : out) {
    CHECK(keys.insert(g.stem_key).second);
    CHECK_FALSE(g.ids.empty());
    CHECK(std::count(g.ids.begin(), g.ids.end(), Vocab::kUnk) == 0);
  }
  CHECK_FALSE(keys.count("networks"));
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].score >= out[i].score);
}

TEST_CASE("training reduces loss and follows the schedule") {
  TrainConfig cfg;
  CHECK(cfg.lr_at(0) == 0.001);
  CHECK(cfg.lr_at(4) == 0.001);
  CHECK(cfg.lr_at(5) == doctest::Approx(0.001 * 0.8));
  CHECK(cfg.lr_at(10) == doctest::Approx(0.001 * 0.64));

  std::vector<std::string> words;
  for (int i = 0; i < 12; ++i) words.push_back("w" + std::string(1, static_cast<char>('a' + i)));
  std::mt19937_64 rng(8);
  GenModel m(Vocab::from_words(words), ModelConfig{8, 8, 32}, 13);
  std::vector<TrainingExample> data;
  std::uniform_int_distribution<int> word(4, 15);
  for (int d = 0; d < 10; ++d) {
    TrainingExample ex;
    for (int t = 0; t < 8; ++t) ex.source.push_back(word(rng));
    for (int k = 0; k < 5; ++k) ex.targets.push_back({ex.source[k], ex.source[k + 1]});
    data.push_back(ex);
  }
  cfg.learning_rate = 0.05;
  cfg.epochs = 30;
  cfg.batch_docs = 2;
  cfg.seed = 3;
  int checkpoints = 0;
  cfg.checkpoint_every = 10;
  GenModel copy = m;
  auto log = train(m, data, cfg, [&](int epoch, const GenModel&) { checkpoints += epoch % 10 == 0; });
  REQUIRE(log.size() == 30);
  for (int e = 1; e < 5; ++e) CHECK(log[e].mean_nll < log[e - 1].mean_nll);
  CHECK(log.back().mean_nll < log.front().mean_nll);
  CHECK(log[5].lr == doctest::Approx(0.05 * 0.8));
  CHECK(log.back().step == 150);
  CHECK(checkpoints == 3);

  auto again = train(copy, data, cfg);
  CHECK(again.back().mean_nll == log.back().mean_nll);

  CHECK_THROWS_AS(train(m, std::vector<TrainingExample>{}, cfg), Error);
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(train(m, data, cfg), Error);
}

TEST_CASE("checkpoint round trip and corruption") {
  std::mt19937_64 rng(12);
  GenModel m = oracle::random_model(rng, tiny_words(), 4, 3, 0.7);
  auto p = temp_path("gen.ckpt");
  m.save(p);
  GenModel back = GenModel::load(p);
  CHECK(back.vocab().words() == m.vocab().words());
  std::vector<int> src{4, 5, 7};
  Encoded e1 = m.encode(src), e2 = back.encode(src);
  auto o1 = m.decode_step(Vocab::kBos, m.initial_state(e1), e1);
  auto o2 = back.decode_step(Vocab::kBos, back.initial_state(e2), e2);
  CHECK((o1.probs.array() == o2.probs.array()).all());

  CHECK_THROWS_WITH_AS(GenModel::load(p, 10), "checkpoint vocab size 8 does not match expected vocab size 10", Error);

  std::string bytes;
  {
    std::ifstream in(p, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto cut = temp_path("gen_cut.ckpt");
  std::ofstream(cut, std::ios::binary) << bytes.substr(0, bytes.size() - 20);
  CHECK_THROWS_WITH_AS(GenModel::load(cut), "checkpoint truncated", Error);

  std::string wrong = bytes;
  wrong[8] = 9;
  auto ver = temp_path("gen_ver.ckpt");
  std::ofstream(ver, std::ios::binary) << wrong;
  CHECK_THROWS_WITH_AS(GenModel::load(ver), "checkpoint format version 9 is not supported (expected 1)", Error);

  auto junk = temp_path("gen_junk.ckpt");
  std::ofstream(junk, std::ios::binary) << "hello";
  CHECK_THROWS_AS(GenModel::load(junk), Error);
}

TEST_CASE("training examples from silver pairs") {
  std::vector<Document> corpus{Document::from_text("a", "Graph networks", "neural graph models."),
                               Document::from_text("b", "", "nothing here")};
  std::vector<SilverPair> silver{{"a", "graph networks", "graph network", true, 1},
                                 {"a", "neural model", "neural model", false, 1}};
  Vocab v = build_vocab(corpus, silver, 100);
  CHECK(v.word(4) == "graph");
  GenModel m(v, ModelConfig{4, 4, 16}, 1);
  auto ex = make_training_examples(m, corpus, silver);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].source.size() == 5);
  REQUIRE(ex[0].targets.size() == 2);
  CHECK(ex[0].targets[0] == std::vector<int>{v.id("graph"), v.id("networks")});
  CHECK(ex[0].targets[1] == std::vector<int>{v.id("neural"), v.id("model")});
}
