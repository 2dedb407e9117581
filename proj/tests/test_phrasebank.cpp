#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "autokey/error.hpp"
#include "autokey/phrasebank.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace autokey;

namespace {

std::set<std::string> keys(const std::vector<CandidatePhrase>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) out.insert(c.stem_key);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("autokey_test_" + name);
}

}  // namespace

TEST_CASE("build pools a single document") {
  std::vector<Document> corpus{Document::from_text("d", "", "data mining tools")};
  auto bank = PhraseBank::build(corpus);
  std::set<std::string> surfaces;
  for (const auto& e : bank.entries()) {
    surfaces.insert(e.surface);
    CHECK(e.df == 1);
  }
  CHECK(surfaces == std::set<std::string>{"data mining tools", "data mining", "mining tools", "data", "mining", "tools"});
  CHECK(bank.doc_count() == 1);
}

TEST_CASE("build counts document frequency") {
  std::vector<Document> corpus{Document::from_text("a", "", "a neural network"),
                               Document::from_text("b", "", "neural networks, and more neural networks"),
                               Document::from_text("c", "", "graphs")};
  auto bank = PhraseBank::build(corpus);
  REQUIRE(bank.find("neural network") != nullptr);
  CHECK(bank.find("neural network")->df == 2);
  CHECK(bank.find("graph")->df == 1);
  CHECK_THROWS_WITH_AS(PhraseBank::build(std::vector<Document>{}), "empty corpus", Error);
}

TEST_CASE("build equals brute-force pooling on a 1000-document corpus") {
  std::mt19937_64 rng(17);
  oracle::RandomCorpus gen(120, rng);
  std::vector<Document> corpus;
  for (int i = 0; i < 1000; ++i) corpus.push_back(gen.doc(rng, "d" + std::to_string(i), 25));
  auto bank = PhraseBank::build(corpus);
  auto expected = oracle::pool(corpus);
  REQUIRE(bank.entries().size() == expected.size());
  for (const auto& e : bank.entries()) {
    auto it = expected.find(e.stem_key);
    REQUIRE(it != expected.end());
    CHECK(it->second.surface == e.surface);
    CHECK(it->second.df == e.df);
  }
}

TEST_CASE("index invariants") {
  std::mt19937_64 rng(2);
  oracle::RandomCorpus gen(30, rng);
  std::vector<Document> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(gen.doc(rng, "d", 30));
  auto bank = PhraseBank::build(corpus);
  for (const auto& e : bank.entries()) {
    CHECK(e.df >= 1);
    CHECK(e.df <= bank.doc_count());
    for (const auto& s : e.stems) {
      const auto& p = bank.postings(s);
      CHECK(std::find(p.begin(), p.end(), e.id) != p.end());
    }
  }
}

TEST_CASE("draw_absent partial match") {
  std::vector<Document> corpus{
      Document::from_text("a", "", "information security management is hard"),
      Document::from_text("b", "", "data mining"),
      Document::from_text("c", "", "information system"),
  };
  auto bank = PhraseBank::build(corpus);

  auto doc = Document::from_text("x", "", "security of the management of information; a system");
  auto drawn = keys(bank.draw_absent(doc));
  CHECK(drawn.count("inform secur manag"));
  CHECK(drawn.count("inform system"));
  CHECK_FALSE(drawn.count("data mine"));

  auto partial = Document::from_text("y", "", "data is big");
  CHECK_FALSE(keys(bank.draw_absent(partial)).count("data mine"));

  auto present = Document::from_text("z", "", "data mining");
  CHECK_FALSE(keys(bank.draw_absent(present)).count("data mine"));
  CHECK(bank.draw_absent(present).empty());
}

TEST_CASE("draw_absent via index equals linear scan; disjoint from present") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::RandomCorpus gen(25 + trial, rng);
    std::vector<Document> corpus;
    int n = 5 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) corpus.push_back(gen.doc(rng, "d", 10 + static_cast<int>(rng() % 40)));
    auto bank = PhraseBank::build(corpus);
    for (int q = 0; q < 10; ++q) {
      auto doc = gen.doc(rng, "q", 5 + static_cast<int>(rng() % 50));
      auto drawn = bank.draw_absent(doc);
      REQUIRE(keys(drawn) == oracle::draw_absent_scan(bank, doc));
      for (const auto& c : extract_present(doc)) CHECK_FALSE(keys(drawn).count(c.stem_key));
      for (const auto& c : drawn) CHECK(c.first_position == kNoPosition);
    }
  }
}

TEST_CASE("adding a document never removes entries or lowers df") {
  std::mt19937_64 rng(8);
  oracle::RandomCorpus gen(30, rng);
  std::vector<Document> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back(gen.doc(rng, "d", 20));
  auto before = PhraseBank::build(corpus);
  corpus.push_back(gen.doc(rng, "extra", 40));
  auto after = PhraseBank::build(corpus);
  for (const auto& e : before.entries()) {
    const BankEntry* e2 = after.find(e.stem_key);
    REQUIRE(e2 != nullptr);
    CHECK(e2->df >= e.df);
  }
}

TEST_CASE("save/load round trip is observably identical and byte-stable") {
  std::mt19937_64 rng(4);
  oracle::RandomCorpus gen(30, rng);
  std::vector<Document> corpus;
  for (int i = 0; i < 40; ++i) corpus.push_back(gen.doc(rng, "d", 25));
  auto bank = PhraseBank::build(corpus);
  auto p1 = temp_path("bank1.txt");
  auto p2 = temp_path("bank2.txt");
  bank.save(p1);
  auto loaded = PhraseBank::load(p1);
  loaded.save(p2);
  CHECK(slurp(p1) == slurp(p2));
  PhraseBank::build(corpus).save(p2);
  CHECK(slurp(p1) == slurp(p2));

  REQUIRE(loaded.entries().size() == bank.entries().size());
  CHECK(loaded.doc_count() == bank.doc_count());
  for (std::size_t i = 0; i < bank.entries().size(); ++i) {
    CHECK(loaded.entries()[i].stem_key == bank.entries()[i].stem_key);
    CHECK(loaded.entries()[i].df == bank.entries()[i].df);
  }
  for (int q = 0; q < 10; ++q) {
    auto doc = gen.doc(rng, "q", 30);
    CHECK(keys(loaded.draw_absent(doc)) == keys(bank.draw_absent(doc)));
  }
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("load rejects malformed files") {
  auto p = temp_path("bad_bank.txt");
  {
    std::ofstream(p) << "autokeygen-phrasebank\t9\ndoc_count\t1\nentries\t0\n";
  }
  CHECK_THROWS_AS(PhraseBank::load(p), Error);
  {
    std::ofstream(p) << "autokeygen-phrasebank\t1\ndoc_count\t2\nentries\t2\n0\tdata\tdata\t1\n";
  }
  CHECK_THROWS_WITH_AS(PhraseBank::load(p), doctest::Contains("truncated"), Error);
  std::filesystem::remove(p);
}

TEST_CASE("coverage_stats") {
  std::vector<Document> corpus{Document::from_text("a", "", "graph mining tools"),
                               Document::from_text("b", "", "social network analysis")};
  auto bank = PhraseBank::build(corpus);

  std::vector<GoldDocument> planted{
      {Document::from_text("x", "", "mining the graph"), {"graph mining", "mining"}},
      {Document::from_text("y", "", "analysis of a network"), {"network analysis"}},
  };
  auto stats = coverage_stats(bank, planted);
  CHECK(stats.absent_gold == 2);
  REQUIRE(stats.bank_hit_rate.has_value());
  CHECK(*stats.bank_hit_rate == 1.0);
  CHECK(*stats.token_hit_rate == 1.0);

  std::vector<GoldDocument> single{{Document::from_text("x", "", "graph theory"), {"graph mining"}}};
  stats = coverage_stats(bank, single);
  CHECK(*stats.token_hit_rate == 0.0);
  CHECK(*stats.bank_hit_rate == 1.0);

  std::vector<GoldDocument> none{{Document::from_text("x", "", "graph theory"), {"graph theory"}}};
  stats = coverage_stats(bank, none);
  CHECK(stats.absent_gold == 0);
  CHECK_FALSE(stats.bank_hit_rate.has_value());
  CHECK_FALSE(stats.token_hit_rate.has_value());
}
