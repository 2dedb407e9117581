#include <algorithm>
#include <random>
#include <set>

#include "autokey/candidates.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace autokey;

namespace {

std::set<std::string> surfaces(const std::vector<CandidatePhrase>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) out.insert(c.surface);
  return out;
}

}  // namespace

TEST_CASE("extract_present chunks at stopwords") {
  auto doc = Document::from_text("d", "", "the security breach was recent");
  auto s = surfaces(extract_present(doc));
  CHECK(s == std::set<std::string>{"security breach", "security", "breach", "recent"});

  CHECK(extract_present(Document::from_text("d", "", "a the")).empty());
  CHECK(extract_present(Document::from_text("d", "", "")).empty());
}

TEST_CASE("extract_present keeps sub-spans of longer chunks") {
  auto doc = Document::from_text("d", "", "A recent security breach exposed data.");
  auto s = surfaces(extract_present(doc));
  CHECK(s.count("recent security breach"));
  CHECK(s.count("security breach"));
  CHECK(s.count("recent security breach exposed data"));
}

TEST_CASE("extract_present filters and dedups") {
  // "ab cd" has only short tokens; "ab" "cd" too.
  auto doc = Document::from_text("T", "Data Mining", "ab cd; data mining, 2019 data mining! the Data-Driven x");
  auto cs = extract_present(doc);
  auto s = surfaces(cs);
  CHECK_FALSE(s.count("ab cd"));
  CHECK_FALSE(s.count("ab"));
  CHECK(s.count("Data Mining"));  // earliest surface kept
  CHECK_FALSE(s.count("data mining"));
  CHECK(s.count("Data-Driven x"));
  for (const auto& c : cs) {
    if (c.stem_key == "data mine") {
      CHECK(c.span_count == 3);
      CHECK(c.first_position == 0);
    }
    CHECK(c.length() >= 1);
    CHECK(c.length() <= kMaxPhraseLength);
    for (const Token& t : c.tokens) {
      CHECK_FALSE(t.is_stopword);
      CHECK(t.is_wordlike);
    }
  }
  // Title and body never join into a single span.
  auto d2 = Document::from_text("T", "neural", "network");
  CHECK_FALSE(surfaces(extract_present(d2)).count("neural network"));
}

TEST_CASE("extract_present caps length at five") {
  auto doc = Document::from_text("d", "", "alpha beta gamma delta epsilon zeta");
  auto cs = extract_present(doc);
  // 6+5+4+3+2 spans, none of length 6.
  CHECK(cs.size() == 20);
  for (const auto& c : cs) CHECK(c.length() <= 5);
}

TEST_CASE("count_contiguous") {
  auto doc = Document::from_text("d", "", "data mining and data mining");
  CHECK(count_contiguous(doc, CandidatePhrase::from_text("data mining")) == 2);
  CHECK(count_contiguous(doc, CandidatePhrase::from_text("data mining and data mining too")) == 0);
  CHECK(count_contiguous(Document::from_text("d", "", "mining data"), CandidatePhrase::from_text("data mining")) == 0);
  CHECK(count_contiguous(doc, CandidatePhrase::from_text("Data Mined")) == 2);
}

TEST_CASE("every extracted candidate is present; extraction is deterministic") {
  std::mt19937_64 rng(5);
  oracle::RandomCorpus gen(40, rng);
  for (int i = 0; i < 100; ++i) {
    auto doc = gen.doc(rng, "d", 60);
    auto a = extract_present(doc);
    auto b = extract_present(doc);
    REQUIRE(a.size() == b.size());
    std::set<std::string> keys;
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].stem_key == b[k].stem_key);
      CHECK(count_contiguous(doc, a[k]) >= a[k].span_count);
      CHECK(a[k].span_count >= 1);
      CHECK(keys.insert(a[k].stem_key).second);
    }
  }
}
