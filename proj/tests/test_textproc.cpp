#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "autokey/error.hpp"
#include "autokey/textproc.hpp"
#include "autokey/unicode.hpp"
#include "doctest.h"

using namespace autokey;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const Token& t : tokens) out.push_back(t.surface);
  return out;
}

std::u32string parse_hex(const std::string& field) {
  std::u32string out;
  std::istringstream in(field);
  std::string h;
  while (in >> h) out.push_back(static_cast<char32_t>(std::stoul(h, nullptr, 16)));
  return out;
}

}  // namespace

TEST_CASE("tokenize splits whitespace and punctuation") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n").empty());

  auto t = tokenize("keyphrase generation.");
  CHECK(surfaces(t) == std::vector<std::string>{"keyphrase", "generation", "."});
  CHECK(t[0].is_wordlike);
  CHECK_FALSE(t[2].is_wordlike);

  t = tokenize("e-mail 2021 model");
  REQUIRE(surfaces(t) == std::vector<std::string>{"e-mail", "2021", "model"});
  CHECK(t[0].is_wordlike);
  CHECK_FALSE(t[1].is_wordlike);
  CHECK(t[2].is_wordlike);
}

TEST_CASE("tokenize joiner rules") {
  CHECK(surfaces(tokenize("don't stop")) == std::vector<std::string>{"don't", "stop"});
  CHECK(surfaces(tokenize("3.5 and 1,000")) == std::vector<std::string>{"3.5", "and", "1,000"});
  CHECK(surfaces(tokenize("end. Next")) == std::vector<std::string>{"end", ".", "Next"});
  CHECK(surfaces(tokenize("a.b")) == std::vector<std::string>{"a", ".", "b"});
  CHECK(surfaces(tokenize("-x- (y)")) == std::vector<std::string>{"-", "x", "-", "(", "y", ")"});
  CHECK(surfaces(tokenize("covid-19")) == std::vector<std::string>{"covid-19"});
  CHECK(tokenize("covid-19")[0].is_wordlike);
  CHECK(surfaces(tokenize("c++")) == std::vector<std::string>{"c", "+", "+"});
}

TEST_CASE("tokenize normalizes to NFC and lowercases") {
  // "Cafe" + combining acute accent composes to U+00E9.
  auto t = tokenize("Cafe\xCC\x81");
  REQUIRE(t.size() == 1);
  CHECK(t[0].surface == "Caf\xC3\xA9");
  CHECK(t[0].lower == "caf\xC3\xA9");
  CHECK(t[0].is_wordlike);
}

TEST_CASE("token fields are consistent") {
  for (const Token& t : tokenize("The Security Breaches of INFORMATION systems, 2020!")) {
    CHECK(t.lower == unicode::to_lower(t.surface));
    CHECK(t.stem == stem(t.lower));
    CHECK(t.is_stopword == is_stopword(t.lower));
  }
  auto t = tokenize("The");
  CHECK(t[0].is_stopword);
}

TEST_CASE("tokenize recovers every non-whitespace character") {
  std::mt19937 rng(11);
  const std::u32string alphabet = U"abcXYZ019 -'.,;()\t\néß中’";
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string s;
    int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    std::string text = unicode::encode_utf8(s);
    std::string expected;
    for (char32_t c : unicode::nfc(s)) {
      if (unicode::classify(c) != unicode::CharClass::kSpace) expected += unicode::encode_utf8(std::u32string(1, c));
    }
    std::string joined;
    for (const Token& t : tokenize(text)) joined += t.surface;
    REQUIRE(joined == expected);
    CHECK(surfaces(tokenize(text)) == surfaces(tokenize(text)));
  }
}

TEST_CASE("NFC matches reference vectors") {
  std::ifstream in(AUTOKEY_TEST_DATA "/nfc_vectors.txt");
  REQUIRE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    std::u32string input = parse_hex(line.substr(0, tab));
    std::u32string expected = parse_hex(line.substr(tab + 1));
    CHECK(unicode::nfc(input) == expected);
    ++checked;
  }
  CHECK(checked == 2000);
}

TEST_CASE("utf8 decoding replaces invalid bytes") {
  CHECK(unicode::decode_utf8("a\xFF" "b") == U"a�b");
  CHECK(unicode::decode_utf8("\xE2\x82") == U"��");
  CHECK(unicode::encode_utf8(unicode::decode_utf8("x\xF0\x9F\x98\x80y")) == "x\xF0\x9F\x98\x80y");
}

TEST_CASE("porter stemmer examples") {
  CHECK(stem("caresses") == "caress");
  CHECK(stem("ponies") == "poni");
  CHECK(stem("sky") == "sky");
  CHECK(stem("") == "");
  CHECK(stem("security") == "secur");
  CHECK(stem("breaches") == "breach");
  CHECK(stem("information") == "inform");
  CHECK(stem("systems") == "system");
  CHECK(stem("generalizations") == "gener");
  CHECK(stem("relational") == "relat");
}

TEST_CASE("porter stemmer matches the reference vocabulary") {
  std::ifstream voc(AUTOKEY_TEST_DATA "/porter_voc.txt");
  std::ifstream expected(AUTOKEY_TEST_DATA "/porter_output.txt");
  REQUIRE(voc);
  REQUIRE(expected);
  std::string w, e;
  int total = 0, mismatches = 0;
  while (std::getline(voc, w) && std::getline(expected, e)) {
    ++total;
    if (stem(w) != e) {
      if (++mismatches <= 10) MESSAGE(w << " -> " << stem(w) << " (expected " << e << ")");
    }
  }
  CHECK(total == 23532);
  CHECK(mismatches == 0);
}

TEST_CASE("stem is non-empty for non-empty alphabetic words") {
  std::mt19937 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string w;
    int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) w.push_back(static_cast<char>('a' + rng() % 26));
    CHECK_FALSE(stem(w).empty());
  }
}

TEST_CASE("stem_phrase") {
  CHECK(stem_phrase(tokenize("Security Breaches")) == "secur breach");
  CHECK(stem_phrase(tokenize("cat")) == "cat");
  CHECK(stem_phrase(tokenize("Information Systems")) == "inform system");
  CHECK_THROWS_WITH_AS(stem_phrase(std::vector<Token>{}), "empty phrase", Error);
}

TEST_CASE("stopword list") {
  CHECK(english_stopwords().size() == 179);
  CHECK(is_stopword("the"));
  CHECK(is_stopword("wouldn't"));
  CHECK_FALSE(is_stopword("security"));
}

TEST_CASE("document views") {
  Document d = Document::from_text("d1", "Data Mining", "data mining and the 2021 tools.");
  CHECK(d.tokens.size() == d.title.size() + d.body.size());
  CHECK(d.word_count() == 7);  // stopwords count, numbers and punctuation do not
  CHECK(d.tf("data") == 2);
  CHECK(d.tf("mine") == 2);
  CHECK(d.tf("2021") == 0);
  CHECK(d.has_stem("tool"));
  for (const auto& [s, n] : d.stem_tf) {
    CHECK(n >= 1);
    CHECK(d.stem_set.count(s) == 1);
  }
  CHECK(d.stem_set.size() == d.stem_tf.size());
}
