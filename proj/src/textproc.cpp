#include "autokey/textproc.hpp"

#include <sstream>

#include "autokey/error.hpp"
#include "autokey/unicode.hpp"
#include "stopwords_en.inc"  // generated from data/stopwords_en.txt

namespace autokey {
namespace {

using unicode::CharClass;

bool is_alnum(CharClass c) { return c == CharClass::kLetter || c == CharClass::kDigit; }

bool is_joiner(char32_t cp) { return cp == U'-' || cp == U'\'' || cp == U'’'; }
bool is_numeric_joiner(char32_t cp) { return cp == U'.' || cp == U','; }

std::unordered_set<std::string> parse_stopwords(std::string_view text) {
  std::unordered_set<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

}  // namespace

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> words = parse_stopwords(kStopwordsEn);
  return words;
}

bool is_stopword(std::string_view lower) {
  return english_stopwords().count(std::string(lower)) != 0;
}

Token make_token(std::string surface) {
  Token t;
  t.lower = unicode::to_lower(surface);
  t.stem = stem(t.lower);
  t.is_stopword = is_stopword(t.lower);
  bool has_letter = false;
  bool all_word_chars = !surface.empty();
  std::u32string cps = unicode::decode_utf8(surface);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    CharClass c = unicode::classify(cps[i]);
    if (c == CharClass::kLetter) has_letter = true;
    if (!is_alnum(c) && !is_joiner(cps[i]) && !is_numeric_joiner(cps[i])) all_word_chars = false;
  }
  t.is_wordlike = has_letter && all_word_chars;
  t.surface = std::move(surface);
  return t;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::u32string cps = unicode::nfc(unicode::decode_utf8(text));
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    CharClass c = unicode::classify(cps[i]);
    if (c == CharClass::kSpace) {
      ++i;
      continue;
    }
    if (!is_alnum(c)) {
      out.push_back(make_token(unicode::encode_utf8(std::u32string_view(cps).substr(i, 1))));
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n) {
      CharClass cj = unicode::classify(cps[j]);
      if (is_alnum(cj)) {
        ++j;
        continue;
      }
      if (j + 1 < n) {
        CharClass prev = unicode::classify(cps[j - 1]);
        CharClass next = unicode::classify(cps[j + 1]);
        if (is_joiner(cps[j]) && is_alnum(prev) && is_alnum(next)) {
          ++j;
          continue;
        }
        if (is_numeric_joiner(cps[j]) && prev == CharClass::kDigit && next == CharClass::kDigit) {
          ++j;
          continue;
        }
      }
      break;
    }
    out.push_back(make_token(unicode::encode_utf8(std::u32string_view(cps).substr(i, j - i))));
    i = j;
  }
  return out;
}

std::string join_stems(std::span<const std::string> stems) {
  std::string key;
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (i) key.push_back(' ');
    key += stems[i];
  }
  return key;
}

std::string stem_phrase(std::span<const Token> phrase) {
  if (phrase.empty()) throw Error("empty phrase");
  std::string key;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    if (i) key.push_back(' ');
    key += phrase[i].stem;
  }
  return key;
}

Document Document::from_text(std::string id, std::string_view title, std::string_view body) {
  return from_tokens(std::move(id), tokenize(title), tokenize(body));
}

Document Document::from_tokens(std::string id, std::vector<Token> title, std::vector<Token> body) {
  Document d;
  d.id = std::move(id);
  d.title = std::move(title);
  d.body = std::move(body);
  d.tokens.reserve(d.title.size() + d.body.size());
  d.tokens.insert(d.tokens.end(), d.title.begin(), d.title.end());
  d.tokens.insert(d.tokens.end(), d.body.begin(), d.body.end());
  for (const Token& t : d.tokens) {
    if (!t.is_wordlike) continue;
    ++d.word_count_;
    ++d.stem_tf[t.stem];
    d.stem_set.insert(t.stem);
  }
  return d;
}

int Document::tf(const std::string& s) const {
  auto it = stem_tf.find(s);
  return it == stem_tf.end() ? 0 : it->second;
}

}  // namespace autokey
