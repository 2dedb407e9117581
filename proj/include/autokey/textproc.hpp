#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace autokey {

struct Token {
  std::string surface;
  std::string lower;
  std::string stem;
  bool is_stopword = false;
  // Alphanumeric with at least one letter. Pure numbers and punctuation are not.
  bool is_wordlike = false;
};

// Builds a token from a surface string that is already a single token.
Token make_token(std::string surface);

// Splits NFC-normalized text on whitespace and punctuation. Punctuation marks
// become their own tokens. Hyphens and apostrophes between alphanumerics stay
// inside the word, as do '.' and ',' between digits.
std::vector<Token> tokenize(std::string_view text);

// Original Porter (1980) stemmer. Expects lowercase input.
std::string stem(std::string_view word);

// Space-joined stems; the equality key for phrase matching.
std::string stem_phrase(std::span<const Token> phrase);
std::string join_stems(std::span<const std::string> stems);

bool is_stopword(std::string_view lower);
const std::unordered_set<std::string>& english_stopwords();

struct Document {
  std::string id;
  std::vector<Token> title;
  std::vector<Token> body;
  std::vector<Token> tokens;  // title followed by body
  std::unordered_set<std::string> stem_set;
  std::unordered_map<std::string, int> stem_tf;

  static Document from_text(std::string id, std::string_view title, std::string_view body);
  static Document from_tokens(std::string id, std::vector<Token> title, std::vector<Token> body);

  // Number of word-like tokens, the |x| of the lexical score.
  std::size_t word_count() const { return word_count_; }
  int tf(const std::string& stem) const;
  bool has_stem(const std::string& stem) const { return stem_set.count(stem) != 0; }

 private:
  std::size_t word_count_ = 0;
};

}  // namespace autokey
