#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "autokey/textproc.hpp"

namespace autokey {

inline constexpr std::size_t kMaxPhraseLength = 5;
inline constexpr std::size_t kNoPosition = std::numeric_limits<std::size_t>::max();

struct CandidatePhrase {
  std::vector<Token> tokens;
  std::string surface;
  std::vector<std::string> stems;
  std::string stem_key;
  int span_count = 0;
  // Index into Document::tokens of the earliest occurrence, kNoPosition if absent.
  std::size_t first_position = kNoPosition;

  std::size_t length() const { return tokens.size(); }

  static CandidatePhrase from_tokens(std::vector<Token> tokens);
  // Tokenizes a phrase string; the result may contain non-word tokens.
  static CandidatePhrase from_text(std::string_view text);
};

// Stopword-delimited chunks (split also at non-wordlike tokens and at the
// title/body boundary), every sub-span of length 1..5, spans made only of
// tokens shorter than 3 characters dropped, deduplicated by stem key.
// Returned in order of first occurrence.
std::vector<CandidatePhrase> extract_present(const Document& doc);

// Number of positions where the document stems match the phrase stems.
int count_contiguous(const Document& doc, std::span<const std::string> stems);
inline int count_contiguous(const Document& doc, const CandidatePhrase& phrase) {
  return count_contiguous(doc, phrase.stems);
}

}  // namespace autokey
