#include "autokey/candidates.hpp"

#include <algorithm>
#include <unordered_map>

#include "autokey/unicode.hpp"

namespace autokey {
namespace {

std::size_t char_length(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool chunk_token(const Token& t) { return t.is_wordlike && !t.is_stopword; }

}  // namespace

CandidatePhrase CandidatePhrase::from_tokens(std::vector<Token> tokens) {
  CandidatePhrase c;
  c.stem_key = stem_phrase(tokens);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) c.surface.push_back(' ');
    c.surface += tokens[i].surface;
    c.stems.push_back(tokens[i].stem);
  }
  c.tokens = std::move(tokens);
  return c;
}

CandidatePhrase CandidatePhrase::from_text(std::string_view text) {
  return from_tokens(tokenize(text));
}

std::vector<CandidatePhrase> extract_present(const Document& doc) {
  std::vector<CandidatePhrase> out;
  std::unordered_map<std::string, std::size_t> by_key;

  auto emit_chunk = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t len = 1; len <= kMaxPhraseLength && i + len <= end; ++len) {
        bool long_enough = false;
        for (std::size_t k = i; k < i + len; ++k) {
          if (char_length(doc.tokens[k].surface) >= 3) {
            long_enough = true;
            break;
          }
        }
        if (!long_enough) continue;
        std::string key;
        for (std::size_t k = i; k < i + len; ++k) {
          if (k > i) key.push_back(' ');
          key += doc.tokens[k].stem;
        }
        auto it = by_key.find(key);
        if (it != by_key.end()) {
          CandidatePhrase& c = out[it->second];
          ++c.span_count;
          c.first_position = std::min(c.first_position, i);
          continue;
        }
        CandidatePhrase c = CandidatePhrase::from_tokens(std::vector<Token>(
            doc.tokens.begin() + static_cast<std::ptrdiff_t>(i),
            doc.tokens.begin() + static_cast<std::ptrdiff_t>(i + len)));
        c.span_count = 1;
        c.first_position = i;
        by_key.emplace(std::move(key), out.size());
        out.push_back(std::move(c));
      }
    }
  };

  const std::size_t title_end = doc.title.size();
  std::size_t start = 0;
  for (std::size_t i = 0; i <= doc.tokens.size(); ++i) {
    bool boundary = i == doc.tokens.size() || i == title_end || !chunk_token(doc.tokens[i]);
    if (!boundary) continue;
    if (i > start) emit_chunk(start, i);
    start = (i < doc.tokens.size() && !chunk_token(doc.tokens[i])) ? i + 1 : i;
  }
  return out;
}

int count_contiguous(const Document& doc, std::span<const std::string> stems) {
  if (stems.empty() || stems.size() > doc.tokens.size()) return 0;
  int count = 0;
  for (std::size_t i = 0; i + stems.size() <= doc.tokens.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < stems.size(); ++k) {
      if (doc.tokens[i + k].stem != stems[k]) {
        match = false;
        break;
      }
    }
    if (match) ++count;
  }
  return count;
}

}  // namespace autokey
