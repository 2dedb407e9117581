#pragma once

#include <cstdint>
#include <vector>

#include "autokey/corpus_io.hpp"

namespace autokey {

struct SyntheticOptions {
  int documents = 200;
  int words = 150;          // content-word pool shared by all documents
  int present_per_doc = 5;  // two-word phrases written verbatim, three times each
  int absent_per_doc = 2;   // phrases of other documents whose words are scattered here
  int docs_per_phrase = 3;
  std::uint64_t seed = 7;
};

// Documents whose keywords (present first, then absent) follow from their text:
// present phrases recur verbatim between stopwords, and each absent phrase is
// written verbatim elsewhere in the corpus while only its separate words occur
// here. Filler sentences shared by every document carry no signal.
std::vector<CorpusRecord> synthetic_corpus(const SyntheticOptions& opts = {});

}  // namespace autokey
