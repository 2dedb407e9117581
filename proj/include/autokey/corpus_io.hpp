#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "autokey/textproc.hpp"

namespace autokey {

struct CorpusRecord {
  std::string id;
  std::string title;
  std::string abstract;
  std::optional<std::vector<std::string>> keywords;
};

struct IngestResult {
  std::vector<CorpusRecord> records;
  std::vector<std::string> warnings;  // "line N: ..." for every skipped line
  std::size_t lines = 0;              // non-blank lines read
};

// One JSON object per line: {"id", "title", "abstract", optional "keywords"}.
// Malformed lines are skipped with a warning; a repeated id is an error.
IngestResult read_corpus_jsonl(std::istream& in);
IngestResult read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(std::ostream& out, const std::vector<CorpusRecord>& records);

// Tokenized store: the document as token surfaces plus any gold keyphrases.
struct StoredDocument {
  Document doc;
  std::optional<std::vector<std::string>> keywords;
};

StoredDocument make_stored(const CorpusRecord& record);
void write_store(std::ostream& out, const std::vector<StoredDocument>& docs);
std::vector<StoredDocument> read_store(std::istream& in);
std::vector<StoredDocument> read_store(const std::filesystem::path& path);

std::vector<Document> documents_of(const std::vector<StoredDocument>& store);

}  // namespace autokey
