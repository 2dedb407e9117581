#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "autokey/candidates.hpp"
#include "autokey/textproc.hpp"

namespace autokey {

struct BankEntry {
  std::uint32_t id = 0;
  std::string stem_key;
  std::string surface;
  std::vector<std::string> stems;
  int df = 0;  // documents containing the phrase contiguously
};

// Corpus-wide pool of present candidates with an inverted index from stem to
// entry ids. Immutable once built or loaded.
class PhraseBank {
 public:
  static constexpr int kFormatVersion = 1;

  static PhraseBank build(std::span<const Document> corpus);
  static PhraseBank load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Bank entries whose stems all occur in the document but which do not occur
  // in it contiguously.
  std::vector<CandidatePhrase> draw_absent(const Document& doc) const;

  const std::vector<BankEntry>& entries() const { return entries_; }
  int doc_count() const { return doc_count_; }
  const BankEntry* find(const std::string& stem_key) const;
  const std::vector<std::uint32_t>& postings(const std::string& stem) const;

  // Constructs the candidate a bank entry stands for (tokens re-derived from the surface).
  CandidatePhrase candidate(const BankEntry& e) const;

 private:
  std::vector<BankEntry> entries_;
  int doc_count_ = 0;
  std::unordered_map<std::string, std::uint32_t> by_key_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> index_;
  // Each entry is listed once, under its rarest stem.
  std::unordered_map<std::string, std::vector<std::uint32_t>> anchors_;
  std::vector<std::uint32_t> distinct_stems_;

  void rebuild_index();
};

struct GoldDocument {
  Document doc;
  std::vector<std::string> keyphrases;
};

struct CoverageStats {
  std::size_t absent_gold = 0;
  // Empty when there are no absent gold keyphrases.
  std::optional<double> bank_hit_rate;
  std::optional<double> token_hit_rate;
};

CoverageStats coverage_stats(const PhraseBank& bank, std::span<const GoldDocument> labeled);

}  // namespace autokey
