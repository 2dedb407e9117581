#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "autokey/candidates.hpp"
#include "autokey/embed.hpp"
#include "autokey/phrasebank.hpp"

namespace autokey {

// Floor applied to both score families before the geometric mean.
inline constexpr double kScoreFloor = 1e-9;
inline constexpr int kSilverPerList = 5;

class CorpusStats {
 public:
  static CorpusStats build(std::span<const Document> corpus, const PhraseBank& bank);

  int doc_count() const { return doc_count_; }
  // Phrase document frequency from the bank; phrases the bank has never seen count as 1.
  int phrase_df(const std::string& stem_key) const;
  // log(|D| / docfreq(stem)), docfreq clamped to at least 1.
  double idf(const std::string& stem) const;
  IdfLookup idf_lookup() const;

 private:
  int doc_count_ = 0;
  std::unordered_map<std::string, int> phrase_df_;
  std::unordered_map<std::string, int> stem_df_;
};

struct ScoredPhrase {
  CandidatePhrase candidate;
  double semantic = kScoreFloor;
  double lexical = 0;
  double fused = 0;
  bool is_present = false;
  std::size_t position = kNoPosition;  // tie-break key
};

struct RankOptions {
  bool use_lexical = true;  // false: embedding similarity only
};

struct RankedLists {
  std::vector<ScoredPhrase> present;
  std::vector<ScoredPhrase> absent;
};

double lexical_score(const Document& doc, const CandidatePhrase& c, const CorpusStats& stats);
double semantic_score(const Embedding& doc_vec, const Embedding& phrase_vec);
double fuse(double semantic, double lexical, const RankOptions& opts = {});

// Fused score descending, then earlier position, then stem key.
bool ranks_before(const ScoredPhrase& a, const ScoredPhrase& b);
void sort_ranked(std::vector<ScoredPhrase>& list);

class Ranker {
 public:
  Ranker(const CorpusStats& stats, const VectorTable& table, RankOptions opts = {})
      : stats_(stats), table_(table), opts_(opts) {}

  // Scores both candidate sets with the same formula. Present-ness is decided by
  // contiguous occurrence, so generated candidates may land in either list.
  // Candidates sharing a stem key keep the higher score.
  RankedLists rank(const Document& doc, std::span<const CandidatePhrase> present,
                   std::span<const CandidatePhrase> absent) const;

  // Extract present candidates, draw absent ones from the bank, then rank.
  RankedLists rank_document(const Document& doc, const PhraseBank& bank) const;

  const RankOptions& options() const { return opts_; }

 private:
  const CorpusStats& stats_;
  const VectorTable& table_;
  RankOptions opts_;
};

struct SilverPair {
  std::string doc_id;
  std::string surface;
  std::string stem_key;
  bool is_present = false;
  int rank = 0;  // 1-based within its list
};

std::vector<SilverPair> silver_heads(const std::string& doc_id, const RankedLists& ranked);
std::vector<SilverPair> make_silver(std::span<const Document> corpus, const PhraseBank& bank, const Ranker& ranker);

// doc_id, surface, stem_key, present|absent, rank; tab-separated.
void write_silver_tsv(std::ostream& out, std::span<const SilverPair> pairs);
std::vector<SilverPair> read_silver_tsv(std::istream& in);

}  // namespace autokey
