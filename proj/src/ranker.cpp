#include "autokey/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "autokey/error.hpp"

namespace autokey {
namespace {

std::size_t contiguous_position(const Document& doc, const std::vector<std::string>& stems) {
  if (stems.empty() || stems.size() > doc.tokens.size()) return kNoPosition;
  for (std::size_t i = 0; i + stems.size() <= doc.tokens.size(); ++i) {
    std::size_t k = 0;
    while (k < stems.size() && doc.tokens[i + k].stem == stems[k]) ++k;
    if (k == stems.size()) return i;
  }
  return kNoPosition;
}

void check_field(const std::string& s) {
  if (s.find_first_of("\t\n\r") != std::string::npos) {
    throw Error("silver field contains a tab or newline: '" + s + "'");
  }
}

}  // namespace

CorpusStats CorpusStats::build(std::span<const Document> corpus, const PhraseBank& bank) {
  if (corpus.empty()) throw Error("empty corpus");
  CorpusStats stats;
  stats.doc_count_ = static_cast<int>(corpus.size());
  for (const BankEntry& e : bank.entries()) stats.phrase_df_.emplace(e.stem_key, e.df);
  for (const Document& doc : corpus) {
    for (const std::string& s : doc.stem_set) ++stats.stem_df_[s];
  }
  return stats;
}

int CorpusStats::phrase_df(const std::string& stem_key) const {
  auto it = phrase_df_.find(stem_key);
  return it == phrase_df_.end() ? 1 : std::max(1, it->second);
}

double CorpusStats::idf(const std::string& stem) const {
  auto it = stem_df_.find(stem);
  int df = it == stem_df_.end() ? 1 : std::max(1, it->second);
  return std::log(static_cast<double>(doc_count_) / df);
}

IdfLookup CorpusStats::idf_lookup() const {
  return [this](const std::string& s) { return idf(s); };
}

double lexical_score(const Document& doc, const CandidatePhrase& c, const CorpusStats& stats) {
  const std::size_t words = doc.word_count();
  if (words == 0 || c.stems.empty()) return 0.0;
  int tf = count_contiguous(doc, c);
  if (tf == 0) {
    tf = doc.tf(c.stems.front());
    for (const std::string& s : c.stems) tf = std::min(tf, doc.tf(s));
  }
  const int df = stats.phrase_df(c.stem_key);
  return static_cast<double>(tf) / static_cast<double>(words) *
         std::log(static_cast<double>(stats.doc_count()) / static_cast<double>(df));
}

double semantic_score(const Embedding& doc_vec, const Embedding& phrase_vec) {
  if (doc_vec.oov || phrase_vec.oov) return kScoreFloor;
  return std::clamp(cosine(doc_vec.vec, phrase_vec.vec), kScoreFloor, 1.0);
}

double fuse(double semantic, double lexical, const RankOptions& opts) {
  const double s = std::clamp(semantic, kScoreFloor, 1.0);
  if (!opts.use_lexical) return s;
  return std::sqrt(s * std::max(lexical, kScoreFloor));
}

bool ranks_before(const ScoredPhrase& a, const ScoredPhrase& b) {
  if (a.fused != b.fused) return a.fused > b.fused;
  if (a.position != b.position) return a.position < b.position;
  return a.candidate.stem_key < b.candidate.stem_key;
}

void sort_ranked(std::vector<ScoredPhrase>& list) { std::sort(list.begin(), list.end(), ranks_before); }

RankedLists Ranker::rank(const Document& doc, std::span<const CandidatePhrase> present,
                         std::span<const CandidatePhrase> absent) const {
  const Embedding doc_vec = embed_document(table_, doc, stats_.idf_lookup());

  std::unordered_map<std::string, std::size_t> first_stem;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) first_stem.try_emplace(doc.tokens[i].stem, i);

  std::vector<ScoredPhrase> pooled;
  std::unordered_map<std::string, std::size_t> by_key;
  auto add = [&](const CandidatePhrase& c) {
    ScoredPhrase s;
    s.candidate = c;
    s.position = contiguous_position(doc, c.stems);
    s.is_present = s.position != kNoPosition;
    if (!s.is_present) {
      for (const std::string& st : c.stems) {
        auto it = first_stem.find(st);
        if (it != first_stem.end()) s.position = std::min(s.position, it->second);
      }
    }
    s.lexical = lexical_score(doc, c, stats_);
    s.semantic = semantic_score(doc_vec, embed_phrase(table_, c));
    s.fused = fuse(s.semantic, s.lexical, opts_);
    auto [it, inserted] = by_key.try_emplace(c.stem_key, pooled.size());
    if (inserted) {
      pooled.push_back(std::move(s));
    } else if (ranks_before(s, pooled[it->second])) {
      pooled[it->second] = std::move(s);
    }
  };
  for (const CandidatePhrase& c : present) add(c);
  for (const CandidatePhrase& c : absent) add(c);

  RankedLists out;
  for (ScoredPhrase& s : pooled) (s.is_present ? out.present : out.absent).push_back(std::move(s));
  sort_ranked(out.present);
  sort_ranked(out.absent);
  return out;
}

RankedLists Ranker::rank_document(const Document& doc, const PhraseBank& bank) const {
  std::vector<CandidatePhrase> present = extract_present(doc);
  std::vector<CandidatePhrase> absent = bank.draw_absent(doc);
  return rank(doc, present, absent);
}

std::vector<SilverPair> silver_heads(const std::string& doc_id, const RankedLists& ranked) {
  std::vector<SilverPair> out;
  auto take = [&](const std::vector<ScoredPhrase>& list, bool present) {
    const std::size_t n = std::min<std::size_t>(list.size(), kSilverPerList);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({doc_id, list[i].candidate.surface, list[i].candidate.stem_key, present, static_cast<int>(i + 1)});
    }
  };
  take(ranked.present, true);
  take(ranked.absent, false);
  return out;
}

std::vector<SilverPair> make_silver(std::span<const Document> corpus, const PhraseBank& bank, const Ranker& ranker) {
  std::vector<SilverPair> out;
  for (const Document& doc : corpus) {
    auto heads = silver_heads(doc.id, ranker.rank_document(doc, bank));
    out.insert(out.end(), heads.begin(), heads.end());
  }
  return out;
}

void write_silver_tsv(std::ostream& out, std::span<const SilverPair> pairs) {
  for (const SilverPair& p : pairs) {
    check_field(p.doc_id);
    check_field(p.surface);
    check_field(p.stem_key);
    out << p.doc_id << '\t' << p.surface << '\t' << p.stem_key << '\t' << (p.is_present ? "present" : "absent")
        << '\t' << p.rank << '\n';
  }
}

std::vector<SilverPair> read_silver_tsv(std::istream& in) {
  std::vector<SilverPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, '\t')) cols.push_back(field);
    if (cols.size() != 5) throw Error("silver line " + std::to_string(lineno) + ": expected 5 fields");
    SilverPair p;
    p.doc_id = cols[0];
    p.surface = cols[1];
    p.stem_key = cols[2];
    if (cols[3] == "present") {
      p.is_present = true;
    } else if (cols[3] != "absent") {
      throw Error("silver line " + std::to_string(lineno) + ": bad type '" + cols[3] + "'");
    }
    p.rank = std::stoi(cols[4]);
    if (p.rank < 1 || p.rank > kSilverPerList) throw Error("silver line " + std::to_string(lineno) + ": bad rank");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace autokey
