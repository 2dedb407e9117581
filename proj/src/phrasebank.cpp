#include "autokey/phrasebank.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "autokey/error.hpp"

namespace autokey {
namespace {

constexpr const char* kMagic = "autokeygen-phrasebank";

std::vector<std::string> split_stems(const std::string& key) {
  std::vector<std::string> out;
  std::istringstream in(key);
  std::string s;
  while (in >> s) out.push_back(s);
  return out;
}

// Stem keys of every contiguous n-gram of length 1..kMaxPhraseLength.
std::unordered_set<std::string> ngram_keys(const Document& doc) {
  std::unordered_set<std::string> keys;
  const std::size_t n = doc.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::string key;
    for (std::size_t len = 1; len <= kMaxPhraseLength && i + len <= n; ++len) {
      if (len > 1) key.push_back(' ');
      key += doc.tokens[i + len - 1].stem;
      keys.insert(key);
    }
  }
  return keys;
}

}  // namespace

PhraseBank PhraseBank::build(std::span<const Document> corpus) {
  if (corpus.empty()) throw Error("empty corpus");

  // std::map keeps ids ordered by stem key, independent of corpus order.
  std::map<std::string, BankEntry> pooled;
  for (const Document& doc : corpus) {
    for (CandidatePhrase& c : extract_present(doc)) {
      auto [it, inserted] = pooled.try_emplace(c.stem_key);
      if (!inserted) continue;
      it->second.stem_key = c.stem_key;
      it->second.surface = std::move(c.surface);
      it->second.stems = std::move(c.stems);
    }
  }

  PhraseBank bank;
  bank.doc_count_ = static_cast<int>(corpus.size());
  bank.entries_.reserve(pooled.size());
  for (auto& [key, entry] : pooled) {
    entry.id = static_cast<std::uint32_t>(bank.entries_.size());
    bank.by_key_.emplace(key, entry.id);
    bank.entries_.push_back(std::move(entry));
  }

  for (const Document& doc : corpus) {
    for (const std::string& key : ngram_keys(doc)) {
      auto it = bank.by_key_.find(key);
      if (it != bank.by_key_.end()) ++bank.entries_[it->second].df;
    }
  }

  bank.rebuild_index();
  return bank;
}

void PhraseBank::rebuild_index() {
  index_.clear();
  anchors_.clear();
  by_key_.clear();
  distinct_stems_.assign(entries_.size(), 0);
  for (const BankEntry& e : entries_) {
    by_key_.emplace(e.stem_key, e.id);
    std::vector<std::string> distinct = e.stems;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    distinct_stems_[e.id] = static_cast<std::uint32_t>(distinct.size());
    for (const std::string& s : distinct) index_[s].push_back(e.id);
  }
  for (const BankEntry& e : entries_) {
    const std::string* rarest = nullptr;
    std::size_t best = 0;
    for (const std::string& s : e.stems) {
      std::size_t size = index_[s].size();
      if (rarest == nullptr || size < best || (size == best && s < *rarest)) {
        rarest = &s;
        best = size;
      }
    }
    anchors_[*rarest].push_back(e.id);
  }
}

const BankEntry* PhraseBank::find(const std::string& stem_key) const {
  auto it = by_key_.find(stem_key);
  return it == by_key_.end() ? nullptr : &entries_[it->second];
}

const std::vector<std::uint32_t>& PhraseBank::postings(const std::string& stem) const {
  static const std::vector<std::uint32_t> kEmpty;
  auto it = index_.find(stem);
  return it == index_.end() ? kEmpty : it->second;
}

CandidatePhrase PhraseBank::candidate(const BankEntry& e) const {
  CandidatePhrase c = CandidatePhrase::from_text(e.surface);
  // Guards against surfaces whose re-tokenization differs from the stored key.
  c.stems = e.stems;
  c.stem_key = e.stem_key;
  c.span_count = 0;
  c.first_position = kNoPosition;
  return c;
}

std::vector<CandidatePhrase> PhraseBank::draw_absent(const Document& doc) const {
  const std::size_t doc_stems = doc.stem_set.size();
  std::vector<std::uint32_t> hits;
  for (const std::string& s : doc.stem_set) {
    auto it = anchors_.find(s);
    if (it == anchors_.end()) continue;
    for (std::uint32_t id : it->second) {
      if (distinct_stems_[id] > doc_stems) continue;
      const BankEntry& e = entries_[id];
      bool all = std::all_of(e.stems.begin(), e.stems.end(),
                             [&](const std::string& st) { return doc.has_stem(st); });
      if (all) hits.push_back(id);
    }
  }
  std::sort(hits.begin(), hits.end());

  std::vector<CandidatePhrase> out;
  if (hits.empty()) return out;
  const std::unordered_set<std::string> present = ngram_keys(doc);
  for (std::uint32_t id : hits) {
    const BankEntry& e = entries_[id];
    if (present.count(e.stem_key)) continue;
    out.push_back(candidate(e));
  }
  return out;
}

void PhraseBank::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << kMagic << '\t' << kFormatVersion << '\n';
  out << "doc_count\t" << doc_count_ << '\n';
  out << "entries\t" << entries_.size() << '\n';
  for (const BankEntry& e : entries_) {
    out << e.id << '\t' << e.surface << '\t' << e.stem_key << '\t' << e.df << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

PhraseBank PhraseBank::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  auto fail = [&](std::size_t line, const std::string& what) -> Error {
    return Error(path.string() + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  std::string field;
  int version = 0;
  if (!std::getline(in, line)) throw fail(1, "missing header");
  {
    std::istringstream hs(line);
    std::getline(hs, field, '\t');
    if (field != kMagic || !(hs >> version)) throw fail(1, "not a phrase bank file");
    if (version != kFormatVersion) {
      throw fail(1, "unsupported format version " + std::to_string(version) + " (expected " +
                        std::to_string(kFormatVersion) + ")");
    }
  }
  PhraseBank bank;
  std::size_t count = 0;
  if (!std::getline(in, line) || line.rfind("doc_count\t", 0) != 0) throw fail(2, "missing doc_count");
  bank.doc_count_ = std::stoi(line.substr(10));
  if (bank.doc_count_ < 1) throw fail(2, "doc_count must be >= 1");
  if (!std::getline(in, line) || line.rfind("entries\t", 0) != 0) throw fail(3, "missing entries");
  count = std::stoul(line.substr(8));

  bank.entries_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t lineno = i + 4;
    if (!std::getline(in, line)) throw fail(lineno, "truncated: expected " + std::to_string(count) + " entries");
    std::vector<std::string> cols;
    std::istringstream ls(line);
    while (std::getline(ls, field, '\t')) cols.push_back(field);
    if (cols.size() != 4) throw fail(lineno, "expected 4 tab-separated fields");
    BankEntry e;
    e.id = static_cast<std::uint32_t>(std::stoul(cols[0]));
    if (e.id != i) throw fail(lineno, "entry ids must be sequential");
    e.surface = cols[1];
    e.stem_key = cols[2];
    e.stems = split_stems(e.stem_key);
    e.df = std::stoi(cols[3]);
    if (e.stems.empty() || e.stems.size() > kMaxPhraseLength) throw fail(lineno, "bad stem key");
    if (e.df < 1 || e.df > bank.doc_count_) throw fail(lineno, "df out of range");
    bank.entries_.push_back(std::move(e));
  }
  bank.rebuild_index();
  return bank;
}

CoverageStats coverage_stats(const PhraseBank& bank, std::span<const GoldDocument> labeled) {
  CoverageStats stats;
  std::size_t bank_hits = 0;
  std::size_t token_hits = 0;
  for (const GoldDocument& g : labeled) {
    std::unordered_set<std::string> seen;
    for (const std::string& phrase : g.keyphrases) {
      std::vector<Token> tokens = tokenize(phrase);
      if (tokens.empty()) continue;
      CandidatePhrase c = CandidatePhrase::from_tokens(std::move(tokens));
      if (!seen.insert(c.stem_key).second) continue;
      if (count_contiguous(g.doc, c) > 0) continue;
      ++stats.absent_gold;
      if (bank.find(c.stem_key) != nullptr) ++bank_hits;
      bool all = std::all_of(c.stems.begin(), c.stems.end(),
                             [&](const std::string& s) { return g.doc.has_stem(s); });
      if (all) ++token_hits;
    }
  }
  if (stats.absent_gold > 0) {
    stats.bank_hit_rate = static_cast<double>(bank_hits) / static_cast<double>(stats.absent_gold);
    stats.token_hit_rate = static_cast<double>(token_hits) / static_cast<double>(stats.absent_gold);
  }
  return stats;
}

}  // namespace autokey
