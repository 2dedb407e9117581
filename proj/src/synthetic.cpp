#include "autokey/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "autokey/error.hpp"

namespace autokey {
namespace {

struct Phrase {
  int a, b;
  int uses = 0;
};

std::vector<std::string> make_words(int n, std::mt19937_64& rng) {
  static const char* onset[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z", "br", "kr", "tr"};
  static const char* vowel[] = {"a", "o", "u", "i"};
  static const char* coda[] = {"k", "m", "n", "r", "t", "x", "v"};
  std::vector<std::string> out;
  std::unordered_set<std::string> stems;
  while (static_cast<int>(out.size()) < n) {
    std::string w;
    const int syll = 2 + static_cast<int>(rng() % 2);
    for (int s = 0; s < syll; ++s) {
      w += onset[rng() % std::size(onset)];
      w += vowel[rng() % std::size(vowel)];
    }
    w += coda[rng() % std::size(coda)];
    if (is_stopword(w) || !stems.insert(stem(w)).second) continue;
    out.push_back(w);
  }
  return out;
}

const char* const kFiller =
    " these results are consistent across all experiments . the proposed approach is simple and general .";

}  // namespace

std::vector<CorpusRecord> synthetic_corpus(const SyntheticOptions& o) {
  if (o.documents <= 0 || o.present_per_doc < 3 || o.absent_per_doc < 0 || o.docs_per_phrase <= 0) {
    throw Error("synthetic: bad options");
  }
  if (o.words < 2 * (o.present_per_doc + o.absent_per_doc) + 2) throw Error("synthetic: word pool too small");
  std::mt19937_64 rng(o.seed);
  const std::vector<std::string> words = make_words(o.words, rng);

  const int phrase_count = std::max(o.present_per_doc + o.absent_per_doc + 1,
                                    o.documents * o.present_per_doc / o.docs_per_phrase);
  std::vector<Phrase> phrases;
  std::set<std::pair<int, int>> taken;
  while (static_cast<int>(phrases.size()) < phrase_count) {
    int a = static_cast<int>(rng() % words.size()), b = static_cast<int>(rng() % words.size());
    if (a == b || taken.count({a, b}) || taken.count({b, a})) continue;
    taken.insert({a, b});
    phrases.push_back({a, b});
  }
  auto text = [&](int p) { return words[phrases[p].a] + " " + words[phrases[p].b]; };

  std::vector<std::vector<int>> present(o.documents);
  std::vector<int> order(phrases.size());
  for (int d = 0; d < o.documents; ++d) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return phrases[x].uses < phrases[y].uses; });
    std::set<int> used;
    for (int p : order) {
      if (static_cast<int>(present[d].size()) == o.present_per_doc) break;
      if (used.count(phrases[p].a) || used.count(phrases[p].b)) continue;
      used.insert(phrases[p].a);
      used.insert(phrases[p].b);
      present[d].push_back(p);
      ++phrases[p].uses;
    }
  }

  std::vector<CorpusRecord> out;
  for (int d = 0; d < o.documents; ++d) {
    std::set<int> used;
    for (int p : present[d]) {
      used.insert(phrases[p].a);
      used.insert(phrases[p].b);
    }
    std::vector<int> absent;
    std::vector<int> pool;
    for (int i = 0; i < static_cast<int>(phrases.size()); ++i) {
      if (phrases[i].uses > 0) pool.push_back(i);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int p : pool) {
      if (static_cast<int>(absent.size()) == o.absent_per_doc) break;
      if (used.count(phrases[p].a) || used.count(phrases[p].b)) continue;
      used.insert(phrases[p].a);
      used.insert(phrases[p].b);
      absent.push_back(p);
    }

    const auto& ps = present[d];
    if (static_cast<int>(ps.size()) < o.present_per_doc) throw Error("synthetic: word pool too small for the phrases");
    CorpusRecord r;
    r.id = "syn" + std::to_string(d);
    r.title = text(ps[0]) + " and " + text(ps[1]);
    std::string body = "in this paper we study the " + text(ps[0]) + " of the " + text(ps[1]) + " .";
    std::string all = "the " + text(ps[0]);
    for (std::size_t i = 1; i < ps.size(); ++i) all += (i + 1 == ps.size() ? " and the " : " , the ") + text(ps[i]);
    body += " we show that " + all + " are related .";
    std::string rest = "the " + text(ps[2]);
    for (std::size_t i = 3; i < ps.size(); ++i) rest += (i + 1 == ps.size() ? " and the " : " , the ") + text(ps[i]);
    body += " finally , " + rest + " are evaluated .";
    body += " our experiments on " + rest + " are conclusive .";

    // Scattered words of the absent phrases, never adjacent to their partner.
    std::vector<int> loose;
    for (int p : absent) {
      loose.push_back(phrases[p].a);
      loose.push_back(phrases[p].b);
    }
    for (int round = 0; round < 3; ++round) {
      if (loose.empty()) break;
      std::rotate(loose.begin(), loose.begin() + 1, loose.end());
      std::string s = " we also consider the " + words[loose[0]];
      for (std::size_t i = 1; i < loose.size(); ++i) s += " , the " + words[loose[i]];
      body += s + " .";
    }
    body += kFiller;
    r.abstract = body;

    std::vector<std::string> kws;
    for (int p : ps) kws.push_back(text(p));
    for (int p : absent) kws.push_back(text(p));
    r.keywords = kws;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace autokey
