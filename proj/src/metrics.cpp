#include "autokey/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "autokey/candidates.hpp"
#include "autokey/error.hpp"

namespace autokey {
namespace {

std::string fmt(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::optional<double> mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

EvalPhrase EvalPhrase::from_text(std::string_view text) {
  CandidatePhrase c = CandidatePhrase::from_text(text);
  return {std::string(text), std::move(c.stems), std::move(c.stem_key)};
}

SplitLists split_present_absent(const Document& doc, std::span<const std::string> phrases) {
  SplitLists out;
  for (const std::string& p : phrases) {
    EvalPhrase e = EvalPhrase::from_text(p);
    if (e.stems.empty()) continue;
    (count_contiguous(doc, e.stems) > 0 ? out.present : out.absent).push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> unique_keys(std::span<const EvalPhrase> phrases) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const EvalPhrase& p : phrases) {
    if (seen.insert(p.stem_key).second) out.push_back(p.stem_key);
  }
  return out;
}

PrecisionRecall precision_recall_at_k(std::span<const std::string> predicted, const std::set<std::string>& gold,
                                      std::size_t k) {
  const std::size_t n = std::min(k, predicted.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += gold.count(predicted[i]);
  PrecisionRecall pr;
  if (n > 0) pr.precision = static_cast<double>(hits) / static_cast<double>(n);
  if (!gold.empty()) pr.recall = static_cast<double>(hits) / static_cast<double>(gold.size());
  return pr;
}

double f1(double precision, double recall) {
  if (precision + recall <= 0) return 0.0;
  return 2 * precision * recall / (precision + recall);
}

double f1_at_k(std::span<const std::string> predicted, const std::set<std::string>& gold, std::size_t k) {
  auto pr = precision_recall_at_k(predicted, gold, k);
  return f1(pr.precision, pr.recall);
}

double f1_at_O(std::span<const std::string> predicted, const std::set<std::string>& gold) {
  return f1_at_k(predicted, gold, gold.size());
}

DocumentScores score_document(const EvalInput& input) {
  if (!input.doc) throw Error("evaluation input without a document");
  const Document& doc = *input.doc;
  SplitLists pred = split_present_absent(doc, input.predicted);
  SplitLists gold = split_present_absent(doc, input.gold);
  std::vector<std::string> pred_present = unique_keys(pred.present);
  std::vector<std::string> pred_absent = unique_keys(pred.absent);
  std::set<std::string> gold_present, gold_absent;
  for (const EvalPhrase& g : gold.present) gold_present.insert(g.stem_key);
  for (const EvalPhrase& g : gold.absent) gold_absent.insert(g.stem_key);

  DocumentScores s;
  s.id = doc.id;
  s.present_gold = gold_present.size();
  s.absent_gold = gold_absent.size();
  if (!gold_present.empty()) {
    s.f1_at_5 = f1_at_k(pred_present, gold_present, 5);
    s.f1_at_10 = f1_at_k(pred_present, gold_present, 10);
    s.f1_at_O = f1_at_O(pred_present, gold_present);
  }
  if (!gold_absent.empty()) {
    s.r_at_10 = precision_recall_at_k(pred_absent, gold_absent, 10).recall;
    s.r_at_20 = precision_recall_at_k(pred_absent, gold_absent, 20).recall;
  }
  return s;
}

EvalReport evaluate_corpus(std::span<const EvalInput> inputs, std::string dataset) {
  if (inputs.empty()) throw Error("evaluate: empty corpus");
  EvalReport r;
  r.dataset = std::move(dataset);
  std::vector<double> f5, f10, fo, r10, r20;
  for (const EvalInput& in : inputs) {
    DocumentScores s = score_document(in);
    if (s.f1_at_5) {
      f5.push_back(*s.f1_at_5);
      f10.push_back(*s.f1_at_10);
      fo.push_back(*s.f1_at_O);
    }
    if (s.r_at_10) {
      r10.push_back(*s.r_at_10);
      r20.push_back(*s.r_at_20);
    }
    r.documents.push_back(std::move(s));
  }
  r.present_docs = f5.size();
  r.absent_docs = r10.size();
  r.present_f1_at_5 = mean(f5);
  r.present_f1_at_10 = mean(f10);
  r.present_f1_at_O = mean(fo);
  r.absent_r_at_10 = mean(r10);
  r.absent_r_at_20 = mean(r20);
  return r;
}

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "dataset,metric,value\n";
  for (const EvalReport& r : reports) {
    out << r.dataset << ",present_f1@5," << fmt(r.present_f1_at_5) << '\n';
    out << r.dataset << ",present_f1@10," << fmt(r.present_f1_at_10) << '\n';
    out << r.dataset << ",present_f1@O," << fmt(r.present_f1_at_O) << '\n';
    out << r.dataset << ",absent_r@10," << fmt(r.absent_r_at_10) << '\n';
    out << r.dataset << ",absent_r@20," << fmt(r.absent_r_at_20) << '\n';
    out << r.dataset << ",documents," << r.documents.size() << '\n';
    out << r.dataset << ",present_eligible_documents," << r.present_docs << '\n';
    out << r.dataset << ",absent_eligible_documents," << r.absent_docs << '\n';
    out << r.dataset << ",zero_gold_documents,excluded\n";
  }
}

void write_report_table(std::ostream& out, const EvalReport& r) {
  char line[128];
  out << "dataset: " << r.dataset << " (" << r.documents.size() << " documents)\n";
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s   (%zu docs)\n", "present", "F1@5", "F1@10", "F1@O",
                r.present_docs);
  out << line;
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s\n", "", fmt(r.present_f1_at_5).c_str(),
                fmt(r.present_f1_at_10).c_str(), fmt(r.present_f1_at_O).c_str());
  out << line;
  std::snprintf(line, sizeof line, "%-16s %10s %10s   (%zu docs)\n", "absent", "R@10", "R@20", r.absent_docs);
  out << line;
  std::snprintf(line, sizeof line, "%-16s %10s %10s\n", "", fmt(r.absent_r_at_10).c_str(),
                fmt(r.absent_r_at_20).c_str());
  out << line;
  out << "documents without gold phrases of a type are excluded from that type's averages\n";
}

void write_document_csv(std::ostream& out, const EvalReport& r) {
  out << "id,present_gold,absent_gold,present_f1@5,present_f1@10,present_f1@O,absent_r@10,absent_r@20\n";
  for (const DocumentScores& s : r.documents) {
    out << s.id << ',' << s.present_gold << ',' << s.absent_gold << ',' << fmt(s.f1_at_5) << ',' << fmt(s.f1_at_10)
        << ',' << fmt(s.f1_at_O) << ',' << fmt(s.r_at_10) << ',' << fmt(s.r_at_20) << '\n';
  }
}

}  // namespace autokey
