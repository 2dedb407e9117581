#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "autokey/textproc.hpp"

namespace autokey {

struct EvalPhrase {
  std::string surface;
  std::vector<std::string> stems;
  std::string stem_key;

  static EvalPhrase from_text(std::string_view text);
};

struct SplitLists {
  std::vector<EvalPhrase> present;
  std::vector<EvalPhrase> absent;
};

// Present iff the stem sequence occurs contiguously in the document. Order is kept.
SplitLists split_present_absent(const Document& doc, std::span<const std::string> phrases);

// Stem keys of the phrases, first occurrence of each key kept.
std::vector<std::string> unique_keys(std::span<const EvalPhrase> phrases);

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
};

// Predictions truncated to min(k, |predicted|); P is 0 for an empty truncated
// list and R is 0 for an empty gold set. predicted must already be deduplicated.
PrecisionRecall precision_recall_at_k(std::span<const std::string> predicted, const std::set<std::string>& gold,
                                      std::size_t k);
double f1(double precision, double recall);
double f1_at_k(std::span<const std::string> predicted, const std::set<std::string>& gold, std::size_t k);
double f1_at_O(std::span<const std::string> predicted, const std::set<std::string>& gold);

struct EvalInput {
  const Document* doc = nullptr;
  std::vector<std::string> predicted;  // ranked, present and absent together
  std::vector<std::string> gold;
};

struct DocumentScores {
  std::string id;
  std::size_t present_gold = 0;
  std::size_t absent_gold = 0;
  std::optional<double> f1_at_5, f1_at_10, f1_at_O;  // empty when present_gold == 0
  std::optional<double> r_at_10, r_at_20;            // empty when absent_gold == 0
};

struct EvalReport {
  std::string dataset;
  std::optional<double> present_f1_at_5, present_f1_at_10, present_f1_at_O;
  std::optional<double> absent_r_at_10, absent_r_at_20;
  std::size_t present_docs = 0;  // documents with at least one present gold phrase
  std::size_t absent_docs = 0;
  std::vector<DocumentScores> documents;
};

DocumentScores score_document(const EvalInput& input);

// Macro averages; documents with no gold phrases of a type are left out of that
// type's averages.
EvalReport evaluate_corpus(std::span<const EvalInput> inputs, std::string dataset = "corpus");

// dataset,metric,value rows.
void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
void write_report_table(std::ostream& out, const EvalReport& report);
void write_document_csv(std::ostream& out, const EvalReport& report);

}  // namespace autokey
