#include <random>
#include <sstream>

#include "autokey/error.hpp"
#include "autokey/metrics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace autokey;

namespace {

std::vector<std::string> keys(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST_CASE("split by stemmed contiguity") {
  auto doc = Document::from_text("d", "", "We study security breach detection in sensor networks.");
  std::vector<std::string> phrases{"Security Breaches", "sensor network", "breach security", "detection sensor",
                                   "network detection"};
  auto s = split_present_absent(doc, phrases);
  REQUIRE(s.present.size() == 2);
  CHECK(s.present[0].surface == "Security Breaches");
  CHECK(s.present[1].surface == "sensor network");
  REQUIRE(s.absent.size() == 3);
  CHECK(s.absent[0].surface == "breach security");
  CHECK(s.absent[1].surface == "detection sensor");  // "in" sits between them
}

TEST_CASE("precision and recall at k") {
  std::set<std::string> gold{"a", "b", "c"};
  auto pr = precision_recall_at_k(keys({"a", "x", "b", "y", "z"}), gold, 5);
  CHECK(pr.precision == doctest::Approx(2.0 / 5.0));
  CHECK(pr.recall == doctest::Approx(2.0 / 3.0));
  CHECK(f1(pr.precision, pr.recall) == doctest::Approx(0.5));

  pr = precision_recall_at_k({}, gold, 5);
  CHECK(pr.precision == 0.0);
  CHECK(pr.recall == 0.0);

  // Truncation at min(k, n): two predictions at k = 10.
  pr = precision_recall_at_k(keys({"a", "x"}), gold, 10);
  CHECK(pr.precision == doctest::Approx(0.5));

  CHECK(precision_recall_at_k(keys({"c", "b", "a", "x"}), gold, 3).recall == 1.0);
  CHECK(f1(1, 1) == 1.0);
  CHECK(f1(0, 0) == 0.0);
  CHECK(f1_at_O(keys({"a", "x", "y", "b"}), gold) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("evaluate_corpus macro averages and dedup") {
  auto d1 = Document::from_text("d1", "", "alpha beta gamma delta");
  auto d2 = Document::from_text("d2", "", "alpha beta gamma delta");
  // d1: present gold {alpha, beta}; predictions alpha then 4 misses.
  EvalInput a{&d1, {"alpha", "gamma", "delta", "gamma delta", "beta gamma"}, {"alpha", "beta"}};
  EvalInput b{&d2, {"alpha", "beta"}, {"alpha", "beta"}};
  auto one = evaluate_corpus(std::vector<EvalInput>{a});
  // P@5 = 1/5, R@5 = 1/2 -> F1 = 2/7
  CHECK(*one.present_f1_at_5 == doctest::Approx(2.0 / 7.0));
  CHECK_FALSE(one.absent_r_at_10.has_value());
  CHECK(one.absent_docs == 0);

  auto both = evaluate_corpus(std::vector<EvalInput>{a, b});
  CHECK(*both.present_f1_at_5 == doctest::Approx((2.0 / 7.0 + 1.0) / 2));

  EvalInput dup{&d2, {"alpha", "alpha", "Alpha", "alphas", "beta"}, {"alpha", "beta"}};
  EvalInput plain{&d2, {"alpha", "beta"}, {"alpha", "beta"}};
  auto rd = evaluate_corpus(std::vector<EvalInput>{dup});
  auto rp = evaluate_corpus(std::vector<EvalInput>{plain});
  CHECK(*rd.present_f1_at_5 == *rp.present_f1_at_5);

  EvalInput absent{&d1, {"delta alpha", "beta alpha"}, {"beta alpha", "zeta"}};
  auto ra = evaluate_corpus(std::vector<EvalInput>{absent});
  CHECK(*ra.absent_r_at_10 == doctest::Approx(0.5));
  CHECK_FALSE(ra.present_f1_at_5.has_value());

  CHECK_THROWS_AS(evaluate_corpus(std::vector<EvalInput>{}), Error);
}

TEST_CASE("report outputs") {
  auto d = Document::from_text("d1", "", "alpha beta");
  EvalInput a{&d, {"alpha"}, {"alpha", "gamma"}};
  std::vector<EvalReport> reports{evaluate_corpus(std::vector<EvalInput>{a}, "toy")};
  std::ostringstream csv;
  write_report_csv(csv, reports);
  CHECK(csv.str().rfind("dataset,metric,value\ntoy,present_f1@5,1.000000\n", 0) == 0);
  CHECK(csv.str().find("toy,absent_r@10,0.000000\n") != std::string::npos);
  std::ostringstream table, docs;
  write_report_table(table, reports[0]);
  write_document_csv(docs, reports[0]);
  CHECK(table.str().find("F1@O") != std::string::npos);
  CHECK(docs.str().find("d1,1,1,") != std::string::npos);
}

TEST_CASE("evaluate_corpus equals the naive oracle") {
  std::mt19937_64 rng(31);
  oracle::RandomCorpus rc(25, rng);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<oracle::RandomEvalCase> cases;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) cases.push_back(oracle::random_eval_case(rc, rng, "d" + std::to_string(i)));
    std::vector<EvalInput> inputs;
    for (const auto& c : cases) inputs.push_back({&c.doc, c.predicted, c.gold});
    auto got = evaluate_corpus(inputs);
    auto want = oracle::naive_evaluate(inputs);
    auto same = [](std::optional<double> x, std::optional<double> y) {
      return x.has_value() == y.has_value() && (!x || std::abs(*x - *y) < 1e-12);
    };
    CHECK(same(got.present_f1_at_5, want.f1_5));
    CHECK(same(got.present_f1_at_10, want.f1_10));
    CHECK(same(got.present_f1_at_O, want.f1_o));
    CHECK(same(got.absent_r_at_10, want.r_10));
    CHECK(same(got.absent_r_at_20, want.r_20));
  }
}
