// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: each test is one release criterion and prints a single
// PASS/FAIL line. Assertions are fatal so a criterion's verdict line is
// trustworthy.

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "avir/avir.hpp"
#include "test_http.hpp"
#include "test_oracles.hpp"
#include "test_util.hpp"

using namespace avir;
using avir_test::LocalServer;
using avir_test::TempDir;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// --------------------------------------------------------------------------
// Criterion 1: exact 2-means equals the exhaustive contiguous-split oracle
// on >= 1000 seeded random vectors; the chosen split matches bit-for-bit
// under identical accumulation order and the SSE stays within 1e-12 of an
// independent two-pass accumulation. Budget: 5 s.
// --------------------------------------------------------------------------

TEST(Acceptance, clustering_oracle_equivalence) {
  const auto t0 = std::chrono::steady_clock::now();
  avir_test::Rng rng(2024);

  for (int trial = 0; trial < 1500; ++trial) {
    const int n = rng.range(2, 30);
    const std::vector<double> scores = avir_test::random_scores(rng, n);

    const ClusterPartition part = two_means_1d(scores);
    const avir_test::SplitOracle oracle = avir_test::split_oracle(scores);

    ASSERT_EQ(part.relevant_indices.size(), oracle.relevant_size)
        << "trial " << trial;
    ASSERT_EQ(part.relevant_indices, oracle.relevant_indices);
    ASSERT_EQ(part.irrelevant_indices, oracle.irrelevant_indices);
    // identical accumulation order -> exact equality is required
    ASSERT_EQ(part.sse, oracle.sse_mirror);
    ASSERT_LE(std::abs(part.sse - oracle.sse_independent), 1e-12);
  }
  ASSERT_LT(seconds_since(t0), 5.0);
}

// --------------------------------------------------------------------------
// Criterion 2: the selector's branch table on the three fixed documents.
// --------------------------------------------------------------------------

TEST(Acceptance, selector_branch_table) {
  const SelectionPolicy policy;

  const SelectionResult short_doc = select_adaptive(
      ScoredDocument{"d", "q", {0.34, 0.33, 0.33}}, policy);
  ASSERT_EQ(short_doc.selected, (std::vector<int>{0, 1, 2}));
  ASSERT_EQ(short_doc.branch, SelectionBranch::short_keep_all);

  const SelectionResult threshold_hit =
      select_adaptive(ScoredDocument{"d", "q", {0.9, 0.1, 0.05}}, policy);
  ASSERT_EQ(threshold_hit.selected, (std::vector<int>{0}));
  ASSERT_EQ(threshold_hit.branch, SelectionBranch::short_threshold_hit);

  const SelectionResult capped = select_adaptive(
      ScoredDocument{"d", "q",
                     {0.95, 0.9, 0.88, 0.87, 0.86, 0.85, 0.84, 0.83, 0.82,
                      0.01}},
      policy);
  ASSERT_EQ(capped.selected, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
  ASSERT_EQ(capped.branch, SelectionBranch::cluster_capped);
}

// --------------------------------------------------------------------------
// Criterion 3: selector invariants over >= 10,000 randomized cases.
// Budget: 30 s.
// --------------------------------------------------------------------------

TEST(Acceptance, selector_invariants) {
  const auto t0 = std::chrono::steady_clock::now();
  avir_test::Rng rng(4096);
  const SelectionPolicy policy;

  for (int trial = 0; trial < 10000; ++trial) {
    const int n = rng.range(1, 30);

    // distinct scores so permutation equivariance is well defined
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) scores[i] = (rng.real01() + i) / n;
    for (int i = n - 1; i > 0; --i) {
      std::swap(scores[i], scores[rng.range(0, i)]);
    }
    const ScoredDocument doc{"d", "q", scores};

    const SelectionResult result = select_adaptive(doc, policy);

    // non-emptiness, uniqueness, range, cardinality bound
    ASSERT_FALSE(result.selected.empty());
    ASSERT_TRUE(std::is_sorted(result.selected.begin(), result.selected.end()));
    ASSERT_TRUE(std::adjacent_find(result.selected.begin(),
                                   result.selected.end()) ==
                result.selected.end());
    ASSERT_GE(result.selected.front(), 0);
    ASSERT_LT(result.selected.back(), n);
    ASSERT_LE(result.selected.size(), static_cast<std::size_t>(n));
    if (n >= policy.short_doc_limit) {
      ASSERT_LE(result.selected.size(),
                static_cast<std::size_t>(policy.max_pages));
    }

    // argmax containment
    const int argmax = static_cast<int>(
        std::max_element(scores.begin(), scores.end()) - scores.begin());
    ASSERT_TRUE(std::binary_search(result.selected.begin(),
                                   result.selected.end(), argmax));

    // determinism
    const SelectionResult again = select_adaptive(doc, policy);
    ASSERT_EQ(result.selected, again.selected);
    ASSERT_EQ(result.branch, again.branch);

    // permutation equivariance
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.range(0, i)]);
    }
    std::vector<double> permuted(n);
    for (int i = 0; i < n; ++i) permuted[perm[i]] = scores[i];
    const SelectionResult mapped =
        select_adaptive(ScoredDocument{"d", "q", permuted}, policy);
    std::vector<int> expected;
    for (int i : result.selected) expected.push_back(perm[i]);
    std::sort(expected.begin(), expected.end());
    ASSERT_EQ(mapped.selected, expected);

    // affine invariance of the clustering partition
    if (n >= 2) {
      const double a = 0.2 + 0.8 * rng.real01();
      const double b = (1.0 - a) * rng.real01();
      std::vector<double> affine(scores);
      for (double& s : affine) s = std::min(1.0, std::max(0.0, a * s + b));
      ASSERT_EQ(two_means_1d(scores).relevant_indices,
                two_means_1d(affine).relevant_indices);
    }
  }
  ASSERT_LT(seconds_since(t0), 30.0);
}

// --------------------------------------------------------------------------
// Criterion 4: metric oracles. Levenshtein against an independent
// full-matrix DP on >= 500 random pairs plus the fixed triple; the fixed
// ANLS/EM/F1 cases; bounds and the EM-anchored implication chain on a
// randomized corpus.
// --------------------------------------------------------------------------

TEST(Acceptance, metric_oracles) {
  avir_test::Rng rng(77);

  ASSERT_EQ(levenshtein_distance("kitten", "sitting"), 3u);

  static const std::u32string alphabet = U"abcdef é中";
  const auto random32 = [&](int max_len) {
    std::u32string s;
    const int len = rng.range(0, max_len);
    for (int i = 0; i < len; ++i) {
      s.push_back(
          alphabet[rng.range(0, static_cast<int>(alphabet.size()) - 1)]);
    }
    return s;
  };
  for (int trial = 0; trial < 600; ++trial) {
    const std::u32string a = random32(20);
    const std::u32string b = random32(20);
    ASSERT_EQ(levenshtein_distance(avir_test::encode_utf8(a),
                                   avir_test::encode_utf8(b)),
              avir_test::levenshtein_oracle(a, b));
  }

  // fixed metric cases
  ASSERT_NEAR(anls_score("hallo", {"hello"}), 0.8, 1e-12);
  ASSERT_DOUBLE_EQ(anls_score("Paris", {"paris"}), 1.0);
  ASSERT_DOUBLE_EQ(anls_score("cat", {"dog"}), 0.0);
  ASSERT_EQ(exact_match("Paris", {"paris"}), 1);
  ASSERT_EQ(exact_match("the Eiffel Tower", {"Eiffel Tower"}), 1);
  ASSERT_EQ(exact_match("Paris, France", {"Paris"}), 0);
  ASSERT_NEAR(token_f1("barack obama", {"obama"}), 0.6667, 1e-4);
  ASSERT_DOUBLE_EQ(token_f1("blue", {"blue"}), 1.0);
  ASSERT_DOUBLE_EQ(token_f1("red", {"blue"}), 0.0);

  // bounds and the implication chain on a randomized corpus (clean vocab:
  // no punctuation or articles, so EM-equality implies string equality)
  static const std::vector<std::string> vocab{"red",   "blue",  "apple",
                                              "tree",  "water", "stone",
                                              "42",    "x7",    "delta"};
  const auto make_text = [&](int len) {
    std::string s;
    for (int i = 0; i < len; ++i) {
      if (i) s += ' ';
      s += vocab[rng.range(0, static_cast<int>(vocab.size()) - 1)];
    }
    return s;
  };
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string gold = make_text(rng.range(1, 4));
    const std::string pred =
        rng.range(0, 2) == 0 ? make_text(rng.range(1, 4)) : gold;
    const double anls = anls_score(pred, {gold});
    const int em = exact_match(pred, {gold});
    const double f1 = token_f1(pred, {gold});
    ASSERT_GE(anls, 0.0);
    ASSERT_LE(anls, 1.0);
    ASSERT_GE(f1, 0.0);
    ASSERT_LE(f1, 1.0);
    ASSERT_TRUE(anls == 0.0 || anls >= 0.5);
    if (em == 1) {
      ASSERT_DOUBLE_EQ(f1, 1.0);
      ASSERT_DOUBLE_EQ(anls, 1.0);
    }
  }
}

// --------------------------------------------------------------------------
// Criterion 5: offline end-to-end. 200 synthetic documents through
// mock scorer + mock answerer: EM = 1.0 and selection_recall = 1.0; with
// the gold page suppressed, EM = 0.0. Outputs byte-identical across two
// runs. Budget: 10 s.
// --------------------------------------------------------------------------

TEST(Acceptance, offline_end_to_end) {
  const auto t0 = std::chrono::steady_clock::now();
  TempDir dir("accept-e2e");

  harness::SyntheticSpec spec;
  spec.n_docs = 200;
  spec.pages_min = 4;
  spec.pages_max = 20;
  spec.signal = 0.9;
  spec.noise_max = 0.1;
  spec.confusers = 0;
  spec.seed = 0;
  harness::gen_synthetic(spec, dir.file("questions.jsonl"),
                         dir.file("scores.jsonl"));

  harness::RunConfig config;
  config.questions_path = dir.file("questions.jsonl");
  config.scorer.kind = clients::ScorerKind::mock_oracle;
  config.answerer.kind = clients::AnswerKind::mock_echo;
  config.out_path = dir.file("preds1.jsonl");

  std::ostringstream log;
  const harness::RunSummary summary = harness::cmd_run(config, log);
  ASSERT_EQ(summary.num_questions, 200);
  ASSERT_EQ(summary.num_failed, 0);

  harness::EvalOptions eval_options;
  eval_options.questions_path = dir.file("questions.jsonl");
  eval_options.predictions_path = dir.file("preds1.jsonl");
  eval_options.report_path = dir.file("report1.json");
  const EvalReport report = harness::cmd_eval(eval_options, log);
  ASSERT_DOUBLE_EQ(report.exact_match, 1.0);
  ASSERT_DOUBLE_EQ(report.selection_recall, 1.0);

  // byte-identical reruns, prediction log and report alike
  config.out_path = dir.file("preds2.jsonl");
  harness::cmd_run(config, log);
  ASSERT_EQ(avir_test::read_text(dir.file("preds1.jsonl")),
            avir_test::read_text(dir.file("preds2.jsonl")));
  eval_options.predictions_path = dir.file("preds2.jsonl");
  eval_options.report_path = dir.file("report2.json");
  harness::cmd_eval(eval_options, log);
  ASSERT_EQ(avir_test::read_text(dir.file("report1.json")),
            avir_test::read_text(dir.file("report2.json")));

  // suppressing the gold page collapses exact match to zero
  config.scorer.mock.suppress_gold = true;
  config.out_path = dir.file("preds_suppressed.jsonl");
  harness::cmd_run(config, log);
  eval_options.predictions_path = config.out_path;
  eval_options.report_path.clear();
  const EvalReport suppressed = harness::cmd_eval(eval_options, log);
  ASSERT_DOUBLE_EQ(suppressed.exact_match, 0.0);
  ASSERT_DOUBLE_EQ(suppressed.selection_recall, 0.0);

  ASSERT_LT(seconds_since(t0), 10.0);
}

// --------------------------------------------------------------------------
// Criterion 6: ablation structure. TopK {1,2,4,8} vs adaptive over one
// shared scoring pass on a 2-confuser corpus: adaptive stays under the page
// budget, dominates low-k recall, and its avg_pages equals the per-document
// brute-force oracle exactly.
// --------------------------------------------------------------------------

TEST(Acceptance, ablation_structure) {
  TempDir dir("accept-ablation");

  harness::SyntheticSpec spec;
  spec.n_docs = 150;
  spec.pages_min = 4;
  spec.pages_max = 20;
  spec.confusers = 2;
  spec.seed = 0;
  harness::gen_synthetic(spec, dir.file("questions.jsonl"),
                         dir.file("scores.jsonl"));

  harness::RunConfig config;
  config.questions_path = dir.file("questions.jsonl");
  config.scores_path = dir.file("scores.jsonl");
  config.scorer.kind = clients::ScorerKind::file_replay;
  config.answerer_enabled = false;

  const harness::SweepSpec sweep =
      harness::SweepSpec::parse("topk:1,topk:2,topk:4,topk:8,adaptive", {});
  std::ostringstream log;
  const harness::CompareReport report =
      harness::cmd_compare(config, sweep, dir.file("compare.json"), log);

  ASSERT_EQ(report.rows.size(), 5u);
  const harness::CompareRow& topk1 = report.rows[0];
  const harness::CompareRow& topk2 = report.rows[1];
  const harness::CompareRow& topk8 = report.rows[3];
  const harness::CompareRow& adaptive = report.rows[4];
  ASSERT_EQ(adaptive.label, "adaptive");

  ASSERT_LT(adaptive.avg_pages, 8.0);
  ASSERT_LE(adaptive.avg_pages, topk8.avg_pages);
  ASSERT_GE(adaptive.selection_recall, topk1.selection_recall);
  ASSERT_GE(adaptive.selection_recall, topk2.selection_recall);

  // the recorded avg_pages must equal the brute-force oracle, tolerance 0
  const ScoreMap scores = io::load_scores(dir.file("scores.jsonl"));
  double oracle_total = 0.0;
  for (const auto& [qid, doc] : scores) {
    oracle_total += static_cast<double>(
        avir_test::adaptive_oracle(doc.scores, 0.6, 8, 4).size());
  }
  const double oracle_avg = oracle_total / static_cast<double>(scores.size());
  ASSERT_EQ(adaptive.avg_pages, oracle_avg);

  char expected[32];
  std::snprintf(expected, sizeof expected, "\"avg_pages\":%.6f", oracle_avg);
  ASSERT_NE(avir_test::read_text(dir.file("compare.json")).find(expected),
            std::string::npos);
}

// --------------------------------------------------------------------------
// Criterion 7: replication hook. With a user-supplied score cache and a
// served answer endpoint, run + eval emit the benchmark-table metrics in the
// documented format. No claim is made about any particular values.
// --------------------------------------------------------------------------

TEST(Acceptance, replication_hook_format) {
  TempDir dir("accept-hook");

  harness::SyntheticSpec spec;
  spec.n_docs = 12;
  spec.pages_min = 4;
  spec.pages_max = 10;
  spec.seed = 5;
  harness::gen_synthetic(spec, dir.file("questions.jsonl"),
                         dir.file("scores.jsonl"));

  LocalServer server;  // stands in for a served vision-language model
  server.server.Post("/v1/chat/completions",
                     [](const httplib::Request&, httplib::Response& res) {
                       res.set_content(
                           R"({"choices":[{"message":{"content":"42"}}]})",
                           "application/json");
                     });
  server.start();

  harness::RunConfig config;
  config.questions_path = dir.file("questions.jsonl");
  config.scores_path = dir.file("scores.jsonl");
  config.scorer.kind = clients::ScorerKind::file_replay;
  config.answerer.kind = clients::AnswerKind::remote;
  config.answerer.endpoint = server.url();
  config.answerer.model_name = "served-model";
  config.out_path = dir.file("preds.jsonl");

  std::ostringstream run_log;
  const harness::RunSummary summary = harness::cmd_run(config, run_log);
  ASSERT_EQ(summary.num_failed, 0);

  harness::EvalOptions eval_options;
  eval_options.questions_path = dir.file("questions.jsonl");
  eval_options.predictions_path = dir.file("preds.jsonl");
  eval_options.scores_path = dir.file("scores.jsonl");
  eval_options.report_path = dir.file("report.json");
  std::ostringstream eval_log;
  harness::cmd_eval(eval_options, eval_log);

  // printed table: one "<metric> <value to 4 decimals>" line per metric
  const std::string table = eval_log.str();
  for (const char* name :
       {"ANLS  ", "EM  ", "F1  ", "Page top-1", "Selection recall",
        "Avg. pages"}) {
    ASSERT_NE(table.find(name), std::string::npos) << name;
  }
  ASSERT_TRUE(table.find("ANLS                0.") != std::string::npos ||
              table.find("ANLS                1.") != std::string::npos);

  // report document: all aggregates present, fixed order, 6-digit reals
  const std::string report = avir_test::read_text(dir.file("report.json"));
  std::size_t last = 0;
  for (const char* key :
       {"\"anls\"", "\"exact_match\"", "\"token_f1\"",
        "\"page_top1_accuracy\"", "\"selection_recall\"", "\"avg_pages\"",
        "\"per_question\""}) {
    const std::size_t pos = report.find(key);
    ASSERT_NE(pos, std::string::npos) << key;
    ASSERT_GT(pos, last) << key;
    last = pos;
  }

  // remote runs carry latency; the log records every question
  const auto records = io::load_predictions(dir.file("preds.jsonl"));
  ASSERT_EQ(records.size(), 12u);
  for (const auto& rec : records) {
    ASSERT_TRUE(rec.latency_ms.has_value());
  }
}

}  // namespace

namespace {

/// Prints one verdict line per criterion.
class CriterionPrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    std::printf("[%s] %s\n", info.result()->Passed() ? "PASS" : "FAIL",
                info.name());
    std::fflush(stdout);
  }
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(
      new CriterionPrinter);
  return RUN_ALL_TESTS();
}
