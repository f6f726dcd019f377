// SPDX-License-Identifier: Apache-2.0

#include "avir/data_io.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "test_oracles.hpp"
#include "test_util.hpp"

using namespace avir;
using namespace avir::io;
using avir_test::TempDir;

namespace {

const char* kTwoQuestions =
    R"({"question_id":"q1","doc_id":"d1","question":"what?","answers":["red"],"answer_page":0,"num_pages":3})"
    "\n"
    R"({"question_id":"q2","doc_id":"d2","question":"where?","answers":["here","there"],"num_pages":2})"
    "\n";

TEST(LoadQuestions, ParsesWellFormedFile) {
  TempDir dir("questions");
  const std::string path = dir.file("q.jsonl");
  avir_test::write_text(path, kTwoQuestions);

  const auto records = load_question_records(path);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].question_id, "q1");
  EXPECT_EQ(records[0].answer_page, 0);
  EXPECT_EQ(records[0].num_pages, 3);
  EXPECT_EQ(records[1].answers.size(), 2u);
  EXPECT_FALSE(records[1].answer_page.has_value());

  const auto samples = load_questions(path);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[1].doc_id, "d2");
}

TEST(LoadQuestions, SkipsBlankLines) {
  TempDir dir("questions");
  const std::string path = dir.file("q.jsonl");
  avir_test::write_text(
      path,
      "\n"
      R"({"question_id":"q1","doc_id":"d","question":"?","answers":["x"],"num_pages":1})"
      "\n   \n");
  EXPECT_EQ(load_questions(path).size(), 1u);
}

TEST(LoadQuestions, MissingFieldNamesTheLine) {
  TempDir dir("questions");
  const std::string path = dir.file("q.jsonl");
  avir_test::write_text(
      path,
      R"({"question_id":"q1","doc_id":"d","question":"?","answers":["x"],"num_pages":1})"
      "\n"
      R"({"question_id":"q2","doc_id":"d","question":"?","num_pages":1})"
      "\n");
  try {
    load_questions(path);
    FAIL() << "expected parse_error";
  } catch (const parse_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("answers"), std::string::npos);
  }
}

TEST(LoadQuestions, MalformedJsonNamesTheLine) {
  TempDir dir("questions");
  const std::string path = dir.file("q.jsonl");
  avir_test::write_text(path, "{not json\n");
  try {
    load_questions(path);
    FAIL() << "expected parse_error";
  } catch (const parse_error& e) {
    EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos);
  }
}

TEST(LoadQuestions, AnswerPageOutOfRangeIsValidationError) {
  TempDir dir("questions");
  const std::string path = dir.file("q.jsonl");
  avir_test::write_text(
      path,
      R"({"question_id":"q1","doc_id":"d","question":"?","answers":["x"],"answer_page":3,"num_pages":3})"
      "\n");
  EXPECT_THROW(load_questions(path), validation_error);
}

TEST(LoadQuestions, DuplicateIdIsValidationError) {
  TempDir dir("questions");
  const std::string path = dir.file("q.jsonl");
  const std::string line =
      R"({"question_id":"q1","doc_id":"d","question":"?","answers":["x"],"num_pages":1})"
      "\n";
  avir_test::write_text(path, line + line);
  EXPECT_THROW(load_questions(path), validation_error);
}

TEST(LoadQuestions, MissingFileIsIoError) {
  EXPECT_THROW(load_questions("/nonexistent/q.jsonl"), io_error);
}

TEST(LoadScores, ParsesAndValidates) {
  TempDir dir("scores");
  const std::string path = dir.file("s.jsonl");
  avir_test::write_text(
      path, R"({"question_id":"q1","doc_id":"d1","scores":[0.2,0.9]})" "\n");
  const ScoreMap scores = load_scores(path);
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_EQ(scores.at("q1").page_count(), 2);
  EXPECT_DOUBLE_EQ(scores.at("q1").scores[1], 0.9);
}

TEST(LoadScores, OutOfRangeScoreIsRejectedNotClamped) {
  TempDir dir("scores");
  const std::string path = dir.file("s.jsonl");
  avir_test::write_text(
      path, R"({"question_id":"q1","doc_id":"d1","scores":[0.2,1.3]})" "\n");
  EXPECT_THROW(load_scores(path), validation_error);
}

TEST(LoadScores, MissingKeyIsParseError) {
  TempDir dir("scores");
  const std::string path = dir.file("s.jsonl");
  avir_test::write_text(path, R"({"doc_id":"d1","scores":[0.2]})" "\n");
  EXPECT_THROW(load_scores(path), parse_error);
}

TEST(LoadScores, DuplicateIdIsValidationError) {
  TempDir dir("scores");
  const std::string path = dir.file("s.jsonl");
  const std::string line =
      R"({"question_id":"q1","doc_id":"d1","scores":[0.5]})" "\n";
  avir_test::write_text(path, line + line);
  EXPECT_THROW(load_scores(path), validation_error);
}

TEST(LoadPredictions, RejectsUnsortedPages) {
  TempDir dir("preds");
  const std::string path = dir.file("p.jsonl");
  avir_test::write_text(
      path,
      R"({"question_id":"q1","selected_pages":[3,1],"branch":"fixed_topk","predicted_answer":"x"})"
      "\n");
  EXPECT_THROW(load_predictions(path), validation_error);
}

TEST(WritePredictions, SortsByQuestionIdAndKeepsOptionals) {
  TempDir dir("preds");
  const std::string path = dir.file("p.jsonl");
  std::vector<PredictionRecord> records{
      {"q2", {0, 2}, "cluster_only", "blue", 17, std::nullopt},
      {"q1", {1}, "fixed_topk", "red", std::nullopt, "backend down"},
  };
  write_predictions(path, records);

  const auto loaded = load_predictions(path);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].question_id, "q1");
  EXPECT_EQ(loaded[0].error, "backend down");
  EXPECT_FALSE(loaded[0].latency_ms.has_value());
  EXPECT_EQ(loaded[1].latency_ms, 17);
  EXPECT_EQ(loaded[1].selected_pages, (std::vector<int>{0, 2}));
}

TEST(WritePredictions, EmptyListYieldsEmptyFile) {
  TempDir dir("preds");
  const std::string path = dir.file("p.jsonl");
  write_predictions(path, {});
  EXPECT_EQ(avir_test::read_text(path), "");
}

TEST(WritePredictions, DuplicateIdsRejected) {
  TempDir dir("preds");
  std::vector<PredictionRecord> records{
      {"q1", {0}, "fixed_topk", "a", std::nullopt, std::nullopt},
      {"q1", {1}, "fixed_topk", "b", std::nullopt, std::nullopt},
  };
  EXPECT_THROW(write_predictions(dir.file("p.jsonl"), records),
               validation_error);
}

TEST(WriteReport, DeterministicBytesAndFixedDecimals) {
  TempDir dir("report");
  EvalReport report;
  report.anls = 0.5;
  report.exact_match = 1.0;
  report.token_f1 = 0.25;
  report.page_top1_accuracy = 1.0;
  report.selection_recall = 1.0;
  report.avg_pages = 2.0;
  report.per_question = {
      {"q2", 0.0, 0, 0.5, 3, true, std::nullopt},
      {"q1", 1.0, 1, 1.0, 1, std::nullopt, std::nullopt},
  };

  const std::string p1 = dir.file("r1.json"), p2 = dir.file("r2.json");
  write_report(p1, report);
  write_report(p2, report);
  const std::string bytes = avir_test::read_text(p1);
  EXPECT_EQ(bytes, avir_test::read_text(p2));
  EXPECT_NE(bytes.find("\"anls\": 0.500000"), std::string::npos);
  EXPECT_NE(bytes.find("\"token_f1\": 0.250000"), std::string::npos);
  // per_question re-sorted by id: q1 before q2
  EXPECT_LT(bytes.find("\"q1\""), bytes.find("\"q2\""));
  // null marks the indeterminate optionals
  EXPECT_NE(bytes.find("\"top1_hit\":null"), std::string::npos);

  // still a parseable JSON document
  const auto parsed = nlohmann::json::parse(bytes);
  EXPECT_DOUBLE_EQ(parsed["avg_pages"].get<double>(), 2.0);
  ASSERT_EQ(parsed["per_question"].size(), 2u);
}

TEST(RoundTrip, AllThreeRecordKindsSurviveWriteLoad) {
  TempDir dir("roundtrip");
  avir_test::Rng rng(43);

  const auto quantized = [&](double v) {
    return std::round(v * 1e6) / 1e6;  // six-decimal wire precision
  };

  std::vector<QuestionRecord> questions;
  std::vector<ScoreRecord> scores;
  std::vector<PredictionRecord> predictions;
  for (int i = 0; i < 40; ++i) {
    const std::string qid =
        "q" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    QuestionRecord q;
    q.question_id = qid;
    q.doc_id = "doc/" + std::to_string(i);
    q.question = "what is on page \"x\"?\n\ttab";
    q.num_pages = rng.range(1, 12);
    const int n_answers = rng.range(1, 3);
    for (int a = 0; a < n_answers; ++a) {
      q.answers.push_back("ans-" + std::to_string(rng.range(0, 999)));
    }
    if (rng.range(0, 1)) q.answer_page = rng.range(0, q.num_pages - 1);
    questions.push_back(q);

    ScoreRecord s;
    s.question_id = qid;
    s.doc_id = q.doc_id;
    for (int p = 0; p < q.num_pages; ++p) {
      s.scores.push_back(quantized(rng.real01()));
    }
    scores.push_back(s);

    PredictionRecord pr;
    pr.question_id = qid;
    for (int p = 0; p < q.num_pages; ++p) {
      if (rng.range(0, 1)) pr.selected_pages.push_back(p);
    }
    pr.branch = "cluster_only";
    pr.predicted_answer = "token \\ with \"quotes\"";
    if (rng.range(0, 1)) pr.latency_ms = rng.range(0, 5000);
    if (rng.range(0, 4) == 0) pr.error = "timeout";
    predictions.push_back(pr);
  }

  write_questions(dir.file("q.jsonl"), questions);
  write_scores(dir.file("s.jsonl"), scores);
  write_predictions(dir.file("p.jsonl"), predictions);

  EXPECT_EQ(load_question_records(dir.file("q.jsonl")), questions);

  const ScoreMap loaded_scores = load_scores(dir.file("s.jsonl"));
  ASSERT_EQ(loaded_scores.size(), scores.size());
  for (const ScoreRecord& s : scores) {
    ASSERT_TRUE(loaded_scores.count(s.question_id));
    EXPECT_EQ(loaded_scores.at(s.question_id).scores, s.scores);
    EXPECT_EQ(loaded_scores.at(s.question_id).doc_id, s.doc_id);
  }

  // writer sorts; our generator already emits ascending ids
  EXPECT_EQ(load_predictions(dir.file("p.jsonl")), predictions);

  // byte determinism of every writer
  write_questions(dir.file("q2.jsonl"), questions);
  EXPECT_EQ(avir_test::read_text(dir.file("q.jsonl")),
            avir_test::read_text(dir.file("q2.jsonl")));
  write_scores(dir.file("s2.jsonl"), scores);
  EXPECT_EQ(avir_test::read_text(dir.file("s.jsonl")),
            avir_test::read_text(dir.file("s2.jsonl")));
}

}  // namespace
