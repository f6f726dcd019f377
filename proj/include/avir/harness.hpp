// SPDX-License-Identifier: Apache-2.0
//
// Corpus-level orchestration: run selection over score files, drive the full
// score -> select -> prompt -> answer pipeline against backends, evaluate
// prediction logs, sweep strategies over identical scores, and generate
// seeded synthetic corpora for offline testing.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "avir/data_io.hpp"
#include "avir/errors.hpp"
#include "avir/metrics.hpp"
#include "avir/model_clients.hpp"
#include "avir/selector.hpp"

namespace avir::harness {

struct RunConfig {
  std::string questions_path;
  std::string scores_path;  // optional when the scorer computes scores
  SelectionPolicy policy;
  clients::ScorerBackend scorer;
  clients::AnswerBackend answerer;
  bool answerer_enabled = true;  // compare may run selection-only
  std::string out_path;
  std::string pages_dir;     // optional root for real page image refs
  std::string instruction;   // empty -> default prompt instruction
  int parallelism = 4;
  std::uint64_t seed = 0;    // feeds synthetic/mock generators only
};

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> make_page_refs(const std::string& pages_dir,
                                               const std::string& doc_id,
                                               int num_pages) {
  std::vector<std::string> refs;
  refs.reserve(static_cast<std::size_t>(num_pages));
  for (int i = 0; i < num_pages; ++i) {
    if (pages_dir.empty()) {
      refs.push_back(doc_id + "/page_" + std::to_string(i));
    } else {
      refs.push_back(pages_dir + "/" + doc_id + "/page_" + std::to_string(i) +
                     ".png");
    }
  }
  return refs;
}

inline std::vector<io::QuestionRecord> load_corpus(const std::string& path) {
  std::vector<io::QuestionRecord> questions = io::load_question_records(path);
  if (questions.empty()) {
    throw validation_error("questions file '" + path + "' has no records");
  }
  return questions;
}

/// Every question needs a score entry whose length matches its page count.
/// Extra cache entries are tolerated (a cache may cover a superset).
inline void check_score_alignment(
    const std::vector<io::QuestionRecord>& questions, const ScoreMap& scores,
    const std::string& scores_path) {
  std::string missing;
  int missing_count = 0;
  for (const io::QuestionRecord& q : questions) {
    const auto it = scores.find(q.question_id);
    if (it == scores.end()) {
      ++missing_count;
      if (missing_count <= 10) {
        if (!missing.empty()) missing += ", ";
        missing += q.question_id;
      }
      continue;
    }
    if (static_cast<int>(it->second.scores.size()) != q.num_pages) {
      throw validation_error("scores for '" + q.question_id + "' cover " +
                             std::to_string(it->second.scores.size()) +
                             " pages but the document has " +
                             std::to_string(q.num_pages));
    }
  }
  if (missing_count > 0) {
    if (missing_count > 10) {
      missing += ", ... and " + std::to_string(missing_count - 10) + " more";
    }
    throw validation_error("scores file '" + scores_path +
                           "' is missing question_ids: " + missing);
  }
}

/// Fill in the pieces a backend derives from the corpus: the replay cache
/// from --scores, mock gold pages / echo answers from the annotations.
inline clients::ScorerBackend prepare_scorer(
    const RunConfig& config, const std::vector<io::QuestionRecord>& questions) {
  clients::ScorerBackend scorer = config.scorer;
  if (scorer.kind == clients::ScorerKind::file_replay && !scorer.replay_cache) {
    if (config.scores_path.empty()) {
      throw invalid_input_error(
          "file-replay scorer requires a scores path or preloaded cache");
    }
    auto cache = std::make_shared<ScoreMap>(io::load_scores(config.scores_path));
    check_score_alignment(questions, *cache, config.scores_path);
    scorer.replay_cache = cache;
  }
  if (scorer.kind == clients::ScorerKind::mock_oracle) {
    if (!scorer.mock.gold_pages) {
      auto gold = std::make_shared<std::map<std::string, int>>();
      for (const io::QuestionRecord& q : questions) {
        if (q.answer_page.has_value()) {
          gold->emplace(q.question_id, *q.answer_page);
        }
      }
      scorer.mock.gold_pages = gold;
    }
    scorer.mock.seed = config.seed;
  }
  scorer.validate();
  return scorer;
}

inline clients::AnswerBackend prepare_answerer(
    const RunConfig& config, const std::vector<io::QuestionRecord>& questions) {
  clients::AnswerBackend answerer = config.answerer;
  if (answerer.kind == clients::AnswerKind::mock_echo &&
      !answerer.echo.answers) {
    auto table = std::make_shared<std::map<std::string, clients::MockEchoAnswer>>();
    for (const io::QuestionRecord& q : questions) {
      table->emplace(q.question_id,
                     clients::MockEchoAnswer{q.answers.front(), q.answer_page});
    }
    answerer.echo.answers = table;
  }
  answerer.validate();
  return answerer;
}

/// Bounded fan-out over [0, count). The callable handles its own per-item
/// failures; anything it lets escape is captured and rethrown once all
/// workers finish.
template <typename Fn>
void run_parallel(int parallelism, std::size_t count, Fn&& fn) {
  const int workers = static_cast<int>(
      std::min<std::size_t>(std::max(parallelism, 1), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// raw splitmix64 stream; avoids stdlib distributions so a seed yields the
// same corpus on every platform
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  int range(int lo, int hi) {  // inclusive bounds
    return lo +
           static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// select: selection fields only, no answer stage
// ---------------------------------------------------------------------------

struct SelectSummary {
  int num_questions = 0;
  double avg_pages = 0.0;
  std::map<std::string, int> branch_histogram;
};

inline SelectSummary cmd_select(const RunConfig& config,
                                std::ostream& log = std::cout) {
  config.policy.validate();
  if (config.scores_path.empty()) {
    throw invalid_input_error("select requires a scores file");
  }
  const std::vector<io::QuestionRecord> questions =
      detail::load_corpus(config.questions_path);
  const ScoreMap scores = io::load_scores(config.scores_path);
  detail::check_score_alignment(questions, scores, config.scores_path);

  SelectSummary summary;
  summary.num_questions = static_cast<int>(questions.size());

  std::vector<io::PredictionRecord> records;
  records.reserve(questions.size());
  long long total_pages = 0;
  for (const io::QuestionRecord& q : questions) {
    const SelectionResult result =
        select_pages(scores.at(q.question_id), config.policy);
    total_pages += static_cast<long long>(result.selected.size());
    ++summary.branch_histogram[std::string(to_string(result.branch))];
    records.push_back(io::PredictionRecord{q.question_id, result.selected,
                                           std::string(to_string(result.branch)),
                                           "", std::nullopt, std::nullopt});
  }
  summary.avg_pages =
      static_cast<double>(total_pages) / static_cast<double>(questions.size());

  if (!config.out_path.empty()) {
    io::write_predictions(config.out_path, records);
  }

  log << "selected pages for " << summary.num_questions
      << " questions: avg_pages=" << detail::fmt4(summary.avg_pages)
      << " branches:";
  for (const auto& [branch, count] : summary.branch_histogram) {
    log << " " << branch << "=" << count;
  }
  log << "\n";
  return summary;
}

// ---------------------------------------------------------------------------
// run: full pipeline with fail-soft per-question error handling
// ---------------------------------------------------------------------------

struct RunSummary {
  int num_questions = 0;
  int num_failed = 0;
  double avg_pages = 0.0;
};

inline RunSummary cmd_run(const RunConfig& config,
                          std::ostream& log = std::cout) {
  config.policy.validate();
  const std::vector<io::QuestionRecord> questions =
      detail::load_corpus(config.questions_path);
  const clients::ScorerBackend scorer = detail::prepare_scorer(config, questions);
  const clients::AnswerBackend answerer =
      detail::prepare_answerer(config, questions);
  // latency varies run-to-run, so it is only recorded when a remote backend
  // is involved; offline pipelines stay byte-identical
  const bool record_latency =
      scorer.kind == clients::ScorerKind::remote ||
      answerer.kind == clients::AnswerKind::remote;
  const std::string instruction =
      config.instruction.empty() ? std::string(clients::kDefaultInstruction)
                                 : config.instruction;

  std::vector<io::PredictionRecord> records(questions.size());
  detail::run_parallel(config.parallelism, questions.size(), [&](std::size_t i) {
    const io::QuestionRecord& q = questions[i];
    io::PredictionRecord rec;
    rec.question_id = q.question_id;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const std::vector<std::string> refs =
          detail::make_page_refs(config.pages_dir, q.doc_id, q.num_pages);
      const ScoredDocument doc = clients::score_pages(
          scorer, q.question_id, q.question, q.doc_id, refs);
      if (static_cast<int>(doc.scores.size()) != q.num_pages) {
        throw validation_error("scorer returned " +
                               std::to_string(doc.scores.size()) +
                               " scores for " + std::to_string(q.num_pages) +
                               " pages");
      }
      const SelectionResult sel = select_pages(doc, config.policy);
      rec.selected_pages = sel.selected;
      rec.branch = std::string(to_string(sel.branch));
      const clients::PromptSpec prompt = clients::build_prompt(
          q.question_id, q.question, sel, refs, instruction);
      rec.predicted_answer = clients::generate_answer(answerer, prompt);
    } catch (const error& e) {
      rec.error = e.what();
    }
    if (record_latency) {
      rec.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    }
    records[i] = std::move(rec);
  });

  RunSummary summary;
  summary.num_questions = static_cast<int>(questions.size());
  long long total_pages = 0;
  for (const io::PredictionRecord& rec : records) {
    if (rec.error.has_value()) ++summary.num_failed;
    total_pages += static_cast<long long>(rec.selected_pages.size());
  }
  summary.avg_pages =
      static_cast<double>(total_pages) / static_cast<double>(questions.size());

  if (!config.out_path.empty()) {
    io::write_predictions(config.out_path, records);
  }

  log << "ran " << summary.num_questions << " questions ("
      << summary.num_failed << " failed): avg_pages="
      << detail::fmt4(summary.avg_pages) << "\n";
  return summary;
}

// ---------------------------------------------------------------------------
// eval: score a prediction log against the gold annotations
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string questions_path;
  std::string predictions_path;
  std::string scores_path;  // optional; enables top-1 ranking of selections
  std::string report_path;  // optional
  double tau = 0.5;
};

inline EvalReport cmd_eval(const EvalOptions& options,
                           std::ostream& log = std::cout) {
  const std::vector<QASample> samples = io::load_questions(options.questions_path);
  std::vector<Prediction> predictions;
  for (const io::PredictionRecord& rec :
       io::load_predictions(options.predictions_path)) {
    predictions.push_back(rec.to_prediction());
  }
  std::optional<ScoreMap> scores;
  if (!options.scores_path.empty()) {
    scores = io::load_scores(options.scores_path);
  }

  const EvalReport report = evaluate(samples, predictions,
                                     scores ? &*scores : nullptr, options.tau);
  if (!options.report_path.empty()) {
    io::write_report(options.report_path, report);
  }

  log << "metric                value\n";
  log << "ANLS                " << detail::fmt4(report.anls) << "\n";
  log << "EM                  " << detail::fmt4(report.exact_match) << "\n";
  log << "F1                  " << detail::fmt4(report.token_f1) << "\n";
  log << "Page top-1          " << detail::fmt4(report.page_top1_accuracy)
      << "\n";
  log << "Selection recall    " << detail::fmt4(report.selection_recall)
      << "\n";
  log << "Avg. pages          " << detail::fmt4(report.avg_pages) << "\n";
  return report;
}

// ---------------------------------------------------------------------------
// compare: strategy sweep over identical scores
// ---------------------------------------------------------------------------

struct SweepItem {
  std::string label;
  SelectionPolicy policy;
};

struct SweepSpec {
  std::vector<SweepItem> items;

  void validate() const {
    if (items.empty()) {
      throw invalid_input_error("sweep must name at least one strategy");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      items[i].policy.validate();
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        if (items[i].label == items[j].label) {
          throw invalid_input_error("sweep has duplicate entry '" +
                                    items[i].label + "'");
        }
      }
    }
  }

  /// "topk:1,topk:8,adaptive,threshold:0.5,all" on top of base
  /// hyperparameters.
  static SweepSpec parse(std::string_view text, const SelectionPolicy& base) {
    SweepSpec sweep;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      std::string_view item = text.substr(pos, comma - pos);
      pos = comma + 1;
      if (item.empty()) continue;

      const std::size_t colon = item.find(':');
      const std::string_view name = item.substr(0, colon);
      const std::string_view arg =
          colon == std::string_view::npos ? "" : item.substr(colon + 1);

      SweepItem entry;
      entry.policy = base;
      entry.policy.strategy = strategy_from_string(name);
      switch (entry.policy.strategy) {
        case SelectionStrategy::topk: {
          if (arg.empty()) {
            throw invalid_input_error("sweep entry 'topk' needs a k, e.g. topk:4");
          }
          entry.policy.topk_k = std::atoi(std::string(arg).c_str());
          entry.label = "topk(" + std::to_string(entry.policy.topk_k) + ")";
          break;
        }
        case SelectionStrategy::threshold: {
          if (!arg.empty()) {
            entry.policy.threshold = std::atof(std::string(arg).c_str());
          }
          char buf[32];
          std::snprintf(buf, sizeof buf, "threshold(%.2f)",
                        entry.policy.threshold);
          entry.label = buf;
          break;
        }
        case SelectionStrategy::adaptive: entry.label = "adaptive"; break;
        case SelectionStrategy::all: entry.label = "all"; break;
      }
      sweep.items.push_back(std::move(entry));
    }
    sweep.validate();
    return sweep;
  }
};

struct CompareRow {
  std::string label;
  double avg_pages = 0.0;
  double selection_recall = 0.0;
  double page_top1_accuracy = 0.0;
  std::optional<double> exact_match;
  std::optional<double> token_f1;
  std::optional<double> anls;
};

struct CompareReport {
  std::vector<CompareRow> rows;  // sweep order
};

namespace detail {

inline void write_compare_report(const std::string& path,
                                 const CompareReport& report) {
  std::string body = "{\n  \"rows\": [\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const CompareRow& row = report.rows[i];
    std::string line = "    {\"label\":";
    io::detail::append_escaped(line, row.label);
    line += ",\"avg_pages\":" + io::detail::fixed6(row.avg_pages);
    line += ",\"selection_recall\":" + io::detail::fixed6(row.selection_recall);
    line += ",\"page_top1_accuracy\":" +
            io::detail::fixed6(row.page_top1_accuracy);
    if (row.exact_match.has_value()) {
      line += ",\"exact_match\":" + io::detail::fixed6(*row.exact_match);
      line += ",\"token_f1\":" + io::detail::fixed6(*row.token_f1);
      line += ",\"anls\":" + io::detail::fixed6(*row.anls);
    }
    line += "}";
    if (i + 1 < report.rows.size()) line += ",";
    body += line + "\n";
  }
  body += "  ]\n}\n";
  std::ofstream out = io::detail::open_for_write(path);
  out << body;
  io::detail::finish_write(out, path);
}

}  // namespace detail

/// Run every sweep strategy over one shared set of scores. Scores are
/// computed (or loaded) once so the rows differ only in selection policy.
/// With the answer stage enabled each row also carries EM/F1/ANLS.
inline CompareReport cmd_compare(const RunConfig& config,
                                 const SweepSpec& sweep,
                                 const std::string& report_path = "",
                                 std::ostream& log = std::cout) {
  sweep.validate();
  const std::vector<io::QuestionRecord> questions =
      detail::load_corpus(config.questions_path);
  const clients::ScorerBackend scorer = detail::prepare_scorer(config, questions);

  // one scoring pass, shared by every row
  std::vector<ScoredDocument> docs(questions.size());
  detail::run_parallel(config.parallelism, questions.size(), [&](std::size_t i) {
    const io::QuestionRecord& q = questions[i];
    docs[i] = clients::score_pages(
        scorer, q.question_id, q.question, q.doc_id,
        detail::make_page_refs(config.pages_dir, q.doc_id, q.num_pages));
    if (static_cast<int>(docs[i].scores.size()) != q.num_pages) {
      throw validation_error("scorer returned " +
                             std::to_string(docs[i].scores.size()) +
                             " scores for '" + q.question_id + "'");
    }
  });

  ScoreMap score_map;
  for (const ScoredDocument& doc : docs) {
    score_map.emplace(doc.question_id, doc);
  }

  std::vector<QASample> samples;
  samples.reserve(questions.size());
  for (const io::QuestionRecord& q : questions) {
    samples.push_back(q.to_sample());
  }

  std::optional<clients::AnswerBackend> answerer;
  if (config.answerer_enabled) {
    answerer = detail::prepare_answerer(config, questions);
  }
  const std::string instruction =
      config.instruction.empty() ? std::string(clients::kDefaultInstruction)
                                 : config.instruction;

  CompareReport report;
  for (const SweepItem& item : sweep.items) {
    std::vector<Prediction> predictions(questions.size());
    std::vector<SelectionResult> selections(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
      selections[i] = select_pages(docs[i], item.policy);
      predictions[i] = Prediction{questions[i].question_id, "",
                                  selections[i].selected};
    }
    if (answerer) {
      detail::run_parallel(config.parallelism, questions.size(),
                           [&](std::size_t i) {
        const io::QuestionRecord& q = questions[i];
        try {
          const clients::PromptSpec prompt = clients::build_prompt(
              q.question_id, q.question, selections[i],
              detail::make_page_refs(config.pages_dir, q.doc_id, q.num_pages),
              instruction);
          predictions[i].predicted_answer =
              clients::generate_answer(*answerer, prompt);
        } catch (const error&) {
          predictions[i].predicted_answer.clear();  // scores as wrong
        }
      });
    }

    const EvalReport eval_report = evaluate(samples, predictions, &score_map);
    CompareRow row;
    row.label = item.label;
    row.avg_pages = eval_report.avg_pages;
    row.selection_recall = eval_report.selection_recall;
    row.page_top1_accuracy = eval_report.page_top1_accuracy;
    if (answerer) {
      row.exact_match = eval_report.exact_match;
      row.token_f1 = eval_report.token_f1;
      row.anls = eval_report.anls;
    }
    report.rows.push_back(std::move(row));
  }

  if (!report_path.empty()) {
    detail::write_compare_report(report_path, report);
  }

  log << "method           avg_pages  recall    top1      em        f1        anls\n";
  for (const CompareRow& row : report.rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %-10s %-9s %-9s", row.label.c_str(),
                  detail::fmt4(row.avg_pages).c_str(),
                  detail::fmt4(row.selection_recall).c_str(),
                  detail::fmt4(row.page_top1_accuracy).c_str());
    log << buf;
    if (row.exact_match.has_value()) {
      std::snprintf(buf, sizeof buf, " %-9s %-9s %-9s",
                    detail::fmt4(*row.exact_match).c_str(),
                    detail::fmt4(*row.token_f1).c_str(),
                    detail::fmt4(*row.anls).c_str());
      log << buf;
    } else {
      log << " -         -         -";
    }
    log << "\n";
  }
  return report;
}

// ---------------------------------------------------------------------------
// gen-synthetic: seeded corpus generator
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  int n_docs = 0;
  int pages_min = 1;
  int pages_max = 1;
  double signal = 0.9;
  double noise_max = 0.1;
  int confusers = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_docs < 1) {
      throw validation_error("gen-synthetic: n_docs must be >= 1");
    }
    if (pages_min < 1 || pages_max > 50 || pages_min > pages_max) {
      throw validation_error(
          "gen-synthetic: pages range must satisfy 1 <= min <= max <= 50");
    }
    if (!(noise_max >= 0.0 && signal <= 1.0 && signal - noise_max >= 2e-6)) {
      throw validation_error(
          "gen-synthetic: need 0 <= noise_max < signal <= 1");
    }
    if (confusers < 0 || confusers + 1 > pages_min) {
      throw validation_error(
          "gen-synthetic: every document must fit the gold page plus all "
          "confusers (confusers + 1 <= pages_min)");
    }
  }
};

/// One question per document. The gold page scores exactly `signal`,
/// `confusers` pages land strictly inside (noise_max, signal), the rest stay
/// in [0, noise_max]. All scores are quantized to the six-decimal wire
/// precision so written files round-trip exactly; a seed fully determines
/// the output bytes.
inline void gen_synthetic(const SyntheticSpec& spec,
                          const std::string& questions_path,
                          const std::string& scores_path) {
  spec.validate();
  detail::SeededRng rng(spec.seed);

  const auto quantize6 = [](double v) { return std::round(v * 1e6) / 1e6; };

  std::vector<io::QuestionRecord> questions;
  std::vector<io::ScoreRecord> scores;
  questions.reserve(static_cast<std::size_t>(spec.n_docs));
  scores.reserve(static_cast<std::size_t>(spec.n_docs));

  for (int d = 0; d < spec.n_docs; ++d) {
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "%05d", d);
    const std::string qid = std::string("q") + suffix;
    const std::string doc_id = std::string("d") + suffix;

    const int num_pages = rng.range(spec.pages_min, spec.pages_max);
    const int gold_page = rng.range(0, num_pages - 1);

    std::vector<int> others;
    others.reserve(static_cast<std::size_t>(num_pages) - 1);
    for (int p = 0; p < num_pages; ++p) {
      if (p != gold_page) others.push_back(p);
    }
    for (int i = static_cast<int>(others.size()) - 1; i > 0; --i) {
      std::swap(others[i], others[rng.range(0, i)]);
    }

    std::vector<double> page_scores(static_cast<std::size_t>(num_pages));
    page_scores[static_cast<std::size_t>(gold_page)] = quantize6(spec.signal);
    for (int c = 0; c < spec.confusers; ++c) {
      const double lo = spec.noise_max + 1e-6;
      const double hi = spec.signal - 1e-6;
      double v = quantize6(spec.noise_max +
                           rng.real01() * (spec.signal - spec.noise_max));
      v = std::min(hi, std::max(lo, v));
      page_scores[static_cast<std::size_t>(others[c])] = quantize6(v);
    }
    for (std::size_t c = static_cast<std::size_t>(spec.confusers);
         c < others.size(); ++c) {
      page_scores[static_cast<std::size_t>(others[c])] =
          quantize6(rng.real01() * spec.noise_max);
    }

    io::QuestionRecord q;
    q.question_id = qid;
    q.doc_id = doc_id;
    q.question = "Which token is printed on the key page of " + doc_id + "?";
    q.answers = {"ans-" + qid};
    q.answer_page = gold_page;
    q.num_pages = num_pages;
    questions.push_back(std::move(q));
    scores.push_back(io::ScoreRecord{qid, doc_id, std::move(page_scores)});
  }

  io::write_questions(questions_path, questions);
  io::write_scores(scores_path, scores);
}

}  // namespace avir::harness
