// SPDX-License-Identifier: Apache-2.0
//
// avir: adaptive page selection pipeline for multi-page document QA.
// Subcommands: select, run, eval, compare, gen-synthetic.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "avir/avir.hpp"

namespace {

struct CliState {
  std::string questions;
  std::string scores;
  std::string predictions;
  std::string out;
  std::string pages_dir;
  std::string instruction;

  std::string strategy = "adaptive";
  double threshold = 0.6;
  int max_pages = 8;
  int short_doc_limit = 4;
  int topk_k = 1;

  std::string scorer = "mock";
  std::string answerer = "mock";
  std::string scorer_url;
  std::string answerer_url;
  std::string endpoint;
  std::string model;
  int timeout_ms = 30000;
  int max_retries = 2;
  int parallelism = 4;
  std::uint64_t seed = 0;

  double mock_signal = 0.9;
  double mock_noise_max = 0.1;
  bool mock_suppress_gold = false;

  double tau = 0.5;
  std::string sweep = "topk:1,topk:2,topk:4,topk:8,adaptive";
  std::string compare_answerer;  // empty -> selection-only rows

  int n_docs = 100;
  int pages_min = 4;
  int pages_max = 20;
  double signal = 0.9;
  double noise_max = 0.1;
  int confusers = 0;
};

avir::SelectionPolicy make_policy(const CliState& state) {
  avir::SelectionPolicy policy;
  policy.strategy = avir::strategy_from_string(state.strategy);
  policy.threshold = state.threshold;
  policy.max_pages = state.max_pages;
  policy.short_doc_limit = state.short_doc_limit;
  policy.topk_k = state.topk_k;
  policy.validate();
  return policy;
}

avir::clients::ScorerBackend make_scorer(const CliState& state) {
  avir::clients::ScorerBackend scorer;
  if (state.scorer == "remote") {
    scorer.kind = avir::clients::ScorerKind::remote;
  } else if (state.scorer == "replay") {
    scorer.kind = avir::clients::ScorerKind::file_replay;
  } else if (state.scorer == "mock") {
    scorer.kind = avir::clients::ScorerKind::mock_oracle;
  } else {
    throw avir::invalid_input_error("unknown scorer '" + state.scorer +
                                    "' (remote|replay|mock)");
  }
  scorer.endpoint = state.scorer_url.empty() ? state.endpoint : state.scorer_url;
  scorer.timeout_ms = state.timeout_ms;
  scorer.max_retries = state.max_retries;
  scorer.mock.signal = state.mock_signal;
  scorer.mock.noise_max = state.mock_noise_max;
  scorer.mock.suppress_gold = state.mock_suppress_gold;
  return scorer;
}

avir::clients::AnswerBackend make_answerer(const CliState& state) {
  avir::clients::AnswerBackend answerer;
  if (state.answerer == "remote") {
    answerer.kind = avir::clients::AnswerKind::remote;
  } else if (state.answerer == "mock") {
    answerer.kind = avir::clients::AnswerKind::mock_echo;
  } else {
    throw avir::invalid_input_error("unknown answerer '" + state.answerer +
                                    "' (remote|mock)");
  }
  answerer.endpoint =
      state.answerer_url.empty() ? state.endpoint : state.answerer_url;
  answerer.model_name = state.model;
  answerer.timeout_ms = state.timeout_ms;
  answerer.max_retries = state.max_retries;
  return answerer;
}

avir::harness::RunConfig make_run_config(const CliState& state) {
  avir::harness::RunConfig config;
  config.questions_path = state.questions;
  config.scores_path = state.scores;
  config.policy = make_policy(state);
  config.scorer = make_scorer(state);
  config.answerer = make_answerer(state);
  config.out_path = state.out;
  config.pages_dir = state.pages_dir;
  config.instruction = state.instruction;
  config.parallelism = state.parallelism;
  config.seed = state.seed;
  return config;
}

void add_policy_flags(CLI::App* cmd, CliState& state) {
  cmd->add_option("--strategy", state.strategy,
                  "selection strategy: adaptive|topk|threshold|all")
      ->capture_default_str();
  cmd->add_option("--threshold", state.threshold,
                  "relevance threshold for threshold-style selection")
      ->capture_default_str();
  cmd->add_option("--max-pages", state.max_pages,
                  "cap on pages kept by the clustering branch")
      ->capture_default_str();
  cmd->add_option("--short-doc-limit", state.short_doc_limit,
                  "documents below this page count skip clustering")
      ->capture_default_str();
  cmd->add_option("--topk-k", state.topk_k, "k for the topk strategy")
      ->capture_default_str();
}

void add_backend_flags(CLI::App* cmd, CliState& state, bool with_answerer) {
  cmd->add_option("--scorer", state.scorer,
                  "page scorer backend: remote|replay|mock")
      ->capture_default_str();
  cmd->add_option("--scorer-url", state.scorer_url,
                  "scorer endpoint URL (POST, {\"score\": p} responses)")
      ->envname("AVIR_SCORER_URL");
  if (with_answerer) {
    cmd->add_option("--answerer", state.answerer,
                    "answer backend: remote|mock")
        ->capture_default_str();
  }
  cmd->add_option("--answerer-url", state.answerer_url,
                  "answer endpoint URL (chat-completions style)")
      ->envname("AVIR_ANSWER_URL");
  cmd->add_option("--endpoint", state.endpoint,
                  "fallback URL for any remote backend without its own");
  cmd->add_option("--model", state.model, "model name sent to the answerer")
      ->envname("AVIR_MODEL");
  cmd->add_option("--timeout-ms", state.timeout_ms,
                  "per-request timeout for remote backends")
      ->capture_default_str();
  cmd->add_option("--max-retries", state.max_retries,
                  "retries after a failed remote request (exponential backoff)")
      ->capture_default_str();
  cmd->add_option("--parallelism", state.parallelism,
                  "bounded concurrent in-flight questions")
      ->capture_default_str();
  cmd->add_option("--seed", state.seed, "seed for mock scorers")
      ->capture_default_str();
  cmd->add_option("--pages-dir", state.pages_dir,
                  "root directory of page images (<dir>/<doc_id>/page_<i>.png)");
  cmd->add_option("--instruction", state.instruction,
                  "override the answer-prompt instruction");
  cmd->add_option("--mock-signal", state.mock_signal,
                  "mock scorer: score of the gold page")
      ->capture_default_str();
  cmd->add_option("--mock-noise-max", state.mock_noise_max,
                  "mock scorer: upper bound of non-gold scores")
      ->capture_default_str();
  cmd->add_flag("--mock-suppress-gold", state.mock_suppress_gold,
                "mock scorer: zero the gold page and boost the rest");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive page selection pipeline for multi-page document QA"};
  app.require_subcommand(1);
  CliState state;

  // select: selection fields only, from a score file
  CLI::App* select = app.add_subcommand(
      "select", "run page selection over cached scores, no answer stage");
  select->add_option("--questions", state.questions, "questions JSONL")
      ->required();
  select->add_option("--scores", state.scores, "scores JSONL")->required();
  select->add_option("--out", state.out, "predictions output path")->required();
  add_policy_flags(select, state);

  // run: full pipeline
  CLI::App* run = app.add_subcommand(
      "run", "score, select and answer every question (fail-soft)");
  run->add_option("--questions", state.questions, "questions JSONL")
      ->required();
  run->add_option("--scores", state.scores,
                  "scores JSONL (required by --scorer replay)");
  run->add_option("--out", state.out, "predictions output path")->required();
  add_policy_flags(run, state);
  add_backend_flags(run, state, /*with_answerer=*/true);

  // eval: score a predictions file
  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate a predictions file against gold annotations");
  eval->add_option("--questions", state.questions, "questions JSONL")
      ->required();
  eval->add_option("--predictions", state.predictions, "predictions JSONL")
      ->required();
  eval->add_option("--scores", state.scores,
                   "scores JSONL, enables top-1 page ranking");
  eval->add_option("--out", state.out, "report output path (JSON)");
  eval->add_option("--anls-tau", state.tau,
                   "similarity cutoff below which ANLS scores zero")
      ->capture_default_str();

  // compare: strategy sweep over identical scores
  CLI::App* compare = app.add_subcommand(
      "compare", "sweep selection strategies over one shared scoring pass");
  compare->add_option("--questions", state.questions, "questions JSONL")
      ->required();
  compare->add_option("--scores", state.scores,
                      "scores JSONL (required by --scorer replay)");
  compare->add_option("--out", state.out, "comparison report output path");
  compare
      ->add_option("--sweep", state.sweep,
                   "comma list of strategies, e.g. topk:1,topk:8,adaptive")
      ->capture_default_str();
  compare->add_option("--answerer", state.compare_answerer,
                      "answer backend for EM/F1/ANLS columns: remote|mock "
                      "(omit for selection-only rows)");
  add_policy_flags(compare, state);
  add_backend_flags(compare, state, /*with_answerer=*/false);

  // gen-synthetic: seeded offline corpus
  CLI::App* gen = app.add_subcommand(
      "gen-synthetic",
      "write a seeded synthetic questions + scores corpus into --out");
  gen->add_option("--out", state.out, "output directory")->required();
  gen->add_option("--n-docs", state.n_docs, "number of documents")
      ->capture_default_str();
  gen->add_option("--pages-min", state.pages_min, "minimum pages per document")
      ->capture_default_str();
  gen->add_option("--pages-max", state.pages_max, "maximum pages per document")
      ->capture_default_str();
  gen->add_option("--signal", state.signal, "score of the gold page")
      ->capture_default_str();
  gen->add_option("--noise-max", state.noise_max,
                  "upper bound of background scores")
      ->capture_default_str();
  gen->add_option("--confusers", state.confusers,
                  "pages per document scored between noise and signal")
      ->capture_default_str();
  gen->add_option("--seed", state.seed, "corpus seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed()) {
      avir::harness::RunConfig config = make_run_config(state);
      avir::harness::cmd_select(config, std::cout);
      return 0;
    }
    if (run->parsed()) {
      avir::harness::RunConfig config = make_run_config(state);
      const avir::harness::RunSummary summary =
          avir::harness::cmd_run(config, std::cout);
      return summary.num_failed > 0 ? 2 : 0;
    }
    if (eval->parsed()) {
      avir::harness::EvalOptions options;
      options.questions_path = state.questions;
      options.predictions_path = state.predictions;
      options.scores_path = state.scores;
      options.report_path = state.out;
      options.tau = state.tau;
      avir::harness::cmd_eval(options, std::cout);
      return 0;
    }
    if (compare->parsed()) {
      state.answerer = state.compare_answerer.empty() ? "mock"
                                                      : state.compare_answerer;
      avir::harness::RunConfig config = make_run_config(state);
      config.answerer_enabled = !state.compare_answerer.empty();
      const avir::harness::SweepSpec sweep =
          avir::harness::SweepSpec::parse(state.sweep, config.policy);
      avir::harness::cmd_compare(config, sweep, state.out, std::cout);
      return 0;
    }
    // gen-synthetic
    avir::harness::SyntheticSpec spec;
    spec.n_docs = state.n_docs;
    spec.pages_min = state.pages_min;
    spec.pages_max = state.pages_max;
    spec.signal = state.signal;
    spec.noise_max = state.noise_max;
    spec.confusers = state.confusers;
    spec.seed = state.seed;
    const std::string questions_path = state.out + "/questions.jsonl";
    const std::string scores_path = state.out + "/scores.jsonl";
    avir::harness::gen_synthetic(spec, questions_path, scores_path);
    std::cout << "wrote " << questions_path << " and " << scores_path << "\n";
    return 0;
  } catch (const avir::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
