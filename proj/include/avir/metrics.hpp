// SPDX-License-Identifier: Apache-2.0
//
// Answer and page-selection quality metrics: ANLS, exact match, token-level
// F1 and the page statistics (top-1 accuracy, selection recall, pages used).
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "avir/errors.hpp"
#include "avir/selector.hpp"

namespace avir {

/// One benchmark question with its gold answers and, when annotated, the
/// page holding the evidence.
struct QASample {
  std::string question_id;
  std::string doc_id;
  std::string question;
  std::vector<std::string> answers;
  std::optional<int> answer_page;
};

/// A system output for one question.
struct Prediction {
  std::string question_id;
  std::string predicted_answer;
  std::vector<int> selected_pages;  // unique, ascending
};

/// Per-question metric values; optionals are absent when the sample lacks
/// the annotation (or scores) needed to decide them.
struct QuestionEval {
  std::string question_id;
  double anls = 0.0;
  int exact_match = 0;
  double token_f1 = 0.0;
  int num_selected = 0;
  std::optional<bool> gold_page_selected;
  std::optional<bool> top1_hit;
};

/// Aggregates over a corpus. Each value is the arithmetic mean of the
/// corresponding per-question values (over the sub-population that defines
/// them for the two page metrics).
struct EvalReport {
  double anls = 0.0;
  double exact_match = 0.0;
  double token_f1 = 0.0;
  double page_top1_accuracy = 0.0;
  double selection_recall = 0.0;
  double avg_pages = 0.0;
  std::vector<QuestionEval> per_question;  // sorted by question_id
};

// ---------------------------------------------------------------------------
// Text normalization
// ---------------------------------------------------------------------------

/// UTF-8 to Unicode scalar values; malformed sequences decode to U+FFFD.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t acc = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      acc = b0 & 0x1FU;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      acc = b0 & 0x0FU;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      acc = b0 & 0x07U;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      acc = (acc << 6) | (bk & 0x3FU);
    }
    const bool overlong = (len == 2 && acc < 0x80) ||
                          (len == 3 && acc < 0x800) ||
                          (len == 4 && acc < 0x10000);
    if (!ok || overlong || acc > 0x10FFFF ||
        (acc >= 0xD800 && acc <= 0xDFFF)) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(acc);
    i += len;
  }
  return out;
}

namespace detail {

inline bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline char ascii_lower(unsigned char c) {
  return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
}

inline bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    if (is_ascii_space(static_cast<unsigned char>(ch))) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace detail

/// Similarity-metric normalization: ASCII case-fold, trim, collapse internal
/// whitespace runs to single spaces. Non-ASCII bytes pass through untouched.
inline std::string normalize_answer_anls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (detail::is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? detail::ascii_lower(c) : ch);
  }
  return out;
}

/// Extractive-QA normalization: case-fold, drop ASCII punctuation, drop the
/// bare articles a/an/the, collapse whitespace.
inline std::vector<std::string> qa_tokens(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (detail::is_ascii_punct(c)) continue;
    stripped.push_back(c < 0x80 ? detail::ascii_lower(c) : ch);
  }
  std::vector<std::string> tokens = detail::split_whitespace(stripped);
  std::erase_if(tokens, [](const std::string& t) {
    return t == "a" || t == "an" || t == "the";
  });
  return tokens;
}

inline std::string normalize_answer_qa(std::string_view text) {
  return detail::join(qa_tokens(text));
}

// ---------------------------------------------------------------------------
// String metrics
// ---------------------------------------------------------------------------

/// Edit distance over Unicode scalar values (two-row DP).
inline std::size_t levenshtein_distance(std::string_view a_utf8,
                                        std::string_view b_utf8) {
  const std::u32string a = decode_utf8(a_utf8);
  const std::u32string b = decode_utf8(b_utf8);

  std::vector<std::size_t> col(a.size() + 1);
  for (std::size_t i = 0; i <= a.size(); ++i) col[i] = i;

  for (std::size_t j = 1; j <= b.size(); ++j) {
    std::size_t diag = col[0];
    col[0] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      const std::size_t save = col[i];
      col[i] = std::min({col[i] + 1, col[i - 1] + 1,
                         diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = save;
    }
  }
  return col[a.size()];
}

/// Normalized Levenshtein similarity against the closest gold answer,
/// zeroed below tau. Both-empty normalized strings count as a perfect match.
inline double anls_score(std::string_view pred,
                         const std::vector<std::string>& golds,
                         double tau = 0.5) {
  if (golds.empty()) {
    throw invalid_input_error("anls_score: golds must be non-empty");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw invalid_input_error("anls_score: tau outside [0, 1]");
  }

  const std::string np = normalize_answer_anls(pred);
  const std::size_t np_len = decode_utf8(np).size();

  double best = 0.0;
  for (const std::string& gold : golds) {
    const std::string ng = normalize_answer_anls(gold);
    const std::size_t ng_len = decode_utf8(ng).size();
    double sim;
    if (np_len == 0 && ng_len == 0) {
      sim = 1.0;
    } else {
      const std::size_t dist = levenshtein_distance(np, ng);
      sim = 1.0 - static_cast<double>(dist) /
                      static_cast<double>(std::max(np_len, ng_len));
    }
    best = std::max(best, sim);
  }
  return best >= tau ? best : 0.0;
}

/// 1 iff the normalized prediction equals any normalized gold.
inline int exact_match(std::string_view pred,
                       const std::vector<std::string>& golds) {
  if (golds.empty()) {
    throw invalid_input_error("exact_match: golds must be non-empty");
  }
  const std::string np = normalize_answer_qa(pred);
  for (const std::string& gold : golds) {
    if (np == normalize_answer_qa(gold)) return 1;
  }
  return 0;
}

/// Token-multiset F1 against the best gold. Repeated tokens count with
/// multiplicity.
inline double token_f1(std::string_view pred,
                       const std::vector<std::string>& golds) {
  if (golds.empty()) {
    throw invalid_input_error("token_f1: golds must be non-empty");
  }
  const std::vector<std::string> pt = qa_tokens(pred);

  double best = 0.0;
  for (const std::string& gold : golds) {
    const std::vector<std::string> gt = qa_tokens(gold);
    double f1;
    if (pt.empty() && gt.empty()) {
      f1 = 1.0;
    } else if (pt.empty() || gt.empty()) {
      f1 = 0.0;
    } else {
      std::unordered_map<std::string, int> counts;
      for (const std::string& t : gt) ++counts[t];
      std::size_t overlap = 0;
      for (const std::string& t : pt) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
          --it->second;
          ++overlap;
        }
      }
      if (overlap == 0) {
        f1 = 0.0;
      } else {
        const double precision =
            static_cast<double>(overlap) / static_cast<double>(pt.size());
        const double recall =
            static_cast<double>(overlap) / static_cast<double>(gt.size());
        f1 = 2.0 * precision * recall / (precision + recall);
      }
    }
    best = std::max(best, f1);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

struct PageMetrics {
  double page_top1_accuracy = 0.0;
  double selection_recall = 0.0;
  double avg_pages = 0.0;
};

namespace detail {

// Predictions indexed by question id; the id sets must match exactly.
inline std::unordered_map<std::string_view, const Prediction*>
align_predictions(const std::vector<QASample>& samples,
                  const std::vector<Prediction>& predictions) {
  if (samples.empty()) {
    throw invalid_input_error("evaluate: corpus is empty");
  }
  std::unordered_map<std::string_view, const Prediction*> by_id;
  by_id.reserve(predictions.size());
  for (const Prediction& p : predictions) {
    if (!by_id.emplace(p.question_id, &p).second) {
      throw validation_error("duplicate prediction for question_id '" +
                             p.question_id + "'");
    }
  }
  std::string missing;
  std::unordered_map<std::string_view, bool> seen;
  seen.reserve(samples.size());
  for (const QASample& s : samples) {
    if (!seen.emplace(s.question_id, true).second) {
      throw validation_error("duplicate sample question_id '" +
                             s.question_id + "'");
    }
    if (!by_id.count(s.question_id)) {
      if (!missing.empty()) missing += ", ";
      missing += s.question_id;
    }
  }
  if (!missing.empty()) {
    throw validation_error("predictions missing for question_ids: " + missing);
  }
  if (by_id.size() != samples.size()) {
    std::string extra;
    for (const Prediction& p : predictions) {
      if (!seen.count(p.question_id)) {
        if (!extra.empty()) extra += ", ";
        extra += p.question_id;
      }
    }
    throw validation_error("predictions for unknown question_ids: " + extra);
  }
  return by_id;
}

// Highest-scored selected page, when it can be determined: trivially for a
// singleton selection, via the score vector otherwise (nullopt without one).
inline std::optional<int> top_selected_page(
    const Prediction& pred, const ScoredDocument* scored) {
  if (pred.selected_pages.empty()) return std::nullopt;
  if (pred.selected_pages.size() == 1) return pred.selected_pages.front();
  if (scored == nullptr) return std::nullopt;
  int best = -1;
  double best_score = -1.0;
  for (int page : pred.selected_pages) {
    if (page < 0 || page >= scored->page_count()) {
      throw validation_error("prediction for '" + pred.question_id +
                             "' selects page " + std::to_string(page) +
                             " outside the scored document");
    }
    const double s = scored->scores[static_cast<std::size_t>(page)];
    if (s > best_score) {
      best_score = s;
      best = page;
    }
  }
  return best;
}

}  // namespace detail

using ScoreMap = std::map<std::string, ScoredDocument>;

/// Evaluate a corpus. `scores`, when given, lets multi-page selections be
/// ranked for the top-1 page metric; annotated samples whose top page cannot
/// be determined are excluded from that metric's denominator. Recall and
/// top-1 average over samples with answer_page; avg_pages over all samples.
inline EvalReport evaluate(const std::vector<QASample>& samples,
                           const std::vector<Prediction>& predictions,
                           const ScoreMap* scores = nullptr,
                           double tau = 0.5) {
  const auto by_id = detail::align_predictions(samples, predictions);

  EvalReport report;
  report.per_question.reserve(samples.size());

  for (const QASample& sample : samples) {
    if (sample.answers.empty()) {
      throw invalid_input_error("sample '" + sample.question_id +
                                "' has no gold answers");
    }
    const Prediction& pred = *by_id.at(sample.question_id);

    QuestionEval qe;
    qe.question_id = sample.question_id;
    qe.anls = anls_score(pred.predicted_answer, sample.answers, tau);
    qe.exact_match = exact_match(pred.predicted_answer, sample.answers);
    qe.token_f1 = token_f1(pred.predicted_answer, sample.answers);
    qe.num_selected = static_cast<int>(pred.selected_pages.size());

    if (sample.answer_page.has_value()) {
      const int gold_page = *sample.answer_page;
      qe.gold_page_selected =
          std::binary_search(pred.selected_pages.begin(),
                             pred.selected_pages.end(), gold_page);
      const ScoredDocument* scored = nullptr;
      if (scores != nullptr) {
        auto it = scores->find(sample.question_id);
        if (it != scores->end()) scored = &it->second;
      }
      const std::optional<int> top = detail::top_selected_page(pred, scored);
      if (pred.selected_pages.empty()) {
        qe.top1_hit = false;  // nothing selected cannot hit
      } else if (top.has_value()) {
        qe.top1_hit = (*top == gold_page);
      }
    }
    report.per_question.push_back(std::move(qe));
  }

  std::sort(report.per_question.begin(), report.per_question.end(),
            [](const QuestionEval& a, const QuestionEval& b) {
              return a.question_id < b.question_id;
            });

  const double n = static_cast<double>(report.per_question.size());
  int recall_denom = 0, recall_hits = 0, top1_denom = 0, top1_hits = 0;
  for (const QuestionEval& qe : report.per_question) {
    report.anls += qe.anls;
    report.exact_match += qe.exact_match;
    report.token_f1 += qe.token_f1;
    report.avg_pages += qe.num_selected;
    if (qe.gold_page_selected.has_value()) {
      ++recall_denom;
      recall_hits += *qe.gold_page_selected ? 1 : 0;
    }
    if (qe.top1_hit.has_value()) {
      ++top1_denom;
      top1_hits += *qe.top1_hit ? 1 : 0;
    }
  }
  report.anls /= n;
  report.exact_match /= n;
  report.token_f1 /= n;
  report.avg_pages /= n;
  report.selection_recall =
      recall_denom ? static_cast<double>(recall_hits) / recall_denom : 0.0;
  report.page_top1_accuracy =
      top1_denom ? static_cast<double>(top1_hits) / top1_denom : 0.0;
  return report;
}

/// Just the page statistics of evaluate().
inline PageMetrics page_metrics(const std::vector<QASample>& samples,
                                const std::vector<Prediction>& predictions,
                                const ScoreMap* scores = nullptr) {
  // gold answers are irrelevant here but evaluate() insists on them; run the
  // alignment and page logic on a placeholder answer instead
  std::vector<QASample> padded = samples;
  for (QASample& s : padded) {
    if (s.answers.empty()) s.answers.push_back("");
  }
  const EvalReport report = evaluate(padded, predictions, scores);
  return PageMetrics{report.page_top1_accuracy, report.selection_recall,
                     report.avg_pages};
}

}  // namespace avir
