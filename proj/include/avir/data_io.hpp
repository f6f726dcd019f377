// SPDX-License-Identifier: Apache-2.0
//
// Line-delimited on-disk data model: question manifests, score caches,
// prediction logs and evaluation reports. Loading is line-incremental and
// errors name the offending line; writing is deterministic (fixed key order,
// six fractional digits for reals) so identical inputs give identical bytes.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avir/errors.hpp"
#include "avir/metrics.hpp"
#include "avir/selector.hpp"

namespace avir::io {

/// Wire form of QASample plus the page count of its document.
struct QuestionRecord {
  std::string question_id;
  std::string doc_id;
  std::string question;
  std::vector<std::string> answers;
  std::optional<int> answer_page;
  int num_pages = 0;

  void validate(const std::string& context = "QuestionRecord") const {
    if (num_pages < 1) {
      throw validation_error(context + ": num_pages must be >= 1");
    }
    if (answers.empty()) {
      throw validation_error(context + ": answers must be non-empty");
    }
    if (answer_page.has_value() &&
        (*answer_page < 0 || *answer_page >= num_pages)) {
      throw validation_error(context + ": answer_page " +
                             std::to_string(*answer_page) +
                             " outside [0, num_pages)");
    }
  }

  QASample to_sample() const {
    return QASample{question_id, doc_id, question, answers, answer_page};
  }

  bool operator==(const QuestionRecord&) const = default;
};

/// Wire form of ScoredDocument.
struct ScoreRecord {
  std::string question_id;
  std::string doc_id;
  std::vector<double> scores;

  bool operator==(const ScoreRecord&) const = default;
};

/// One pipeline output line. `error` is only present on questions that
/// failed in a fail-soft run.
struct PredictionRecord {
  std::string question_id;
  std::vector<int> selected_pages;  // unique, ascending
  std::string branch;
  std::string predicted_answer;
  std::optional<long long> latency_ms;
  std::optional<std::string> error;

  void validate(const std::string& context = "PredictionRecord") const {
    if (!std::is_sorted(selected_pages.begin(), selected_pages.end()) ||
        std::adjacent_find(selected_pages.begin(), selected_pages.end()) !=
            selected_pages.end()) {
      throw validation_error(context +
                             ": selected_pages must be unique and sorted");
    }
    if (latency_ms.has_value() && *latency_ms < 0) {
      throw validation_error(context + ": latency_ms must be >= 0");
    }
  }

  Prediction to_prediction() const {
    return Prediction{question_id, predicted_answer, selected_pages};
  }

  bool operator==(const PredictionRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Deterministic serialization helpers
// ---------------------------------------------------------------------------

namespace detail {

inline void append_escaped(std::string& out, std::string_view s) {
  out.push_back('"');
  for (char ch : s) {
    const unsigned char c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

inline std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void append_int_array(std::string& out, const std::vector<int>& v) {
  out.push_back('[');
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(v[i]);
  }
  out.push_back(']');
}

inline std::ofstream open_for_write(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

inline void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw io_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Parsing helpers (nlohmann::json underneath, errors carry path:line)
// ---------------------------------------------------------------------------

using json = nlohmann::json;

template <typename Fn>
void for_each_line_object(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;  // blank line
    const std::string context = path + ":" + std::to_string(lineno);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw parse_error(context + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw parse_error(context + ": record is not a JSON object");
    }
    fn(obj, context);
  }
}

inline const json& require_field(const json& obj, const char* key,
                                 const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw parse_error(context + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

inline std::string field_string(const json& obj, const char* key,
                                const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_string()) {
    throw parse_error(context + ": field '" + std::string(key) +
                      "' must be a string");
  }
  return v.get<std::string>();
}

inline int field_int(const json& obj, const char* key,
                     const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_number_integer()) {
    throw parse_error(context + ": field '" + std::string(key) +
                      "' must be an integer");
  }
  return v.get<int>();
}

inline std::optional<int> field_opt_int(const json& obj, const char* key,
                                        const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw parse_error(context + ": field '" + std::string(key) +
                      "' must be an integer");
  }
  return it->get<int>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loaders
// ---------------------------------------------------------------------------

inline std::vector<QuestionRecord> load_question_records(
    const std::string& path) {
  std::vector<QuestionRecord> records;
  std::map<std::string, bool> seen;
  detail::for_each_line_object(path, [&](const detail::json& obj,
                                         const std::string& context) {
    QuestionRecord rec;
    rec.question_id = detail::field_string(obj, "question_id", context);
    rec.doc_id = detail::field_string(obj, "doc_id", context);
    rec.question = detail::field_string(obj, "question", context);
    const auto& answers = detail::require_field(obj, "answers", context);
    if (!answers.is_array() || answers.empty()) {
      throw parse_error(context + ": field 'answers' must be a non-empty array");
    }
    for (const auto& a : answers) {
      if (!a.is_string()) {
        throw parse_error(context + ": 'answers' entries must be strings");
      }
      rec.answers.push_back(a.get<std::string>());
    }
    rec.answer_page = detail::field_opt_int(obj, "answer_page", context);
    rec.num_pages = detail::field_int(obj, "num_pages", context);
    rec.validate(context);
    if (!seen.emplace(rec.question_id, true).second) {
      throw validation_error(context + ": duplicate question_id '" +
                             rec.question_id + "'");
    }
    records.push_back(std::move(rec));
  });
  return records;
}

inline std::vector<QASample> load_questions(const std::string& path) {
  std::vector<QASample> samples;
  for (const QuestionRecord& rec : load_question_records(path)) {
    samples.push_back(rec.to_sample());
  }
  return samples;
}

/// Scores keyed by question_id. Values outside [0, 1] are rejected, never
/// clamped.
inline ScoreMap load_scores(const std::string& path) {
  ScoreMap scores;
  detail::for_each_line_object(path, [&](const detail::json& obj,
                                         const std::string& context) {
    ScoredDocument doc;
    doc.question_id = detail::field_string(obj, "question_id", context);
    doc.doc_id = detail::field_string(obj, "doc_id", context);
    const auto& arr = detail::require_field(obj, "scores", context);
    if (!arr.is_array() || arr.empty()) {
      throw parse_error(context + ": field 'scores' must be a non-empty array");
    }
    for (const auto& s : arr) {
      if (!s.is_number()) {
        throw parse_error(context + ": 'scores' entries must be numbers");
      }
      const double v = s.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw validation_error(context + ": score " + std::to_string(v) +
                               " outside [0, 1]");
      }
      doc.scores.push_back(v);
    }
    const std::string qid = doc.question_id;
    if (!scores.emplace(qid, std::move(doc)).second) {
      throw validation_error(context + ": duplicate question_id '" + qid +
                             "'");
    }
  });
  return scores;
}

inline std::vector<PredictionRecord> load_predictions(
    const std::string& path) {
  std::vector<PredictionRecord> records;
  std::map<std::string, bool> seen;
  detail::for_each_line_object(path, [&](const detail::json& obj,
                                         const std::string& context) {
    PredictionRecord rec;
    rec.question_id = detail::field_string(obj, "question_id", context);
    const auto& pages = detail::require_field(obj, "selected_pages", context);
    if (!pages.is_array()) {
      throw parse_error(context + ": field 'selected_pages' must be an array");
    }
    for (const auto& p : pages) {
      if (!p.is_number_integer()) {
        throw parse_error(context +
                          ": 'selected_pages' entries must be integers");
      }
      rec.selected_pages.push_back(p.get<int>());
    }
    rec.branch = detail::field_string(obj, "branch", context);
    rec.predicted_answer =
        detail::field_string(obj, "predicted_answer", context);
    if (auto it = obj.find("latency_ms"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer()) {
        throw parse_error(context + ": field 'latency_ms' must be an integer");
      }
      rec.latency_ms = it->get<long long>();
    }
    if (auto it = obj.find("error"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw parse_error(context + ": field 'error' must be a string");
      }
      rec.error = it->get<std::string>();
    }
    rec.validate(context);
    if (!seen.emplace(rec.question_id, true).second) {
      throw validation_error(context + ": duplicate question_id '" +
                             rec.question_id + "'");
    }
    records.push_back(std::move(rec));
  });
  return records;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

inline void write_questions(const std::string& path,
                            const std::vector<QuestionRecord>& records) {
  std::ofstream out = detail::open_for_write(path);
  for (const QuestionRecord& rec : records) {
    rec.validate();
    std::string line = "{\"question_id\":";
    detail::append_escaped(line, rec.question_id);
    line += ",\"doc_id\":";
    detail::append_escaped(line, rec.doc_id);
    line += ",\"question\":";
    detail::append_escaped(line, rec.question);
    line += ",\"answers\":[";
    for (std::size_t i = 0; i < rec.answers.size(); ++i) {
      if (i) line.push_back(',');
      detail::append_escaped(line, rec.answers[i]);
    }
    line += "]";
    if (rec.answer_page.has_value()) {
      line += ",\"answer_page\":" + std::to_string(*rec.answer_page);
    }
    line += ",\"num_pages\":" + std::to_string(rec.num_pages) + "}\n";
    out << line;
  }
  detail::finish_write(out, path);
}

inline void write_scores(const std::string& path,
                         const std::vector<ScoreRecord>& records) {
  std::ofstream out = detail::open_for_write(path);
  for (const ScoreRecord& rec : records) {
    std::string line = "{\"question_id\":";
    detail::append_escaped(line, rec.question_id);
    line += ",\"doc_id\":";
    detail::append_escaped(line, rec.doc_id);
    line += ",\"scores\":[";
    for (std::size_t i = 0; i < rec.scores.size(); ++i) {
      if (i) line.push_back(',');
      line += detail::fixed6(rec.scores[i]);
    }
    line += "]}\n";
    out << line;
  }
  detail::finish_write(out, path);
}

/// Records are written sorted by question_id, one per line.
inline void write_predictions(const std::string& path,
                              std::vector<PredictionRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) {
              return a.question_id < b.question_id;
            });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].question_id == records[i - 1].question_id) {
      throw validation_error("write_predictions: duplicate question_id '" +
                             records[i].question_id + "'");
    }
  }
  std::ofstream out = detail::open_for_write(path);
  for (const PredictionRecord& rec : records) {
    rec.validate();
    std::string line = "{\"question_id\":";
    detail::append_escaped(line, rec.question_id);
    line += ",\"selected_pages\":";
    detail::append_int_array(line, rec.selected_pages);
    line += ",\"branch\":";
    detail::append_escaped(line, rec.branch);
    line += ",\"predicted_answer\":";
    detail::append_escaped(line, rec.predicted_answer);
    if (rec.latency_ms.has_value()) {
      line += ",\"latency_ms\":" + std::to_string(*rec.latency_ms);
    }
    if (rec.error.has_value()) {
      line += ",\"error\":";
      detail::append_escaped(line, *rec.error);
    }
    line += "}\n";
    out << line;
  }
  detail::finish_write(out, path);
}

/// Single JSON document: the six aggregates in fixed order, then the
/// per-question array sorted by question_id.
inline void write_report(const std::string& path, const EvalReport& report) {
  std::vector<const QuestionEval*> rows;
  rows.reserve(report.per_question.size());
  for (const QuestionEval& qe : report.per_question) rows.push_back(&qe);
  std::sort(rows.begin(), rows.end(),
            [](const QuestionEval* a, const QuestionEval* b) {
              return a->question_id < b->question_id;
            });

  std::string body = "{\n";
  body += "  \"anls\": " + detail::fixed6(report.anls) + ",\n";
  body += "  \"exact_match\": " + detail::fixed6(report.exact_match) + ",\n";
  body += "  \"token_f1\": " + detail::fixed6(report.token_f1) + ",\n";
  body += "  \"page_top1_accuracy\": " +
          detail::fixed6(report.page_top1_accuracy) + ",\n";
  body += "  \"selection_recall\": " + detail::fixed6(report.selection_recall) +
          ",\n";
  body += "  \"avg_pages\": " + detail::fixed6(report.avg_pages) + ",\n";
  body += "  \"per_question\": [\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const QuestionEval& qe = *rows[i];
    std::string line = "    {\"question_id\":";
    detail::append_escaped(line, qe.question_id);
    line += ",\"anls\":" + detail::fixed6(qe.anls);
    line += ",\"exact_match\":" + std::to_string(qe.exact_match);
    line += ",\"token_f1\":" + detail::fixed6(qe.token_f1);
    line += ",\"num_selected\":" + std::to_string(qe.num_selected);
    line += ",\"gold_page_selected\":";
    line += qe.gold_page_selected.has_value()
                ? (*qe.gold_page_selected ? "true" : "false")
                : "null";
    line += ",\"top1_hit\":";
    line += qe.top1_hit.has_value() ? (*qe.top1_hit ? "true" : "false")
                                    : "null";
    line += "}";
    if (i + 1 < rows.size()) line += ",";
    body += line + "\n";
  }
  body += "  ]\n}\n";

  std::ofstream out = detail::open_for_write(path);
  out << body;
  detail::finish_write(out, path);
}

}  // namespace avir::io
