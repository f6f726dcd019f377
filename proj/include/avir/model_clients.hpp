// SPDX-License-Identifier: Apache-2.0
//
// Pluggable backends for the two model stages: per-page relevance scoring
// and answer generation. Each stage offers a remote HTTP client, plus
// offline stand-ins (file replay / deterministic mocks) so whole pipelines
// run without any served model.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "avir/errors.hpp"
#include "avir/metrics.hpp"
#include "avir/selector.hpp"

namespace avir::clients {

inline constexpr std::string_view kDefaultInstruction =
    "Answer the question using a single word or phrase.";

enum class ScorerKind { remote, file_replay, mock_oracle };
enum class AnswerKind { remote, mock_echo };

/// Synthetic score shapes for offline runs: the gold page scores `signal`,
/// every other page gets deterministic pseudo-noise in [0, noise_max].
/// suppress_gold inverts the shape (gold 0.0, everything else `signal`) to
/// simulate a scorer that misses the evidence page.
struct MockOracleConfig {
  double signal = 0.9;
  double noise_max = 0.1;
  bool suppress_gold = false;
  std::uint64_t seed = 0;
  std::shared_ptr<const std::map<std::string, int>> gold_pages;  // by qid
};

struct ScorerBackend {
  ScorerKind kind = ScorerKind::mock_oracle;
  std::string endpoint;  // remote only
  int timeout_ms = 30000;
  int max_retries = 2;
  int backoff_ms = 500;  // doubles per retry
  std::shared_ptr<const ScoreMap> replay_cache;  // file_replay only
  MockOracleConfig mock;                         // mock_oracle only

  void validate() const {
    if (kind == ScorerKind::remote && endpoint.empty()) {
      throw invalid_input_error("remote scorer requires an endpoint URL");
    }
    if (kind == ScorerKind::file_replay && !replay_cache) {
      throw invalid_input_error("file-replay scorer requires a score cache");
    }
    if (kind == ScorerKind::mock_oracle) {
      if (!(mock.signal >= 0.0 && mock.signal <= 1.0) ||
          !(mock.noise_max >= 0.0 && mock.noise_max <= 1.0) ||
          mock.signal <= mock.noise_max) {
        throw invalid_input_error(
            "mock scorer needs 0 <= noise_max < signal <= 1");
      }
    }
    if (timeout_ms < 1 || max_retries < 0 || backoff_ms < 0) {
      throw invalid_input_error("scorer timeout/retry settings out of range");
    }
  }
};

struct MockEchoAnswer {
  std::string answer;
  std::optional<int> gold_page;
};

/// Returns the configured gold answer when the gold page made it into the
/// prompt, the fallback string otherwise.
struct MockEchoConfig {
  std::shared_ptr<const std::map<std::string, MockEchoAnswer>> answers;
  std::string fallback = "UNKNOWN";
};

struct AnswerBackend {
  AnswerKind kind = AnswerKind::mock_echo;
  std::string endpoint;  // remote only
  std::string model_name;
  double temperature = 0.0;  // deterministic decoding by default
  int timeout_ms = 30000;
  int max_retries = 2;
  int backoff_ms = 500;
  MockEchoConfig echo;  // mock_echo only

  void validate() const {
    if (kind == AnswerKind::remote && endpoint.empty()) {
      throw invalid_input_error("remote answerer requires an endpoint URL");
    }
    if (kind == AnswerKind::mock_echo && !echo.answers) {
      throw invalid_input_error("mock answerer requires an answer table");
    }
    if (timeout_ms < 1 || max_retries < 0 || backoff_ms < 0) {
      throw invalid_input_error("answerer timeout/retry settings out of range");
    }
  }
};

/// A fully assembled model request: selected page references in original
/// document order plus the instruction and question. question_id and
/// page_indices are correlation metadata (mocks, logging); remote requests
/// only carry refs and text.
struct PromptSpec {
  std::string question_id;
  std::string question;
  std::vector<std::string> page_refs;
  std::vector<int> page_indices;
  std::string instruction{kDefaultInstruction};
};

// ---------------------------------------------------------------------------
// HTTP plumbing
// ---------------------------------------------------------------------------

namespace detail {

struct UrlParts {
  std::string base;  // scheme://host[:port]
  std::string path;  // "" when the URL names no path
};

inline UrlParts parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw invalid_input_error("endpoint URL '" + url +
                              "' must include a scheme (http:// or https://)");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// POST a JSON body, retrying transport failures and non-2xx statuses with
/// exponential backoff. A 2xx response that fails to parse is not retried.
inline nlohmann::json post_json(const std::string& endpoint,
                                std::string_view default_path,
                                const nlohmann::json& body, int timeout_ms,
                                int max_retries, int backoff_ms,
                                const char* what) {
  const UrlParts url = parse_url(endpoint);
  const std::string path =
      url.path.empty() ? std::string(default_path) : url.path;
  const std::string payload = body.dump();

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long long>(backoff_ms)
                                    << (attempt - 1)));
    }
    httplib::Client client(url.base);
    client.set_connection_timeout(std::chrono::milliseconds(timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(timeout_ms));

    httplib::Result res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(std::string(what) + ": response body is not JSON: " +
                        e.what());
    }
  }
  throw backend_unavailable_error(
      std::string(what) + ": " + endpoint + " unavailable after " +
      std::to_string(max_retries + 1) + " attempts (" + last_error + ")");
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double quantize6(double v) { return std::round(v * 1e6) / 1e6; }

// deterministic per-(seed, qid, page) noise in [0, noise_max]
inline double mock_noise(std::uint64_t seed, std::string_view qid, int page,
                         double noise_max) {
  const std::uint64_t h =
      mix64(seed ^ fnv1a64(qid) ^
            mix64(0x517CC1B727220A95ULL + static_cast<std::uint64_t>(page)));
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
  return quantize6(unit * noise_max);
}

inline std::string trim_ascii(std::string_view s) {
  std::size_t b = 0, e = s.size();
  const auto space = [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (b < e && space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scoring stage
// ---------------------------------------------------------------------------

/// One relevance probability per page, order-aligned with page_refs.
/// Remote backends are posted one (question, page) pair at a time and must
/// answer {"score": p} with p in [0, 1]; out-of-range values are errors.
inline ScoredDocument score_pages(const ScorerBackend& backend,
                                  const std::string& question_id,
                                  const std::string& question,
                                  const std::string& doc_id,
                                  const std::vector<std::string>& page_refs) {
  backend.validate();
  if (page_refs.empty()) {
    throw invalid_input_error("score_pages: page_refs must be non-empty");
  }

  ScoredDocument doc;
  doc.doc_id = doc_id;
  doc.question_id = question_id;

  switch (backend.kind) {
    case ScorerKind::file_replay: {
      const auto it = backend.replay_cache->find(question_id);
      if (it == backend.replay_cache->end()) {
        throw not_found_error("score cache has no entry for question '" +
                              question_id + "'");
      }
      if (it->second.scores.size() != page_refs.size()) {
        throw validation_error(
            "cached scores for '" + question_id + "' cover " +
            std::to_string(it->second.scores.size()) + " pages, expected " +
            std::to_string(page_refs.size()));
      }
      return it->second;
    }

    case ScorerKind::mock_oracle: {
      const MockOracleConfig& mock = backend.mock;
      std::optional<int> gold;
      if (mock.gold_pages) {
        if (auto it = mock.gold_pages->find(question_id);
            it != mock.gold_pages->end()) {
          gold = it->second;
        }
      }
      for (int i = 0; i < static_cast<int>(page_refs.size()); ++i) {
        const bool is_gold = gold.has_value() && i == *gold;
        double s;
        if (mock.suppress_gold) {
          s = is_gold ? 0.0 : mock.signal;
        } else {
          s = is_gold ? mock.signal
                      : detail::mock_noise(mock.seed, question_id, i,
                                           mock.noise_max);
        }
        doc.scores.push_back(s);
      }
      return doc;
    }

    case ScorerKind::remote: {
      for (std::size_t i = 0; i < page_refs.size(); ++i) {
        const nlohmann::json body{{"question_id", question_id},
                                  {"question", question},
                                  {"doc_id", doc_id},
                                  {"page_index", i},
                                  {"page_ref", page_refs[i]}};
        const nlohmann::json resp = detail::post_json(
            backend.endpoint, "/score", body, backend.timeout_ms,
            backend.max_retries, backend.backoff_ms, "scorer");
        const auto it = resp.find("score");
        if (it == resp.end() || !it->is_number()) {
          throw parse_error("scorer response lacks a numeric 'score' field");
        }
        const double v = it->get<double>();
        if (!(v >= 0.0 && v <= 1.0)) {
          throw validation_error("scorer returned score " +
                                 std::to_string(v) + " outside [0, 1]");
        }
        doc.scores.push_back(v);
      }
      return doc;
    }
  }
  throw invalid_input_error("score_pages: unknown scorer kind");
}

// ---------------------------------------------------------------------------
// Answer stage
// ---------------------------------------------------------------------------

/// Restrict page_refs to the selected pages, preserving original document
/// order.
inline PromptSpec build_prompt(const std::string& question_id,
                               const std::string& question,
                               const SelectionResult& selected,
                               const std::vector<std::string>& page_refs,
                               std::string_view instruction =
                                   kDefaultInstruction) {
  if (selected.selected.empty()) {
    throw invalid_input_error("build_prompt: selection is empty");
  }
  PromptSpec prompt;
  prompt.question_id = question_id;
  prompt.question = question;
  prompt.instruction = std::string(instruction);
  for (int page : selected.selected) {
    if (page < 0 || page >= static_cast<int>(page_refs.size())) {
      throw invalid_input_error("build_prompt: selected page " +
                                std::to_string(page) +
                                " outside the document's page_refs");
    }
    prompt.page_refs.push_back(page_refs[static_cast<std::size_t>(page)]);
    prompt.page_indices.push_back(page);
  }
  return prompt;
}

/// Run the answer model. Remote backends receive one chat-completions-style
/// user turn: the page images in order, then instruction + question; the
/// first choice's message text is returned whitespace-trimmed.
inline std::string generate_answer(const AnswerBackend& backend,
                                   const PromptSpec& prompt) {
  backend.validate();
  if (prompt.page_refs.empty()) {
    throw invalid_input_error("generate_answer: prompt has no pages");
  }

  if (backend.kind == AnswerKind::mock_echo) {
    const auto it = backend.echo.answers->find(prompt.question_id);
    if (it == backend.echo.answers->end()) {
      throw not_found_error("mock answerer has no entry for question '" +
                            prompt.question_id + "'");
    }
    const MockEchoAnswer& key = it->second;
    const bool gold_present =
        key.gold_page.has_value() &&
        std::find(prompt.page_indices.begin(), prompt.page_indices.end(),
                  *key.gold_page) != prompt.page_indices.end();
    return gold_present ? key.answer : backend.echo.fallback;
  }

  nlohmann::json content = nlohmann::json::array();
  for (const std::string& ref : prompt.page_refs) {
    content.push_back(
        {{"type", "image_url"}, {"image_url", {{"url", ref}}}});
  }
  content.push_back(
      {{"type", "text"},
       {"text", prompt.instruction + "\n" + prompt.question}});
  const nlohmann::json body{
      {"model", backend.model_name},
      {"temperature", backend.temperature},
      {"messages",
       nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};

  const nlohmann::json resp = detail::post_json(
      backend.endpoint, "/v1/chat/completions", body, backend.timeout_ms,
      backend.max_retries, backend.backoff_ms, "answerer");

  if (!resp.contains("choices") || !resp["choices"].is_array() ||
      resp["choices"].empty()) {
    throw parse_error("answerer response lacks a 'choices' array");
  }
  const nlohmann::json& message = resp["choices"][0].value(
      "message", nlohmann::json::object());
  if (!message.contains("content") || !message["content"].is_string()) {
    throw parse_error("answerer response lacks choices[0].message.content");
  }
  const std::string answer =
      detail::trim_ascii(message["content"].get<std::string>());
  if (answer.empty()) {
    throw empty_answer_error("answerer returned an empty completion for '" +
                             prompt.question_id + "'");
  }
  return answer;
}

}  // namespace avir::clients
