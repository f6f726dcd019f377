// SPDX-License-Identifier: Apache-2.0
//
// Adaptive page selection over per-page relevance scores: an exact 1-D
// 2-means clusterer plus the adaptive / top-k / threshold / keep-all
// selection strategies built on top of it.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avir/errors.hpp"

namespace avir {

/// One document's per-page relevance probabilities for one question.
/// scores[i] belongs to physical page i (0 = first page), each in [0, 1].
struct ScoredDocument {
  std::string doc_id;
  std::string question_id;
  std::vector<double> scores;

  int page_count() const { return static_cast<int>(scores.size()); }

  /// Throws invalid_input_error when empty or any score is outside [0, 1].
  void validate() const {
    if (scores.empty()) {
      throw invalid_input_error("ScoredDocument '" + question_id +
                                "': scores must be non-empty");
    }
    for (double s : scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw invalid_input_error("ScoredDocument '" + question_id +
                                  "': score " + std::to_string(s) +
                                  " outside [0, 1]");
      }
    }
  }
};

enum class SelectionStrategy { adaptive, topk, threshold, all };

/// Strategy choice plus hyperparameters for page selection.
struct SelectionPolicy {
  SelectionStrategy strategy = SelectionStrategy::adaptive;
  double threshold = 0.6;   // minimum relevance for threshold-style branches
  int max_pages = 8;        // hard cap on the clustered selection
  int short_doc_limit = 4;  // documents with fewer pages skip clustering
  int topk_k = 1;           // only used by SelectionStrategy::topk

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
      throw invalid_input_error("SelectionPolicy: threshold outside [0, 1]");
    }
    if (max_pages < 1) {
      throw invalid_input_error("SelectionPolicy: max_pages must be >= 1");
    }
    if (short_doc_limit < 1) {
      throw invalid_input_error("SelectionPolicy: short_doc_limit must be >= 1");
    }
    if (topk_k < 1) {
      throw invalid_input_error("SelectionPolicy: topk_k must be >= 1");
    }
  }
};

/// Which rule produced a selection. short_threshold_hit / keep_all double as
/// the hit / fallback labels of the standalone threshold strategy.
enum class SelectionBranch {
  short_threshold_hit,
  short_keep_all,
  cluster_only,
  cluster_capped,
  fixed_topk,
  keep_all,
  degenerate,
};

inline std::string_view to_string(SelectionBranch b) {
  switch (b) {
    case SelectionBranch::short_threshold_hit: return "short_threshold_hit";
    case SelectionBranch::short_keep_all: return "short_keep_all";
    case SelectionBranch::cluster_only: return "cluster_only";
    case SelectionBranch::cluster_capped: return "cluster_capped";
    case SelectionBranch::fixed_topk: return "fixed_topk";
    case SelectionBranch::keep_all: return "keep_all";
    case SelectionBranch::degenerate: return "degenerate";
  }
  return "unknown";
}

inline std::string_view to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::adaptive: return "adaptive";
    case SelectionStrategy::topk: return "topk";
    case SelectionStrategy::threshold: return "threshold";
    case SelectionStrategy::all: return "all";
  }
  return "unknown";
}

inline SelectionStrategy strategy_from_string(std::string_view s) {
  if (s == "adaptive") return SelectionStrategy::adaptive;
  if (s == "topk") return SelectionStrategy::topk;
  if (s == "threshold") return SelectionStrategy::threshold;
  if (s == "all") return SelectionStrategy::all;
  throw invalid_input_error("unknown selection strategy '" + std::string(s) +
                            "'");
}

/// Exact two-cluster split of a score vector. Indices are page indices in
/// ascending order; the relevant cluster is the one with the higher mean.
/// An empty irrelevant cluster marks the degenerate (all-equal) case.
struct ClusterPartition {
  std::vector<int> relevant_indices;
  std::vector<int> irrelevant_indices;
  double sse = 0.0;  // total within-cluster sum of squared deviations

  bool degenerate() const { return irrelevant_indices.empty(); }
};

/// Diagnostics attached to a clustering-branch selection.
struct ClusterSplit {
  double relevant_centroid = 0.0;
  double irrelevant_centroid = 0.0;
  double sse = 0.0;
};

struct SelectionResult {
  std::vector<int> selected;  // unique page indices, ascending
  SelectionBranch branch = SelectionBranch::keep_all;
  std::optional<ClusterSplit> cluster_split;
};

/// Score spread below which a vector counts as all-equal and clustering is
/// skipped.
inline constexpr double kDegenerateSpread = 1e-9;

namespace detail {

// Page order sorted by descending score; equal scores keep ascending page
// index. Every tie-sensitive routine below derives from this one ordering.
inline std::vector<int> order_by_score_desc(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

inline std::vector<int> sorted_ascending(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline double mean_of(const std::vector<double>& scores,
                      const std::vector<int>& indices) {
  double sum = 0.0;
  for (int i : indices) sum += scores[static_cast<std::size_t>(i)];
  return sum / static_cast<double>(indices.size());
}

}  // namespace detail

/// Optimal 1-D 2-means of `scores`: the SSE-minimal 2-partition, found by
/// scanning every contiguous split of the descending-sorted values (the
/// optimum is always such a split). Ties between equally good splits go to
/// the smaller relevant cluster. A spread below kDegenerateSpread yields the
/// degenerate partition with every page in the relevant cluster.
inline ClusterPartition two_means_1d(const std::vector<double>& scores) {
  const std::size_t n = scores.size();
  if (n < 2) {
    throw invalid_input_error("two_means_1d: need at least 2 scores, got " +
                              std::to_string(n));
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw invalid_input_error("two_means_1d: score outside [0, 1]");
    }
  }

  const std::vector<int> order = detail::order_by_score_desc(scores);

  ClusterPartition part;
  const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
  if (*mx - *mn < kDegenerateSpread) {
    part.relevant_indices.resize(n);
    std::iota(part.relevant_indices.begin(), part.relevant_indices.end(), 0);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = scores[static_cast<std::size_t>(order[i])];
      sum += v;
      sq += v * v;
    }
    part.sse = sq - sum * sum / static_cast<double>(n);
    return part;
  }

  // Prefix sums over the descending-sorted values. sse of a split with m
  // pages in the relevant (high) cluster follows from sum/sum-of-squares.
  std::vector<double> sum(n + 1, 0.0), sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = scores[static_cast<std::size_t>(order[i])];
    sum[i + 1] = sum[i] + v;
    sq[i + 1] = sq[i] + v * v;
  }
  const auto split_sse = [&](std::size_t m) {
    const double m_d = static_cast<double>(m);
    const double r_d = static_cast<double>(n - m);
    const double high = sq[m] - sum[m] * sum[m] / m_d;
    const double low =
        (sq[n] - sq[m]) - (sum[n] - sum[m]) * (sum[n] - sum[m]) / r_d;
    return high + low;
  };

  std::size_t best_m = 1;
  double best_sse = split_sse(1);
  for (std::size_t m = 2; m < n; ++m) {
    const double s = split_sse(m);
    if (s < best_sse) {  // strict: ties keep the smaller relevant cluster
      best_sse = s;
      best_m = m;
    }
  }

  part.relevant_indices.assign(order.begin(),
                               order.begin() + static_cast<std::ptrdiff_t>(best_m));
  part.irrelevant_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(best_m),
                                 order.end());
  part.relevant_indices = detail::sorted_ascending(std::move(part.relevant_indices));
  part.irrelevant_indices =
      detail::sorted_ascending(std::move(part.irrelevant_indices));
  part.sse = best_sse;
  return part;
}

/// Fixed top-k baseline: the min(k, n) highest-scored pages, equal scores
/// breaking toward the lower page index, returned in page order.
inline SelectionResult select_topk(const ScoredDocument& doc, int k) {
  doc.validate();
  if (k < 1) throw invalid_input_error("select_topk: k must be >= 1");

  const std::vector<int> order = detail::order_by_score_desc(doc.scores);
  const std::size_t keep =
      std::min(static_cast<std::size_t>(k), doc.scores.size());

  SelectionResult result;
  result.selected.assign(order.begin(),
                         order.begin() + static_cast<std::ptrdiff_t>(keep));
  result.selected = detail::sorted_ascending(std::move(result.selected));
  result.branch = SelectionBranch::fixed_topk;
  return result;
}

/// Pure threshold filtering: pages scoring >= threshold, or every page when
/// none qualifies.
inline SelectionResult select_threshold(const ScoredDocument& doc,
                                        double threshold) {
  doc.validate();
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw invalid_input_error("select_threshold: threshold outside [0, 1]");
  }

  SelectionResult result;
  for (int i = 0; i < doc.page_count(); ++i) {
    if (doc.scores[static_cast<std::size_t>(i)] >= threshold) {
      result.selected.push_back(i);
    }
  }
  if (result.selected.empty()) {
    result.selected.resize(doc.scores.size());
    std::iota(result.selected.begin(), result.selected.end(), 0);
    result.branch = SelectionBranch::keep_all;
  } else {
    result.branch = SelectionBranch::short_threshold_hit;
  }
  return result;
}

/// No-selection baseline: every page.
inline SelectionResult select_all(const ScoredDocument& doc) {
  doc.validate();
  SelectionResult result;
  result.selected.resize(doc.scores.size());
  std::iota(result.selected.begin(), result.selected.end(), 0);
  result.branch = SelectionBranch::keep_all;
  return result;
}

/// Adaptive selection. Short documents (n < short_doc_limit) use threshold
/// filtering and fall back to keeping every page. Longer documents are split
/// by two_means_1d; the relevant cluster is returned, capped to the
/// max_pages highest-scored members when it is larger. All-equal score
/// vectors skip clustering and keep every page, still subject to the cap.
/// Output is in original page order and fully deterministic.
inline SelectionResult select_adaptive(const ScoredDocument& doc,
                                       const SelectionPolicy& policy) {
  doc.validate();
  policy.validate();

  const int n = doc.page_count();
  SelectionResult result;

  if (n < policy.short_doc_limit) {
    result = select_threshold(doc, policy.threshold);
    if (result.branch == SelectionBranch::keep_all) {
      result.branch = SelectionBranch::short_keep_all;
    }
    return result;
  }

  if (n < 2) {  // short_doc_limit == 1 corner: nothing to cluster
    result.selected = {0};
    result.branch = SelectionBranch::degenerate;
    return result;
  }

  const ClusterPartition part = two_means_1d(doc.scores);
  const std::size_t cap = static_cast<std::size_t>(policy.max_pages);

  if (part.degenerate()) {
    result.selected = part.relevant_indices;
    if (result.selected.size() > cap) {
      // all scores equal: the cap keeps the lowest page indices
      result.selected.resize(cap);
    }
    result.branch = SelectionBranch::degenerate;
    return result;
  }

  ClusterSplit split;
  split.relevant_centroid = detail::mean_of(doc.scores, part.relevant_indices);
  split.irrelevant_centroid =
      detail::mean_of(doc.scores, part.irrelevant_indices);
  split.sse = part.sse;

  if (part.relevant_indices.size() <= cap) {
    result.selected = part.relevant_indices;
    result.branch = SelectionBranch::cluster_only;
  } else {
    std::vector<int> by_score = part.relevant_indices;
    std::stable_sort(by_score.begin(), by_score.end(), [&](int a, int b) {
      return doc.scores[static_cast<std::size_t>(a)] >
             doc.scores[static_cast<std::size_t>(b)];
    });
    by_score.resize(cap);
    result.selected = detail::sorted_ascending(std::move(by_score));
    result.branch = SelectionBranch::cluster_capped;
  }
  result.cluster_split = split;
  return result;
}

/// Dispatch on policy.strategy.
inline SelectionResult select_pages(const ScoredDocument& doc,
                                    const SelectionPolicy& policy) {
  policy.validate();
  switch (policy.strategy) {
    case SelectionStrategy::adaptive: return select_adaptive(doc, policy);
    case SelectionStrategy::topk: return select_topk(doc, policy.topk_k);
    case SelectionStrategy::threshold:
      return select_threshold(doc, policy.threshold);
    case SelectionStrategy::all: return select_all(doc);
  }
  throw invalid_input_error("select_pages: unknown strategy");
}

}  // namespace avir
