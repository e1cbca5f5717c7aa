#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "holo/numerics/tensor.hpp"

namespace holo {

/// Exact-match fraction. Throws MetricError on length mismatch or empty input.
double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels);

/// Lowercased, trimmed, inner whitespace collapsed to single spaces.
std::string normalize_answer(std::string_view text);

/// QA accuracy: a generated answer counts when it normalizes to its label.
double qa_accuracy(const std::vector<std::string>& generated, const std::vector<std::string>& labels);

struct MeteorScore {
  double score = 0;
  double precision = 0, recall = 0, fmean = 0, penalty = 0;
  std::size_t matches = 0, chunks = 0;
  bool empty = false;  // candidate or reference had no tokens; score is 0
};

/// Exact-match METEOR over lowercased word tokens:
///   Fmean = 10PR / (R + 9P), penalty = 0.5 (chunks / matches)^3, score = Fmean (1 - penalty),
/// using the maximum one-to-one alignment with the fewest chunks.
MeteorScore meteor(std::string_view candidate, std::string_view reference);
MeteorScore meteor_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

/// Minimum chunk count over all maximum alignments, found by branch and bound.
/// Returns {matches, chunks}.
std::pair<std::size_t, std::size_t> min_chunk_alignment(const std::vector<std::string>& candidate,
                                                        const std::vector<std::string>& reference);

/// Row-mean of a [n, d] token matrix (a rank-1 tensor passes through).
std::vector<double> mean_pool(const Tensor<double>& tokens);

/// Mean silhouette (Euclidean) of per-sample pooled tokens grouped by class.
/// tokens_by_class[c] holds the samples of class c. Classes with fewer than two
/// samples are dropped with a warning; fewer than two usable classes throws MetricError.
double cluster_separation(const std::vector<std::vector<Tensor<double>>>& tokens_by_class);

/// Mean cosine distance from each pooled token to its own class anchor minus the
/// mean distance to the other classes' anchors. Lower means better aligned.
/// Throws MetricError on width mismatch or a label without an anchor.
double alignment_gap(const std::vector<Tensor<double>>& tokens, const std::vector<std::size_t>& labels,
                     const std::vector<Tensor<double>>& anchors);

}  // namespace holo
