#include "holo/evalkit/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "holo/errors.hpp"
#include "holo/lm/vocab.hpp"

namespace holo {

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels) {
  if (preds.size() != labels.size()) {
    throw MetricError("accuracy: " + std::to_string(preds.size()) + " predictions for " +
                      std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw MetricError("accuracy: empty evaluation set");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == labels[i];
  return double(hit) / double(preds.size());
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

double qa_accuracy(const std::vector<std::string>& generated, const std::vector<std::string>& labels) {
  if (generated.size() != labels.size()) {
    throw MetricError("qa_accuracy: " + std::to_string(generated.size()) + " answers for " +
                      std::to_string(labels.size()) + " labels");
  }
  if (generated.empty()) throw MetricError("qa_accuracy: empty evaluation set");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) hit += normalize_answer(generated[i]) == normalize_answer(labels[i]);
  return double(hit) / double(generated.size());
}

namespace {

struct ChunkSearch {
  const std::vector<std::string>& cand;
  std::vector<std::vector<std::size_t>> options;   // same-word reference positions per candidate token
  std::vector<std::size_t> word_of;                // candidate position -> word class
  std::vector<std::size_t> need;                   // matches still required per word class
  std::vector<std::vector<std::size_t>> left;      // left[i][w]: occurrences of w at candidate positions > i
  std::vector<bool> used;
  std::size_t best = std::numeric_limits<std::size_t>::max();

  // prev: reference position matched by candidate i-1, or npos.
  void run(std::size_t i, std::size_t prev, std::size_t chunks) {
    if (chunks >= best) return;
    if (i == cand.size()) {
      best = chunks;
      return;
    }
    const std::size_t w = word_of[i];
    const bool must_match = need[w] > 0 && left[i][w] < need[w];
    if (need[w] > 0) {
      --need[w];
      // The continuing position first: it adds no chunk and tightens the bound early.
      if (prev != npos && prev + 1 < used.size() && !used[prev + 1] &&
          std::find(options[i].begin(), options[i].end(), prev + 1) != options[i].end()) {
        used[prev + 1] = true;
        run(i + 1, prev + 1, chunks);
        used[prev + 1] = false;
      }
      for (std::size_t j : options[i]) {
        if (used[j] || (prev != npos && j == prev + 1)) continue;
        used[j] = true;
        run(i + 1, j, chunks + 1);
        used[j] = false;
      }
      ++need[w];
    }
    if (!must_match) run(i + 1, npos, chunks);
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

}  // namespace

std::pair<std::size_t, std::size_t> min_chunk_alignment(const std::vector<std::string>& candidate,
                                                        const std::vector<std::string>& reference) {
  std::map<std::string, std::size_t> ids;
  for (const auto& t : candidate) ids.emplace(t, ids.size());
  ChunkSearch s{candidate, {}, {}, {}, {}, std::vector<bool>(reference.size(), false)};
  std::vector<std::size_t> cc(ids.size(), 0), rc(ids.size(), 0);
  for (const auto& t : candidate) {
    s.word_of.push_back(ids[t]);
    ++cc[ids[t]];
  }
  s.options.resize(candidate.size());
  for (std::size_t j = 0; j < reference.size(); ++j) {
    auto it = ids.find(reference[j]);
    if (it == ids.end()) continue;
    ++rc[it->second];
    for (std::size_t i = 0; i < candidate.size(); ++i)
      if (s.word_of[i] == it->second) s.options[i].push_back(j);
  }
  std::size_t matches = 0;
  s.need.resize(ids.size());
  for (std::size_t w = 0; w < ids.size(); ++w) {
    s.need[w] = std::min(cc[w], rc[w]);
    matches += s.need[w];
  }
  if (matches == 0) return {0, 0};
  s.left.assign(candidate.size(), std::vector<std::size_t>(ids.size(), 0));
  for (std::size_t i = candidate.size(); i-- > 0;) {
    if (i + 1 < candidate.size()) {
      s.left[i] = s.left[i + 1];
      ++s.left[i][s.word_of[i + 1]];
    }
  }
  s.run(0, ChunkSearch::npos, 0);
  return {matches, s.best};
}

MeteorScore meteor_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  MeteorScore m;
  if (candidate.empty() || reference.empty()) {
    m.empty = true;
    return m;
  }
  auto [matches, chunks] = min_chunk_alignment(candidate, reference);
  m.matches = matches;
  m.chunks = chunks;
  if (matches == 0) return m;
  m.precision = double(matches) / double(candidate.size());
  m.recall = double(matches) / double(reference.size());
  m.fmean = 10.0 * m.precision * m.recall / (m.recall + 9.0 * m.precision);
  const double frag = double(chunks) / double(matches);
  m.penalty = 0.5 * frag * frag * frag;
  m.score = m.fmean * (1.0 - m.penalty);
  return m;
}

MeteorScore meteor(std::string_view candidate, std::string_view reference) {
  return meteor_tokens(Vocab::split_words(candidate), Vocab::split_words(reference));
}

std::vector<double> mean_pool(const Tensor<double>& tokens) {
  const auto& s = tokens.shape();
  if (s.size() == 1) return {tokens.data().begin(), tokens.data().end()};
  if (s.size() != 2 || s[0] == 0) throw MetricError("mean_pool expects [n, d] tokens, got " + shape_str(s));
  std::vector<double> out(s[1], 0.0);
  for (std::size_t i = 0; i < s[0]; ++i)
    for (std::size_t j = 0; j < s[1]; ++j) out[j] += tokens[i * s[1] + j];
  for (auto& v : out) v /= double(s[0]);
  return out;
}

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 1.0;
  return 1.0 - ab / std::sqrt(aa * bb);
}

}  // namespace

double cluster_separation(const std::vector<std::vector<Tensor<double>>>& tokens_by_class) {
  std::vector<std::vector<std::vector<double>>> groups;
  std::size_t width = 0;
  for (std::size_t c = 0; c < tokens_by_class.size(); ++c) {
    if (tokens_by_class[c].size() < 2) {
      if (!tokens_by_class[c].empty()) spdlog::warn("cluster_separation: class {} has a single sample, excluded", c);
      continue;
    }
    auto& g = groups.emplace_back();
    for (const auto& t : tokens_by_class[c]) {
      g.push_back(mean_pool(t));
      if (width == 0) width = g.back().size();
      if (g.back().size() != width) throw MetricError("cluster_separation: token widths differ");
    }
  }
  if (groups.size() < 2) throw MetricError("cluster_separation needs at least two classes with two samples");

  double total = 0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    for (std::size_t i = 0; i < groups[c].size(); ++i) {
      const auto& x = groups[c][i];
      double a = 0;
      for (std::size_t k = 0; k < groups[c].size(); ++k)
        if (k != i) a += euclid(x, groups[c][k]);
      a /= double(groups[c].size() - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < groups.size(); ++o) {
        if (o == c) continue;
        double d = 0;
        for (const auto& y : groups[o]) d += euclid(x, y);
        b = std::min(b, d / double(groups[o].size()));
      }
      const double denom = std::max(a, b);
      total += denom > 0 ? (b - a) / denom : 0.0;
      ++count;
    }
  }
  return total / double(count);
}

double alignment_gap(const std::vector<Tensor<double>>& tokens, const std::vector<std::size_t>& labels,
                     const std::vector<Tensor<double>>& anchors) {
  if (tokens.size() != labels.size()) throw MetricError("alignment_gap: tokens and labels differ in length");
  if (tokens.empty()) throw MetricError("alignment_gap: no samples");
  if (anchors.size() < 2) throw MetricError("alignment_gap needs at least two class anchors");
  std::vector<std::vector<double>> anchor_vecs;
  for (const auto& a : anchors) anchor_vecs.push_back(mean_pool(a));
  const std::size_t width = anchor_vecs.front().size();
  for (const auto& a : anchor_vecs)
    if (a.size() != width) throw MetricError("alignment_gap: anchor widths differ");

  double own = 0, other = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto p = mean_pool(tokens[i]);
    if (p.size() != width) {
      throw MetricError("alignment_gap: token width " + std::to_string(p.size()) + " vs anchor width " +
                        std::to_string(width));
    }
    if (labels[i] >= anchor_vecs.size()) throw MetricError("alignment_gap: label without an anchor");
    own += cosine_distance(p, anchor_vecs[labels[i]]);
    double o = 0;
    for (std::size_t c = 0; c < anchor_vecs.size(); ++c)
      if (c != labels[i]) o += cosine_distance(p, anchor_vecs[c]);
    other += o / double(anchor_vecs.size() - 1);
  }
  return (own - other) / double(tokens.size());
}

}  // namespace holo
