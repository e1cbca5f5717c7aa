#pragma once

#include <filesystem>
#include <map>

#include "holo/datakit/curation.hpp"
#include "holo/datakit/split.hpp"
#include "holo/datakit/synthetic.hpp"
#include "holo/evalkit/report.hpp"
#include "holo/training/model.hpp"

namespace holo {

/// A dataset ready for training: manifest, captions, payload access (memoised)
/// and the split for the configured setting.
struct DataBundle {
  Manifest manifest;
  CaptionSource captions;
  PayloadSource payloads;
  SplitAssignment split;
};

/// Generates the preset in memory (payloads rendered on demand) or, when
/// `cfg.path` is set, reads a generated directory.
DataBundle load_data(const DataConfig& cfg, std::uint64_t split_seed);

/// Memoising wrapper; safe to call from several threads.
PayloadSource cached_payloads(PayloadSource source);

/// Category names, the question bank, the caption question and every training caption.
Vocab build_vocab(const DataBundle& data);

enum class Task { QA, Caption };

/// One curated instruction sample, already tokenised. `target` is the answer text.
struct TextExample {
  std::string id;
  ModalityKind kind = ModalityKind::Video;
  Task task = Task::QA;
  std::vector<TokenId> prompt;  // BOS ... SEP
  std::vector<TokenId> answer;  // ... EOS; empty unless requested
  std::int64_t action = 0;
  std::string target;
};

/// QA and caption examples for every (id, modality). The QA question for a
/// sample is drawn from a stream seeded by (seed, id, modality).
std::vector<TextExample> make_examples(const DataBundle& data, const Vocab& vocab, const std::vector<std::string>& ids,
                                       const std::vector<ModalityKind>& kinds, std::uint64_t seed,
                                       bool with_answers);

ModalitySample load_sample(const DataBundle& data, const std::string& id, ModalityKind kind);

struct Stage1Epoch {
  std::size_t epoch = 0;
  double lr = 0;  // at the epoch's last update
  double train_loss = 0;
  double train_acc = 0;
  double val_acc = 0;
};

struct Stage1Result {
  ModalityKind kind = ModalityKind::Video;
  std::vector<Stage1Epoch> history;
  std::size_t train_size = 0, val_size = 0;
  bool diverged = false;  // a non-finite loss stopped training; weights are the last good epoch's
};

/// Stage 1: trains the tailored backbone and classifier of `kind` with the
/// classification loss on the split's training ids, holding out a seeded
/// `val_fraction` for per-epoch validation.
template <typename T>
Stage1Result pretrain_tailored(HoloModel<T>& model, const DataBundle& data, ModalityKind kind,
                               const Stage1Config& cfg, const OptimizerConfig& opt, std::uint64_t seed);

struct Stage2Step {
  std::size_t step = 0;
  double lr = 0;
  double loss = 0;
  double classification = 0;
  double next_token = 0;
};

struct Stage2Result {
  std::vector<Stage2Step> history;
  std::map<std::string, std::string> frozen_hashes;  // prefix -> params hash, unchanged by the stage
  std::size_t examples = 0;
  bool diverged = false;
};

/// Accumulates the gradient of one effective batch into the store, split into
/// micro-batches of `micro_batch` examples with batch-global normalisers.
/// Returns the loss of the effective batch.
template <typename T>
Stage2Loss<T> accumulate_stage2(const HoloModel<T>& model, const DataBundle& data,
                                const std::vector<const TextExample*>& batch, std::size_t micro_batch);

/// Stage 2: freezes the universal encoder and the tailored backbones and
/// classifiers, then trains the configured groups with the classification
/// plus next-token loss. Throws NumericError if a frozen parameter changed.
template <typename T>
Stage2Result finetune_umip(HoloModel<T>& model, const DataBundle& data, const Stage2Config& cfg,
                           const OptimizerConfig& opt, std::uint64_t seed);

struct EvalOptions {
  std::vector<std::string> tasks{"recognition", "qa", "caption"};
  std::size_t limit = 0;          // test sequences per modality, 0 = all
  bool diagnostics = false;       // cluster separation and alignment gap per modality
  std::size_t max_caption_tokens = 32;
};

/// Recognition (classifier on the pooled state of the caption prompt), QA
/// (greedy answer matched against the category) and caption METEOR on the test ids.
template <typename T>
MetricReport evaluate(const HoloModel<T>& model, const DataBundle& data, const EvalOptions& opts,
                      std::uint64_t seed);

/// Per-sample tokens and labels used by the diagnostics.
struct TokenDump {
  std::vector<Tensor<double>> tokens;  // pooled Z_m per sample
  std::vector<std::size_t> labels;
};

template <typename T>
TokenDump collect_tokens(const HoloModel<T>& model, const DataBundle& data, ModalityKind kind,
                            const std::vector<std::string>& ids);

/// Class anchors: text-space embeddings of the category names pushed through
/// the projector's final MLP.
template <typename T>
std::vector<Tensor<double>> class_anchors(const HoloModel<T>& model, const DatasetSpec& spec, ModalityKind kind,
                                          std::uint64_t seed);

/// Builds the model for `cfg` (arm taken from cfg.model.arm).
HoloModel<float> build_model(const RunConfig& cfg, const DataBundle& data, const Vocab& vocab);

/// Copies every parameter under `prefix` from `src` into the same-named parameter of `dst`.
template <typename T>
void copy_params(const ParamStore<T>& src, ParamStore<T>& dst, std::string_view prefix);

struct AblationResult {
  std::vector<Arm> arms;
  std::vector<std::uint64_t> seeds;
  std::map<Arm, std::vector<MetricReport>> per_seed;
  std::map<Arm, MetricReport> mean;                  // seed-mean scores
  std::map<Arm, std::vector<std::string>> split_hashes;  // one per seed
  double seconds = 0;

  nlohmann::json to_json() const;
  /// Rows Baseline / +TailorEncoder / +UMIP; columns task/modality and task/Avg.
  std::string table_csv() const;
  void write(const std::filesystem::path& dir) const;
};

/// Runs every arm under identical data, seeds and budgets. Stage 1 is run once
/// per seed and shared by the arms that use tailored encoders.
AblationResult ablation_run(const RunConfig& cfg, const std::vector<Arm>& arms, const std::vector<std::uint64_t>& seeds,
                            const EvalOptions& eval = {});

/// CSV writers for the training histories: step,lr,loss,metric.
void write_history_csv(const std::vector<Stage1Epoch>& h, const std::filesystem::path& path);
void write_history_csv(const std::vector<Stage2Step>& h, const std::filesystem::path& path);

}  // namespace holo
