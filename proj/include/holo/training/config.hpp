#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "holo/encoders/modality.hpp"
#include "holo/training/optim.hpp"

namespace holo {

/// Which projector sits between the encoders and the decoder.
///   Baseline: frozen universal encoder + learnable-query projector
///   Tailored: tailored encoders + learnable-query projector
///   Umip:     universal and tailored encoders joined by the UMIP projector
enum class Arm { Baseline, Tailored, Umip };

std::string_view to_string(Arm arm);
/// "baseline" | "tailored" | "umip". Throws ConfigError.
Arm arm_from_string(std::string_view name);
/// Table row label: "Baseline", "+TailorEncoder", "+UMIP".
std::string_view arm_label(Arm arm);

struct DataConfig {
  std::string preset = "desk";  // dataset preset, used when `path` is empty
  std::string path;             // generated dataset directory
  std::string setting = "cross-env";
  std::vector<std::string> modalities{"video", "mmwave", "wifi"};
  std::string noise = "nominal";
  std::uint64_t data_seed = 1;  // synthetic world seed
  std::size_t eval_limit = 0;   // cap on test sequences per modality, 0 = all
};

struct ModelConfig {
  std::string preset = "desk";  // "desk" | "paper-shapes"
  std::string arm = "umip";
  std::size_t d_m = 64;
  std::size_t d_llm = 128;
  std::size_t backbone_width = 32;
  std::size_t universal_layers = 2;
  std::size_t umip_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 4;
  std::size_t qformer_queries = 16;
  bool shared_projection = true;
};

struct Stage1Config {
  Schedule schedule{3e-3, 2, {12, 16}, 0.1};  // units: epochs
  std::size_t epochs = 18;
  std::size_t batch = 16;
  double val_fraction = 0.1;
};

struct Stage2Config {
  Schedule schedule{1e-3, 20, {}, 0.1};  // units: optimizer steps
  std::size_t steps = 150;
  std::size_t epochs = 0;  // used instead of `steps` when steps is 0
  std::size_t micro_batch = 8;
  std::size_t accumulation = 2;
  /// Trainable groups: any of "tokenizer", "mlp", "projector", "decoder".
  std::vector<std::string> train_groups{"tokenizer", "mlp", "projector", "decoder"};
};

/// Everything a run depends on. Serialised as JSON with the sections
/// {data, model, optimizer, schedule, seed}; stage budgets live under schedule.
struct RunConfig {
  DataConfig data;
  ModelConfig model;
  OptimizerConfig optimizer;
  Stage1Config stage1;
  Stage2Config stage2;
  std::uint64_t seed = 0;

  static RunConfig desk();
  /// Full-scale model shapes and budgets; encodable, not meant to run on a CPU.
  static RunConfig paper_shapes();

  std::vector<ModalityKind> modality_kinds() const;
  Arm arm() const { return arm_from_string(model.arm); }
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their desk defaults; unknown sections throw ConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  /// FNV-1a of the canonical JSON, as hex.
  std::string hash() const;
};

}  // namespace holo
