#pragma once

#include <filesystem>
#include <functional>
#include <string_view>

#include "holo/datakit/curation.hpp"

namespace holo {

/// Global multiplier on every modality's sensor noise.
struct NoiseProfile {
  std::string name = "nominal";
  double level = 1.0;

  /// "clean" (0.25), "nominal" (1.0) or "max" (3.0). Throws ConfigError.
  static NoiseProfile named(std::string_view name);
};

/// Latent action world rendered into every modality. Each class owns a latent
/// prototype and a motion pattern; subjects and environments add latent
/// offsets, and each modality adds its own nuisances on top of sensor noise
/// (background shading for cameras, a rigid scene transform for point clouds,
/// multipath mixing and per-sequence channel gains for WiFi/RFID). Video is the
/// cleanest modality, WiFi and RFID the noisiest.
class SyntheticWorld {
 public:
  static constexpr std::size_t kLatentDim = 8;

  SyntheticWorld(const DatasetSpec& spec, NoiseProfile profile, std::uint64_t seed);

  /// Deterministic in (seed, record id, modality).
  RawArray render(const SequenceRecord& seq, ModalityKind kind) const;
  ModalityGeometry geometry(ModalityKind kind) const { return desk_geometry(kind, spec_.frames); }
  double noise_sigma(ModalityKind kind) const;
  /// Latent trajectory point at normalized time tau in [0, 1].
  std::vector<double> latent(const SequenceRecord& seq, double tau) const;

  const DatasetSpec& spec() const { return spec_; }
  const NoiseProfile& profile() const { return profile_; }
  std::uint64_t seed() const { return seed_; }

 private:
  RawArray render_image(const SequenceRecord& seq, ModalityKind kind, Rng& rng) const;
  RawArray render_points(const SequenceRecord& seq, ModalityKind kind, Rng& rng) const;
  RawArray render_temporal(const SequenceRecord& seq, ModalityKind kind, Rng& rng) const;

  DatasetSpec spec_;
  NoiseProfile profile_;
  std::uint64_t seed_;
  std::vector<std::vector<double>> class_proto_, class_motion_, subject_offset_, env_offset_;
  std::vector<double> class_phase_;
};

using PayloadSource = std::function<RawArray(const SequenceRecord&, ModalityKind)>;

struct GeneratedDataset {
  Manifest manifest;
  CaptionSource captions;
};

/// Lays out the spec's records, attaches payload paths
/// ("payloads/<id>.<kind>.bin") and template captions. When `out_dir` is
/// non-empty, writes dataset.json, manifest.jsonl, captions.jsonl,
/// generator.json and (unless `manifest_only`) every payload file.
GeneratedDataset generate_synthetic(const DatasetSpec& spec, const NoiseProfile& profile, std::uint64_t seed,
                                    const std::filesystem::path& out_dir = {}, bool manifest_only = false);

/// Loads a directory written by generate_synthetic.
GeneratedDataset load_dataset_dir(const std::filesystem::path& dir);

/// Payloads read from files under `root`.
PayloadSource file_payloads(std::filesystem::path root);
/// Payloads rendered on demand by `world` (no disk access).
PayloadSource world_payloads(std::shared_ptr<const SyntheticWorld> world);

}  // namespace holo
