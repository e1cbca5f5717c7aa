#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "holo/encoders/modality.hpp"

namespace holo {

/// Shape of a sensing dataset. Sequences are laid out subject by subject:
/// subject s lives in environment subject_env[s] and contributes
/// subject_counts[s] sequences, cycling through the action categories.
struct DatasetSpec {
  std::string name;
  std::size_t num_classes = 0;
  std::size_t num_subjects = 0;
  std::size_t num_envs = 0;
  std::size_t frames = 5;
  std::vector<ModalityKind> modalities;
  std::size_t sequence_count = 0;
  std::vector<std::string> class_names;
  std::vector<std::size_t> subject_env;
  std::vector<std::size_t> subject_counts;
  std::vector<std::size_t> holdout_subjects;  // test side of CrossSub
  std::vector<std::size_t> holdout_envs;      // test side of CrossEnv

  /// Throws ConfigError when counts, names or assignments are inconsistent.
  void validate() const;
  std::size_t class_index(std::string_view name) const;
};

/// "mmfi-like": 27 classes, 40 subjects, 4 environments, 5 frames, 16,448 sequences.
/// "xrf55-like": 55 classes, 19 subjects, 4 environments, 10 frames, 19,800 sequences.
/// "desk": 6 classes, 8 subjects, 4 environments, 5 frames, 480 sequences.
/// Throws ConfigError for any other name.
DatasetSpec dataset_preset(std::string_view name);
std::vector<std::string> dataset_preset_names();

/// Canonical action names; the first `n` of a fixed list (n <= 55).
std::vector<std::string> action_names(std::size_t n);

struct SequenceRecord {
  std::string id;
  std::size_t action = 0;
  std::size_t subject = 0;
  std::size_t env = 0;
  std::map<ModalityKind, std::string> payloads;  // relative payload paths

  bool operator==(const SequenceRecord&) const = default;
};

struct Manifest {
  DatasetSpec spec;
  std::vector<SequenceRecord> records;

  /// Records in canonical order for `spec`, without payload paths.
  static Manifest layout(const DatasetSpec& spec);
  const SequenceRecord& at(std::string_view id) const;
};

/// One JSON object per line: {"id","action","subject","env","payloads":{kind: path}}.
void write_manifest_jsonl(const std::vector<SequenceRecord>& records, const std::filesystem::path& path);
/// Throws ManifestError on malformed lines.
std::vector<SequenceRecord> read_manifest_jsonl(const std::filesystem::path& path);

/// dataset.json beside the manifest.
void write_dataset_spec(const DatasetSpec& spec, const std::filesystem::path& path);
DatasetSpec read_dataset_spec(const std::filesystem::path& path);

/// Binary payload: "HOLP", u32 version, u32 dtype (0 = float32), u32 rank,
/// u64 extents[rank], then little-endian values.
void write_payload(const RawArray& a, const std::filesystem::path& path);
RawArray read_payload(const std::filesystem::path& path);

}  // namespace holo
