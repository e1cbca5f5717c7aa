#include "holo/datakit/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include "json.hpp"

#include "holo/errors.hpp"

namespace holo {

static_assert(std::endian::native == std::endian::little, "payload I/O assumes a little-endian host");

namespace {

using nlohmann::json;

const std::vector<std::string> kActionNames = {
    "walking", "waving", "squatting", "jumping", "sitting down", "picking up",
    "standing up", "clapping", "kicking", "bowing", "stretching", "pushing",
    "pulling", "throwing", "running in place", "turning around", "raising left arm", "raising right arm",
    "lunging forward", "side bending", "chest expanding", "arm circling", "leg raising", "boxing",
    "drinking", "phone calling", "falling", "lying down", "crawling", "hopping on one foot",
    "shaking head", "nodding", "pointing", "writing", "typing", "sweeping",
    "mopping", "wiping a table", "carrying a box", "opening a door", "closing a door", "brushing teeth",
    "combing hair", "eating", "reading", "stomping", "tiptoeing", "swinging arms",
    "punching", "saluting", "applauding overhead", "rubbing hands", "scratching head", "hugging",
    "dancing"};

// Splits `total` into `parts` near-equal integers, larger ones first.
std::vector<std::size_t> even_split(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out(parts, total / parts);
  for (std::size_t i = 0; i < total % parts; ++i) ++out[i];
  return out;
}

}  // namespace

std::vector<std::string> action_names(std::size_t n) {
  if (n > kActionNames.size()) {
    throw ConfigError("at most " + std::to_string(kActionNames.size()) + " action names available");
  }
  return {kActionNames.begin(), kActionNames.begin() + static_cast<std::ptrdiff_t>(n)};
}

void DatasetSpec::validate() const {
  auto fail = [&](const std::string& why) { throw ConfigError("dataset '" + name + "': " + why); };
  if (num_classes < 2) fail("needs at least 2 classes");
  if (class_names.size() != num_classes) fail("class_names must list every class");
  if (std::set<std::string>(class_names.begin(), class_names.end()).size() != num_classes) fail("duplicate class name");
  if (num_subjects == 0 || num_envs == 0) fail("needs subjects and environments");
  if (frames == 0) fail("frames must be positive");
  if (modalities.empty()) fail("needs at least one modality");
  if (subject_env.size() != num_subjects || subject_counts.size() != num_subjects) {
    fail("subject_env and subject_counts need one entry per subject");
  }
  std::size_t total = 0;
  for (std::size_t s = 0; s < num_subjects; ++s) {
    if (subject_env[s] >= num_envs) fail("subject " + std::to_string(s) + " assigned to unknown environment");
    total += subject_counts[s];
  }
  if (total != sequence_count) {
    fail("subject counts sum to " + std::to_string(total) + ", expected " + std::to_string(sequence_count));
  }
  for (auto s : holdout_subjects)
    if (s >= num_subjects) fail("held-out subject " + std::to_string(s) + " does not exist");
  for (auto e : holdout_envs)
    if (e >= num_envs) fail("held-out environment " + std::to_string(e) + " does not exist");
}

std::size_t DatasetSpec::class_index(std::string_view n) const {
  auto it = std::find(class_names.begin(), class_names.end(), n);
  if (it == class_names.end()) throw ManifestError("unknown action category '" + std::string(n) + "'");
  return static_cast<std::size_t>(it - class_names.begin());
}

DatasetSpec dataset_preset(std::string_view name) {
  DatasetSpec s;
  s.name = std::string(name);
  if (name == "mmfi-like") {
    s.num_classes = 27;
    s.num_subjects = 40;
    s.num_envs = 4;
    s.frames = 5;
    s.modalities = {ModalityKind::Video, ModalityKind::Depth, ModalityKind::LiDAR, ModalityKind::MmWave,
                    ModalityKind::WiFiCSI};
    s.sequence_count = 16448;
    // Ten subjects per environment; the last three of each are held out for
    // CrossSub and environment 3 for CrossEnv. Per-environment and per-subject
    // totals are chosen so all three settings hit the published split sizes.
    const std::size_t env_total[4] = {4189, 4188, 4188, 3883};
    const std::size_t held_total[4] = {1198, 1198, 1198, 1197};
    for (std::size_t e = 0; e < 4; ++e) {
      auto train = even_split(env_total[e] - held_total[e], 7);
      auto held = even_split(held_total[e], 3);
      for (std::size_t k = 0; k < 10; ++k) {
        s.subject_env.push_back(e);
        s.subject_counts.push_back(k < 7 ? train[k] : held[k - 7]);
        if (k >= 7) s.holdout_subjects.push_back(e * 10 + k);
      }
    }
    s.holdout_envs = {3};
  } else if (name == "xrf55-like") {
    s.num_classes = 55;
    s.num_subjects = 19;
    s.num_envs = 4;
    s.frames = 10;
    s.modalities = {ModalityKind::Video, ModalityKind::Depth, ModalityKind::Infrared, ModalityKind::RFID,
                    ModalityKind::WiFiCSI};
    s.sequence_count = 19800;
    // Five subjects in each of environments 0-2 (20 repetitions of every action),
    // four in environment 3 (15 repetitions).
    for (std::size_t subj = 0; subj < 19; ++subj) {
      const std::size_t env = std::min<std::size_t>(subj / 5, 3);
      s.subject_env.push_back(env);
      s.subject_counts.push_back(env < 3 ? 1100 : 825);
    }
    s.holdout_subjects = {0, 1, 5, 6, 10};
    s.holdout_envs = {3};
  } else if (name == "desk") {
    s.num_classes = 6;
    s.num_subjects = 8;
    s.num_envs = 4;
    s.frames = 5;
    s.modalities = {ModalityKind::Video, ModalityKind::MmWave, ModalityKind::WiFiCSI};
    s.sequence_count = 480;
    for (std::size_t subj = 0; subj < 8; ++subj) {
      s.subject_env.push_back(subj / 2);
      s.subject_counts.push_back(60);
    }
    s.holdout_subjects = {1, 4};
    s.holdout_envs = {3};
  } else {
    throw ConfigError("unknown dataset preset '" + std::string(name) + "' (expected mmfi-like, xrf55-like or desk)");
  }
  s.class_names = action_names(s.num_classes);
  s.validate();
  return s;
}

std::vector<std::string> dataset_preset_names() { return {"mmfi-like", "xrf55-like", "desk"}; }

Manifest Manifest::layout(const DatasetSpec& spec) {
  spec.validate();
  Manifest m;
  m.spec = spec;
  m.records.reserve(spec.sequence_count);
  char id[32];
  for (std::size_t subj = 0; subj < spec.num_subjects; ++subj) {
    for (std::size_t i = 0; i < spec.subject_counts[subj]; ++i) {
      std::snprintf(id, sizeof(id), "seq%06zu", m.records.size());
      m.records.push_back({id, (i + subj) % spec.num_classes, subj, spec.subject_env[subj], {}});
    }
  }
  return m;
}

const SequenceRecord& Manifest::at(std::string_view id) const {
  for (const auto& r : records)
    if (r.id == id) return r;
  throw ManifestError("no sequence with id '" + std::string(id) + "'");
}

void write_manifest_jsonl(const std::vector<SequenceRecord>& records, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write manifest " + path.string());
  for (const auto& r : records) {
    json payloads = json::object();
    for (const auto& [kind, p] : r.payloads) payloads[std::string(to_string(kind))] = p;
    json line = {{"id", r.id}, {"action", r.action}, {"subject", r.subject}, {"env", r.env}, {"payloads", payloads}};
    f << line.dump() << '\n';
  }
  if (!f) throw IoError("failed writing manifest " + path.string());
}

std::vector<SequenceRecord> read_manifest_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read manifest " + path.string());
  std::vector<SequenceRecord> out;
  std::size_t lineno = 0;
  for (std::string line; std::getline(f, line);) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      SequenceRecord r;
      r.id = j.at("id").get<std::string>();
      r.action = j.at("action").get<std::size_t>();
      r.subject = j.at("subject").get<std::size_t>();
      r.env = j.at("env").get<std::size_t>();
      for (const auto& [k, v] : j.at("payloads").items()) r.payloads[modality_from_string(k)] = v.get<std::string>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ManifestError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ManifestError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_dataset_spec(const DatasetSpec& s, const std::filesystem::path& path) {
  std::vector<std::string> mods;
  for (auto k : s.modalities) mods.emplace_back(to_string(k));
  json j = {{"name", s.name},
            {"num_classes", s.num_classes},
            {"num_subjects", s.num_subjects},
            {"num_envs", s.num_envs},
            {"frames", s.frames},
            {"modalities", mods},
            {"sequence_count", s.sequence_count},
            {"class_names", s.class_names},
            {"subject_env", s.subject_env},
            {"subject_counts", s.subject_counts},
            {"holdout_subjects", s.holdout_subjects},
            {"holdout_envs", s.holdout_envs}};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

DatasetSpec read_dataset_spec(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  DatasetSpec s;
  try {
    auto j = json::parse(f);
    s.name = j.at("name").get<std::string>();
    s.num_classes = j.at("num_classes").get<std::size_t>();
    s.num_subjects = j.at("num_subjects").get<std::size_t>();
    s.num_envs = j.at("num_envs").get<std::size_t>();
    s.frames = j.at("frames").get<std::size_t>();
    for (const auto& m : j.at("modalities")) s.modalities.push_back(modality_from_string(m.get<std::string>()));
    s.sequence_count = j.at("sequence_count").get<std::size_t>();
    s.class_names = j.at("class_names").get<std::vector<std::string>>();
    s.subject_env = j.at("subject_env").get<std::vector<std::size_t>>();
    s.subject_counts = j.at("subject_counts").get<std::vector<std::size_t>>();
    s.holdout_subjects = j.at("holdout_subjects").get<std::vector<std::size_t>>();
    s.holdout_envs = j.at("holdout_envs").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
  s.validate();
  return s;
}

namespace {
constexpr char kPayloadMagic[4] = {'H', 'O', 'L', 'P'};
constexpr std::uint32_t kPayloadVersion = 1;
constexpr std::uint32_t kDtypeF32 = 0;

template <typename U>
void put(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::istream& is, const std::filesystem::path& path) {
  U v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(U));
  if (!is) throw IoError("truncated payload " + path.string());
  return v;
}
}  // namespace

void write_payload(const RawArray& a, const std::filesystem::path& path) {
  if (a.values.size() != a.numel()) throw DimensionError("payload values do not match shape " + shape_str(a.shape));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write payload " + path.string());
  f.write(kPayloadMagic, 4);
  put<std::uint32_t>(f, kPayloadVersion);
  put<std::uint32_t>(f, kDtypeF32);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(a.shape.size()));
  for (auto e : a.shape) put<std::uint64_t>(f, e);
  f.write(reinterpret_cast<const char*>(a.values.data()), static_cast<std::streamsize>(a.values.size() * sizeof(float)));
  if (!f) throw IoError("failed writing payload " + path.string());
}

RawArray read_payload(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read payload " + path.string());
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kPayloadMagic, 4) != 0) throw IoError(path.string() + " is not a payload file");
  if (get<std::uint32_t>(f, path) != kPayloadVersion) throw IoError(path.string() + ": unsupported payload version");
  if (get<std::uint32_t>(f, path) != kDtypeF32) throw IoError(path.string() + ": unsupported dtype");
  const auto rank = get<std::uint32_t>(f, path);
  if (rank > 8) throw IoError(path.string() + ": implausible rank " + std::to_string(rank));
  RawArray a;
  for (std::uint32_t i = 0; i < rank; ++i) a.shape.push_back(get<std::uint64_t>(f, path));
  a.values.resize(a.numel());
  f.read(reinterpret_cast<char*>(a.values.data()), static_cast<std::streamsize>(a.values.size() * sizeof(float)));
  if (!f) throw IoError("truncated payload " + path.string());
  if (f.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes");
  return a;
}

}  // namespace holo
