#include "holo/datakit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "holo/errors.hpp"

namespace holo {

namespace {

using nlohmann::json;

struct RenderParams {
  double noise;     // sensor noise at level 1
  double nuisance;  // strength of the environment-specific nuisance
};

RenderParams params_for(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::Video: return {0.05, 0.3};
    case ModalityKind::Depth: return {0.10, 0.3};
    case ModalityKind::Infrared: return {0.15, 0.3};
    case ModalityKind::LiDAR: return {0.02, 0.3};
    case ModalityKind::MmWave: return {0.06, 0.4};
    case ModalityKind::WiFiCSI: return {0.80, 0.6};
    case ModalityKind::RFID: return {1.00, 0.7};
  }
  return {0.1, 0.3};
}

std::vector<double> normal_vec(Rng& rng, std::size_t n, double sd) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, sd);
  return v;
}

std::string tag(const char* what, std::string_view a, std::string_view b = {}) {
  std::string s(what);
  s += '/';
  s += a;
  if (!b.empty()) {
    s += '/';
    s += b;
  }
  return s;
}

}  // namespace

NoiseProfile NoiseProfile::named(std::string_view name) {
  if (name == "clean") return {"clean", 0.25};
  if (name == "nominal") return {"nominal", 1.0};
  if (name == "max") return {"max", 3.0};
  throw ConfigError("unknown noise profile '" + std::string(name) + "' (expected clean, nominal or max)");
}

SyntheticWorld::SyntheticWorld(const DatasetSpec& spec, NoiseProfile profile, std::uint64_t seed)
    : spec_(spec), profile_(std::move(profile)), seed_(seed) {
  spec_.validate();
  constexpr std::size_t D = kLatentDim;
  Rng rng(derive_seed(seed, "world/latent"));
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    class_proto_.push_back(normal_vec(rng, D, 1.0));
    class_motion_.push_back(normal_vec(rng, D, 0.6));
    class_phase_.push_back(rng.uniform(0.0, 2 * std::numbers::pi));
  }
  for (std::size_t s = 0; s < spec.num_subjects; ++s) subject_offset_.push_back(normal_vec(rng, D, 0.4));
  for (std::size_t e = 0; e < spec.num_envs; ++e) env_offset_.push_back(normal_vec(rng, D, 0.4));
}

double SyntheticWorld::noise_sigma(ModalityKind kind) const { return params_for(kind).noise * profile_.level; }

std::vector<double> SyntheticWorld::latent(const SequenceRecord& seq, double tau) const {
  if (seq.action >= spec_.num_classes || seq.subject >= spec_.num_subjects || seq.env >= spec_.num_envs) {
    throw ManifestError("sequence " + seq.id + " does not fit dataset '" + spec_.name + "'");
  }
  // Per-sequence jitter is shared by every modality of the sequence.
  Rng rng(derive_seed(seed_, tag("latent", seq.id)));
  const double phase = class_phase_[seq.action] + rng.normal(0.0, 0.3);
  std::vector<double> z(kLatentDim);
  const double wave = std::sin(2 * std::numbers::pi * tau + phase);
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    z[d] = class_proto_[seq.action][d] + subject_offset_[seq.subject][d] + env_offset_[seq.env][d] +
           rng.normal(0.0, 0.3) + class_motion_[seq.action][d] * wave;
  }
  return z;
}

RawArray SyntheticWorld::render(const SequenceRecord& seq, ModalityKind kind) const {
  Rng rng(derive_seed(seed_, tag("render", seq.id, to_string(kind))));
  RawArray out;
  switch (family_of(kind)) {
    case ModalityFamily::Image: out = render_image(seq, kind, rng); break;
    case ModalityFamily::PointSet: out = render_points(seq, kind, rng); break;
    case ModalityFamily::Temporal: out = render_temporal(seq, kind, rng); break;
  }
  validate_payload(kind, out);
  return out;
}

// Each latent dimension drives one Gaussian blob with per-channel weights; the
// environment adds a planar shading.
RawArray SyntheticWorld::render_image(const SequenceRecord& seq, ModalityKind kind, Rng& rng) const {
  const auto g = geometry(kind);
  const auto p = params_for(kind);
  constexpr std::size_t D = kLatentDim;
  Rng basis(derive_seed(seed_, tag("basis", to_string(kind))));
  std::vector<double> cx(D), cy(D), inv2s2(D), w(D * g.channels);
  for (std::size_t d = 0; d < D; ++d) {
    cx[d] = basis.uniform(0.15, 0.85);
    cy[d] = basis.uniform(0.15, 0.85);
    const double s = basis.uniform(0.10, 0.22);
    inv2s2[d] = 1.0 / (2 * s * s);
    for (std::size_t c = 0; c < g.channels; ++c) w[d * g.channels + c] = basis.normal(0.0, 1.0);
  }
  Rng env_rng(derive_seed(seed_, tag("env-shade", to_string(kind), std::to_string(seq.env))));
  const double ax = env_rng.normal(0.0, p.nuisance), ay = env_rng.normal(0.0, p.nuisance),
               a0 = env_rng.normal(0.0, p.nuisance);

  const double sigma = noise_sigma(kind);
  RawArray out{{g.frames, g.height, g.width, g.channels}, {}};
  out.values.resize(out.numel());
  std::vector<double> blob(D);
  std::size_t i = 0;
  for (std::size_t f = 0; f < g.frames; ++f) {
    const auto z = latent(seq, (double(f) + 0.5) / double(g.frames));
    for (std::size_t y = 0; y < g.height; ++y) {
      const double fy = (double(y) + 0.5) / double(g.height);
      for (std::size_t x = 0; x < g.width; ++x) {
        const double fx = (double(x) + 0.5) / double(g.width);
        for (std::size_t d = 0; d < D; ++d) {
          const double dx = fx - cx[d], dy = fy - cy[d];
          blob[d] = z[d] * std::exp(-(dx * dx + dy * dy) * inv2s2[d]);
        }
        const double shade = a0 + ax * (fx - 0.5) + ay * (fy - 0.5);
        for (std::size_t c = 0; c < g.channels; ++c) {
          double v = 0;
          for (std::size_t d = 0; d < D; ++d) v += blob[d] * w[d * g.channels + c];
          out.values[i++] = static_cast<float>(std::tanh(0.5 * v) + shade + rng.normal(0.0, sigma));
        }
      }
    }
  }
  return out;
}

// Eight body parts whose 3-D positions are nonlinear functions of the latent;
// points scatter around the parts, the scene is rotated per environment and
// points arrive in random order. mmWave adds radial velocity and intensity and
// replaces a share of points with clutter.
RawArray SyntheticWorld::render_points(const SequenceRecord& seq, ModalityKind kind, Rng& rng) const {
  const auto g = geometry(kind);
  const auto p = params_for(kind);
  constexpr std::size_t D = kLatentDim, J = 8;
  Rng basis(derive_seed(seed_, tag("basis", to_string(kind))));
  std::vector<double> W(J * 3 * D);
  for (auto& v : W) v = basis.normal(0.0, 1.0);
  std::vector<double> part_intensity(J);
  for (auto& v : part_intensity) v = basis.uniform(-0.5, 0.5);

  Rng env_rng(derive_seed(seed_, tag("env-scene", to_string(kind), std::to_string(seq.env))));
  const double theta = env_rng.uniform(-1.0, 1.0) * p.nuisance;
  const double tx = env_rng.uniform(-0.1, 0.1), ty = env_rng.uniform(-0.1, 0.1);
  const double ct = std::cos(theta), st = std::sin(theta);

  auto part_pos = [&](const std::vector<double>& z, std::size_t j, double out3[3]) {
    for (std::size_t a = 0; a < 3; ++a) {
      double s = 0;
      for (std::size_t d = 0; d < D; ++d) s += W[(j * 3 + a) * D + d] * z[d];
      out3[a] = 0.8 * std::tanh(s / std::sqrt(double(D)));
    }
  };
  const double sigma = noise_sigma(kind);
  const bool radar = kind == ModalityKind::MmWave;
  const double clutter = radar ? std::min(0.5, 0.1 * profile_.level) : 0.0;
  const double dt = 0.05;

  RawArray out{{g.frames, g.points, g.features}, {}};
  out.values.assign(out.numel(), 0.0f);
  std::vector<std::size_t> order(g.points);
  for (std::size_t f = 0; f < g.frames; ++f) {
    const double tau = (double(f) + 0.5) / double(g.frames);
    const auto z = latent(seq, tau), z_next = latent(seq, tau + dt);
    for (std::size_t i = 0; i < g.points; ++i) order[i] = i;
    for (std::size_t i = g.points; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    for (std::size_t pt = 0; pt < g.points; ++pt) {
      float* dst = &out.values[(f * g.points + order[pt]) * g.features];
      const std::size_t j = pt % J;
      double pos[3], nxt[3];
      part_pos(z, j, pos);
      part_pos(z_next, j, nxt);
      double xyz[3];
      for (std::size_t a = 0; a < 3; ++a) xyz[a] = pos[a] + rng.normal(0.0, 0.04) + rng.normal(0.0, sigma);
      const bool is_clutter = rng.uniform() < clutter;
      if (is_clutter) {
        for (auto& v : xyz) v = rng.uniform(-1.0, 1.0);
      }
      const double rx = ct * xyz[0] - st * xyz[1] + tx, ry = st * xyz[0] + ct * xyz[1] + ty;
      dst[0] = static_cast<float>(std::clamp(rx, -1.0, 1.0));
      dst[1] = static_cast<float>(std::clamp(ry, -1.0, 1.0));
      dst[2] = static_cast<float>(std::clamp(xyz[2], -1.0, 1.0));
      if (g.features >= 5) {
        double radial = 0, norm = 1e-6;
        for (std::size_t a = 0; a < 3; ++a) {
          radial += (nxt[a] - pos[a]) * pos[a];
          norm += pos[a] * pos[a];
        }
        const double doppler = is_clutter ? rng.normal(0.0, 0.3) : std::tanh(8.0 * radial / std::sqrt(norm));
        dst[3] = static_cast<float>(std::clamp(doppler + rng.normal(0.0, sigma), -1.0, 1.0));
        const double inten = is_clutter ? rng.uniform(-1.0, 1.0) : part_intensity[j] + rng.normal(0.0, sigma);
        dst[4] = static_cast<float>(std::clamp(inten, -1.0, 1.0));
      }
    }
  }
  return out;
}

// Per-subcarrier responses to the latent trajectory, mixed by an
// environment-specific multipath matrix, with per-sequence channel gains and
// offsets.
RawArray SyntheticWorld::render_temporal(const SequenceRecord& seq, ModalityKind kind, Rng& rng) const {
  const auto g = geometry(kind);
  const auto p = params_for(kind);
  constexpr std::size_t D = kLatentDim;
  const std::size_t S = g.subcarriers, L = g.length;
  Rng basis(derive_seed(seed_, tag("basis", to_string(kind))));
  std::vector<double> G(D * S);
  for (auto& v : G) v = basis.normal(0.0, 1.0) / std::sqrt(double(D));

  Rng env_rng(derive_seed(seed_, tag("env-multipath", to_string(kind), std::to_string(seq.env))));
  std::vector<double> M(S * S);
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t b = 0; b < S; ++b)
      M[a * S + b] = (a == b ? 1.0 - p.nuisance : 0.0) + p.nuisance * env_rng.normal(0.0, 1.0) / std::sqrt(double(S));

  const double sigma = noise_sigma(kind);
  std::vector<double> gain(S), offset(S);
  for (std::size_t s = 0; s < S; ++s) {
    gain[s] = std::exp(rng.normal(0.0, 0.2 * profile_.level));
    offset[s] = rng.normal(0.0, 1.0 * profile_.level);
  }
  // Recording starts at an arbitrary point of the motion cycle.
  const double shift = rng.uniform(0.0, 1.0);

  RawArray out{{L, S}, {}};
  out.values.resize(out.numel());
  std::vector<double> clean(S);
  for (std::size_t t = 0; t < L; ++t) {
    const auto z = latent(seq, (double(t) + 0.5) / double(L) + shift);
    for (std::size_t s = 0; s < S; ++s) {
      double v = 0;
      for (std::size_t d = 0; d < D; ++d) v += z[d] * G[d * S + s];
      clean[s] = v;
    }
    for (std::size_t s = 0; s < S; ++s) {
      double v = 0;
      for (std::size_t a = 0; a < S; ++a) v += clean[a] * M[a * S + s];
      out.values[t * S + s] = static_cast<float>(gain[s] * v + offset[s] + rng.normal(0.0, sigma));
    }
  }
  return out;
}

namespace {
std::string payload_rel_path(const std::string& id, ModalityKind kind) {
  return "payloads/" + id + "." + std::string(to_string(kind)) + ".bin";
}
}  // namespace

GeneratedDataset generate_synthetic(const DatasetSpec& spec, const NoiseProfile& profile, std::uint64_t seed,
                                    const std::filesystem::path& out_dir, bool manifest_only) {
  GeneratedDataset out;
  out.manifest = Manifest::layout(spec);
  for (auto& r : out.manifest.records)
    for (auto kind : spec.modalities) r.payloads[kind] = payload_rel_path(r.id, kind);
  out.captions = synthetic_captions(out.manifest);
  if (out_dir.empty()) return out;

  std::filesystem::create_directories(out_dir);
  write_dataset_spec(spec, out_dir / "dataset.json");
  write_manifest_jsonl(out.manifest.records, out_dir / "manifest.jsonl");
  std::vector<json> caps;
  for (const auto& r : out.manifest.records) caps.push_back({{"id", r.id}, {"caption", out.captions.at(r.id)}});
  write_jsonl(caps, out_dir / "captions.jsonl");
  {
    std::ofstream f(out_dir / "generator.json");
    f << json{{"seed", seed}, {"noise_profile", profile.name}, {"noise_level", profile.level},
              {"payloads_written", !manifest_only}}
             .dump(2)
      << '\n';
  }
  if (!manifest_only) {
    std::filesystem::create_directories(out_dir / "payloads");
    SyntheticWorld world(spec, profile, seed);
    for (const auto& r : out.manifest.records)
      for (const auto& [kind, rel] : r.payloads) write_payload(world.render(r, kind), out_dir / rel);
  }
  return out;
}

GeneratedDataset load_dataset_dir(const std::filesystem::path& dir) {
  GeneratedDataset out;
  out.manifest.spec = read_dataset_spec(dir / "dataset.json");
  out.manifest.records = read_manifest_jsonl(dir / "manifest.jsonl");
  if (out.manifest.records.size() != out.manifest.spec.sequence_count) {
    throw ManifestError(dir.string() + ": manifest holds " + std::to_string(out.manifest.records.size()) +
                        " sequences, dataset.json declares " + std::to_string(out.manifest.spec.sequence_count));
  }
  if (std::filesystem::exists(dir / "captions.jsonl")) {
    for (const auto& row : read_jsonl(dir / "captions.jsonl")) {
      try {
        out.captions[row.at("id").get<std::string>()] = row.at("caption").get<std::string>();
      } catch (const json::exception& e) {
        throw CurationError(dir.string() + "/captions.jsonl: " + e.what());
      }
    }
  }
  return out;
}

PayloadSource file_payloads(std::filesystem::path root) {
  return [root = std::move(root)](const SequenceRecord& seq, ModalityKind kind) {
    auto it = seq.payloads.find(kind);
    if (it == seq.payloads.end()) {
      throw ManifestError("sequence " + seq.id + " has no " + std::string(to_string(kind)) + " payload");
    }
    auto a = read_payload(root / it->second);
    validate_payload(kind, a);
    return a;
  };
}

PayloadSource world_payloads(std::shared_ptr<const SyntheticWorld> world) {
  return [world = std::move(world)](const SequenceRecord& seq, ModalityKind kind) { return world->render(seq, kind); };
}

}  // namespace holo
