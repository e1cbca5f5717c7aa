#include "holo/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "holo/numerics/rng.hpp"

namespace holo {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'H', 'O', 'L', 'O', 'C', 'K', 'P', 'T'};

template <typename T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

template <typename U>
void write_le(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U read_le(std::istream& is) {
  U v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(U));
  if (!is) throw IoError("truncated checkpoint");
  return v;
}

bool under(std::string_view name, std::string_view prefix) { return name.substr(0, prefix.size()) == prefix; }

}  // namespace

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

template <typename T>
void save_checkpoint(const ParamStore<T>& store, const std::filesystem::path& path, const nlohmann::json& meta,
                     std::string_view prefix) {
  nlohmann::json header;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  std::vector<const Parameter<T>*> chosen;
  for (auto* p : store.all()) {
    if (!under(p->name, prefix)) continue;
    chosen.push_back(p);
    const std::uint64_t nbytes = p->value().numel() * sizeof(T);
    header["tensors"].push_back({{"name", p->name},
                                 {"shape", p->value().shape()},
                                 {"dtype", dtype_name<T>()},
                                 {"offset", offset},
                                 {"nbytes", nbytes},
                                 {"frozen", p->frozen}});
    offset += nbytes;
  }
  header["meta"] = meta;
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(os, kCheckpointVersion);
  write_le<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : chosen) {
    os.write(reinterpret_cast<const char*>(p->value().data().data()),
             static_cast<std::streamsize>(p->value().numel() * sizeof(T)));
  }
  if (!os) throw IoError("failed writing checkpoint " + path.string());
}

template <typename T>
nlohmann::json load_checkpoint(ParamStore<T>& store, const std::filesystem::path& path, bool strict,
                               std::string_view prefix) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError("not a checkpoint: " + path.string());
  const auto version = read_le<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto hlen = read_le<std::uint64_t>(is);
  std::string text(hlen, '\0');
  is.read(text.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw IoError("truncated checkpoint header");
  const auto header = nlohmann::json::parse(text);
  const auto base = is.tellg();

  std::size_t loaded = 0;
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    if (!under(name, prefix)) continue;
    if (!store.contains(name)) {
      if (strict) throw IoError("checkpoint tensor has no matching parameter: " + name);
      continue;
    }
    auto& param = store.at(name);
    const auto shape = entry.at("shape").get<Shape>();
    if (shape != param.value().shape()) {
      throw DimensionError("checkpoint shape " + shape_str(shape) + " for " + name + " does not match " +
                           shape_str(param.value().shape()));
    }
    const auto dtype = entry.at("dtype").get<std::string>();
    const auto n = param.value().numel();
    is.seekg(base + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    auto out = param.value().data();
    if (dtype == "f32") {
      std::vector<float> buf(n);
      is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(buf[i]);
    } else if (dtype == "f64") {
      std::vector<double> buf(n);
      is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(double)));
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(buf[i]);
    } else {
      throw IoError("unknown dtype " + dtype + " in checkpoint");
    }
    if (!is) throw IoError("truncated tensor payload for " + name);
    ++loaded;
  }
  if (strict) {
    std::size_t expected = store.with_prefix(prefix).size();
    if (loaded != expected) {
      throw IoError("checkpoint " + path.string() + " covers " + std::to_string(loaded) + " of " +
                    std::to_string(expected) + " parameters under '" + std::string(prefix) + "'");
    }
  }
  return header.value("meta", nlohmann::json::object());
}

template <typename T>
std::string params_hash(const ParamStore<T>& store, std::string_view prefix) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto* p : store.all()) {
    if (!under(p->name, prefix)) continue;
    h = fnv1a64(p->name, h);
    for (auto e : p->value().shape()) h = fnv1a64(&e, sizeof(e), h);
    h = fnv1a64(p->value().data().data(), p->value().numel() * sizeof(T), h);
  }
  return hex64(h);
}

template void save_checkpoint<float>(const ParamStore<float>&, const std::filesystem::path&, const nlohmann::json&,
                                     std::string_view);
template void save_checkpoint<double>(const ParamStore<double>&, const std::filesystem::path&,
                                      const nlohmann::json&, std::string_view);
template nlohmann::json load_checkpoint<float>(ParamStore<float>&, const std::filesystem::path&, bool,
                                               std::string_view);
template nlohmann::json load_checkpoint<double>(ParamStore<double>&, const std::filesystem::path&, bool,
                                                std::string_view);
template std::string params_hash<float>(const ParamStore<float>&, std::string_view);
template std::string params_hash<double>(const ParamStore<double>&, std::string_view);

}  // namespace holo
