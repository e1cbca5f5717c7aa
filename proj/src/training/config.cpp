#include "holo/training/config.hpp"

#include <fstream>

#include "holo/errors.hpp"
#include "holo/numerics/checkpoint.hpp"
#include "holo/numerics/rng.hpp"

namespace holo {

std::string_view to_string(Arm arm) {
  switch (arm) {
    case Arm::Baseline: return "baseline";
    case Arm::Tailored: return "tailored";
    case Arm::Umip: return "umip";
  }
  return "?";
}

Arm arm_from_string(std::string_view name) {
  if (name == "baseline") return Arm::Baseline;
  if (name == "tailored") return Arm::Tailored;
  if (name == "umip") return Arm::Umip;
  throw ConfigError("unknown arm '" + std::string(name) + "' (expected baseline, tailored or umip)");
}

std::string_view arm_label(Arm arm) {
  switch (arm) {
    case Arm::Baseline: return "Baseline";
    case Arm::Tailored: return "+TailorEncoder";
    case Arm::Umip: return "+UMIP";
  }
  return "?";
}

RunConfig RunConfig::desk() { return RunConfig{}; }

RunConfig RunConfig::paper_shapes() {
  RunConfig c;
  c.data.preset = "mmfi-like";
  c.data.setting = "random";
  c.data.modalities = {"video", "depth", "lidar", "mmwave", "wifi"};
  c.model.preset = "paper-shapes";
  c.model.d_m = 1024;
  c.model.d_llm = 4096;
  c.model.umip_layers = 8;
  c.model.heads = 16;
  c.model.qformer_queries = 30;
  c.model.decoder_layers = 32;
  c.stage1.schedule = Schedule::stage1_full();
  c.stage1.epochs = 120;
  c.stage2.schedule = Schedule::stage2_full(2000);
  c.stage2.micro_batch = 16;
  c.stage2.accumulation = 4;
  c.stage2.steps = 0;
  c.stage2.epochs = 5;
  return c;
}

std::vector<ModalityKind> RunConfig::modality_kinds() const {
  std::vector<ModalityKind> kinds;
  for (const auto& m : data.modalities) kinds.push_back(modality_from_string(m));
  return kinds;
}

void RunConfig::validate() const {
  if (data.modalities.empty()) throw ConfigError("at least one modality is required");
  (void)modality_kinds();
  (void)arm();
  if (model.preset != "desk" && model.preset != "paper-shapes") {
    throw ConfigError("unknown model preset '" + model.preset + "' (expected desk or paper-shapes)");
  }
  if (model.heads == 0 || model.d_m % model.heads || model.d_llm % model.heads) {
    throw ConfigError("model widths must be divisible by the head count");
  }
  optimizer.validate();
  stage1.schedule.validate();
  stage2.schedule.validate();
  if (stage1.batch == 0) throw ConfigError("stage-1 batch must be positive");
  if (!(stage1.val_fraction >= 0 && stage1.val_fraction < 1)) throw ConfigError("val_fraction must lie in [0, 1)");
  if (stage2.micro_batch == 0 || stage2.accumulation == 0) throw ConfigError("stage-2 batch sizes must be positive");
  for (const auto& g : stage2.train_groups) {
    if (g == "universal" || g == "backbone" || g == "classifier") {
      throw ConfigError("'" + g + "' is frozen after stage 1 and cannot be trained in stage 2");
    }
    if (g != "tokenizer" && g != "mlp" && g != "projector" && g != "decoder") {
      throw ConfigError("unknown stage-2 group '" + g + "'");
    }
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["data"] = {{"preset", data.preset},       {"path", data.path},   {"setting", data.setting},
               {"modalities", data.modalities}, {"noise", data.noise}, {"data_seed", data.data_seed},
               {"eval_limit", data.eval_limit}};
  j["model"] = {{"preset", model.preset},
                {"arm", model.arm},
                {"d_m", model.d_m},
                {"d_llm", model.d_llm},
                {"backbone_width", model.backbone_width},
                {"universal_layers", model.universal_layers},
                {"umip_layers", model.umip_layers},
                {"decoder_layers", model.decoder_layers},
                {"heads", model.heads},
                {"qformer_queries", model.qformer_queries},
                {"shared_projection", model.shared_projection}};
  j["optimizer"] = optimizer;
  j["schedule"]["stage1"] = {{"lr", stage1.schedule},
                             {"epochs", stage1.epochs},
                             {"batch", stage1.batch},
                             {"val_fraction", stage1.val_fraction}};
  j["schedule"]["stage2"] = {{"lr", stage2.schedule},
                             {"steps", stage2.steps},
                             {"epochs", stage2.epochs},
                             {"micro_batch", stage2.micro_batch},
                             {"accumulation", stage2.accumulation},
                             {"train_groups", stage2.train_groups}};
  j["seed"] = seed;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "data" && key != "model" && key != "optimizer" && key != "schedule" && key != "seed") {
      throw ConfigError("unknown config section '" + key + "'");
    }
  }
  RunConfig c;
  try {
    if (j.contains("model") && j["model"].value("preset", std::string("desk")) == "paper-shapes") c = paper_shapes();
    if (j.contains("data")) {
      const auto& d = j["data"];
      c.data.preset = d.value("preset", c.data.preset);
      c.data.path = d.value("path", c.data.path);
      c.data.setting = d.value("setting", c.data.setting);
      c.data.modalities = d.value("modalities", c.data.modalities);
      c.data.noise = d.value("noise", c.data.noise);
      c.data.data_seed = d.value("data_seed", c.data.data_seed);
      c.data.eval_limit = d.value("eval_limit", c.data.eval_limit);
    }
    if (j.contains("model")) {
      const auto& m = j["model"];
      c.model.preset = m.value("preset", c.model.preset);
      c.model.arm = m.value("arm", c.model.arm);
      c.model.d_m = m.value("d_m", c.model.d_m);
      c.model.d_llm = m.value("d_llm", c.model.d_llm);
      c.model.backbone_width = m.value("backbone_width", c.model.backbone_width);
      c.model.universal_layers = m.value("universal_layers", c.model.universal_layers);
      c.model.umip_layers = m.value("umip_layers", c.model.umip_layers);
      c.model.decoder_layers = m.value("decoder_layers", c.model.decoder_layers);
      c.model.heads = m.value("heads", c.model.heads);
      c.model.qformer_queries = m.value("qformer_queries", c.model.qformer_queries);
      c.model.shared_projection = m.value("shared_projection", c.model.shared_projection);
    }
    if (j.contains("optimizer")) c.optimizer = j["optimizer"].get<OptimizerConfig>();
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      if (s.contains("stage1")) {
        const auto& s1 = s["stage1"];
        if (s1.contains("lr")) c.stage1.schedule = s1["lr"].get<Schedule>();
        c.stage1.epochs = s1.value("epochs", c.stage1.epochs);
        c.stage1.batch = s1.value("batch", c.stage1.batch);
        c.stage1.val_fraction = s1.value("val_fraction", c.stage1.val_fraction);
      }
      if (s.contains("stage2")) {
        const auto& s2 = s["stage2"];
        if (s2.contains("lr")) c.stage2.schedule = s2["lr"].get<Schedule>();
        c.stage2.steps = s2.value("steps", c.stage2.steps);
        c.stage2.epochs = s2.value("epochs", c.stage2.epochs);
        c.stage2.micro_batch = s2.value("micro_batch", c.stage2.micro_batch);
        c.stage2.accumulation = s2.value("accumulation", c.stage2.accumulation);
        c.stage2.train_groups = s2.value("train_groups", c.stage2.train_groups);
      }
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void RunConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << to_json().dump(2) << '\n';
}

std::string RunConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

}  // namespace holo
