// holo: config, synthesis, curation, two-stage training, evaluation and ablation.
//
// Settings resolve in this order, later wins: built-in desk config, --config
// file, individual flags. The output directory comes from --out, else the
// HOLO_OUT environment variable, else runs/<command>.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "holo/errors.hpp"
#include "holo/numerics/checkpoint.hpp"
#include "holo/training/pipeline.hpp"

namespace fs = std::filesystem;
using namespace holo;

namespace {

constexpr int kOk = 0, kRuntime = 1, kUsage = 2;

// Raised for a bad combination of flags; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config, preset, data_dir, setting, noise, model_preset, arm, out;
  std::vector<std::string> modalities;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run config")->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "dataset preset: desk, mmfi-like, xrf55-like");
  cmd->add_option("--data", c.data_dir, "generated dataset directory (overrides --preset)");
  cmd->add_option("--setting", c.setting, "split setting")->check(CLI::IsMember({"random", "cross-sub", "cross-env"}));
  cmd->add_option("--noise", c.noise, "synthetic noise profile")->check(CLI::IsMember({"clean", "nominal", "max"}));
  cmd->add_option("--modality", c.modalities, "modality to use (repeatable)");
  cmd->add_option("--model-preset", c.model_preset, "model shapes")->check(CLI::IsMember({"desk", "paper-shapes"}));
  cmd->add_option("--arm", c.arm, "projector arm")->check(CLI::IsMember({"baseline", "tailored", "umip"}));
  cmd->add_option("--seed", c.seed, "root seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", c.out, "output directory (else $HOLO_OUT, else runs/<command>)");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = RunConfig::desk();
  if (!c.config.empty()) cfg = RunConfig::load(c.config);
  if (c.model_preset == "paper-shapes" && cfg.model.preset != "paper-shapes") {
    auto full = RunConfig::paper_shapes();
    full.data = cfg.data;
    full.seed = cfg.seed;
    cfg = full;
  } else if (c.model_preset == "desk" && cfg.model.preset != "desk") {
    auto desk = RunConfig::desk();
    desk.data = cfg.data;
    desk.seed = cfg.seed;
    cfg = desk;
  }
  if (!c.preset.empty()) {
    cfg.data.preset = c.preset;
    cfg.data.path.clear();
  }
  if (!c.data_dir.empty()) cfg.data.path = c.data_dir;
  if (!c.setting.empty()) cfg.data.setting = c.setting;
  if (!c.noise.empty()) cfg.data.noise = c.noise;
  if (!c.modalities.empty()) cfg.data.modalities = c.modalities;
  if (!c.arm.empty()) cfg.model.arm = c.arm;
  if (c.seed >= 0) cfg.seed = std::uint64_t(c.seed);
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c, const std::string& command) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("HOLO_OUT"); env && *env) return env;
  return fs::path("runs") / command;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(is), {}};
}

// Every command leaves config.json and its content hash beside its outputs.
void snapshot(const fs::path& dir, const nlohmann::json& config, const std::string& hash) {
  fs::create_directories(dir);
  write_text(dir / "config.json", config.dump(2) + "\n");
  write_text(dir / "config.hash", hash + "\n");
}

void snapshot(const fs::path& dir, const RunConfig& cfg) { snapshot(dir, cfg.to_json(), cfg.hash()); }

// Hash of the fields a checkpoint's tensors depend on: data, model and seed.
std::string model_hash(const RunConfig& cfg) {
  const auto j = cfg.to_json();
  const nlohmann::json part = {{"data", j.at("data")}, {"model", j.at("model")}, {"seed", j.at("seed")}};
  return hex64(fnv1a64(part.dump()));
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string preset = "mmfi-like", spec_file, noise = "nominal", out;
  std::uint64_t seed = 0;
  bool manifest_only = false;
};

int cmd_synth(const SynthArgs& a) {
  const DatasetSpec spec = a.spec_file.empty() ? dataset_preset(a.preset) : read_dataset_spec(a.spec_file);
  spec.validate();
  Common c;
  c.out = a.out;
  const auto dir = out_dir(c, "synth");
  const auto profile = NoiseProfile::named(a.noise);
  const auto ds = generate_synthetic(spec, profile, a.seed, dir, a.manifest_only);
  const nlohmann::json cfg = {{"command", "synth"}, {"dataset", spec.name}, {"noise", profile.name},
                              {"seed", a.seed}, {"manifest_only", a.manifest_only}};
  snapshot(dir, cfg, hex64(fnv1a64(cfg.dump())));
  const auto manifest_hash = hex64(fnv1a64(read_text(dir / "manifest.jsonl")));
  std::cout << spec.name << ": " << ds.manifest.records.size() << " sequences, " << spec.num_classes
            << " classes, " << spec.modalities.size() << " modalities\n"
            << "manifest hash " << manifest_hash << "\n"
            << "written to " << dir.string() << "\n";
  return kOk;
}

// --- curate ----------------------------------------------------------------

int cmd_curate(const Common& c) {
  const auto cfg = resolve(c);
  const auto dir = out_dir(c, "curate");
  snapshot(dir, cfg);
  const auto data = load_data(cfg.data, cfg.seed);
  const auto bank = QuestionBank::builtin();
  const auto kinds = cfg.modality_kinds();
  // Same per-sample question streams as training (stage 2) and evaluation.
  auto write_side = [&](const std::vector<std::string>& ids, std::uint64_t seed, const std::string& side) {
    std::vector<nlohmann::json> qa, cap;
    for (const auto& id : ids) {
      const auto& r = data.manifest.at(id);
      for (auto kind : kinds) {
        Rng rng(derive_seed(seed, "qa/" + id + "/" + std::string(to_string(kind))));
        qa.push_back(to_json(make_qa_sample(r, data.manifest.spec, kind, bank, rng)));
      }
      cap.push_back(to_json(make_caption_sample(r, data.captions)));
    }
    write_jsonl(qa, dir / ("qa_" + side + ".jsonl"));
    write_jsonl(cap, dir / ("caption_" + side + ".jsonl"));
    return qa.size();
  };
  const auto n_train = write_side(data.split.train, derive_seed(cfg.seed, "stage2"), "train");
  const auto n_test = write_side(data.split.test, derive_seed(cfg.seed, "eval"), "test");
  std::vector<nlohmann::json> ic;
  for (const auto& s : select_in_context(data.manifest, data.captions, 1)) ic.push_back(to_json(s));
  write_jsonl(ic, dir / "in_context.jsonl");
  write_text(dir / "split.json", nlohmann::json{{"setting", cfg.data.setting},
                                                {"hash", data.split.hash()},
                                                {"train", data.split.train},
                                                {"test", data.split.test}}
                                         .dump(2) + "\n");
  std::cout << "QA samples: " << n_train << " train, " << n_test << " test; captions: " << data.split.train.size()
            << " train, " << data.split.test.size() << " test; split " << data.split.hash() << "\n";
  return kOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string stage = "all";
};

int cmd_train(const Common& c, const TrainArgs& a) {
  const auto cfg = resolve(c);
  const auto dir = out_dir(c, "train");
  const auto s1_path = dir / "stage1.ckpt";
  if (a.stage == "2" && !fs::exists(s1_path)) {
    throw UsageError("no stage-1 checkpoint at " + s1_path.string() + "; run `holo train --stage 1` with the same " +
                     "config and --out first, or use --stage all");
  }
  snapshot(dir, cfg);
  const auto data = load_data(cfg.data, cfg.seed);
  const auto vocab = build_vocab(data);
  vocab.save(dir / "vocab.json");
  auto model = build_model(cfg, data, vocab);
  const nlohmann::json meta = {{"config_hash", cfg.hash()}, {"model_hash", model_hash(cfg)},
                               {"split_hash", data.split.hash()}};

  if (a.stage != "2") {
    if (cfg.arm() == Arm::Baseline) spdlog::info("baseline arm has no tailored encoders; stage 1 is a no-op");
    for (auto kind : cfg.arm() == Arm::Baseline ? std::vector<ModalityKind>{} : cfg.modality_kinds()) {
      auto r = pretrain_tailored(model, data, kind, cfg.stage1, cfg.optimizer, derive_seed(cfg.seed, "stage1"));
      write_history_csv(r.history, dir / ("history_stage1_" + std::string(to_string(kind)) + ".csv"));
      if (r.diverged) throw NumericError("stage 1 diverged for " + std::string(to_string(kind)));
      spdlog::info("stage 1 {}: val acc {:.3f} ({} train / {} val)", to_string(kind),
                   r.history.empty() ? 0.0 : r.history.back().val_acc, r.train_size, r.val_size);
    }
    auto m = meta;
    m["stage"] = 1;
    save_checkpoint(model.store(), s1_path, m);
    std::cout << "stage 1 checkpoint " << s1_path.string() << " (" << params_hash(model.store()) << ")\n";
  } else {
    const auto got = load_checkpoint(model.store(), s1_path);
    if (got.value("model_hash", "") != meta["model_hash"]) {
      throw UsageError("stage-1 checkpoint was trained with a different config: checkpoint model hash " +
                       got.value("model_hash", "?") + ", config model hash " + meta["model_hash"].get<std::string>());
    }
  }

  if (a.stage != "1") {
    auto r = finetune_umip(model, data, cfg.stage2, cfg.optimizer, derive_seed(cfg.seed, "stage2"));
    write_history_csv(r.history, dir / "history_stage2.csv");
    if (r.diverged) throw NumericError("stage 2 diverged");
    auto m = meta;
    m["stage"] = 2;
    m["frozen_hashes"] = r.frozen_hashes;
    const auto s2_path = dir / "stage2.ckpt";
    save_checkpoint(model.store(), s2_path, m);
    std::cout << "stage 2 checkpoint " << s2_path.string() << " (" << r.history.size() << " steps, final loss "
              << (r.history.empty() ? 0.0 : r.history.back().loss) << ")\n";
  }
  return kOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt, tasks;
  std::size_t limit = 0;
  bool diagnostics = false;
};

int cmd_eval(const Common& c, const EvalArgs& a) {
  const auto cfg = resolve(c);
  const auto dir = out_dir(c, "eval");
  const fs::path ckpt = a.ckpt.empty() ? dir / "stage2.ckpt" : fs::path(a.ckpt);
  if (!fs::exists(ckpt)) throw UsageError("no checkpoint at " + ckpt.string() + "; pass --ckpt or train first");
  const auto vocab_path = ckpt.parent_path() / "vocab.json";
  const auto data = load_data(cfg.data, cfg.seed);
  const auto vocab = fs::exists(vocab_path) ? Vocab::load(vocab_path) : build_vocab(data);
  auto model = build_model(cfg, data, vocab);
  const auto meta = load_checkpoint(model.store(), ckpt);
  const auto want = model_hash(cfg);
  if (meta.value("model_hash", "") != want) {
    std::cerr << "checkpoint hash " << meta.value("model_hash", "(none)") << "\n"
              << "config hash     " << want << "\n";
    throw UsageError("checkpoint " + ckpt.string() + " does not match the config; refusing to evaluate");
  }
  EvalOptions opts;
  opts.limit = a.limit;
  opts.diagnostics = a.diagnostics;
  if (!a.tasks.empty()) {
    opts.tasks.clear();
    std::stringstream ss(a.tasks);
    for (std::string t; std::getline(ss, t, ',');) {
      if (t != "recognition" && t != "qa" && t != "caption") throw UsageError("unknown task '" + t + "'");
      opts.tasks.push_back(t);
    }
  }
  snapshot(dir, cfg);
  auto report = evaluate(model, data, opts, derive_seed(cfg.seed, "eval"));
  report.config_hash = cfg.hash();
  report.write(dir, "report");
  std::cout << read_text(dir / "report.csv");
  return kOk;
}

// --- ablate ----------------------------------------------------------------

struct AblateArgs {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<std::string> arms{"baseline", "tailored", "umip"};
  std::size_t limit = 0;
};

int cmd_ablate(const Common& c, const AblateArgs& a) {
  const auto cfg = resolve(c);
  const auto dir = out_dir(c, "ablate");
  snapshot(dir, cfg);
  std::vector<Arm> arms;
  for (const auto& s : a.arms) arms.push_back(arm_from_string(s));
  EvalOptions eval;
  eval.limit = a.limit;
  const auto res = ablation_run(cfg, arms, a.seeds, eval);
  res.write(dir);
  std::cout << res.table_csv() << "seed-mean over " << a.seeds.size() << " seeds, " << res.seconds << " s\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holo: sensing-modality language model pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string level = "info";
  app.add_option("--log-level", level, "trace, debug, info, warn, error, off");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic dataset directory");
  s->add_option("--preset", synth.preset, "dataset preset");
  s->add_option("--spec", synth.spec_file, "dataset.json describing a custom dataset")->check(CLI::ExistingFile);
  s->add_option("--noise", synth.noise, "noise profile")->check(CLI::IsMember({"clean", "nominal", "max"}));
  s->add_option("--seed", synth.seed, "generator seed");
  s->add_option("--out", synth.out, "output directory (else $HOLO_OUT, else runs/synth)");
  s->add_flag("--manifest-only", synth.manifest_only, "skip payload files");

  Common config_c, curate_c, train_c, eval_c, ablate_c;
  auto* co = app.add_subcommand("config", "print the resolved run config");
  add_common(co, config_c);
  auto* cu = app.add_subcommand("curate", "write QA, caption and in-context samples for a split");
  add_common(cu, curate_c);

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "stage 1, stage 2 or both");
  add_common(tr, train_c);
  tr->add_option("--stage", train.stage, "stage to run")->check(CLI::IsMember({"1", "2", "all"}));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(e, eval_c);
  e->add_option("--ckpt", ev.ckpt, "checkpoint (default <out>/stage2.ckpt)");
  e->add_option("--tasks", ev.tasks, "comma-separated subset of recognition,qa,caption");
  e->add_option("--limit", ev.limit, "test sequences per modality, 0 = all");
  e->add_flag("--diagnostics", ev.diagnostics, "cluster separation and alignment gap");

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Baseline / +TailorEncoder / +UMIP comparison");
  add_common(a, ablate_c);
  a->add_option("--seeds", ab.seeds, "seed set")->delimiter(',');
  a->add_option("--arms", ab.arms, "arms")->delimiter(',')->check(CLI::IsMember({"baseline", "tailored", "umip"}));
  a->add_option("--limit", ab.limit, "test sequences per modality, 0 = all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    if (*s) return cmd_synth(synth);
    if (*co) {
      const auto cfg = resolve(config_c);
      std::cout << cfg.to_json().dump(2) << "\n";
      return kOk;
    }
    if (*cu) return cmd_curate(curate_c);
    if (*tr) return cmd_train(train_c, train);
    if (*e) return cmd_eval(eval_c, ev);
    if (*a) return cmd_ablate(ablate_c, ab);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
