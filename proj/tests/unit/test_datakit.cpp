#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "holo/datakit/split.hpp"
#include "holo/datakit/synthetic.hpp"
#include "holo/errors.hpp"
#include "probe.hpp"

using namespace holo;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("holo_datakit_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

void check_partition(const Manifest& m, const SplitAssignment& s) {
  std::set<std::string> train(s.train.begin(), s.train.end()), test(s.test.begin(), s.test.end());
  CHECK(train.size() == s.train.size());
  CHECK(test.size() == s.test.size());
  for (const auto& id : s.test) CHECK_FALSE(train.count(id));
  CHECK(train.size() + test.size() == m.records.size());
}

double probe(const GeneratedDataset& ds, const SyntheticWorld& world, ModalityKind kind, const SplitAssignment& sp) {
  auto feats = [&](const std::vector<std::string>& ids, std::vector<std::vector<double>>& X, std::vector<std::size_t>& y) {
    for (const auto& id : ids) {
      const auto& r = ds.manifest.at(id);
      auto a = world.render(r, kind);
      X.emplace_back(a.values.begin(), a.values.end());
      y.push_back(r.action);
    }
  };
  std::vector<std::vector<double>> xtr, xte;
  std::vector<std::size_t> ytr, yte;
  feats(sp.train, xtr, ytr);
  feats(sp.test, xte, yte);
  return holo::testing::ridge_probe_accuracy(xtr, ytr, xte, yte, ds.manifest.spec.num_classes);
}

}  // namespace

TEST_CASE("dataset presets") {
  auto mmfi = dataset_preset("mmfi-like");
  CHECK(mmfi.num_classes == 27);
  CHECK(mmfi.num_subjects == 40);
  CHECK(mmfi.num_envs == 4);
  CHECK(mmfi.frames == 5);
  CHECK(mmfi.sequence_count == 16448);
  auto xrf = dataset_preset("xrf55-like");
  CHECK(xrf.num_classes == 55);
  CHECK(xrf.num_subjects == 19);
  CHECK(xrf.num_envs == 4);
  CHECK(xrf.frames == 10);
  CHECK(xrf.sequence_count == 19800);
  CHECK(dataset_preset("desk").num_classes == 6);
  CHECK_THROWS_AS(dataset_preset("kinetics"), ConfigError);

  auto bad = dataset_preset("desk");
  bad.subject_counts[0] += 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("split sizes match the published statistics") {
  struct Row {
    const char* preset;
    SplitSetting setting;
    std::size_t train, test;
  };
  const Row rows[] = {{"mmfi-like", SplitSetting::Random, 12336, 4112},  {"mmfi-like", SplitSetting::CrossSub, 11657, 4791},
                      {"mmfi-like", SplitSetting::CrossEnv, 12565, 3883}, {"xrf55-like", SplitSetting::Random, 14850, 4950},
                      {"xrf55-like", SplitSetting::CrossSub, 14300, 5500}, {"xrf55-like", SplitSetting::CrossEnv, 16500, 3300}};
  for (const auto& row : rows) {
    auto m = Manifest::layout(dataset_preset(row.preset));
    auto s = split(m, row.setting, 7);
    INFO(row.preset << " " << to_string(row.setting));
    CHECK(s.train.size() == row.train);
    CHECK(s.test.size() == row.test);
    check_partition(m, s);
  }
}

TEST_CASE("split semantics, determinism and errors") {
  auto m = Manifest::layout(dataset_preset("desk"));
  for (auto setting : {SplitSetting::Random, SplitSetting::CrossSub, SplitSetting::CrossEnv}) {
    auto a = split(m, setting, 3);
    CHECK(a == split(m, setting, 3));
    CHECK(a.hash() == split(m, setting, 3).hash());
    check_partition(m, a);
  }
  CHECK(split(m, SplitSetting::Random, 3).train != split(m, SplitSetting::Random, 4).train);

  auto sub = split(m, SplitSetting::CrossSub, 0);
  std::set<std::size_t> train_subj, test_subj;
  for (const auto& id : sub.train) train_subj.insert(m.at(id).subject);
  for (const auto& id : sub.test) test_subj.insert(m.at(id).subject);
  for (auto s : test_subj) CHECK_FALSE(train_subj.count(s));

  auto env = split(m, SplitSetting::CrossEnv, 0);
  for (const auto& id : env.test) CHECK(m.at(id).env == 3);
  for (const auto& id : env.train) CHECK(m.at(id).env != 3);

  // ceil(3n/4) goes to train
  auto odd = dataset_preset("desk");
  odd.subject_counts = {60, 60, 60, 60, 60, 60, 60, 59};
  odd.sequence_count = 479;
  CHECK(split(Manifest::layout(odd), SplitSetting::Random, 1).train.size() == 360);

  auto none = m;
  none.spec.holdout_envs.clear();
  CHECK_THROWS_AS(split(none, SplitSetting::CrossEnv, 0), SplitError);
  auto all = m;
  all.spec.holdout_envs = {0, 1, 2, 3};
  CHECK_THROWS_AS(split(all, SplitSetting::CrossEnv, 0), SplitError);
  CHECK_THROWS_AS(split_setting_from_string("leave-one-out"), ConfigError);
  CHECK(split_setting_from_string("cross-env") == SplitSetting::CrossEnv);
}

TEST_CASE("validation split holds out a seeded tenth") {
  auto m = Manifest::layout(dataset_preset("desk"));
  auto s = split(m, SplitSetting::CrossEnv, 0);
  auto [fit, val] = validation_split(s.train, 0.1, 5);
  CHECK(val.size() == 36);
  CHECK(fit.size() + val.size() == s.train.size());
  CHECK(validation_split(s.train, 0.1, 5).second == val);
  CHECK(validation_split(s.train, 0.1, 6).second != val);
}

TEST_CASE("manifest, spec and payload files round-trip") {
  auto dir = temp_dir("roundtrip");
  auto spec = dataset_preset("desk");
  spec.subject_counts = {3, 3, 3, 3, 3, 3, 3, 3};
  spec.sequence_count = 24;
  auto ds = generate_synthetic(spec, NoiseProfile::named("nominal"), 11, dir);
  auto loaded = load_dataset_dir(dir);
  CHECK(loaded.manifest.records == ds.manifest.records);
  CHECK(loaded.manifest.spec.class_names == spec.class_names);
  CHECK(loaded.captions == ds.captions);

  SyntheticWorld world(spec, NoiseProfile::named("nominal"), 11);
  auto from_files = file_payloads(dir);
  for (const auto& r : loaded.manifest.records)
    for (auto kind : spec.modalities) CHECK(from_files(r, kind) == world.render(r, kind));

  RawArray empty{{5, 0, 3}, {}};
  write_payload(empty, dir / "empty.bin");
  CHECK(read_payload(dir / "empty.bin") == empty);
  {
    std::ofstream f(dir / "junk.bin", std::ios::binary);
    f << "NOPE";
  }
  CHECK_THROWS_AS(read_payload(dir / "junk.bin"), IoError);
  {
    std::ofstream f(dir / "bad.jsonl");
    f << "{\"id\": \"x\"}\n";
  }
  CHECK_THROWS_AS(read_manifest_jsonl(dir / "bad.jsonl"), ManifestError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic generator") {
  auto spec = dataset_preset("desk");
  auto ds = generate_synthetic(spec, NoiseProfile::named("nominal"), 1);
  std::vector<std::size_t> per_action(spec.num_classes, 0);
  for (const auto& r : ds.manifest.records) ++per_action[r.action];
  for (auto n : per_action) CHECK(n == spec.sequence_count / spec.num_classes);

  SyntheticWorld a(spec, NoiseProfile::named("nominal"), 1), b(spec, NoiseProfile::named("nominal"), 2);
  const auto& r = ds.manifest.records[17];
  for (auto kind : kAllModalities) {
    auto pa = a.render(r, kind);
    CHECK(pa == a.render(r, kind));
    auto pb = b.render(r, kind);
    CHECK(pa.shape == pb.shape);
    CHECK(pa.values != pb.values);
    CHECK(pa.shape == desk_geometry(kind, spec.frames).payload_shape(kind));
  }
  CHECK(a.noise_sigma(ModalityKind::Video) < a.noise_sigma(ModalityKind::Depth));
  for (auto kind : {ModalityKind::Depth, ModalityKind::Infrared, ModalityKind::LiDAR, ModalityKind::MmWave}) {
    CHECK(a.noise_sigma(kind) < a.noise_sigma(ModalityKind::WiFiCSI));
    CHECK(a.noise_sigma(ModalityKind::Video) <= a.noise_sigma(kind) + 0.03);
  }
  CHECK(a.noise_sigma(ModalityKind::WiFiCSI) < a.noise_sigma(ModalityKind::RFID));
  CHECK_THROWS_AS(NoiseProfile::named("loud"), ConfigError);
}

TEST_CASE("linear probe: clean video is separable, max-noise WiFi is near chance") {
  auto spec = dataset_preset("desk");
  auto ds = generate_synthetic(spec, NoiseProfile::named("nominal"), 1);
  auto sp = split(ds.manifest, SplitSetting::Random, 0);
  SyntheticWorld nominal(spec, NoiseProfile::named("nominal"), 1);
  SyntheticWorld noisy(spec, NoiseProfile::named("max"), 1);
  const double video = probe(ds, nominal, ModalityKind::Video, sp);
  const double wifi = probe(ds, noisy, ModalityKind::WiFiCSI, sp);
  MESSAGE("probe accuracy: video " << video << ", max-noise wifi " << wifi);
  CHECK(video >= 0.90);
  CHECK(wifi <= 1.0 / 6.0 + 0.20);
}

TEST_CASE("QA samples") {
  auto m = Manifest::layout(dataset_preset("mmfi-like"));
  auto bank = QuestionBank::builtin();
  CHECK(bank.size() == 15);
  Rng rng(4), rng2(4);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& r = m.records[i * 97];
    auto qa = make_qa_sample(r, m.spec, ModalityKind::WiFiCSI, bank, rng);
    CHECK(qa.action_list.size() == 27);
    CHECK(qa.action_list == m.spec.class_names);
    CHECK(std::find(qa.action_list.begin(), qa.action_list.end(), qa.answer) != qa.action_list.end());
    CHECK(qa.answer == m.spec.class_names[r.action]);
    CHECK(qa.question == make_qa_sample(r, m.spec, ModalityKind::WiFiCSI, bank, rng2).question);
    CHECK(qa_from_json(to_json(qa)) == qa);
  }
  auto bad = m.records[0];
  bad.action = 27;
  CHECK_THROWS_AS(make_qa_sample(bad, m.spec, ModalityKind::Video, bank, rng), ManifestError);

  auto qs = bank.questions();
  qs.pop_back();
  CHECK_THROWS_AS(QuestionBank{qs}, CurationError);
  qs.push_back(qs.front());
  CHECK_THROWS_AS(QuestionBank{qs}, CurationError);
}

TEST_CASE("caption samples are shared across modalities and round-trip") {
  auto ds = generate_synthetic(dataset_preset("desk"), NoiseProfile::named("nominal"), 1);
  const auto& r = ds.manifest.records[5];
  auto a = make_caption_sample(r, ds.captions);
  auto b = make_caption_sample(r, ds.captions);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(a.question == "Please give detailed descriptions of human's action.");
  CHECK(a.caption == synthetic_caption(ds.manifest.spec, r));
  CHECK(a.caption.find(ds.manifest.spec.class_names[r.action]) != std::string::npos);
  CHECK(caption_from_json(to_json(a)) == a);
  CaptionSource none;
  CHECK_THROWS_WITH_AS(make_caption_sample(r, none), doctest::Contains(r.id.c_str()), CurationError);

  auto dir = temp_dir("jsonl");
  std::vector<nlohmann::json> rows;
  Rng rng(1);
  for (const auto& rec : ds.manifest.records) {
    rows.push_back(to_json(make_qa_sample(rec, ds.manifest.spec, ModalityKind::Video, QuestionBank::builtin(), rng)));
  }
  write_jsonl(rows, dir / "qa.jsonl");
  auto back = read_jsonl(dir / "qa.jsonl");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(qa_from_json(back[i]) == qa_from_json(rows[i]));
  std::filesystem::remove_all(dir);
}

TEST_CASE("in-context exemplars cover every category") {
  auto ds = generate_synthetic(dataset_preset("desk"), NoiseProfile::named("nominal"), 1);
  auto ex = select_in_context(ds.manifest, ds.captions, 2);
  CHECK(ex.size() == 12);
  std::set<std::size_t> classes, envs;
  for (const auto& e : ex) {
    classes.insert(ds.manifest.at(e.id).action);
    envs.insert(ds.manifest.at(e.id).env);
    CHECK(e.question == kCaptionQuestion);
    CHECK_FALSE(e.video.empty());
    CHECK(in_context_from_json(to_json(e)) == e);
  }
  CHECK(classes.size() == 6);
  CHECK(envs.size() == 4);
}
