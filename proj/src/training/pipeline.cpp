#include "holo/training/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>

#include "holo/errors.hpp"
#include "holo/evalkit/metrics.hpp"
#include "holo/lm/text_anchor.hpp"
#include "holo/numerics/checkpoint.hpp"

namespace holo {

namespace {

template <typename V>
void shuffle_in_place(std::vector<V>& v, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

template <typename T>
std::size_t argmax(const Tensor<T>& t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.numel(); ++i)
    if (t[i] > t[best]) best = i;
  return best;
}

template <typename T>
std::vector<Tensor<T>> snapshot(const std::vector<Parameter<T>*>& params) {
  std::vector<Tensor<T>> out;
  for (auto* p : params) out.push_back(p->value());
  return out;
}

template <typename T>
void restore(const std::vector<Parameter<T>*>& params, const std::vector<Tensor<T>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = values[i];
}

std::vector<TokenId> wrap_prompt(const Vocab& vocab, const std::string& text) {
  std::vector<TokenId> out{Vocab::kBos};
  for (TokenId t : vocab.encode(text)) out.push_back(t);
  out.push_back(Vocab::kSep);
  return out;
}

}  // namespace

PayloadSource cached_payloads(PayloadSource source) {
  struct Cache {
    std::mutex mu;
    std::map<std::pair<std::string, ModalityKind>, RawArray> items;
  };
  auto cache = std::make_shared<Cache>();
  return [cache, source = std::move(source)](const SequenceRecord& seq, ModalityKind kind) {
    const auto key = std::make_pair(seq.id, kind);
    {
      std::lock_guard lock(cache->mu);
      auto it = cache->items.find(key);
      if (it != cache->items.end()) return it->second;
    }
    RawArray a = source(seq, kind);
    std::lock_guard lock(cache->mu);
    return cache->items.emplace(key, std::move(a)).first->second;
  };
}

DataBundle load_data(const DataConfig& cfg, std::uint64_t split_seed) {
  DataBundle d;
  if (!cfg.path.empty()) {
    auto ds = load_dataset_dir(cfg.path);
    d.manifest = std::move(ds.manifest);
    d.captions = std::move(ds.captions);
    d.payloads = cached_payloads(file_payloads(cfg.path));
  } else {
    const auto spec = dataset_preset(cfg.preset);
    const auto profile = NoiseProfile::named(cfg.noise);
    auto ds = generate_synthetic(spec, profile, cfg.data_seed);
    d.manifest = std::move(ds.manifest);
    d.captions = std::move(ds.captions);
    d.payloads = cached_payloads(world_payloads(std::make_shared<SyntheticWorld>(spec, profile, cfg.data_seed)));
  }
  for (const auto& m : cfg.modalities) {
    const auto kind = modality_from_string(m);
    const auto& mods = d.manifest.spec.modalities;
    if (std::find(mods.begin(), mods.end(), kind) == mods.end()) {
      throw ConfigError("dataset " + d.manifest.spec.name + " has no " + m + " modality");
    }
  }
  d.split = split(d.manifest, split_setting_from_string(cfg.setting), split_seed);
  return d;
}

Vocab build_vocab(const DataBundle& data) {
  Vocab v;
  for (const auto& name : data.manifest.spec.class_names) v.add_text(name);
  const auto bank = QuestionBank::builtin();
  for (const auto& q : bank.questions()) v.add_text(q);
  v.add_text(kCaptionQuestion);
  v.add_text("options : ,");
  for (const auto& id : data.split.train) {
    auto it = data.captions.find(id);
    if (it != data.captions.end()) v.add_text(it->second);
  }
  return v;
}

ModalitySample load_sample(const DataBundle& data, const std::string& id, ModalityKind kind) {
  const auto& r = data.manifest.at(id);
  return {kind, data.payloads(r, kind), r.action, r.subject, r.env};
}

std::vector<TextExample> make_examples(const DataBundle& data, const Vocab& vocab, const std::vector<std::string>& ids,
                                       const std::vector<ModalityKind>& kinds, std::uint64_t seed,
                                       bool with_answers) {
  const auto bank = QuestionBank::builtin();
  const auto caption_prompt = wrap_prompt(vocab, kCaptionQuestion);
  std::vector<TextExample> out;
  out.reserve(ids.size() * kinds.size() * 2);
  for (const auto& id : ids) {
    const auto& r = data.manifest.at(id);
    for (auto kind : kinds) {
      Rng rng(derive_seed(seed, "qa/" + id + "/" + std::string(to_string(kind))));
      auto qa = make_qa_sample(r, data.manifest.spec, kind, bank, rng);
      TextExample q{id, kind, Task::QA, wrap_prompt(vocab, qa_prompt_text(qa)), {}, std::int64_t(r.action), qa.answer};
      auto cap = make_caption_sample(r, data.captions);
      TextExample c{id, kind, Task::Caption, caption_prompt, {}, std::int64_t(r.action), cap.caption};
      if (with_answers) {
        q.answer = vocab.encode(q.target);
        q.answer.push_back(Vocab::kEos);
        c.answer = vocab.encode(c.target);
        c.answer.push_back(Vocab::kEos);
      }
      out.push_back(std::move(q));
      out.push_back(std::move(c));
    }
  }
  return out;
}

template <typename T>
Stage1Result pretrain_tailored(HoloModel<T>& model, const DataBundle& data, ModalityKind kind,
                               const Stage1Config& cfg, const OptimizerConfig& opt, std::uint64_t seed) {
  const std::string tag = "stage1/" + std::string(to_string(kind));
  auto [fit, val] = validation_split(data.split.train, cfg.val_fraction, derive_seed(seed, tag + "/val"));
  if (fit.empty()) throw ConfigError("stage 1 has no training sequences");
  Stage1Result res;
  res.kind = kind;
  res.train_size = fit.size();
  res.val_size = val.size();

  const auto params = model.stage1_params(kind);
  AdamW<T> optimizer(params, opt);
  const auto& enc = model.encoders().tailored(kind);
  const std::size_t iters = (fit.size() + cfg.batch - 1) / cfg.batch;
  auto last_good = snapshot(params);

  auto val_accuracy = [&]() {
    if (val.empty()) return 0.0;
    NoGradGuard guard;
    std::vector<std::size_t> preds, labels;
    for (const auto& id : val) {
      auto s = load_sample(data, id, kind);
      preds.push_back(argmax(enc.classify(enc.backbone(s)).value()));
      labels.push_back(s.action_id);
    }
    return accuracy(preds, labels);
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs && !res.diverged; ++epoch) {
    auto order = fit;
    shuffle_in_place(order, derive_seed(seed, tag + "/epoch" + std::to_string(epoch)));
    Stage1Epoch rec{epoch, 0, 0, 0, 0};
    std::size_t correct = 0;
    for (std::size_t b = 0; b < iters; ++b) {
      const std::size_t lo = b * cfg.batch, hi = std::min(order.size(), lo + cfg.batch);
      model.store().zero_grad();
      double batch_loss = 0;
      try {
        for (std::size_t i = lo; i < hi; ++i) {
          auto s = load_sample(data, order[i], kind);
          Var<T> logits = enc.classify(enc.backbone(s));
          correct += argmax(logits.value()) == s.action_id;
          Var<T> loss = ops::cross_entropy(ops::reshape(logits, {1, logits.dim(0)}),
                                           {static_cast<std::int64_t>(s.action_id)}, double(hi - lo));
          batch_loss += double(loss.value()[0]);
          loss.backward();
        }
      } catch (const NumericError&) {
        batch_loss = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(batch_loss)) {
        spdlog::error("stage 1 ({}): non-finite loss at epoch {}, restoring epoch {} weights", to_string(kind),
                      epoch, epoch == 0 ? 0 : epoch - 1);
        restore(params, last_good);
        res.diverged = true;
        break;
      }
      rec.lr = lr_at(cfg.schedule, double(epoch) + double(b + 1) / double(iters));
      optimizer.step(rec.lr);
      rec.train_loss += batch_loss * double(hi - lo) / double(fit.size());
    }
    if (res.diverged) break;
    model.store().zero_grad();
    rec.train_acc = double(correct) / double(fit.size());
    rec.val_acc = val_accuracy();
    res.history.push_back(rec);
    last_good = snapshot(params);
    spdlog::debug("stage 1 ({}) epoch {}: loss {:.4f} train {:.3f} val {:.3f}", to_string(kind), epoch,
                  rec.train_loss, rec.train_acc, rec.val_acc);
  }
  model.store().zero_grad();
  return res;
}

template <typename T>
Stage2Loss<T> accumulate_stage2(const HoloModel<T>& model, const DataBundle& data,
                                const std::vector<const TextExample*>& batch, std::size_t micro_batch) {
  Stage2Normalizer norm;
  norm.classification = double(batch.size());
  for (const auto* ex : batch) norm.tokens += double(count_answer_tokens(ex->answer));
  Stage2Loss<T> total;
  for (std::size_t lo = 0; lo < batch.size(); lo += micro_batch) {
    std::vector<Stage2Example<T>> micro;
    for (std::size_t i = lo; i < std::min(batch.size(), lo + micro_batch); ++i) {
      const auto* ex = batch[i];
      micro.push_back({model.prefix(load_sample(data, ex->id, ex->kind)), ex->prompt, ex->answer, ex->action});
    }
    if (norm.tokens == 0) norm.tokens = 1;  // every answer masked: the token term is dropped anyway
    auto loss = stage2_loss(model.decoder(), micro, norm);
    if (loss.total.requires_grad()) loss.total.backward();
    total.classification += loss.classification;
    total.next_token += loss.next_token;
    total.answer_tokens += loss.answer_tokens;
  }
  total.all_masked = total.answer_tokens == 0;
  return total;
}

template <typename T>
Stage2Result finetune_umip(HoloModel<T>& model, const DataBundle& data, const Stage2Config& cfg,
                           const OptimizerConfig& opt, std::uint64_t seed) {
  auto params = model.prepare_stage2(cfg.train_groups);
  Stage2Result res;
  for (const auto& prefix : model.frozen_prefixes()) res.frozen_hashes[prefix] = params_hash(model.store(), prefix);

  const auto examples = make_examples(data, model.vocab(), data.split.train, model.kinds(), seed, true);
  if (examples.empty()) throw ConfigError("stage 2 has no training examples");
  res.examples = examples.size();
  const std::size_t eff = cfg.micro_batch * cfg.accumulation;
  const std::size_t steps = cfg.steps ? cfg.steps : cfg.epochs * ((examples.size() + eff - 1) / eff);

  AdamW<T> optimizer(params, opt);
  std::vector<const TextExample*> order;
  std::size_t cursor = 0, pass = 0;
  auto last_good = snapshot(params);
  for (std::size_t step = 1; step <= steps; ++step) {
    std::vector<const TextExample*> batch;
    while (batch.size() < eff) {
      if (cursor == order.size()) {
        order.clear();
        for (const auto& ex : examples) order.push_back(&ex);
        shuffle_in_place(order, derive_seed(seed, "stage2/pass" + std::to_string(pass++)));
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    model.store().zero_grad();
    Stage2Loss<T> loss;
    loss.classification = std::numeric_limits<double>::quiet_NaN();
    try {
      loss = accumulate_stage2(model, data, batch, cfg.micro_batch);
    } catch (const NumericError&) {
    }
    const double value = loss.classification + loss.next_token;
    if (!std::isfinite(value)) {
      spdlog::error("stage 2: non-finite loss at step {}, restoring the last good weights", step);
      restore(params, last_good);
      res.diverged = true;
      break;
    }
    const double lr = lr_at(cfg.schedule, double(step));
    optimizer.step(lr);
    res.history.push_back({step, lr, value, loss.classification, loss.next_token});
    if (step % 10 == 0) {
      last_good = snapshot(params);
      spdlog::debug("stage 2 step {}: loss {:.4f} (cls {:.4f}, next {:.4f})", step, value, loss.classification,
                    loss.next_token);
    }
  }
  model.store().zero_grad();
  for (const auto& [prefix, h] : res.frozen_hashes) {
    const auto now = params_hash(model.store(), prefix);
    if (now != h) throw NumericError("frozen parameters under " + prefix + " changed during stage 2");
  }
  return res;
}

namespace {

std::vector<std::string> eval_ids(const DataBundle& data, std::size_t limit) {
  const auto& test = data.split.test;
  if (limit == 0 || limit >= test.size()) return test;
  // evenly strided so every environment and class stays represented
  std::vector<std::string> out;
  for (std::size_t i = 0; i < limit; ++i) out.push_back(test[i * test.size() / limit]);
  return out;
}

}  // namespace

template <typename T>
TokenDump collect_tokens(const HoloModel<T>& model, const DataBundle& data, ModalityKind kind,
                         const std::vector<std::string>& ids) {
  NoGradGuard guard;
  TokenDump dump;
  for (const auto& id : ids) {
    auto s = load_sample(data, id, kind);
    const auto& z = model.prefix(s).value();
    Tensor<double> t(z.shape());
    for (std::size_t i = 0; i < z.numel(); ++i) t[i] = double(z[i]);
    dump.tokens.push_back(std::move(t));
    dump.labels.push_back(s.action_id);
  }
  return dump;
}

template <typename T>
std::vector<Tensor<double>> class_anchors(const HoloModel<T>& model, const DatasetSpec& spec, ModalityKind kind,
                                          std::uint64_t seed) {
  NoGradGuard guard;
  const TextAnchorSpace space(model.config().d_m, derive_seed(seed, "anchors"));
  std::vector<Tensor<double>> out;
  for (const auto& name : spec.class_names) {
    const auto anchor = space.embed(name);
    Tensor<T> a({1, anchor.vector.numel()});
    for (std::size_t i = 0; i < a.numel(); ++i) a[i] = static_cast<T>(anchor.vector[i]);
    const auto& p = model.project(kind, Var<T>::constant(std::move(a))).value();
    Tensor<double> t({p.numel()});
    for (std::size_t i = 0; i < p.numel(); ++i) t[i] = double(p[i]);
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
MetricReport evaluate(const HoloModel<T>& model, const DataBundle& data, const EvalOptions& opts, std::uint64_t seed) {
  bool want_rec = false, want_qa = false, want_cap = false;
  for (const auto& t : opts.tasks) {
    if (t == "recognition") want_rec = true;
    else if (t == "qa") want_qa = true;
    else if (t == "caption") want_cap = true;
    else throw ConfigError("unknown task '" + t + "' (expected recognition, qa or caption)");
  }
  NoGradGuard guard;
  const auto ids = eval_ids(data, opts.limit);
  const auto& spec = data.manifest.spec;
  std::size_t answer_len = 0;
  for (const auto& n : spec.class_names) answer_len = std::max(answer_len, Vocab::split_words(n).size());

  MetricReport report;
  report.setting = std::string(to_string(data.split.setting));
  for (const auto& t : {"recognition", "qa", "caption"})
    if (std::find(opts.tasks.begin(), opts.tasks.end(), t) != opts.tasks.end()) report.tasks.push_back(t);

  for (auto kind : model.kinds()) {
    const std::string mod(to_string(kind));
    const auto examples = make_examples(data, model.vocab(), ids, {kind}, seed, false);
    std::vector<std::size_t> preds, labels;
    std::vector<std::string> answers, truths;
    double meteor_sum = 0;
    std::vector<std::vector<Tensor<double>>> by_class(spec.num_classes);
    std::vector<Tensor<double>> pooled;
    std::vector<std::size_t> pooled_labels;
    for (std::size_t i = 0; i < examples.size(); i += 2) {
      const auto& qa = examples[i];
      const auto& cap = examples[i + 1];
      Var<T> z = model.prefix(load_sample(data, qa.id, kind));
      if (want_rec) {
        auto out = model.decoder().decode(z, cap.prompt, cap.prompt.size() - 1);
        preds.push_back(argmax(model.decoder().classify(out.pooled).value()));
        labels.push_back(std::size_t(qa.action));
      }
      if (want_qa) {
        answers.push_back(model.vocab().decode(model.decoder().generate(z, qa.prompt, answer_len + 1)));
        truths.push_back(qa.target);
      }
      if (want_cap) {
        const auto text = model.vocab().decode(model.decoder().generate(z, cap.prompt, opts.max_caption_tokens));
        meteor_sum += meteor(text, cap.target).score;
      }
      if (opts.diagnostics) {
        Tensor<double> t(z.shape());
        for (std::size_t k = 0; k < z.value().numel(); ++k) t[k] = double(z.value()[k]);
        by_class[std::size_t(qa.action)].push_back(t);
        pooled.push_back(std::move(t));
        pooled_labels.push_back(std::size_t(qa.action));
      }
    }
    const std::size_t n = examples.size() / 2;
    if (want_rec) report.set("recognition", mod, accuracy(preds, labels), n);
    if (want_qa) report.set("qa", mod, qa_accuracy(answers, truths), n);
    if (want_cap) report.set("caption", mod, meteor_sum / double(n), n);
    if (opts.diagnostics) {
      report.diagnostics["cluster_separation." + mod] = cluster_separation(by_class);
      report.diagnostics["alignment_gap." + mod] = alignment_gap(pooled, pooled_labels, class_anchors(model, spec, kind, seed));
    }
    if (std::find(report.modalities.begin(), report.modalities.end(), mod) == report.modalities.end()) {
      report.modalities.push_back(mod);
    }
  }
  return report;
}

HoloModel<float> build_model(const RunConfig& cfg, const DataBundle& data, const Vocab& vocab) {
  return HoloModel<float>(cfg.model, cfg.modality_kinds(), data.manifest.spec.frames, data.manifest.spec.num_classes,
                          vocab, derive_seed(cfg.seed, "model"));
}

template <typename T>
void copy_params(const ParamStore<T>& src, ParamStore<T>& dst, std::string_view prefix) {
  for (auto* p : src.with_prefix(prefix)) {
    auto& q = dst.at(p->name);
    if (q.value().shape() != p->value().shape()) throw DimensionError("copy_params: shape mismatch for " + p->name);
    q.value() = p->value();
  }
}

namespace {

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport m = reports.front();
  for (const auto& task : m.tasks)
    for (const auto& mod : m.modalities) {
      if (!m.scores[task].count(mod)) continue;
      double s = 0;
      for (const auto& r : reports) s += r.at(task, mod);
      m.scores[task][mod] = s / double(reports.size());
    }
  m.diagnostics.clear();
  for (const auto& r : reports)
    for (const auto& [k, v] : r.diagnostics) m.diagnostics[k] += v / double(reports.size());
  return m;
}

}  // namespace

AblationResult ablation_run(const RunConfig& cfg, const std::vector<Arm>& arms, const std::vector<std::uint64_t>& seeds,
                            const EvalOptions& eval) {
  cfg.validate();
  if (arms.empty() || seeds.empty()) throw ConfigError("ablation needs at least one arm and one seed");
  const auto start = std::chrono::steady_clock::now();
  AblationResult res;
  res.arms = arms;
  res.seeds = seeds;
  const bool need_stage1 = std::any_of(arms.begin(), arms.end(), [](Arm a) { return a != Arm::Baseline; });
  for (auto seed : seeds) {
    RunConfig run = cfg;
    run.seed = seed;
    const auto data = load_data(run.data, seed);
    const auto vocab = build_vocab(data);

    std::unique_ptr<HoloModel<float>> stage1;
    if (need_stage1) {
      RunConfig s1 = run;
      s1.model.arm = "tailored";
      stage1 = std::make_unique<HoloModel<float>>(build_model(s1, data, vocab));
      for (auto kind : run.modality_kinds()) {
        auto r = pretrain_tailored(*stage1, data, kind, run.stage1, run.optimizer, derive_seed(seed, "stage1"));
        spdlog::info("seed {} stage 1 {}: val acc {:.3f}", seed, to_string(kind),
                     r.history.empty() ? 0.0 : r.history.back().val_acc);
      }
    }
    for (auto arm : arms) {
      RunConfig a = run;
      a.model.arm = std::string(to_string(arm));
      auto model = build_model(a, data, vocab);
      if (arm != Arm::Baseline) copy_params(stage1->store(), model.store(), "tailored.");
      finetune_umip(model, data, a.stage2, a.optimizer, derive_seed(seed, "stage2"));
      auto report = evaluate(model, data, eval, derive_seed(seed, "eval"));
      report.config_hash = a.hash();
      spdlog::info("seed {} {}: recognition {:.3f} qa {:.3f}", seed, arm_label(arm),
                   report.tasks.empty() ? 0.0 : report.average(report.tasks.front()),
                   report.scores.count("qa") ? report.average("qa") : 0.0);
      res.per_seed[arm].push_back(std::move(report));
      res.split_hashes[arm].push_back(data.split.hash());
    }
  }
  for (auto arm : arms) res.mean[arm] = mean_report(res.per_seed[arm]);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

nlohmann::json AblationResult::to_json() const {
  nlohmann::json j;
  j["seeds"] = seeds;
  j["arms"] = nlohmann::json::array();
  for (auto arm : arms) {
    nlohmann::json row;
    row["arm"] = std::string(to_string(arm));
    row["label"] = std::string(arm_label(arm));
    row["mean"] = mean.at(arm).to_json();
    row["per_seed"] = nlohmann::json::array();
    for (const auto& r : per_seed.at(arm)) row["per_seed"].push_back(r.to_json());
    row["split_hashes"] = split_hashes.at(arm);
    j["arms"].push_back(row);
  }
  return j;
}

std::string AblationResult::table_csv() const {
  std::ostringstream os;
  const auto& first = mean.at(arms.front());
  os << "arm";
  for (const auto& task : first.tasks) {
    for (const auto& m : first.modalities) os << ',' << task << '/' << m;
    os << ',' << task << "/Avg";
  }
  os << '\n';
  for (auto arm : arms) {
    const auto& r = mean.at(arm);
    os << arm_label(arm);
    for (const auto& task : r.tasks) {
      for (const auto& m : r.modalities) os << ',' << format_score(r.at(task, m));
      os << ',' << format_score(r.average(task));
    }
    os << '\n';
  }
  return os.str();
}

void AblationResult::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream js(dir / "ablation.json"), csv(dir / "ablation.csv");
  if (!js || !csv) throw IoError("cannot write ablation table under " + dir.string());
  js << to_json().dump(2) << '\n';
  csv << table_csv();
}

void write_history_csv(const std::vector<Stage1Epoch>& h, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "step,lr,loss,metric\n";
  for (const auto& e : h) os << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.val_acc << '\n';
}

void write_history_csv(const std::vector<Stage2Step>& h, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "step,lr,loss,metric\n";
  for (const auto& s : h) os << s.step << ',' << s.lr << ',' << s.loss << ',' << s.next_token << '\n';
}

#define HOLO_INSTANTIATE_PIPELINE(T)                                                                          \
  template Stage1Result pretrain_tailored<T>(HoloModel<T>&, const DataBundle&, ModalityKind, const Stage1Config&, \
                                             const OptimizerConfig&, std::uint64_t);                          \
  template Stage2Loss<T> accumulate_stage2<T>(const HoloModel<T>&, const DataBundle&,                          \
                                              const std::vector<const TextExample*>&, std::size_t);            \
  template Stage2Result finetune_umip<T>(HoloModel<T>&, const DataBundle&, const Stage2Config&,                \
                                         const OptimizerConfig&, std::uint64_t);                              \
  template MetricReport evaluate<T>(const HoloModel<T>&, const DataBundle&, const EvalOptions&, std::uint64_t); \
  template TokenDump collect_tokens<T>(const HoloModel<T>&, const DataBundle&, ModalityKind,                   \
                                       const std::vector<std::string>&);                                       \
  template std::vector<Tensor<double>> class_anchors<T>(const HoloModel<T>&, const DatasetSpec&, ModalityKind,  \
                                                        std::uint64_t);                                        \
  template void copy_params<T>(const ParamStore<T>&, ParamStore<T>&, std::string_view);

HOLO_INSTANTIATE_PIPELINE(float)
HOLO_INSTANTIATE_PIPELINE(double)

}  // namespace holo
