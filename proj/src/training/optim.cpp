#include "holo/training/optim.hpp"

#include <algorithm>
#include <cmath>

#include "holo/errors.hpp"

namespace holo {

void OptimizerConfig::validate() const {
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) {
    throw ConfigError("optimizer betas must lie in (0, 1), got " + std::to_string(beta1) + ", " +
                      std::to_string(beta2));
  }
  if (!(eps > 0)) throw ConfigError("optimizer eps must be positive");
  if (!(weight_decay >= 0)) throw ConfigError("weight decay must be non-negative");
}

void to_json(nlohmann::json& j, const OptimizerConfig& c) {
  j = {{"beta1", c.beta1}, {"beta2", c.beta2}, {"weight_decay", c.weight_decay}, {"eps", c.eps}};
}

void from_json(const nlohmann::json& j, OptimizerConfig& c) {
  OptimizerConfig d;
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.eps = j.value("eps", d.eps);
}

template <typename T>
AdamW<T>::AdamW(std::vector<Parameter<T>*> params, const OptimizerConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  for (auto* p : params_) {
    m_.emplace_back(p->value().numel(), T(0));
    v_.emplace_back(p->value().numel(), T(0));
  }
}

template <typename T>
bool AdamW<T>::decays(const Parameter<T>& p) {
  auto ends_with = [&](std::string_view s) {
    return p.name.size() >= s.size() && p.name.compare(p.name.size() - s.size(), s.size(), s) == 0;
  };
  return !p.frozen && !ends_with(".bias") && !ends_with(".gamma") && !ends_with(".beta");
}

template <typename T>
void AdamW<T>::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto* p = params_[i];
    auto& node = p->var.node();
    if (p->frozen || !node.has_grad) continue;
    auto w = p->value().data();
    auto g = std::as_const(node.grad).data();
    auto& m = m_[i];
    auto& v = v_[i];
    const double wd = decays(*p) ? cfg_.weight_decay : 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g[k];
      m[k] = static_cast<T>(cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * gk);
      v[k] = static_cast<T>(cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * gk * gk);
      const double mhat = m[k] / bc1, vhat = v[k] / bc2;
      const double update = mhat / (std::sqrt(vhat) + cfg_.eps) + wd * double(w[k]);
      w[k] = static_cast<T>(w[k] - lr * update);
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

Schedule Schedule::stage1_full() { return {0.1, 10, {60, 100}, 0.1}; }

Schedule Schedule::stage2_full(double warmup_iters) { return {2e-5, warmup_iters, {}, 0.1}; }

void Schedule::validate() const {
  if (!(base_lr >= 0)) throw ConfigError("learning rate must be non-negative");
  if (!(warmup >= 0)) throw ConfigError("warmup must be non-negative");
  if (!(gamma > 0)) throw ConfigError("decay factor must be positive");
  if (!std::is_sorted(milestones.begin(), milestones.end())) throw ConfigError("milestones must be ascending");
  for (double m : milestones)
    if (m < warmup) throw ConfigError("a decay milestone falls inside the warmup");
}

void to_json(nlohmann::json& j, const Schedule& s) {
  j = {{"base_lr", s.base_lr}, {"warmup", s.warmup}, {"milestones", s.milestones}, {"gamma", s.gamma}};
}

void from_json(const nlohmann::json& j, Schedule& s) {
  Schedule d;
  s.base_lr = j.value("base_lr", d.base_lr);
  s.warmup = j.value("warmup", d.warmup);
  s.milestones = j.value("milestones", d.milestones);
  s.gamma = j.value("gamma", d.gamma);
}

double lr_at(const Schedule& s, double step) {
  if (step < 0) throw ConfigError("lr_at: negative step");
  if (step < s.warmup) return s.base_lr * step / s.warmup;
  double lr = s.base_lr;
  for (double m : s.milestones)
    if (step >= m) lr *= s.gamma;
  return lr;
}

}  // namespace holo
