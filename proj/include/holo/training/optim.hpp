#pragma once

#include <vector>

#include "json.hpp"

#include "holo/numerics/params.hpp"

namespace holo {

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double weight_decay = 0.1;
  double eps = 1e-8;

  /// Throws ConfigError unless both betas lie in (0, 1), eps > 0 and decay >= 0.
  void validate() const;
};

void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);

/// AdamW with decoupled weight decay:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)
/// Frozen parameters and parameters without a gradient are skipped. Biases and
/// normalisation gains/offsets are never decayed.
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<Parameter<T>*> params, const OptimizerConfig& cfg);

  void step(double lr);
  std::size_t steps() const { return t_; }
  const std::vector<Parameter<T>*>& params() const { return params_; }

  static bool decays(const Parameter<T>& p);

 private:
  std::vector<Parameter<T>*> params_;
  OptimizerConfig cfg_;
  std::vector<std::vector<T>> m_, v_;
  std::size_t t_ = 0;
};

/// Piecewise learning rate: linear warmup from 0 to `base_lr` over `warmup`
/// units, then `base_lr` times `gamma` for every milestone already reached.
/// With no milestones this is warmup-then-constant. Units are whatever the
/// caller steps in (fractional epochs for stage 1, iterations for stage 2).
struct Schedule {
  double base_lr = 2e-5;
  double warmup = 0;
  std::vector<double> milestones;
  double gamma = 0.1;

  /// base 0.1, 10 warmup epochs, x0.1 at epochs 60 and 100
  static Schedule stage1_full();
  /// warmup over `warmup_iters` to 2e-5, then constant
  static Schedule stage2_full(double warmup_iters);

  void validate() const;
};

void to_json(nlohmann::json& j, const Schedule& s);
void from_json(const nlohmann::json& j, Schedule& s);

/// Throws ConfigError for a negative step.
double lr_at(const Schedule& s, double step);

}  // namespace holo
