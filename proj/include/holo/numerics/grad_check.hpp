#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "holo/numerics/params.hpp"

namespace holo {

struct GradCheckOptions {
  double step = 1e-5;       // central-difference step
  double tolerance = 1e-5;  // pass iff max relative error <= tolerance
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor);
  // the floor keeps near-zero gradients from turning rounding noise into huge ratios.
  double floor = 1e-4;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_name;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_frozen = 0;
  bool passed = false;
};

using NamedLeaf = std::pair<std::string, Var<double>>;

/// Compares reverse-mode gradients of scalar `f` with central finite differences
/// for every element of every leaf. `f` must rebuild its graph on each call.
/// Throws NumericError naming the leaf if an analytic gradient is non-finite.
GradCheckReport grad_check(const std::function<Var<double>()>& f, const std::vector<NamedLeaf>& leaves,
                           const GradCheckOptions& options = {});

/// Checks all non-frozen parameters of `store`; frozen ones are counted as skipped.
GradCheckReport grad_check(const std::function<Var<double>()>& f, ParamStore<double>& store,
                           const GradCheckOptions& options = {});

}  // namespace holo
