#include "holo/numerics/grad_check.hpp"

#include <cmath>

namespace holo {

GradCheckReport grad_check(const std::function<Var<double>()>& f, const std::vector<NamedLeaf>& leaves,
                           const GradCheckOptions& options) {
  for (const auto& [name, leaf] : leaves) leaf.node().clear_grad();
  Var<double> loss = f();
  loss.backward();

  std::vector<Tensor<double>> analytic;
  analytic.reserve(leaves.size());
  for (const auto& [name, leaf] : leaves) {
    analytic.push_back(leaf.grad());
    for (double g : analytic.back().data()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient for " + name);
    }
  }

  GradCheckReport report;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    const auto& [name, leaf] = leaves[li];
    auto values = leaf.node().value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = f().value().item();
      values[i] = saved - options.step;
      const double down = f().value().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[li][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_error || report.worst_name.empty()) {
        if (rel >= report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_name = name;
          report.worst_index = i;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

GradCheckReport grad_check(const std::function<Var<double>()>& f, ParamStore<double>& store,
                           const GradCheckOptions& options) {
  std::vector<NamedLeaf> leaves;
  std::size_t frozen = 0;
  for (auto* p : store.all()) {
    if (p->frozen) {
      ++frozen;
      continue;
    }
    leaves.emplace_back(p->name, p->var);
  }
  auto report = grad_check(f, leaves, options);
  report.skipped_frozen = frozen;
  return report;
}

}  // namespace holo
