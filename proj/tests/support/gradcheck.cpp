#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace xgem::testing {

namespace {

double evaluate(const ScalarFn& fn, const std::vector<nd::Tensor>& inputs) {
  nd::Graph g;
  std::vector<nd::Var> vars;
  for (const auto& t : inputs) vars.push_back(g.constant(t));
  return g.value(fn(vars)).item();
}

nd::Tensor perturbed(const nd::Tensor& t, std::size_t i, double delta) {
  std::vector<double> v(t.values().begin(), t.values().end());
  v[i] += delta;
  return nd::Tensor(t.shape(), std::move(v));
}

}  // namespace

GradCheckResult check_gradients(const ScalarFn& fn, const std::vector<nd::Tensor>& inputs, double step,
                                double rel_tol, double abs_tol) {
  nd::Graph g;
  std::vector<nd::Var> vars;
  for (const auto& t : inputs) vars.push_back(g.parameter(t));
  g.backward(fn(vars));

  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const nd::Tensor analytic = g.grad(vars[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto plus = inputs, minus = inputs;
      plus[k] = perturbed(inputs[k], i, step);
      minus[k] = perturbed(inputs[k], i, -step);
      const double numeric = (evaluate(fn, plus) - evaluate(fn, minus)) / (2.0 * step);
      const double a = analytic[i];
      const double mag = std::max(std::abs(a), std::abs(numeric));
      const double abs_err = std::abs(a - numeric);
      const bool pass = mag < 1e-3 ? abs_err < abs_tol : abs_err / mag < rel_tol;
      ++result.checked;
      if (mag >= 1e-3) result.worst_relative = std::max(result.worst_relative, abs_err / mag);
      if (!pass) {
        if (result.failures == 0) {
          result.first_failure = "input " + std::to_string(k) + "[" + std::to_string(i) + "]: analytic " +
                                 std::to_string(a) + " vs numeric " + std::to_string(numeric);
        }
        ++result.failures;
      }
    }
  }
  return result;
}

}  // namespace xgem::testing
