#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mwrn/tensor.hpp"

namespace mwrn {

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Central-difference verification of reverse-mode gradients, in 64-bit.
// `f` must map the point to a scalar tensor through differentiable ops; the
// error is |ad - fd| / max(1, |ad|, |fd|), maximized over coordinates.
// The point tensor is perturbed in place and restored.
GradCheckResult finite_diff_check(
    const std::string& name,
    const std::function<Tensor<double>(Tensor<double>&)>& f,
    Tensor<double>& point, double step, double tolerance);

// The full 64-bit verification suite: every differentiable op, a residual
// block, and a small three-scale network checked end to end.
std::vector<GradCheckResult> run_gradient_suite();

}  // namespace mwrn
