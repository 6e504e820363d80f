#include "mwrn/gradcheck.hpp"

#include <cmath>

namespace mwrn {

GradCheckResult finite_diff_check(
    const std::string& name,
    const std::function<Tensor<double>(Tensor<double>&)>& f,
    Tensor<double>& point, double step, double tolerance) {
  point.set_requires_grad(true);
  point.zero_grad();
  Tensor<double> loss = f(point);
  loss.backward();
  if (!point.has_grad())
    throw NumericError("finite_diff_check(" + name +
                       "): no gradient reached the point");
  std::vector<double> ad(point.grad().begin(), point.grad().end());
  point.zero_grad();

  double max_rel = 0.0;
  {
    NoGradGuard no_grad;
    auto x = point.raw_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + step;
      const double up = f(point).item();
      x[i] = saved - step;
      const double down = f(point).item();
      x[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("finite_diff_check(" + name +
                           "): non-finite evaluation");
      const double fd = (up - down) / (2.0 * step);
      const double rel = std::abs(ad[i] - fd) /
                         std::max({1.0, std::abs(ad[i]), std::abs(fd)});
      if (rel > max_rel) max_rel = rel;
    }
  }
  return GradCheckResult{name, max_rel, tolerance, max_rel < tolerance};
}

}  // namespace mwrn
