#include "mwrn/params.hpp"

#include <cmath>

namespace mwrn {

template <typename T>
void adam_step(const std::vector<Parameter<T>*>& params,
               const AdamHyper& hyper) {
  for (Parameter<T>* p : params) {
    if (!p->value.has_grad())
      throw NumericError("adam_step: parameter " + p->name +
                         " has no gradient");
  }
  for (Parameter<T>* p : params) {
    p->step_count += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, double(p->step_count));
    const double bc2 = 1.0 - std::pow(hyper.beta2, double(p->step_count));
    auto theta = p->value.raw_data();
    const auto g = p->value.grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g[i];
      const double m = hyper.beta1 * p->adam_m[i] + (1.0 - hyper.beta1) * gi;
      const double v =
          hyper.beta2 * p->adam_v[i] + (1.0 - hyper.beta2) * gi * gi;
      p->adam_m[i] = static_cast<T>(m);
      p->adam_v[i] = static_cast<T>(v);
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      theta[i] = static_cast<T>(theta[i] -
                                hyper.lr * m_hat /
                                    (std::sqrt(v_hat) + hyper.epsilon));
    }
    p->value.zero_grad();
  }
}

template void adam_step<float>(const std::vector<Parameter<float>*>&,
                               const AdamHyper&);
template void adam_step<double>(const std::vector<Parameter<double>*>&,
                                const AdamHyper&);

}  // namespace mwrn
