#include "textsr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "textsr/error.hpp"

namespace textsr {

Tensor finite_diff_gradient(const ScalarFunction& f, const Tensor& x,
                            double eps) {
  if (!(eps > 0.0)) throw ParameterError("finite difference eps must be > 0");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = f(probe);
    probe[i] = orig - eps;
    const double down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("non-finite function value at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double finite_diff_grad_check(const ScalarFunction& f, const Tensor& x,
                              const Tensor& analytic_grad, double eps) {
  if (analytic_grad.shape() != x.shape()) {
    throw ShapeError("gradient shape " + to_string(analytic_grad.shape()) +
                     " does not match input shape " + to_string(x.shape()));
  }
  const Tensor numeric = finite_diff_gradient(f, x, eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = analytic_grad[i];
    worst = std::max(worst,
                     std::fabs(a - numeric[i]) / std::max(1.0, std::fabs(a)));
  }
  return worst;
}

}  // namespace textsr
