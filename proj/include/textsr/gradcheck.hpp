#pragma once

#include <functional>

#include "textsr/tensor.hpp"

namespace textsr {

using ScalarFunction = std::function<double(const Tensor&)>;

// Central-difference gradient check. Returns
//   max_i |analytic_i - fd_i| / max(1, |analytic_i|)
// where fd_i = (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
// Throws NumericError if f is non-finite at a probe point.
double finite_diff_grad_check(const ScalarFunction& f, const Tensor& x,
                              const Tensor& analytic_grad, double eps = 1e-6);

// Just the central-difference gradient.
Tensor finite_diff_gradient(const ScalarFunction& f, const Tensor& x,
                            double eps = 1e-6);

}  // namespace textsr
