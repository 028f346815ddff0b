#ifndef BIPARSE_TESTS_GRADCHECK_H_
#define BIPARSE_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "biparse/autodiff.h"

namespace biparse::testing {

struct GradCheck {
  double max_relative = 0;
  std::size_t checked = 0;
  std::string worst;
};

// Relative error |a - n| / max(|a|, |n|, floor).
inline double relative_error(double a, double n, double floor = 1e-7) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// Compares back-propagated gradients with central differences on every entry
// that received a gradient (whole tensors, or the touched rows of lookup
// tables). `loss` builds a fresh scalar loss in the given graph. Gradients
// smaller than 1e4 times the difference quotient's rounding level
// (machine epsilon * |loss| / eps) are compared against that level instead.
inline GradCheck gradcheck(ParameterStore& store,
                           const std::function<Expr(Graph&)>& loss,
                           double eps = 1e-5) {
  store.clear_grads();
  {
    Graph g;
    g.backward(loss(g));
  }
  auto evaluate = [&] {
    Graph g(false);
    return static_cast<double>(g.scalar(loss(g)));
  };
  const double rounding =
      std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(evaluate())) / eps;
  const double floor = std::max(1e-7, 1e4 * rounding);
  GradCheck out;
  for (auto& [name, tensor] : store) {
    Tensor& t = *tensor;
    if (!t.touched()) continue;
    const std::vector<real> analytic(t.grad().begin(), t.grad().end());
    std::vector<std::size_t> entries;
    if (t.fully_touched()) {
      for (std::size_t i = 0; i < t.size(); ++i) entries.push_back(i);
    } else {
      for (std::size_t row : t.touched_rows())
        for (std::size_t c = 0; c < t.shape().cols; ++c)
          entries.push_back(row * t.shape().cols + c);
    }
    for (std::size_t i : entries) {
      const real saved = t.values()[i];
      t.values()[i] = saved + static_cast<real>(eps);
      const double plus = evaluate();
      t.values()[i] = saved - static_cast<real>(eps);
      const double minus = evaluate();
      t.values()[i] = saved;
      const double numeric = (plus - minus) / (2 * eps);
      const double err = relative_error(analytic[i], numeric, floor);
      ++out.checked;
      if (err > out.max_relative) {
        out.max_relative = err;
        out.worst = name + "[" + std::to_string(i) + "] analytic " +
                    std::to_string(analytic[i]) + " numeric " + std::to_string(numeric);
      }
    }
  }
  store.clear_grads();
  return out;
}

}  // namespace biparse::testing

#endif  // BIPARSE_TESTS_GRADCHECK_H_
