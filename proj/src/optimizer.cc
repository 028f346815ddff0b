#include "biparse/optimizer.h"

#include <cmath>

namespace biparse {

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.learning_rate > 0))
    throw ConfigError("optimizer learning rate must be positive");
}

const Optimizer::Moments* Optimizer::moments(const std::string& name) const {
  auto it = moments_.find(name);
  return it == moments_.end() ? nullptr : &it->second;
}

void Optimizer::update_range(Tensor& t, Moments* m, std::size_t begin,
                             std::size_t end) {
  auto values = t.values();
  auto grad = t.grad();
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerConfig::Kind::Sgd) {
    for (std::size_t i = begin; i < end; ++i)
      values[i] -= static_cast<real>(lr * grad[i]);
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(m->t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(m->t));
  for (std::size_t i = begin; i < end; ++i) {
    const double g = grad[i];
    const double mi = b1 * m->first[i] + (1.0 - b1) * g;
    const double vi = b2 * m->second[i] + (1.0 - b2) * g * g;
    m->first[i] = static_cast<real>(mi);
    m->second[i] = static_cast<real>(vi);
    values[i] -= static_cast<real>(lr * (mi / c1) /
                                   (std::sqrt(vi / c2) + config_.epsilon));
  }
}

void Optimizer::step(ParameterStore& store) {
  bool any = false;
  for (auto& [name, t] : store) {
    if (!t->touched()) continue;
    any = true;
    Moments* m = nullptr;
    if (config_.kind == OptimizerConfig::Kind::Adam) {
      m = &moments_[name];
      if (m->first.empty()) {
        m->first.assign(t->size(), real(0));
        m->second.assign(t->size(), real(0));
      }
      ++m->t;
    }
    if (t->fully_touched()) {
      update_range(*t, m, 0, t->size());
    } else {
      const std::size_t cols = t->shape().cols;
      for (std::size_t r : t->touched_rows())
        update_range(*t, m, r * cols, (r + 1) * cols);
    }
    t->clear_grad();
  }
  if (!any) throw UsageError("optimizer step without any gradients");
  ++steps_;
}

}  // namespace biparse
