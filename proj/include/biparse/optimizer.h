#ifndef BIPARSE_OPTIMIZER_H_
#define BIPARSE_OPTIMIZER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biparse/autodiff.h"

namespace biparse {

struct OptimizerConfig {
  enum class Kind { Sgd, Adam };
  Kind kind = Kind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Updates only tensors (or embedding rows) that received a gradient since the
// last step, then clears those gradients. Adam keeps per-tensor moments and a
// per-tensor step count for bias correction.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {});

  // Throws UsageError when no tensor in the store carries a gradient.
  void step(ParameterStore& store);

  std::uint64_t steps() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }

  struct Moments {
    std::vector<real> first;
    std::vector<real> second;
    std::uint64_t t = 0;
  };
  const Moments* moments(const std::string& name) const;

 private:
  void update_range(Tensor& t, Moments* m, std::size_t begin, std::size_t end);

  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace biparse

#endif  // BIPARSE_OPTIMIZER_H_
