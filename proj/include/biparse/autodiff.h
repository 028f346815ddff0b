#ifndef BIPARSE_AUTODIFF_H_
#define BIPARSE_AUTODIFF_H_

// Tape-based reverse-mode differentiation over vectors and matrices.
//
// A Graph records operations in creation order; backward() walks the tape once
// in reverse. Parameters live outside the graph in Tensors owned by a
// ParameterStore; graph leaves reference them without copying, and gradients
// flow straight into the tensor's gradient buffer.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "biparse/common.h"

namespace biparse {

struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = true);
  Tensor(Shape shape, std::vector<real> values, bool requires_grad);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::span<real> values() { return values_; }
  std::span<const real> values() const { return values_; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  // Gradient storage is allocated on first accumulation only.
  bool has_grad() const { return !grad_.empty(); }
  std::span<const real> grad() const { return grad_; }

  // Whole-tensor accumulation target; marks the tensor touched.
  std::span<real> dense_grad();
  // Single-row accumulation target (embedding lookups); marks the row.
  std::span<real> row_grad(std::size_t row);

  bool touched() const { return dense_touched_ || !touched_rows_.empty(); }
  bool fully_touched() const { return dense_touched_; }
  const std::vector<std::size_t>& touched_rows() const { return touched_rows_; }

  // Zeroes touched entries and forgets the touch marks.
  void clear_grad();

 private:
  void ensure_grad();

  Shape shape_;
  std::vector<real> values_;
  std::vector<real> grad_;
  bool requires_grad_ = true;
  bool dense_touched_ = false;
  std::vector<std::size_t> touched_rows_;
  std::vector<std::uint8_t> row_marked_;
};

// Named tensors in deterministic (lexicographic) order.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Shape shape, bool requires_grad = true);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t parameter_count() const;
  std::size_t size() const { return tensors_.size(); }
  void clear_grads();

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

 private:
  std::map<std::string, std::unique_ptr<Tensor>> tensors_;
};

// Uniform Glorot initialization for matrices (and vectors, treated as 1 x n).
void glorot_uniform(Tensor& t, std::mt19937_64& rng);

struct Expr {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Graph {
 public:
  // With record_gradients = false no node requires a gradient and backward()
  // is unavailable; used for inference over frozen parameters.
  explicit Graph(bool record_gradients = true);

  Expr input(std::vector<real> values);
  Expr input(Shape shape, std::vector<real> values);
  Expr zeros(std::size_t n);
  Expr parameter(Tensor& t);
  Expr lookup(Tensor& table, std::size_t row);

  Expr affine(Expr w, Expr x, Expr b);
  Expr matvec(Expr w, Expr x);
  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr cmul(Expr a, Expr b);
  Expr scale(Expr a, real factor);
  Expr tanh(Expr a);
  Expr sigmoid(Expr a);
  Expr concat(std::span<const Expr> parts);
  Expr concat(std::initializer_list<Expr> parts);
  Expr slice(Expr a, std::size_t offset, std::size_t length);
  Expr gather(Expr a, std::vector<std::size_t> indices);
  Expr sum(Expr a);
  Expr pick(Expr a, std::size_t index);
  // Elementwise sum of same-shaped operands.
  Expr sum_of(std::span<const Expr> terms);

  std::span<const real> value(Expr e) const;
  real scalar(Expr e) const;
  const Shape& shape(Expr e) const;
  bool requires_grad(Expr e) const;
  // Gradient of an intermediate node after backward(); empty if none flowed.
  std::span<const real> grad(Expr e) const;

  void backward(Expr loss);

  std::size_t size() const { return nodes_.size(); }
  bool records_gradients() const { return record_; }

 private:
  enum class Op : std::uint8_t {
    Input, Parameter, Lookup, Affine, MatVec, Add, Sub, CMul, Scale, Tanh,
    Sigmoid, Concat, Slice, Gather, Sum, Pick, SumOf
  };

  struct Node {
    Op op = Op::Input;
    Shape shape;
    bool requires_grad = false;
    std::vector<int> inputs;
    std::vector<real> value;  // unused for Parameter nodes
    std::vector<real> grad;
    Tensor* tensor = nullptr;
    std::size_t aux = 0;
    real factor = 0;
    std::vector<std::size_t> indices;
  };

  Node& check(Expr e);
  const Node& check(Expr e) const;
  Expr push(Node node);
  std::span<real> grad_target(int id);
  bool any_requires(std::initializer_list<int> ids) const;

  bool record_;
  std::vector<Node> nodes_;
  std::map<const Tensor*, int> parameter_nodes_;
};

}  // namespace biparse

#endif  // BIPARSE_AUTODIFF_H_
