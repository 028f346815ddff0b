#include "biparse/autodiff.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biparse/kernels.h"

namespace biparse {

std::string Shape::str() const {
  std::ostringstream out;
  out << "[" << rows << "x" << cols << "]";
  return out.str();
}

Tensor::Tensor(Shape shape, bool requires_grad)
    : shape_(shape), values_(shape.size(), real(0)),
      requires_grad_(requires_grad) {}

Tensor::Tensor(Shape shape, std::vector<real> values, bool requires_grad)
    : shape_(shape), values_(std::move(values)),
      requires_grad_(requires_grad) {
  if (values_.size() != shape_.size())
    throw DimensionError("tensor shape " + shape_.str() + " holds " +
                         std::to_string(shape_.size()) + " values, got " +
                         std::to_string(values_.size()));
}

void Tensor::ensure_grad() {
  if (grad_.empty()) {
    grad_.assign(values_.size(), real(0));
    row_marked_.assign(shape_.rows, 0);
  }
}

std::span<real> Tensor::dense_grad() {
  ensure_grad();
  dense_touched_ = true;
  return grad_;
}

std::span<real> Tensor::row_grad(std::size_t row) {
  ensure_grad();
  if (!row_marked_[row]) {
    row_marked_[row] = 1;
    touched_rows_.push_back(row);
  }
  return std::span<real>(grad_).subspan(row * shape_.cols, shape_.cols);
}

void Tensor::clear_grad() {
  if (grad_.empty()) return;
  if (dense_touched_) {
    std::fill(grad_.begin(), grad_.end(), real(0));
  } else {
    for (std::size_t r : touched_rows_)
      std::fill_n(grad_.begin() + r * shape_.cols, shape_.cols, real(0));
  }
  for (std::size_t r : touched_rows_) row_marked_[r] = 0;
  touched_rows_.clear();
  dense_touched_ = false;
}

Tensor& ParameterStore::add(const std::string& name, Shape shape,
                            bool requires_grad) {
  if (tensors_.count(name)) throw UsageError("duplicate parameter " + name);
  auto& slot = tensors_[name];
  slot = std::make_unique<Tensor>(shape, requires_grad);
  return *slot;
}

Tensor& ParameterStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw UsageError("unknown parameter " + name);
  return *it->second;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw UsageError("unknown parameter " + name);
  return *it->second;
}

bool ParameterStore::contains(const std::string& name) const {
  return tensors_.count(name) > 0;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t->size();
  return n;
}

void ParameterStore::clear_grads() {
  for (auto& [name, t] : tensors_) t->clear_grad();
}

void glorot_uniform(Tensor& t, std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(t.shape().rows + t.shape().cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (real& v : t.values()) v = static_cast<real>(dist(rng));
}

// ---------------------------------------------------------------------------

Graph::Graph(bool record_gradients) : record_(record_gradients) {
  nodes_.reserve(1024);
}

Graph::Node& Graph::check(Expr e) {
  if (e.id < 0 || e.id >= static_cast<int>(nodes_.size()))
    throw UsageError("expression does not belong to this graph");
  return nodes_[e.id];
}

const Graph::Node& Graph::check(Expr e) const {
  if (e.id < 0 || e.id >= static_cast<int>(nodes_.size()))
    throw UsageError("expression does not belong to this graph");
  return nodes_[e.id];
}

Expr Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Expr{static_cast<int>(nodes_.size()) - 1};
}

bool Graph::any_requires(std::initializer_list<int> ids) const {
  for (int id : ids)
    if (nodes_[id].requires_grad) return true;
  return false;
}

std::span<const real> Graph::value(Expr e) const {
  const Node& n = check(e);
  if (n.op == Op::Parameter) return n.tensor->values();
  return n.value;
}

real Graph::scalar(Expr e) const {
  const Node& n = check(e);
  if (n.shape.size() != 1)
    throw UsageError("scalar() on non-scalar node of shape " + n.shape.str());
  return value(e)[0];
}

const Shape& Graph::shape(Expr e) const { return check(e).shape; }

bool Graph::requires_grad(Expr e) const { return check(e).requires_grad; }

std::span<const real> Graph::grad(Expr e) const {
  const Node& n = check(e);
  if (n.op == Op::Parameter) return n.tensor->grad();
  return n.grad;
}

Expr Graph::input(std::vector<real> values) {
  Shape s{values.size(), 1};
  return input(s, std::move(values));
}

Expr Graph::input(Shape shape, std::vector<real> values) {
  if (shape.size() != values.size())
    throw DimensionError("input shape " + shape.str() + " does not match " +
                         std::to_string(values.size()) + " values");
  Node n;
  n.op = Op::Input;
  n.shape = shape;
  n.value = std::move(values);
  return push(std::move(n));
}

Expr Graph::zeros(std::size_t n) {
  return input(std::vector<real>(n, real(0)));
}

Expr Graph::parameter(Tensor& t) {
  auto it = parameter_nodes_.find(&t);
  if (it != parameter_nodes_.end()) return Expr{it->second};
  Node n;
  n.op = Op::Parameter;
  n.shape = t.shape();
  n.tensor = &t;
  n.requires_grad = record_ && t.requires_grad();
  Expr e = push(std::move(n));
  parameter_nodes_[&t] = e.id;
  return e;
}

Expr Graph::lookup(Tensor& table, std::size_t row) {
  if (row >= table.shape().rows)
    throw DimensionError("lookup row " + std::to_string(row) +
                         " outside table of shape " + table.shape().str());
  const std::size_t d = table.shape().cols;
  Node n;
  n.op = Op::Lookup;
  n.shape = Shape{d, 1};
  n.tensor = &table;
  n.aux = row;
  auto vals = table.values().subspan(row * d, d);
  n.value.assign(vals.begin(), vals.end());
  n.requires_grad = record_ && table.requires_grad();
  return push(std::move(n));
}

Expr Graph::affine(Expr w, Expr x, Expr b) {
  const Shape& sw = check(w).shape;
  const Shape& sx = check(x).shape;
  const Shape& sb = check(b).shape;
  if (sx.cols != 1 || sw.cols != sx.rows)
    throw DimensionError("affine: W " + sw.str() + " cannot multiply x " +
                         sx.str());
  if (sb.cols != 1 || sb.rows != sw.rows)
    throw DimensionError("affine: bias " + sb.str() + " does not match W " +
                         sw.str());
  Node n;
  n.op = Op::Affine;
  n.shape = Shape{sw.rows, 1};
  n.inputs = {w.id, x.id, b.id};
  n.value.resize(sw.rows);
  kernels::omp::matvec(value(w), sw.rows, sw.cols, value(x), value(b),
                       n.value);
  n.requires_grad = any_requires({w.id, x.id, b.id});
  return push(std::move(n));
}

Expr Graph::matvec(Expr w, Expr x) {
  const Shape& sw = check(w).shape;
  const Shape& sx = check(x).shape;
  if (sx.cols != 1 || sw.cols != sx.rows)
    throw DimensionError("matvec: W " + sw.str() + " cannot multiply x " +
                         sx.str());
  Node n;
  n.op = Op::MatVec;
  n.shape = Shape{sw.rows, 1};
  n.inputs = {w.id, x.id};
  n.value.resize(sw.rows);
  kernels::omp::matvec(value(w), sw.rows, sw.cols, value(x), {}, n.value);
  n.requires_grad = any_requires({w.id, x.id});
  return push(std::move(n));
}

namespace {

void require_same(const Shape& a, const Shape& b, const char* op) {
  if (!(a == b))
    throw DimensionError(std::string(op) + ": shapes " + a.str() + " and " +
                         b.str() + " differ");
}

}  // namespace

Expr Graph::add(Expr a, Expr b) {
  require_same(check(a).shape, check(b).shape, "add");
  Node n;
  n.op = Op::Add;
  n.shape = nodes_[a.id].shape;
  n.inputs = {a.id, b.id};
  auto va = value(a), vb = value(b);
  n.value.resize(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) n.value[i] = va[i] + vb[i];
  n.requires_grad = any_requires({a.id, b.id});
  return push(std::move(n));
}

Expr Graph::sub(Expr a, Expr b) {
  require_same(check(a).shape, check(b).shape, "sub");
  Node n;
  n.op = Op::Sub;
  n.shape = nodes_[a.id].shape;
  n.inputs = {a.id, b.id};
  auto va = value(a), vb = value(b);
  n.value.resize(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) n.value[i] = va[i] - vb[i];
  n.requires_grad = any_requires({a.id, b.id});
  return push(std::move(n));
}

Expr Graph::cmul(Expr a, Expr b) {
  require_same(check(a).shape, check(b).shape, "cmul");
  Node n;
  n.op = Op::CMul;
  n.shape = nodes_[a.id].shape;
  n.inputs = {a.id, b.id};
  auto va = value(a), vb = value(b);
  n.value.resize(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) n.value[i] = va[i] * vb[i];
  n.requires_grad = any_requires({a.id, b.id});
  return push(std::move(n));
}

Expr Graph::scale(Expr a, real factor) {
  Node n;
  n.op = Op::Scale;
  n.shape = check(a).shape;
  n.inputs = {a.id};
  n.factor = factor;
  auto va = value(a);
  n.value.resize(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) n.value[i] = va[i] * factor;
  n.requires_grad = any_requires({a.id});
  return push(std::move(n));
}

Expr Graph::tanh(Expr a) {
  Node n;
  n.op = Op::Tanh;
  n.shape = check(a).shape;
  n.inputs = {a.id};
  auto va = value(a);
  n.value.resize(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) n.value[i] = std::tanh(va[i]);
  n.requires_grad = any_requires({a.id});
  return push(std::move(n));
}

Expr Graph::sigmoid(Expr a) {
  Node n;
  n.op = Op::Sigmoid;
  n.shape = check(a).shape;
  n.inputs = {a.id};
  auto va = value(a);
  n.value.resize(va.size());
  for (std::size_t i = 0; i < va.size(); ++i)
    n.value[i] = real(1) / (real(1) + std::exp(-va[i]));
  n.requires_grad = any_requires({a.id});
  return push(std::move(n));
}

Expr Graph::concat(std::initializer_list<Expr> parts) {
  return concat(std::span<const Expr>(parts.begin(), parts.size()));
}

Expr Graph::concat(std::span<const Expr> parts) {
  if (parts.empty()) throw UsageError("concat: empty list of parts");
  Node n;
  n.op = Op::Concat;
  std::size_t total = 0;
  for (Expr p : parts) {
    const Shape& s = check(p).shape;
    if (s.cols != 1 || s.rows == 0)
      throw DimensionError("concat: part of shape " + s.str() +
                           " is not a non-empty vector");
    total += s.rows;
  }
  n.shape = Shape{total, 1};
  n.value.reserve(total);
  for (Expr p : parts) {
    auto v = value(p);
    n.value.insert(n.value.end(), v.begin(), v.end());
    n.inputs.push_back(p.id);
    n.requires_grad = n.requires_grad || nodes_[p.id].requires_grad;
  }
  return push(std::move(n));
}

Expr Graph::slice(Expr a, std::size_t offset, std::size_t length) {
  const Shape& s = check(a).shape;
  if (s.cols != 1 || offset + length > s.rows || length == 0)
    throw DimensionError("slice [" + std::to_string(offset) + ", +" +
                         std::to_string(length) + ") of " + s.str());
  Node n;
  n.op = Op::Slice;
  n.shape = Shape{length, 1};
  n.inputs = {a.id};
  n.aux = offset;
  auto v = value(a).subspan(offset, length);
  n.value.assign(v.begin(), v.end());
  n.requires_grad = any_requires({a.id});
  return push(std::move(n));
}

Expr Graph::gather(Expr a, std::vector<std::size_t> indices) {
  const Shape& s = check(a).shape;
  auto v = value(a);
  Node n;
  n.op = Op::Gather;
  n.shape = Shape{indices.size(), 1};
  n.inputs = {a.id};
  n.value.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= s.size())
      throw DimensionError("gather index " + std::to_string(indices[i]) +
                           " outside " + s.str());
    n.value[i] = v[indices[i]];
  }
  n.indices = std::move(indices);
  n.requires_grad = any_requires({a.id});
  return push(std::move(n));
}

Expr Graph::sum(Expr a) {
  Node n;
  n.op = Op::Sum;
  n.shape = Shape{1, 1};
  n.inputs = {a.id};
  real acc = 0;
  for (real x : value(a)) acc += x;
  n.value = {acc};
  n.requires_grad = any_requires({a.id});
  return push(std::move(n));
}

Expr Graph::pick(Expr a, std::size_t index) {
  const Shape& s = check(a).shape;
  if (index >= s.size())
    throw DimensionError("pick index " + std::to_string(index) + " outside " +
                         s.str());
  Node n;
  n.op = Op::Pick;
  n.shape = Shape{1, 1};
  n.inputs = {a.id};
  n.aux = index;
  n.value = {value(a)[index]};
  n.requires_grad = any_requires({a.id});
  return push(std::move(n));
}

Expr Graph::sum_of(std::span<const Expr> terms) {
  if (terms.empty()) throw UsageError("sum_of: no terms");
  const Shape s = check(terms[0]).shape;
  Node n;
  n.op = Op::SumOf;
  n.shape = s;
  n.value.assign(s.size(), real(0));
  for (Expr t : terms) {
    require_same(s, check(t).shape, "sum_of");
    auto v = value(t);
    for (std::size_t i = 0; i < v.size(); ++i) n.value[i] += v[i];
    n.inputs.push_back(t.id);
    n.requires_grad = n.requires_grad || nodes_[t.id].requires_grad;
  }
  return push(std::move(n));
}

std::span<real> Graph::grad_target(int id) {
  Node& n = nodes_[id];
  if (n.op == Op::Parameter) return n.tensor->dense_grad();
  if (n.grad.empty()) n.grad.assign(n.shape.size(), real(0));
  return n.grad;
}

void Graph::backward(Expr loss) {
  Node& root = check(loss);
  if (root.shape.size() != 1)
    throw UsageError("backward: loss must be a scalar, got shape " +
                     root.shape.str());
  if (!record_)
    throw UsageError("backward: graph was built without gradient recording");
  if (!root.requires_grad) return;
  grad_target(loss.id)[0] += real(1);

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.op == Op::Parameter || n.grad.empty()) continue;
    const std::span<const real> g = n.grad;
    auto needs = [&](std::size_t k) {
      return nodes_[n.inputs[k]].requires_grad;
    };

    switch (n.op) {
      case Op::Input:
      case Op::Parameter:
        break;
      case Op::Lookup: {
        auto target = n.tensor->row_grad(n.aux);
        for (std::size_t i = 0; i < g.size(); ++i) target[i] += g[i];
        break;
      }
      case Op::Affine:
      case Op::MatVec: {
        const int w = n.inputs[0], x = n.inputs[1];
        const Shape sw = nodes_[w].shape;
        if (needs(0))
          kernels::omp::outer_acc(g, value(Expr{x}), grad_target(w));
        if (needs(1))
          kernels::omp::matvec_transpose_acc(value(Expr{w}), sw.rows, sw.cols,
                                             g, grad_target(x));
        if (n.op == Op::Affine && needs(2)) {
          auto gb = grad_target(n.inputs[2]);
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        }
        break;
      }
      case Op::Add:
      case Op::Sub: {
        if (needs(0)) {
          auto ga = grad_target(n.inputs[0]);
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (needs(1)) {
          auto gb = grad_target(n.inputs[1]);
          if (n.op == Op::Add)
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
          else
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
        break;
      }
      case Op::CMul: {
        const int a = n.inputs[0], b = n.inputs[1];
        if (needs(0)) {
          auto vb = value(Expr{b});
          auto ga = grad_target(a);
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
        }
        if (needs(1)) {
          auto va = value(Expr{a});
          auto gb = grad_target(b);
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
        }
        break;
      }
      case Op::Scale: {
        auto ga = grad_target(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.factor;
        break;
      }
      case Op::Tanh: {
        auto ga = grad_target(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i)
          ga[i] += g[i] * (real(1) - n.value[i] * n.value[i]);
        break;
      }
      case Op::Sigmoid: {
        auto ga = grad_target(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i)
          ga[i] += g[i] * n.value[i] * (real(1) - n.value[i]);
        break;
      }
      case Op::Concat: {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const std::size_t len = nodes_[n.inputs[k]].shape.rows;
          if (needs(k)) {
            auto gp = grad_target(n.inputs[k]);
            for (std::size_t i = 0; i < len; ++i) gp[i] += g[offset + i];
          }
          offset += len;
        }
        break;
      }
      case Op::Slice: {
        auto ga = grad_target(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[n.aux + i] += g[i];
        break;
      }
      case Op::Gather: {
        auto ga = grad_target(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[n.indices[i]] += g[i];
        break;
      }
      case Op::Sum: {
        auto ga = grad_target(n.inputs[0]);
        for (real& v : ga) v += g[0];
        break;
      }
      case Op::Pick: {
        grad_target(n.inputs[0])[n.aux] += g[0];
        break;
      }
      case Op::SumOf: {
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          if (!needs(k)) continue;
          auto gp = grad_target(n.inputs[k]);
          for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
        }
        break;
      }
    }
  }
}

}  // namespace biparse
