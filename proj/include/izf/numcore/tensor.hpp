#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace izf::numcore {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major matrix with value semantics. Used for datasets and other
// data that never takes part in differentiation.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> v);

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

namespace detail {

struct TensorImpl;
struct Node;

// Receives the output gradient and writes input gradients into `grad_in`.
// grad_in[k] is empty when input k does not need a gradient.
using BackwardFn = std::function<void(const Node& node, const TensorImpl& out,
                                      std::span<const double> grad_out,
                                      std::vector<std::vector<double>>& grad_in)>;

struct Node {
  std::uint64_t sequence = 0;
  const char* op = "";
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  BackwardFn backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::shared_ptr<Node> grad_fn;
};

}  // namespace detail

// Shared handle to a dense 64-bit array. Copies alias the same storage;
// use clone() for an independent copy. Results of operations record a node
// for reverse-mode differentiation when any input requires a gradient.
class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor from_matrix(const Matrix& m, bool requires_grad = false);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->data.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return impl_->data; }
  // Direct write access, intended for leaf tensors (parameters, inputs).
  std::span<double> mutable_data() { return impl_->data; }
  double item() const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value) { impl_->requires_grad = value; }
  bool is_leaf() const { return impl_->grad_fn == nullptr; }
  bool has_grad() const { return !impl_->grad.empty(); }
  // Accumulated gradient; all zeros when nothing has been accumulated.
  std::vector<double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad() { impl_->grad.clear(); }

  Tensor detach() const;
  Tensor clone() const;
  Matrix to_matrix() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Disables node recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// Builds the result tensor of a primitive: validates finiteness and, when
// gradients are needed, records a node on the tape.
Tensor make_result(Shape shape, std::vector<double> data, const char* op,
                   std::initializer_list<Tensor> inputs, detail::BackwardFn backward);

}  // namespace izf::numcore
