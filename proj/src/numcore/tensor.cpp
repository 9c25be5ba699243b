#include "izf/numcore/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "izf/errors.hpp"

namespace izf::numcore {

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows) throw DimensionError("row " + std::to_string(rows[i]) + " out of range");
    auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

namespace {

thread_local bool t_grad_enabled = true;
std::atomic<std::uint64_t> g_sequence{0};

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(values.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Tensor::Tensor() : impl_(std::make_shared<detail::TensorImpl>()) {
  impl_->shape = {0};
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->data.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

Tensor Tensor::from_matrix(const Matrix& m, bool requires_grad) {
  return from({m.rows, m.cols}, m.values, requires_grad);
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on tensor of shape " + shape_str(shape()));
  return impl_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on tensor of shape " + shape_str(shape()));
  return impl_->shape[1];
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

double Tensor::at(std::size_t i, std::size_t j) const { return impl_->data[i * cols() + j]; }

std::vector<double> Tensor::grad() const {
  if (impl_->grad.empty()) return std::vector<double>(numel(), 0.0);
  return impl_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(numel(), 0.0);
  return impl_->grad;
}

Tensor Tensor::detach() const { return from(shape(), impl_->data, false); }

Tensor Tensor::clone() const {
  Tensor t = from(shape(), impl_->data, impl_->requires_grad);
  return t;
}

Matrix Tensor::to_matrix() const {
  if (rank() != 2) throw DimensionError("to_matrix() on tensor of shape " + shape_str(shape()));
  return Matrix(rows(), cols(), impl_->data);
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

bool grad_mode_enabled() { return t_grad_enabled; }

Tensor make_result(Shape shape, std::vector<double> data, const char* op,
                   std::initializer_list<Tensor> inputs, detail::BackwardFn backward) {
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + " produced a non-finite value");
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);

  bool needs_grad = false;
  if (t_grad_enabled) {
    for (const auto& t : inputs) needs_grad = needs_grad || t.requires_grad();
  }
  if (needs_grad) {
    auto node = std::make_shared<detail::Node>();
    node->sequence = g_sequence.fetch_add(1, std::memory_order_relaxed);
    node->op = op;
    node->inputs.reserve(inputs.size());
    for (const auto& t : inputs) node->inputs.push_back(t.impl());
    node->backward = std::move(backward);
    impl->grad_fn = std::move(node);
    impl->requires_grad = true;
  }
  return Tensor(std::move(impl));
}

}  // namespace izf::numcore
