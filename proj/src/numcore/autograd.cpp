#include "izf/numcore/autograd.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "izf/errors.hpp"

namespace izf::numcore {

ComputationTape ComputationTape::record(const Tensor& root) {
  ComputationTape tape;
  tape.root_ = root.impl();

  std::unordered_set<const detail::TensorImpl*> visited;
  std::vector<std::shared_ptr<detail::TensorImpl>> stack;
  if (root.impl()->grad_fn) stack.push_back(root.impl());
  while (!stack.empty()) {
    auto impl = std::move(stack.back());
    stack.pop_back();
    if (!visited.insert(impl.get()).second) continue;
    tape.entries_.push_back({impl->grad_fn->sequence, impl->grad_fn->op, impl});
    for (const auto& in : impl->grad_fn->inputs) {
      if (in->grad_fn && !visited.contains(in.get())) stack.push_back(in);
    }
  }
  std::sort(tape.entries_.begin(), tape.entries_.end(),
            [](const Entry& a, const Entry& b) { return a.sequence < b.sequence; });
  return tape;
}

void ComputationTape::replay(std::span<const double> seed, std::vector<std::uint64_t>* visit_order) const {
  if (seed.size() != root_->data.size()) {
    throw DimensionError("backward seed length does not match the root tensor");
  }
  if (!root_->grad_fn) {
    if (root_->requires_grad) {
      if (root_->grad.empty()) root_->grad.assign(root_->data.size(), 0.0);
      for (std::size_t i = 0; i < seed.size(); ++i) root_->grad[i] += seed[i];
    }
    return;
  }

  // Gradients of intermediate results live only for the duration of the replay.
  std::unordered_map<const detail::TensorImpl*, std::vector<double>> pending;
  pending[root_.get()].assign(seed.begin(), seed.end());

  std::vector<std::vector<double>> grad_in;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const auto& out = *it->output;
    auto found = pending.find(&out);
    if (found == pending.end()) continue;
    std::vector<double> grad_out = std::move(found->second);
    pending.erase(found);
    if (visit_order) visit_order->push_back(it->sequence);

    const auto& node = *out.grad_fn;
    grad_in.assign(node.inputs.size(), {});
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      if (node.inputs[k]->requires_grad) grad_in[k].assign(node.inputs[k]->data.size(), 0.0);
    }
    node.backward(node, out, grad_out, grad_in);

    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      if (grad_in[k].empty()) continue;
      auto& input = *node.inputs[k];
      std::vector<double>* target = nullptr;
      if (input.grad_fn) {
        auto& slot = pending[&input];
        if (slot.empty()) {
          slot = std::move(grad_in[k]);
          continue;
        }
        target = &slot;
      } else {
        if (input.grad.empty()) input.grad.assign(input.data.size(), 0.0);
        target = &input.grad;
      }
      for (std::size_t i = 0; i < grad_in[k].size(); ++i) (*target)[i] += grad_in[k][i];
    }
  }
}

void backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw ContractError("backward() requires a scalar loss, got shape " + shape_str(loss.shape()));
  }
  auto tape = ComputationTape::record(loss);
  if (tape.empty() && !loss.requires_grad()) {
    throw ContractError("backward() on a loss that does not depend on any tensor requiring gradients");
  }
  const double seed = 1.0;
  tape.replay(std::span<const double>(&seed, 1));
}

}  // namespace izf::numcore
