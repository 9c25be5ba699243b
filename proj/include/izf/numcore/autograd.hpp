#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "izf/numcore/tensor.hpp"

namespace izf::numcore {

// Ordered record of the primitive operations that produced a tensor,
// restricted to the nodes reachable from it. Entries are kept in
// execution order; replay() walks them in reverse.
class ComputationTape {
 public:
  struct Entry {
    std::uint64_t sequence;
    const char* op;
    std::shared_ptr<detail::TensorImpl> output;
  };

  static ComputationTape record(const Tensor& root);

  std::span<const Entry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Propagates `seed` (the gradient of the root) to every leaf that requires
  // a gradient. Leaf gradients accumulate across calls. The optional visitor
  // observes the sequence number of each node as it is processed.
  void replay(std::span<const double> seed,
              std::vector<std::uint64_t>* visit_order = nullptr) const;

 private:
  std::shared_ptr<detail::TensorImpl> root_;
  std::vector<Entry> entries_;
};

// Accumulates d(loss)/d(t) into every requires_grad leaf t reachable from a
// scalar loss.
void backward(const Tensor& loss);

}  // namespace izf::numcore
