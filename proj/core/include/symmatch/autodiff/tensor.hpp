#pragma once

#include <functional>
#include <string>
#include <vector>

namespace symmatch::autodiff {

class Tape;

// Handle to a node on a tape. All tensors are dense row-major 2-D arrays of
// doubles; scalars are 1x1. Copying a Tensor copies the handle, not the data.
struct Tensor {
  Tape* tape = nullptr;
  int node = -1;

  int rows() const;
  int cols() const;
  long size() const { return static_cast<long>(rows()) * cols(); }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }

  const std::vector<double>& value() const;
  // Gradient of the last backward() target w.r.t. this tensor. Empty until
  // backward has reached this node.
  const std::vector<double>& grad() const;
  double scalar() const;
};

// Append-only record of a computation. Nodes are stored in topological order
// by construction; backward() walks them once in reverse. A tape and the
// tensors on it form a single-threaded unit.
class Tape {
 public:
  struct Node {
    int rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;  // allocated lazily during backward
    bool needs_grad = false;
    // Propagates this node's grad into its parents; empty for leaves.
    std::function<void(Tape&, int)> backprop;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input. `value` is copied row-major.
  Tensor leaf(int rows, int cols, const std::vector<double>& value);
  // Non-differentiable input (coordinates, ground-truth targets, ...).
  Tensor constant(int rows, int cols, const std::vector<double>& value);

  // Computes d(loss)/d(node) for every ancestor of `loss` that needs a
  // gradient. Each call runs on pass-local buffers: leaf gradients accumulate
  // across calls until reset_grads(), interior gradients reflect the last
  // call.
  void backward(const Tensor& loss);

  void reset_grads();
  // Drops all nodes; handles into this tape become invalid.
  void clear();

  size_t node_count() const { return nodes_.size(); }

  // When set, every op checks its output for NaN/Inf and throws. Defaults to
  // on in debug builds.
  static bool default_check_finite();
  bool check_finite = default_check_finite();

  // Internal: used by the op implementations during backward. grad_buffer
  // returns the pass-local gradient of a node, allocating zeros on demand;
  // pass_grad reads it (empty if the pass has not reached the node).
  Node& at(int i) { return nodes_[static_cast<size_t>(i)]; }
  const Node& at(int i) const { return nodes_[static_cast<size_t>(i)]; }
  Tensor emplace(Node node);
  std::vector<double>& grad_buffer(int node);
  const std::vector<double>& pass_grad(int node) const {
    return pass_grads_[static_cast<size_t>(node)];
  }
  void check_output(const Tensor& t, const char* op);

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> pass_grads_;
};

}  // namespace symmatch::autodiff
