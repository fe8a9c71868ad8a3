#include "symmatch/autodiff/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace symmatch::autodiff {

bool Tape::default_check_finite() {
#ifdef NDEBUG
  return false;
#else
  return true;
#endif
}

int Tensor::rows() const { return tape->at(node).rows; }
int Tensor::cols() const { return tape->at(node).cols; }

const std::vector<double>& Tensor::value() const { return tape->at(node).value; }
const std::vector<double>& Tensor::grad() const { return tape->at(node).grad; }

double Tensor::scalar() const {
  if (!is_scalar()) throw std::runtime_error("tensor is not a scalar");
  return value()[0];
}

Tensor Tape::emplace(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::leaf(int rows, int cols, const std::vector<double>& value) {
  if (static_cast<long>(value.size()) != static_cast<long>(rows) * cols)
    throw std::runtime_error("leaf data length does not match its shape");
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.value = value;
  n.needs_grad = true;
  return emplace(std::move(n));
}

Tensor Tape::constant(int rows, int cols, const std::vector<double>& value) {
  if (static_cast<long>(value.size()) != static_cast<long>(rows) * cols)
    throw std::runtime_error("constant data length does not match its shape");
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.value = value;
  n.needs_grad = false;
  return emplace(std::move(n));
}

std::vector<double>& Tape::grad_buffer(int node) {
  std::vector<double>& g = pass_grads_[static_cast<size_t>(node)];
  if (g.empty()) g.assign(at(node).value.size(), 0.0);
  return g;
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape != this) throw std::runtime_error("loss lives on another tape");
  const Node& top = at(loss.node);
  if (top.rows != 1 || top.cols != 1)
    throw std::runtime_error("backward expects a scalar loss");
  pass_grads_.assign(nodes_.size(), {});
  grad_buffer(loss.node)[0] = 1.0;
  for (int i = loss.node; i >= 0; --i) {
    Node& n = at(i);
    if (pass_grads_[static_cast<size_t>(i)].empty() || !n.backprop) continue;
    n.backprop(*this, i);
  }
  for (size_t i = 0; i < nodes_.size(); ++i) {
    std::vector<double>& pass = pass_grads_[i];
    if (pass.empty()) continue;
    Node& n = nodes_[i];
    if (n.backprop) {
      n.grad = std::move(pass);  // interior: last pass wins
    } else if (n.grad.empty()) {
      n.grad = std::move(pass);  // leaf: accumulate across passes
    } else {
      for (size_t e = 0; e < n.grad.size(); ++e) n.grad[e] += pass[e];
    }
  }
  pass_grads_.clear();
}

void Tape::reset_grads() {
  for (Node& n : nodes_) n.grad.clear();
}

void Tape::clear() {
  nodes_.clear();
  pass_grads_.clear();
}

void Tape::check_output(const Tensor& t, const char* op) {
  if (!check_finite) return;
  for (double v : at(t.node).value) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string("non-finite value produced by ") + op);
  }
}

}  // namespace symmatch::autodiff
