#include "symmatch/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace symmatch::autodiff {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap value_map(const Tape& tape, int node) {
  const Tape::Node& n = tape.at(node);
  return ConstMatMap(n.value.data(), n.rows, n.cols);
}

ConstMatMap grad_map(const Tape& tape, int node) {
  const Tape::Node& n = tape.at(node);
  return ConstMatMap(tape.pass_grad(node).data(), n.rows, n.cols);
}

MatMap grad_buffer_map(Tape& tape, int node) {
  std::vector<double>& g = tape.grad_buffer(node);
  const Tape::Node& n = tape.at(node);
  return MatMap(g.data(), n.rows, n.cols);
}

Tape* shared_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw std::runtime_error(std::string(op) + ": operands live on different tapes");
  return a.tape;
}

bool needs_grad(const Tape& tape, int node) { return tape.at(node).needs_grad; }

[[noreturn]] void shape_fail(const char* op, const Tensor& a) {
  throw std::runtime_error(std::string(op) + ": unexpected shape " +
                           std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()));
}

[[noreturn]] void shape_fail2(const char* op, const Tensor& a, const Tensor& b) {
  throw std::runtime_error(std::string(op) + ": incompatible shapes " +
                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                           " and " + std::to_string(b.rows()) + "x" +
                           std::to_string(b.cols()));
}

Tensor make_node(Tape& tape, int rows, int cols, std::vector<double> value,
                 bool grad, std::function<void(Tape&, int)> backprop,
                 const char* op) {
  Tape::Node n;
  n.rows = rows;
  n.cols = cols;
  n.value = std::move(value);
  n.needs_grad = grad;
  if (grad) n.backprop = std::move(backprop);
  Tensor out = tape.emplace(std::move(n));
  tape.check_output(out, op);
  return out;
}

// Forward product with a fixed per-element accumulation order: every output
// row is summed over k strictly ascending, independent of the row's position.
// This is what makes the encoder exactly row-permutation equivariant; a
// library GEMM reorders partial sums per panel and breaks that at the last
// ulp. Backward has no such invariant and uses Eigen.
void rowwise_gemm(const double* __restrict a, const double* __restrict b,
                  double* __restrict c, int n, int big_k, int m) {
  constexpr int kPanel = 128;  // keeps the active B panel L2-resident
  for (int kp = 0; kp < big_k; kp += kPanel) {
    const int kend = std::min(kp + kPanel, big_k);
    for (int i = 0; i < n; ++i) {
      const double* ai = a + static_cast<size_t>(i) * big_k;
      double* ci = c + static_cast<size_t>(i) * m;
      int k = kp;
      for (; k + 8 <= kend; k += 8) {
        const double* bk = b + static_cast<size_t>(k) * m;
        for (int j = 0; j < m; ++j) {
          double s = ci[j];
          s += ai[k + 0] * bk[j];
          s += ai[k + 1] * bk[static_cast<size_t>(m) + j];
          s += ai[k + 2] * bk[2 * static_cast<size_t>(m) + j];
          s += ai[k + 3] * bk[3 * static_cast<size_t>(m) + j];
          s += ai[k + 4] * bk[4 * static_cast<size_t>(m) + j];
          s += ai[k + 5] * bk[5 * static_cast<size_t>(m) + j];
          s += ai[k + 6] * bk[6 * static_cast<size_t>(m) + j];
          s += ai[k + 7] * bk[7 * static_cast<size_t>(m) + j];
          ci[j] = s;
        }
      }
      for (; k < kend; ++k) {
        const double ak = ai[k];
        const double* bk = b + static_cast<size_t>(k) * m;
        for (int j = 0; j < m; ++j) ci[j] += ak * bk[j];
      }
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& tape = *shared_tape(a, b, "matmul");
  if (a.cols() != b.rows()) shape_fail2("matmul", a, b);
  const int p = a.rows(), q = a.cols(), r = b.cols();
  std::vector<double> out(static_cast<size_t>(p) * r, 0.0);
  rowwise_gemm(tape.at(a.node).value.data(), tape.at(b.node).value.data(),
               out.data(), p, q, r);
  int ai = a.node, bi = b.node;
  return make_node(
      tape, p, r, std::move(out), needs_grad(tape, ai) || needs_grad(tape, bi),
      [ai, bi](Tape& t, int self) {
        ConstMatMap dc = grad_map(t, self);
        if (t.at(ai).needs_grad)
          grad_buffer_map(t, ai).noalias() += dc * value_map(t, bi).transpose();
        if (t.at(bi).needs_grad)
          grad_buffer_map(t, bi).noalias() += value_map(t, ai).transpose() * dc;
      },
      "matmul");
}

Tensor row_softmax(const Tensor& logits, double tau) {
  if (!(tau > 0.0)) throw std::runtime_error("row_softmax: tau must be positive");
  Tape& tape = *logits.tape;
  const int n = logits.rows(), m = logits.cols();
  const std::vector<double>& v = logits.value();
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    const double* row = v.data() + static_cast<size_t>(i) * m;
    double* orow = out.data() + static_cast<size_t>(i) * m;
    double mx = row[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      orow[j] = std::exp((row[j] - mx) / tau);
      sum += orow[j];
    }
    double inv = 1.0 / sum;
    for (int j = 0; j < m; ++j) orow[j] *= inv;
  }
  int li = logits.node;
  return make_node(
      tape, n, m, std::move(out), needs_grad(tape, li),
      [li, tau](Tape& t, int self) {
        const Tape::Node& s = t.at(self);
        const std::vector<double>& pass = t.pass_grad(self);
        std::vector<double>& dl = t.grad_buffer(li);
        const int rows = s.rows, cols = s.cols;
        for (int i = 0; i < rows; ++i) {
          const double* sv = s.value.data() + static_cast<size_t>(i) * cols;
          const double* sg = pass.data() + static_cast<size_t>(i) * cols;
          double* out_g = dl.data() + static_cast<size_t>(i) * cols;
          double dot = 0.0;
          for (int j = 0; j < cols; ++j) dot += sg[j] * sv[j];
          for (int j = 0; j < cols; ++j)
            out_g[j] += sv[j] * (sg[j] - dot) / tau;
        }
      },
      "row_softmax");
}

Tensor relu(const Tensor& a) {
  Tape& tape = *a.tape;
  const std::vector<double>& v = a.value();
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  int ai = a.node;
  return make_node(
      tape, a.rows(), a.cols(), std::move(out), needs_grad(tape, ai),
      [ai](Tape& t, int self) {
        const std::vector<double>& sg = t.pass_grad(self);
        const std::vector<double>& av = t.at(ai).value;
        std::vector<double>& g = t.grad_buffer(ai);
        for (size_t i = 0; i < g.size(); ++i)
          if (av[i] > 0.0) g[i] += sg[i];
      },
      "relu");
}

namespace {

Tensor add_like(const Tensor& a, const Tensor& b, double sign, const char* op) {
  Tape& tape = *shared_tape(a, b, op);
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail2(op, a, b);
  const std::vector<double>& av = a.value();
  const std::vector<double>& bv = b.value();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] + sign * bv[i];
  int ai = a.node, bi = b.node;
  return make_node(
      tape, a.rows(), a.cols(), std::move(out),
      needs_grad(tape, ai) || needs_grad(tape, bi),
      [ai, bi, sign](Tape& t, int self) {
        const std::vector<double>& sg = t.pass_grad(self);
        if (t.at(ai).needs_grad) {
          std::vector<double>& g = t.grad_buffer(ai);
          for (size_t i = 0; i < g.size(); ++i) g[i] += sg[i];
        }
        if (t.at(bi).needs_grad) {
          std::vector<double>& g = t.grad_buffer(bi);
          for (size_t i = 0; i < g.size(); ++i) g[i] += sign * sg[i];
        }
      },
      op);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_like(a, b, 1.0, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_like(a, b, -1.0, "sub"); }

Tensor scale(const Tensor& a, double factor) {
  Tape& tape = *a.tape;
  const std::vector<double>& v = a.value();
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = factor * v[i];
  int ai = a.node;
  return make_node(
      tape, a.rows(), a.cols(), std::move(out), needs_grad(tape, ai),
      [ai, factor](Tape& t, int self) {
        const std::vector<double>& sg = t.pass_grad(self);
        std::vector<double>& g = t.grad_buffer(ai);
        for (size_t i = 0; i < g.size(); ++i) g[i] += factor * sg[i];
      },
      "scale");
}

Tensor transpose(const Tensor& a) {
  Tape& tape = *a.tape;
  const int n = a.rows(), m = a.cols();
  std::vector<double> out(a.value().size());
  MatMap(out.data(), m, n) = value_map(tape, a.node).transpose();
  int ai = a.node;
  return make_node(
      tape, m, n, std::move(out), needs_grad(tape, ai),
      [ai](Tape& t, int self) {
        grad_buffer_map(t, ai).noalias() += grad_map(t, self).transpose();
      },
      "transpose");
}

Tensor add_row_bias(const Tensor& a, const Tensor& bias) {
  Tape& tape = *shared_tape(a, bias, "add_row_bias");
  if (bias.rows() != 1 || bias.cols() != a.cols()) shape_fail2("add_row_bias", a, bias);
  const int n = a.rows(), d = a.cols();
  const std::vector<double>& av = a.value();
  const std::vector<double>& bv = bias.value();
  std::vector<double> out(av.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      out[static_cast<size_t>(i) * d + j] = av[static_cast<size_t>(i) * d + j] + bv[j];
  int ai = a.node, bi = bias.node;
  return make_node(
      tape, n, d, std::move(out), needs_grad(tape, ai) || needs_grad(tape, bi),
      [ai, bi](Tape& t, int self) {
        const Tape::Node& s = t.at(self);
        const std::vector<double>& sg = t.pass_grad(self);
        if (t.at(ai).needs_grad) {
          std::vector<double>& g = t.grad_buffer(ai);
          for (size_t i = 0; i < g.size(); ++i) g[i] += sg[i];
        }
        if (t.at(bi).needs_grad) {
          std::vector<double>& g = t.grad_buffer(bi);
          const int rows = s.rows, cols = s.cols;
          for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
              g[j] += sg[static_cast<size_t>(i) * cols + j];
        }
      },
      "add_row_bias");
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  Tape& tape = *shared_tape(a, b, "concat_cols");
  if (a.rows() != b.rows()) shape_fail2("concat_cols", a, b);
  const int n = a.rows(), p = a.cols(), q = b.cols();
  std::vector<double> out(static_cast<size_t>(n) * (p + q));
  const std::vector<double>& av = a.value();
  const std::vector<double>& bv = b.value();
  for (int i = 0; i < n; ++i) {
    double* row = out.data() + static_cast<size_t>(i) * (p + q);
    std::copy_n(av.data() + static_cast<size_t>(i) * p, p, row);
    std::copy_n(bv.data() + static_cast<size_t>(i) * q, q, row + p);
  }
  int ai = a.node, bi = b.node;
  return make_node(
      tape, n, p + q, std::move(out), needs_grad(tape, ai) || needs_grad(tape, bi),
      [ai, bi, p, q](Tape& t, int self) {
        const int n_rows = t.at(self).rows;
        const std::vector<double>& sg = t.pass_grad(self);
        if (t.at(ai).needs_grad) {
          std::vector<double>& g = t.grad_buffer(ai);
          for (int i = 0; i < n_rows; ++i)
            for (int j = 0; j < p; ++j)
              g[static_cast<size_t>(i) * p + j] +=
                  sg[static_cast<size_t>(i) * (p + q) + j];
        }
        if (t.at(bi).needs_grad) {
          std::vector<double>& g = t.grad_buffer(bi);
          for (int i = 0; i < n_rows; ++i)
            for (int j = 0; j < q; ++j)
              g[static_cast<size_t>(i) * q + j] +=
                  sg[static_cast<size_t>(i) * (p + q) + p + j];
        }
      },
      "concat_cols");
}

Tensor repeat_rows(const Tensor& row, int n) {
  Tape& tape = *row.tape;
  if (row.rows() != 1) shape_fail("repeat_rows", row);
  if (n < 1) throw std::runtime_error("repeat_rows: n must be positive");
  const int d = row.cols();
  const std::vector<double>& v = row.value();
  std::vector<double> out(static_cast<size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    std::copy_n(v.data(), d, out.data() + static_cast<size_t>(i) * d);
  int ri = row.node;
  return make_node(
      tape, n, d, std::move(out), needs_grad(tape, ri),
      [ri](Tape& t, int self) {
        const Tape::Node& s = t.at(self);
        const std::vector<double>& sg = t.pass_grad(self);
        std::vector<double>& g = t.grad_buffer(ri);
        const int rows = s.rows, cols = s.cols;
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j)
            g[j] += sg[static_cast<size_t>(i) * cols + j];
      },
      "repeat_rows");
}

Tensor global_max_pool(const Tensor& a) {
  Tape& tape = *a.tape;
  const int n = a.rows(), d = a.cols();
  if (n < 1) shape_fail("global_max_pool", a);
  const std::vector<double>& v = a.value();
  std::vector<double> out(d);
  auto argmax = std::make_shared<std::vector<int>>(d, 0);
  for (int j = 0; j < d; ++j) {
    double best = v[j];
    int best_i = 0;
    for (int i = 1; i < n; ++i) {
      double c = v[static_cast<size_t>(i) * d + j];
      if (c > best) {  // strict: ties keep the lowest row index
        best = c;
        best_i = i;
      }
    }
    out[j] = best;
    (*argmax)[j] = best_i;
  }
  int ai = a.node;
  return make_node(
      tape, 1, d, std::move(out), needs_grad(tape, ai),
      [ai, argmax](Tape& t, int self) {
        const std::vector<double>& sg = t.pass_grad(self);
        std::vector<double>& g = t.grad_buffer(ai);
        const int cols = t.at(self).cols;
        for (int j = 0; j < cols; ++j)
          g[static_cast<size_t>((*argmax)[j]) * cols + j] += sg[j];
      },
      "global_max_pool");
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& index) {
  Tape& tape = *a.tape;
  const int n = a.rows(), d = a.cols();
  for (int i : index)
    if (i < 0 || i >= n)
      throw std::runtime_error("gather_rows: index " + std::to_string(i) +
                               " outside [0, " + std::to_string(n) + ")");
  const int m = static_cast<int>(index.size());
  const std::vector<double>& v = a.value();
  std::vector<double> out(static_cast<size_t>(m) * d);
  for (int i = 0; i < m; ++i)
    std::copy_n(v.data() + static_cast<size_t>(index[i]) * d, d,
                out.data() + static_cast<size_t>(i) * d);
  int ai = a.node;
  auto idx = std::make_shared<std::vector<int>>(index);
  return make_node(
      tape, m, d, std::move(out), needs_grad(tape, ai),
      [ai, idx](Tape& t, int self) {
        const std::vector<double>& sg = t.pass_grad(self);
        std::vector<double>& g = t.grad_buffer(ai);
        const int cols = t.at(self).cols;
        for (size_t i = 0; i < idx->size(); ++i) {
          const double* src = sg.data() + i * cols;
          double* dst = g.data() + static_cast<size_t>((*idx)[i]) * cols;
          for (int j = 0; j < cols; ++j) dst[j] += src[j];
        }
      },
      "gather_rows");
}

Tensor scatter_cols(const Tensor& a, const std::vector<int>& index) {
  Tape& tape = *a.tape;
  const int n = a.rows(), d = a.cols();
  if (static_cast<int>(index.size()) != d)
    throw std::runtime_error("scatter_cols: index length " +
                             std::to_string(index.size()) +
                             " does not match column count " + std::to_string(d));
  for (int i : index)
    if (i < 0 || i >= d)
      throw std::runtime_error("scatter_cols: index " + std::to_string(i) +
                               " outside [0, " + std::to_string(d) + ")");
  const std::vector<double>& v = a.value();
  std::vector<double> out(v.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* src = v.data() + static_cast<size_t>(i) * d;
    double* dst = out.data() + static_cast<size_t>(i) * d;
    for (int j = 0; j < d; ++j) dst[index[j]] += src[j];
  }
  int ai = a.node;
  auto idx = std::make_shared<std::vector<int>>(index);
  return make_node(
      tape, n, d, std::move(out), needs_grad(tape, ai),
      [ai, idx](Tape& t, int self) {
        const Tape::Node& s = t.at(self);
        const std::vector<double>& sg = t.pass_grad(self);
        std::vector<double>& g = t.grad_buffer(ai);
        const int rows = s.rows, cols = s.cols;
        for (int i = 0; i < rows; ++i) {
          const double* src = sg.data() + static_cast<size_t>(i) * cols;
          double* dst = g.data() + static_cast<size_t>(i) * cols;
          for (int j = 0; j < cols; ++j) dst[j] += src[(*idx)[j]];
        }
      },
      "scatter_cols");
}

Tensor frobenius_sq(const Tensor& a) {
  Tape& tape = *a.tape;
  const std::vector<double>& v = a.value();
  double sum = 0.0;
  for (double x : v) sum += x * x;
  int ai = a.node;
  return make_node(
      tape, 1, 1, {sum}, needs_grad(tape, ai),
      [ai](Tape& t, int self) {
        double d = t.pass_grad(self)[0];
        const std::vector<double>& av = t.at(ai).value;
        std::vector<double>& g = t.grad_buffer(ai);
        for (size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * av[i] * d;
      },
      "frobenius_sq");
}

Tensor sum_all(const Tensor& a) {
  Tape& tape = *a.tape;
  const std::vector<double>& v = a.value();
  double sum = 0.0;
  for (double x : v) sum += x;
  int ai = a.node;
  return make_node(
      tape, 1, 1, {sum}, needs_grad(tape, ai),
      [ai](Tape& t, int self) {
        double d = t.pass_grad(self)[0];
        std::vector<double>& g = t.grad_buffer(ai);
        for (size_t i = 0; i < g.size(); ++i) g[i] += d;
      },
      "sum_all");
}

Tensor sqrt_eps(const Tensor& a, double eps) {
  Tape& tape = *a.tape;
  if (!a.is_scalar()) shape_fail("sqrt_eps", a);
  double root = std::sqrt(a.value()[0] + eps);
  int ai = a.node;
  return make_node(
      tape, 1, 1, {root}, needs_grad(tape, ai),
      [ai, root](Tape& t, int self) {
        t.grad_buffer(ai)[0] += t.pass_grad(self)[0] * 0.5 / root;
      },
      "sqrt_eps");
}

}  // namespace symmatch::autodiff
