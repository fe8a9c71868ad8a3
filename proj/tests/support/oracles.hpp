#pragma once

// Independent oracles for the test suites. These deliberately avoid the
// library's own implementation paths: Floyd-Warshall vs Dijkstra, a plain
// double-loop scan vs the search index, central finite differences vs the
// tape's backward pass.

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "symmatch/autodiff/ops.hpp"
#include "symmatch/common/rng.hpp"
#include "symmatch/geom/geodesics.hpp"
#include "symmatch/geom/shape.hpp"

namespace oracles {

namespace ad = symmatch::autodiff;

// ---------------------------------------------------------------------------
// Gradient checking

struct LeafSpec {
  int rows = 0, cols = 0;
  std::vector<double> value;
};

using LossBuilder =
    std::function<ad::Tensor(ad::Tape&, std::vector<ad::Tensor>&)>;

// Largest relative error between the tape gradient and central finite
// differences over every element of every leaf. Elements where both gradients
// are below `dead_zone` are skipped (relative error is meaningless at 0).
inline double max_grad_rel_err(const std::vector<LeafSpec>& leaf_specs,
                               const LossBuilder& build, double h = 1e-5,
                               double dead_zone = 1e-10) {
  auto eval = [&](const std::vector<LeafSpec>& specs) {
    ad::Tape tape;
    std::vector<ad::Tensor> leaves;
    for (const LeafSpec& s : specs) leaves.push_back(tape.leaf(s.rows, s.cols, s.value));
    return build(tape, leaves).scalar();
  };

  // Analytic gradients.
  ad::Tape tape;
  std::vector<ad::Tensor> leaves;
  for (const LeafSpec& s : leaf_specs)
    leaves.push_back(tape.leaf(s.rows, s.cols, s.value));
  ad::Tensor loss = build(tape, leaves);
  tape.backward(loss);

  double worst = 0.0;
  for (size_t l = 0; l < leaf_specs.size(); ++l) {
    const std::vector<double>& analytic = leaves[l].grad();
    for (size_t e = 0; e < leaf_specs[l].value.size(); ++e) {
      std::vector<LeafSpec> bumped = leaf_specs;
      bumped[l].value[e] += h;
      double up = eval(bumped);
      bumped[l].value[e] -= 2.0 * h;
      double down = eval(bumped);
      double numeric = (up - down) / (2.0 * h);
      double a = analytic.empty() ? 0.0 : analytic[e];
      double denom = std::max(std::abs(a), std::abs(numeric));
      if (denom < dead_zone) continue;
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

inline std::vector<double> random_values(symmatch::Rng& rng, size_t count,
                                         double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Values in [-1,1] but bounded away from 0, for ops with a kink there.
inline std::vector<double> random_values_off_kink(symmatch::Rng& rng, size_t count,
                                                  double margin = 0.05) {
  std::vector<double> v(count);
  for (double& x : v) {
    double m = rng.uniform(margin, 1.0);
    x = rng.uniform() < 0.5 ? -m : m;
  }
  return v;
}

// ---------------------------------------------------------------------------
// All-pairs shortest paths, cubic time.

inline Eigen::MatrixXd floyd_warshall(const symmatch::geom::EdgeGraph& g) {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(g.n, g.n, inf);
  for (int i = 0; i < g.n; ++i) d(i, i) = 0.0;
  for (int u = 0; u < g.n; ++u)
    for (auto [v, w] : g.adj[u]) d(u, v) = std::min(d(u, v), w);
  for (int k = 0; k < g.n; ++k)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (d(i, k) + d(k, j) < d(i, j)) d(i, j) = d(i, k) + d(k, j);
  return d;
}

// Snaps every edge weight to a multiple of 2^-20. Path sums over such weights
// are exact in double, so Dijkstra and Floyd-Warshall agree bit for bit and
// the triangle inequality holds exactly, with no tolerance in the comparison.
inline symmatch::geom::EdgeGraph dyadic_weights(symmatch::geom::EdgeGraph g) {
  const double q = 1048576.0;  // 2^20
  for (auto& adj : g.adj)
    for (auto& [v, w] : adj) w = std::round(w * q) / q;
  return g;
}

// ---------------------------------------------------------------------------
// Brute-force nearest neighbour, lowest index on ties.

inline symmatch::geom::PointMap brute_force_nn(const Eigen::MatrixXd& queries,
                                               const Eigen::MatrixXd& targets) {
  symmatch::geom::PointMap map;
  map.source_size = static_cast<int>(queries.rows());
  map.target_size = static_cast<int>(targets.rows());
  map.targets.resize(map.source_size);
  for (int i = 0; i < queries.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (int j = 0; j < targets.rows(); ++j) {
      double d = 0.0;
      for (int c = 0; c < targets.cols(); ++c) {
        double diff = targets(j, c) - queries(i, c);
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    map.targets[static_cast<size_t>(i)] = best_j;
  }
  return map;
}

// ---------------------------------------------------------------------------
// Random connected meshes for the geodesic suites.

inline symmatch::geom::Mesh random_connected_mesh(symmatch::Rng& rng, int n) {
  symmatch::geom::Mesh mesh;
  mesh.positions.resize(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) mesh.positions(i, c) = rng.uniform(-1.0, 1.0);
  // Fan from a random spine plus random extra triangles; the spine keeps the
  // edge graph connected.
  std::vector<Eigen::RowVector3i> faces;
  for (int i = 0; i + 2 < n; ++i) faces.push_back({i, i + 1, i + 2});
  int extra = n;
  for (int e = 0; e < extra; ++e) {
    int a = static_cast<int>(rng.bounded(n));
    int b = static_cast<int>(rng.bounded(n));
    int c = static_cast<int>(rng.bounded(n));
    if (a == b || b == c || a == c) continue;
    faces.push_back({a, b, c});
  }
  mesh.faces.resize(static_cast<long>(faces.size()), 3);
  for (size_t f = 0; f < faces.size(); ++f) mesh.faces.row(static_cast<long>(f)) = faces[f];
  return mesh;
}

}  // namespace oracles
