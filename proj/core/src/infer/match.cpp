#include "symmatch/infer/match.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symmatch::infer {

namespace {

// Shared by both search paths so their floating-point results are identical.
double row_sqdist(const Eigen::MatrixXd& m, int row, const Eigen::RowVectorXd& q) {
  double s = 0.0;
  for (int c = 0; c < m.cols(); ++c) {
    double d = m(row, c) - q(c);
    s += d * d;
  }
  return s;
}

struct Best {
  double sqdist = std::numeric_limits<double>::infinity();
  int row = -1;

  void consider(double d, int j) {
    if (d < sqdist || (d == sqdist && j < row)) {
      sqdist = d;
      row = j;
    }
  }
};

}  // namespace

SearchIndex SearchIndex::build(const Eigen::MatrixXd& targets, SearchMethod method) {
  SearchIndex index;
  index.method_ = method;
  index.targets_ = targets;
  if (method == SearchMethod::exact || targets.rows() == 0) return index;

  const int sub = static_cast<int>(std::min<Eigen::Index>(3, targets.cols()));
  Eigen::RowVector3d lo = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d hi = Eigen::RowVector3d::Zero();
  for (int d = 0; d < sub; ++d) {
    lo(d) = targets.col(d).minCoeff();
    hi(d) = targets.col(d).maxCoeff();
  }
  double extent = (hi - lo).maxCoeff();
  int per_dim = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(targets.rows()))));
  per_dim = std::max(per_dim, 1);
  index.cell_ = extent > 0.0 ? extent / per_dim : 1.0;
  index.origin_ = lo;
  for (int d = 0; d < 3; ++d) {
    double e = d < sub ? hi(d) - lo(d) : 0.0;
    index.grid_dims_(d) =
        std::max(1, static_cast<int>(std::ceil(e / index.cell_)) + (e > 0.0 ? 0 : 1));
  }
  index.cells_.assign(static_cast<size_t>(index.grid_dims_.prod()), {});
  for (int i = 0; i < targets.rows(); ++i) {
    Eigen::Vector3i c = Eigen::Vector3i::Zero();
    for (int d = 0; d < sub; ++d) {
      int v = static_cast<int>(std::floor((targets(i, d) - lo(d)) / index.cell_));
      c(d) = std::min(std::max(v, 0), index.grid_dims_(d) - 1);
    }
    size_t flat = static_cast<size_t>((c(0) * index.grid_dims_(1) + c(1)) *
                                          index.grid_dims_(2) +
                                      c(2));
    index.cells_[flat].push_back(i);
  }
  return index;
}

std::pair<int, double> SearchIndex::nearest(const Eigen::RowVectorXd& query) const {
  if (targets_.rows() == 0)
    throw std::runtime_error("nearest-neighbour search over an empty target set");
  if (query.cols() != targets_.cols())
    throw std::runtime_error("query dimension does not match the index");

  Best best;
  if (method_ == SearchMethod::exact) {
    for (int j = 0; j < targets_.rows(); ++j)
      best.consider(row_sqdist(targets_, j, query), j);
    return {best.row, std::sqrt(best.sqdist)};
  }

  const int sub = static_cast<int>(std::min<Eigen::Index>(3, targets_.cols()));
  Eigen::Vector3i qc = Eigen::Vector3i::Zero();
  for (int d = 0; d < sub; ++d)
    qc(d) = static_cast<int>(std::floor((query(d) - origin_(d)) / cell_));

  int max_ring = 0;
  for (int d = 0; d < 3; ++d)
    max_ring = std::max({max_ring, qc(d), grid_dims_(d) - 1 - qc(d)});

  for (int r = 0; r <= max_ring; ++r) {
    // Visit every in-range cell at Chebyshev distance exactly r from qc.
    for (int a = qc(0) - r; a <= qc(0) + r; ++a) {
      if (a < 0 || a >= grid_dims_(0)) continue;
      for (int b = qc(1) - r; b <= qc(1) + r; ++b) {
        if (b < 0 || b >= grid_dims_(1)) continue;
        bool edge_ab = (std::abs(a - qc(0)) == r) || (std::abs(b - qc(1)) == r);
        for (int c = qc(2) - r; c <= qc(2) + r; ++c) {
          if (c < 0 || c >= grid_dims_(2)) continue;
          if (!edge_ab && std::abs(c - qc(2)) != r) continue;
          size_t flat =
              static_cast<size_t>((a * grid_dims_(1) + b) * grid_dims_(2) + c);
          for (int j : cells_[flat]) best.consider(row_sqdist(targets_, j, query), j);
        }
      }
    }
    // Cells beyond ring r lie outside the box B_r around the query cell;
    // their subspace distance is at least the query's margin to that box.
    double margin = std::numeric_limits<double>::infinity();
    for (int d = 0; d < sub; ++d) {
      double lo_face = origin_(d) + (qc(d) - r) * cell_;
      double hi_face = origin_(d) + (qc(d) + r + 1) * cell_;
      margin = std::min({margin, query(d) - lo_face, hi_face - query(d)});
    }
    if (best.row >= 0 && margin > 0.0 && best.sqdist <= margin * margin) break;
  }
  return {best.row, std::sqrt(best.sqdist)};
}

geom::PointMap SearchIndex::match_all(const Eigen::MatrixXd& queries,
                                      std::vector<double>* distances) const {
  geom::PointMap map;
  map.source_size = static_cast<int>(queries.rows());
  map.target_size = static_cast<int>(targets_.rows());
  map.targets.resize(map.source_size);
  if (distances) distances->resize(map.source_size);
  for (int i = 0; i < queries.rows(); ++i) {
    auto [row, dist] = nearest(queries.row(i));
    map.targets[static_cast<size_t>(i)] = row;
    if (distances) (*distances)[static_cast<size_t>(i)] = dist;
  }
  return map;
}

namespace {

MatchResult match_embeddings(const Eigen::MatrixXd& phi_x,
                             const Eigen::MatrixXd& phi_y, SearchMethod method,
                             std::chrono::steady_clock::time_point t0) {
  MatchResult result;
  SearchIndex index = SearchIndex::build(phi_y, method);
  result.map = index.match_all(phi_x, &result.distances);
  auto t1 = std::chrono::steady_clock::now();
  result.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return result;
}

}  // namespace

MatchResult match(const model::EncoderParams& params, const geom::PointCloud& x,
                  const geom::PointCloud& y, SearchMethod method) {
  auto t0 = std::chrono::steady_clock::now();
  Eigen::MatrixXd phi_x = model::embed_values(params, x);
  Eigen::MatrixXd phi_y = model::embed_values(params, y);
  return match_embeddings(phi_x, phi_y, method, t0);
}

MatchResult self_symmetry(const model::EncoderParams& params,
                          const geom::PointCloud& x, SearchMethod method) {
  auto t0 = std::chrono::steady_clock::now();
  Eigen::MatrixXd phi_x = model::embed_values(params, x);
  Eigen::MatrixXd phi_xf = model::embed_values(params, geom::flip_x(x));
  return match_embeddings(phi_x, phi_xf, method, t0);
}

}  // namespace symmatch::infer
