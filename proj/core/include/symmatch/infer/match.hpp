#pragma once

#include <Eigen/Core>
#include <vector>

#include "symmatch/geom/shape.hpp"
#include "symmatch/model/encoder.hpp"

namespace symmatch::infer {

enum class SearchMethod { exact, grid_bucket };

struct MatchResult {
  geom::PointMap map;
  std::vector<double> distances;  // embedding-space NN distance per source row
  double elapsed_ms = 0.0;
};

// Nearest-neighbour index over embedding rows. grid_bucket prunes with a
// coarse grid over the first three embedding dimensions; pruning is
// exactness-preserving, so results match the brute-force scan including the
// lowest-index tie rule.
class SearchIndex {
 public:
  static SearchIndex build(const Eigen::MatrixXd& targets, SearchMethod method);

  // (target row, Euclidean distance); ties resolve to the lowest row.
  std::pair<int, double> nearest(const Eigen::RowVectorXd& query) const;

  geom::PointMap match_all(const Eigen::MatrixXd& queries,
                           std::vector<double>* distances = nullptr) const;

 private:
  SearchMethod method_ = SearchMethod::exact;
  Eigen::MatrixXd targets_;
  // grid_bucket state
  double cell_ = 1.0;
  Eigen::RowVector3d origin_{0.0, 0.0, 0.0};
  Eigen::Vector3i grid_dims_{1, 1, 1};
  std::vector<std::vector<int>> cells_;
};

// Pairwise map at test time: embed both shapes and match each row of phi_x
// to its nearest row of phi_y.
MatchResult match(const model::EncoderParams& params, const geom::PointCloud& x,
                  const geom::PointCloud& y,
                  SearchMethod method = SearchMethod::exact);

// Self-symmetry map: nearest-neighbour search from the embedding of x into
// the embedding of its x-axis flip. The flip preserves indexing, so the
// result reads directly as a self-map on x.
MatchResult self_symmetry(const model::EncoderParams& params,
                          const geom::PointCloud& x,
                          SearchMethod method = SearchMethod::exact);

}  // namespace symmatch::infer
