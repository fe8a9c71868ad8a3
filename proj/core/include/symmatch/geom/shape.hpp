#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "symmatch/common/rng.hpp"

namespace symmatch::geom {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3>;

// A set of 3D points. `ids` tracks the index each point had in the shape it
// was sampled from; for a freshly loaded shape ids is 0..n-1.
struct PointCloud {
  Points positions;
  std::vector<int> ids;

  int size() const { return static_cast<int>(positions.rows()); }

  static PointCloud from_positions(Points p);
};

// Triangle mesh. Faces are only needed for geodesic evaluation; the learning
// pipeline itself never looks at connectivity.
struct Mesh {
  Points positions;
  Faces faces;

  int vertex_count() const { return static_cast<int>(positions.rows()); }
  int face_count() const { return static_cast<int>(faces.rows()); }

  PointCloud cloud() const { return PointCloud::from_positions(positions); }
  double surface_area() const;
};

// Total vertex-to-vertex map: targets[i] is the image of source vertex i.
struct PointMap {
  int source_size = 0;
  int target_size = 0;
  std::vector<int> targets;

  static PointMap identity(int n);
  void validate() const;  // throws if not total / out of range
};

// Recovers the original frame: original = normalized * scale + translation.
struct Normalization {
  double scale = 1.0;
  Eigen::RowVector3d translation{0.0, 0.0, 0.0};
};

struct NormalizedCloud {
  PointCloud cloud;
  Normalization transform;
};

// Center on the centroid and scale so the farthest point has norm 1.
// Throws if all points coincide.
NormalizedCloud normalize(const PointCloud& shape);

// Reflect across the x=0 plane. Exact involution: coordinates are negated
// bitwise, vertex order is preserved.
PointCloud flip_x(const PointCloud& shape);

// Uniform sampling without replacement; ids compose through the input's ids.
PointCloud sample(const PointCloud& shape, int count, Rng& rng);

// Ground-truth target coordinates for a set of sampled source vertices:
// row i is the full-resolution position of map.targets[source_ids[i]].
Points restrict_map(const PointMap& map, const std::vector<int>& source_ids,
                    const PointCloud& target_full);

// Restrict a self-map on the full shape to a sample of it. The image of
// sampled point i is the sampled point closest (in Euclidean distance on the
// full shape) to the full-resolution image of i; ties break to the lowest
// sample index.
PointMap restrict_sym_map(const PointMap& sym, const PointCloud& sampled,
                          const PointCloud& full);

}  // namespace symmatch::geom
