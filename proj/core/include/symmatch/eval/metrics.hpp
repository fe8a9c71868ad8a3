#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "symmatch/geom/geodesics.hpp"
#include "symmatch/geom/shape.hpp"

namespace symmatch::eval {

// Geometry the per-point errors are measured on: mesh edge graph when faces
// exist, symmetrized k-NN graph otherwise. The normalizer is sqrt(surface
// area) for meshes and a bounding-box surrogate for bare clouds.
struct TargetGeometry {
  geom::EdgeGraph graph;
  geom::Points positions;
  double normalizer = 1.0;
  std::string normalizer_kind;  // "sqrt_mesh_area" or "sqrt_bbox_area_half"

  static TargetGeometry from_mesh(const geom::Mesh& mesh);
  static TargetGeometry from_cloud(const geom::PointCloud& cloud, int k);
};

struct EvalReport {
  double mean_geo_err_x100 = 0.0;
  std::vector<double> per_point_errors;           // normalized, x100
  std::vector<std::pair<double, double>> curve;   // (threshold, fraction <=)
  double normalizer = 1.0;
  std::string normalizer_kind;
  std::string note;
};

// Per-point-average geodesic distance between predicted and ground-truth
// images on the target geometry, area-normalized and multiplied by 100.
EvalReport geodesic_error(const geom::PointMap& pred, const geom::PointMap& gt,
                          const TargetGeometry& target);

enum class BaselineKind { random, identity };

// Reference maps evaluated under the same protocol: a uniformly random total
// map, or the identity self-map (for symmetry baselines).
EvalReport baseline(const geom::PointMap& gt, const TargetGeometry& target,
                    uint64_t seed, BaselineKind kind = BaselineKind::random);

inline EvalReport random_baseline(const geom::PointMap& gt,
                                  const TargetGeometry& target, uint64_t seed) {
  return baseline(gt, target, seed, BaselineKind::random);
}

// summary json + <prefix>.per_point.csv + <prefix>.curve.csv
void write_report(const std::string& path, const EvalReport& report);

}  // namespace symmatch::eval
