#include "symmatch/geom/shape.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace symmatch::geom {

PointCloud PointCloud::from_positions(Points p) {
  PointCloud c;
  c.positions = std::move(p);
  c.ids.resize(c.positions.rows());
  std::iota(c.ids.begin(), c.ids.end(), 0);
  return c;
}

double Mesh::surface_area() const {
  double area = 0.0;
  for (int f = 0; f < face_count(); ++f) {
    Eigen::Vector3d a = positions.row(faces(f, 0));
    Eigen::Vector3d b = positions.row(faces(f, 1));
    Eigen::Vector3d c = positions.row(faces(f, 2));
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

PointMap PointMap::identity(int n) {
  PointMap m;
  m.source_size = n;
  m.target_size = n;
  m.targets.resize(n);
  std::iota(m.targets.begin(), m.targets.end(), 0);
  return m;
}

void PointMap::validate() const {
  if (static_cast<int>(targets.size()) != source_size)
    throw std::runtime_error("point map is not total: " +
                             std::to_string(targets.size()) + " entries for " +
                             std::to_string(source_size) + " source vertices");
  for (int i = 0; i < source_size; ++i) {
    if (targets[i] < 0 || targets[i] >= target_size)
      throw std::runtime_error("point map entry " + std::to_string(i) +
                               " = " + std::to_string(targets[i]) +
                               " is outside the target shape (size " +
                               std::to_string(target_size) + ")");
  }
}

NormalizedCloud normalize(const PointCloud& shape) {
  if (shape.size() < 1) throw std::runtime_error("cannot normalize an empty cloud");
  Eigen::RowVector3d centroid = shape.positions.colwise().mean();
  Points centered = shape.positions.rowwise() - centroid;
  double max_norm = centered.rowwise().norm().maxCoeff();
  if (max_norm <= 0.0)
    throw std::runtime_error("cannot normalize: all points coincide");
  NormalizedCloud out;
  out.cloud.positions = centered / max_norm;
  out.cloud.ids = shape.ids;
  out.transform.scale = max_norm;
  out.transform.translation = centroid;
  return out;
}

PointCloud flip_x(const PointCloud& shape) {
  PointCloud out = shape;
  out.positions.col(0) = -out.positions.col(0);
  return out;
}

PointCloud sample(const PointCloud& shape, int count, Rng& rng) {
  const int n = shape.size();
  if (count < 1 || count > n)
    throw std::runtime_error("sample count " + std::to_string(count) +
                             " not in [1, " + std::to_string(n) + "]");
  // Partial Fisher-Yates over the index range.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(rng.bounded(static_cast<uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  PointCloud out;
  out.positions.resize(count, 3);
  out.ids.resize(count);
  for (int i = 0; i < count; ++i) {
    out.positions.row(i) = shape.positions.row(idx[i]);
    out.ids[i] = shape.ids[idx[i]];
  }
  return out;
}

Points restrict_map(const PointMap& map, const std::vector<int>& source_ids,
                    const PointCloud& target_full) {
  if (map.target_size != target_full.size())
    throw std::runtime_error("map target size " + std::to_string(map.target_size) +
                             " does not match target shape size " +
                             std::to_string(target_full.size()));
  Points out(static_cast<int>(source_ids.size()), 3);
  for (size_t i = 0; i < source_ids.size(); ++i) {
    int s = source_ids[i];
    if (s < 0 || s >= map.source_size)
      throw std::runtime_error("source id " + std::to_string(s) +
                               " outside map source (size " +
                               std::to_string(map.source_size) + ")");
    out.row(static_cast<int>(i)) = target_full.positions.row(map.targets[s]);
  }
  return out;
}

PointMap restrict_sym_map(const PointMap& sym, const PointCloud& sampled,
                          const PointCloud& full) {
  const int s = sampled.size();
  if (s == 0) throw std::runtime_error("cannot restrict a map to an empty sample");
  if (sym.source_size != full.size() || sym.target_size != full.size())
    throw std::runtime_error("symmetry map is not a self-map on the full shape");
  PointMap out;
  out.source_size = s;
  out.target_size = s;
  out.targets.resize(s);
  for (int i = 0; i < s; ++i) {
    int full_id = sampled.ids[i];
    if (full_id < 0 || full_id >= full.size())
      throw std::runtime_error("sample id " + std::to_string(full_id) +
                               " outside the full shape");
    Eigen::RowVector3d image = full.positions.row(sym.targets[full_id]);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < s; ++j) {
      double d = (sampled.positions.row(j) - image).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    out.targets[i] = best;
  }
  return out;
}

}  // namespace symmatch::geom
