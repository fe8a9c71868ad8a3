#include "symmatch/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "symmatch/common/rng.hpp"

namespace symmatch::eval {

TargetGeometry TargetGeometry::from_mesh(const geom::Mesh& mesh) {
  TargetGeometry t;
  t.graph = geom::mesh_edge_graph(mesh);
  int c = t.graph.component_count();
  if (c != 1)
    throw std::runtime_error("target mesh is disconnected (" + std::to_string(c) +
                             " components)");
  t.positions = mesh.positions;
  t.normalizer = std::sqrt(mesh.surface_area());
  t.normalizer_kind = "sqrt_mesh_area";
  if (!(t.normalizer > 0.0))
    throw std::runtime_error("target mesh has zero surface area");
  return t;
}

TargetGeometry TargetGeometry::from_cloud(const geom::PointCloud& cloud, int k) {
  TargetGeometry t;
  t.graph = geom::knn_graph(cloud, k);
  int c = t.graph.component_count();
  if (c != 1)
    throw std::runtime_error("target k-NN graph is disconnected (" +
                             std::to_string(c) +
                             " components); raise k or clean the cloud");
  t.positions = cloud.positions;
  Eigen::RowVector3d lo = cloud.positions.colwise().minCoeff();
  Eigen::RowVector3d hi = cloud.positions.colwise().maxCoeff();
  Eigen::RowVector3d e = hi - lo;
  double box_area = 2.0 * (e(0) * e(1) + e(1) * e(2) + e(0) * e(2));
  t.normalizer = std::sqrt(box_area) / 2.0;
  t.normalizer_kind = "sqrt_bbox_area_half";
  if (!(t.normalizer > 0.0))
    throw std::runtime_error("degenerate cloud: bounding box has zero area");
  return t;
}

namespace {

EvalReport evaluate_map(const geom::PointMap& pred, const geom::PointMap& gt,
                        const TargetGeometry& target) {
  if (pred.source_size != gt.source_size)
    throw std::runtime_error("prediction and ground truth have different sources (" +
                             std::to_string(pred.source_size) + " vs " +
                             std::to_string(gt.source_size) + ")");
  if (pred.target_size != target.graph.n || gt.target_size != target.graph.n)
    throw std::runtime_error("maps do not land on the evaluation geometry");
  pred.validate();
  gt.validate();

  // One Dijkstra per distinct ground-truth image.
  std::vector<int> unique_gt = gt.targets;
  std::sort(unique_gt.begin(), unique_gt.end());
  unique_gt.erase(std::unique(unique_gt.begin(), unique_gt.end()), unique_gt.end());
  Eigen::MatrixXd dist = geom::shortest_path_distances(target.graph, unique_gt);

  EvalReport report;
  report.normalizer = target.normalizer;
  report.normalizer_kind = target.normalizer_kind;
  report.per_point_errors.resize(pred.source_size);
  double sum = 0.0;
  for (int i = 0; i < pred.source_size; ++i) {
    int row = static_cast<int>(
        std::lower_bound(unique_gt.begin(), unique_gt.end(), gt.targets[i]) -
        unique_gt.begin());
    double d = dist(row, pred.targets[i]);
    if (!std::isfinite(d))
      throw std::runtime_error("unreachable vertex during evaluation");
    double err = d / target.normalizer * 100.0;
    report.per_point_errors[i] = err;
    sum += err;
  }
  report.mean_geo_err_x100 = sum / pred.source_size;

  std::vector<double> sorted = report.per_point_errors;
  std::sort(sorted.begin(), sorted.end());
  report.curve.reserve(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    report.curve.push_back({sorted[i], static_cast<double>(i + 1) / sorted.size()});
  }
  return report;
}

}  // namespace

EvalReport geodesic_error(const geom::PointMap& pred, const geom::PointMap& gt,
                          const TargetGeometry& target) {
  return evaluate_map(pred, gt, target);
}

EvalReport baseline(const geom::PointMap& gt, const TargetGeometry& target,
                    uint64_t seed, BaselineKind kind) {
  geom::PointMap pred;
  pred.source_size = gt.source_size;
  pred.target_size = gt.target_size;
  pred.targets.resize(gt.source_size);
  if (kind == BaselineKind::identity) {
    if (gt.source_size != gt.target_size)
      throw std::runtime_error("identity baseline needs a self-map ground truth");
    for (int i = 0; i < gt.source_size; ++i) pred.targets[i] = i;
  } else {
    Rng rng(seed);
    for (int i = 0; i < gt.source_size; ++i)
      pred.targets[i] =
          static_cast<int>(rng.bounded(static_cast<uint64_t>(gt.target_size)));
  }
  EvalReport report = evaluate_map(pred, gt, target);
  report.note = kind == BaselineKind::identity ? "identity baseline" : "random baseline";
  return report;
}

void write_report(const std::string& path, const EvalReport& report) {
  nlohmann::json summary{
      {"mean_geo_err_x100", report.mean_geo_err_x100},
      {"points", report.per_point_errors.size()},
      {"normalizer", report.normalizer},
      {"normalizer_kind", report.normalizer_kind},
      {"normalizer_note",
       "x100 scores are comparable only under the same area normalizer; "
       "cross-tool comparison of absolute values is approximate"},
      {"per_point_csv", path + ".per_point.csv"},
      {"curve_csv", path + ".curve.csv"},
  };
  if (!report.note.empty()) summary["note"] = report.note;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report " + path);
  out << summary.dump(2) << "\n";

  std::FILE* pp = std::fopen((path + ".per_point.csv").c_str(), "w");
  if (!pp) throw std::runtime_error("cannot write per-point errors");
  std::fprintf(pp, "index,geo_err_x100\n");
  for (size_t i = 0; i < report.per_point_errors.size(); ++i)
    std::fprintf(pp, "%zu,%.17g\n", i, report.per_point_errors[i]);
  std::fclose(pp);

  std::FILE* cv = std::fopen((path + ".curve.csv").c_str(), "w");
  if (!cv) throw std::runtime_error("cannot write error curve");
  std::fprintf(cv, "threshold,fraction\n");
  for (auto [thr, frac] : report.curve) std::fprintf(cv, "%.17g,%.17g\n", thr, frac);
  std::fclose(cv);
}

}  // namespace symmatch::eval
