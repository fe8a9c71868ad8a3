#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "symmatch/geom/shape.hpp"

namespace symmatch::geom {

// Undirected weighted graph in adjacency-list form.
struct EdgeGraph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;

  void add_edge(int u, int v, double w);
  int component_count() const;
};

// Graph over the mesh edges, weighted by Euclidean edge length.
EdgeGraph mesh_edge_graph(const Mesh& mesh);

// Symmetrized k-nearest-neighbour graph with Euclidean weights.
EdgeGraph knn_graph(const PointCloud& cloud, int k);

// Dijkstra from each source; row s of the result holds distances from
// sources[s] to every vertex. Unreachable vertices get +inf (the wrappers
// below reject disconnected inputs before this can happen).
Eigen::MatrixXd shortest_path_distances(const EdgeGraph& graph,
                                        const std::vector<int>& sources);

// Geodesic distances along mesh edges. Throws if the edge graph is
// disconnected, reporting the component count.
Eigen::MatrixXd geodesic_distances(const Mesh& mesh,
                                   const std::vector<int>& sources);

// Geodesics over the k-NN graph of a point cloud, for meshless evaluation.
Eigen::MatrixXd knn_graph_geodesics(const PointCloud& cloud, int k,
                                    const std::vector<int>& sources);

}  // namespace symmatch::geom
