#include "symmatch/geom/geodesics.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace symmatch::geom {

void EdgeGraph::add_edge(int u, int v, double w) {
  adj[u].push_back({v, w});
  adj[v].push_back({u, w});
}

int EdgeGraph::component_count() const {
  std::vector<char> seen(n, 0);
  int components = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    stack.push_back(s);
    seen[s] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [v, w] : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  return components;
}

EdgeGraph mesh_edge_graph(const Mesh& mesh) {
  EdgeGraph g;
  g.n = mesh.vertex_count();
  g.adj.resize(g.n);
  // Collect undirected edges once.
  std::vector<std::pair<int, int>> edges;
  edges.reserve(3 * mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    for (int c = 0; c < 3; ++c) {
      int u = mesh.faces(f, c);
      int v = mesh.faces(f, (c + 1) % 3);
      edges.push_back({std::min(u, v), std::max(u, v)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (auto [u, v] : edges) {
    double w = (mesh.positions.row(u) - mesh.positions.row(v)).norm();
    g.add_edge(u, v, w);
  }
  return g;
}

EdgeGraph knn_graph(const PointCloud& cloud, int k) {
  const int n = cloud.size();
  if (k < 1) throw std::runtime_error("knn graph requires k >= 1");
  if (k >= n) throw std::runtime_error("knn graph requires k < point count");
  EdgeGraph g;
  g.n = n;
  g.adj.resize(n);
  std::vector<std::pair<int, int>> edges;
  std::vector<std::pair<double, int>> dist(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      dist[j] = {(cloud.positions.row(i) - cloud.positions.row(j)).squaredNorm(), j};
    dist[i].first = std::numeric_limits<double>::infinity();  // exclude self
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int m = 0; m < k; ++m) {
      int j = dist[m].second;
      edges.push_back({std::min(i, j), std::max(i, j)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (auto [u, v] : edges) {
    double w = (cloud.positions.row(u) - cloud.positions.row(v)).norm();
    g.add_edge(u, v, w);
  }
  return g;
}

Eigen::MatrixXd shortest_path_distances(const EdgeGraph& graph,
                                        const std::vector<int>& sources) {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd out(static_cast<long>(sources.size()), graph.n);
  std::vector<double> dist(graph.n);
  using Item = std::pair<double, int>;
  for (size_t s = 0; s < sources.size(); ++s) {
    int src = sources[s];
    if (src < 0 || src >= graph.n)
      throw std::runtime_error("geodesic source " + std::to_string(src) +
                               " outside graph of size " + std::to_string(graph.n));
    std::fill(dist.begin(), dist.end(), inf);
    dist[src] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (auto [v, w] : graph.adj[u]) {
        double nd = d + w;
        if (nd < dist[v]) {
          dist[v] = nd;
          pq.push({nd, v});
        }
      }
    }
    for (int v = 0; v < graph.n; ++v) out(static_cast<long>(s), v) = dist[v];
  }
  return out;
}

namespace {

void require_connected(const EdgeGraph& g, const char* what) {
  int c = g.component_count();
  if (c != 1)
    throw std::runtime_error(std::string(what) + " is disconnected (" +
                             std::to_string(c) + " components)");
}

}  // namespace

Eigen::MatrixXd geodesic_distances(const Mesh& mesh,
                                   const std::vector<int>& sources) {
  EdgeGraph g = mesh_edge_graph(mesh);
  require_connected(g, "mesh edge graph");
  return shortest_path_distances(g, sources);
}

Eigen::MatrixXd knn_graph_geodesics(const PointCloud& cloud, int k,
                                    const std::vector<int>& sources) {
  EdgeGraph g = knn_graph(cloud, k);
  require_connected(g, "k-NN graph");
  return shortest_path_distances(g, sources);
}

}  // namespace symmatch::geom
