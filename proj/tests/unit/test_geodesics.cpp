#include <doctest.h>

#include "support/oracles.hpp"
#include "symmatch/geom/geodesics.hpp"

using namespace symmatch;

TEST_CASE("geodesics: three collinear unit-spaced vertices") {
  geom::Mesh mesh;
  mesh.positions.resize(3, 3);
  mesh.positions << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  mesh.faces.resize(1, 3);
  mesh.faces << 0, 1, 2;
  Eigen::MatrixXd d = geom::geodesic_distances(mesh, {0, 1, 2});
  CHECK(d(0, 2) == doctest::Approx(2.0));
  for (int i = 0; i < 3; ++i) CHECK(d(i, i) == 0.0);
}

TEST_CASE("geodesics: disconnected mesh reports component count") {
  geom::Mesh mesh;
  mesh.positions.resize(6, 3);
  mesh.positions << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 5, 5, 6, 5, 5, 5, 6, 5;
  mesh.faces.resize(2, 3);
  mesh.faces << 0, 1, 2, 3, 4, 5;
  CHECK_THROWS_WITH_AS(geom::geodesic_distances(mesh, {0}),
                       doctest::Contains("2 components"), std::runtime_error);
}

TEST_CASE("geodesics: Dijkstra equals Floyd-Warshall exactly on dyadic weights") {
  // Edge weights snapped to multiples of 2^-20 keep every path sum exact in
  // double, so the two algorithms must agree bit for bit.
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 10 + static_cast<int>(rng.bounded(41));
    geom::Mesh mesh = oracles::random_connected_mesh(rng, n);
    geom::EdgeGraph g = oracles::dyadic_weights(geom::mesh_edge_graph(mesh));
    REQUIRE(g.component_count() == 1);
    std::vector<int> sources(n);
    for (int i = 0; i < n; ++i) sources[i] = i;
    Eigen::MatrixXd dj = geom::shortest_path_distances(g, sources);
    Eigen::MatrixXd fw = oracles::floyd_warshall(g);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(dj(i, j) == fw(i, j));
  }
}

TEST_CASE("geodesics: triangle inequality on sampled triples") {
  Rng rng(77);
  geom::Mesh mesh = oracles::random_connected_mesh(rng, 50);
  geom::EdgeGraph g = oracles::dyadic_weights(geom::mesh_edge_graph(mesh));
  std::vector<int> all(50);
  for (int i = 0; i < 50; ++i) all[i] = i;
  Eigen::MatrixXd d = geom::shortest_path_distances(g, all);
  for (int t = 0; t < 2000; ++t) {
    int i = static_cast<int>(rng.bounded(50));
    int j = static_cast<int>(rng.bounded(50));
    int k = static_cast<int>(rng.bounded(50));
    CHECK(d(i, j) <= d(i, k) + d(k, j));
  }
}

TEST_CASE("geodesics: symmetric distances on raw meshes") {
  Rng rng(5150);
  geom::Mesh mesh = oracles::random_connected_mesh(rng, 30);
  std::vector<int> all(30);
  for (int i = 0; i < 30; ++i) all[i] = i;
  Eigen::MatrixXd d = geom::geodesic_distances(mesh, all);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j)
      CHECK(d(i, j) == doctest::Approx(d(j, i)).epsilon(1e-12));
}

TEST_CASE("knn geodesics: dense line recovers arc length") {
  geom::Points pts(50, 3);
  for (int i = 0; i < 50; ++i) pts.row(i) << 0.1 * i, 0, 0;
  geom::PointCloud line = geom::PointCloud::from_positions(pts);
  Eigen::MatrixXd d = geom::knn_graph_geodesics(line, 2, {0});
  CHECK(d(0, 49) == doctest::Approx(4.9));
  CHECK(d(0, 0) == 0.0);
}

TEST_CASE("knn geodesics: spiral matches brute-force shortest paths") {
  Rng rng(404);
  geom::Points pts(40, 3);
  for (int i = 0; i < 40; ++i) {
    double t = 0.35 * i;
    pts.row(i) << std::cos(t), std::sin(t), 0.08 * i;
  }
  geom::PointCloud spiral = geom::PointCloud::from_positions(pts);
  geom::EdgeGraph g = oracles::dyadic_weights(geom::knn_graph(spiral, 3));
  REQUIRE(g.component_count() == 1);
  std::vector<int> all(40);
  for (int i = 0; i < 40; ++i) all[i] = i;
  Eigen::MatrixXd dj = geom::shortest_path_distances(g, all);
  Eigen::MatrixXd fw = oracles::floyd_warshall(g);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) CHECK(dj(i, j) == fw(i, j));
}

TEST_CASE("knn geodesics: disconnected graph is an error") {
  geom::Points pts(8, 3);
  for (int i = 0; i < 4; ++i) pts.row(i) << 0.1 * i, 0, 0;
  for (int i = 4; i < 8; ++i) pts.row(i) << 100 + 0.1 * i, 0, 0;
  geom::PointCloud two_clumps = geom::PointCloud::from_positions(pts);
  CHECK_THROWS_WITH_AS(geom::knn_graph_geodesics(two_clumps, 2, {0}),
                       doctest::Contains("disconnected"), std::runtime_error);
}
