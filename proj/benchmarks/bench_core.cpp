#include <benchmark/benchmark.h>

#include "symmatch/autodiff/ops.hpp"
#include "symmatch/common/rng.hpp"
#include "symmatch/geom/geodesics.hpp"
#include "symmatch/infer/match.hpp"
#include "symmatch/losses/losses.hpp"
#include "symmatch/model/encoder.hpp"
#include "symmatch/train/synthetic.hpp"

using namespace symmatch;
namespace ad = autodiff;

namespace {

geom::PointCloud random_cloud(Rng& rng, int n) {
  geom::Points pts(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) pts(i, c) = rng.uniform(-1.0, 1.0);
  return geom::PointCloud::from_positions(pts);
}

}  // namespace

static void BM_EmbedForward(benchmark::State& state) {
  Rng rng(1);
  const int n = static_cast<int>(state.range(0));
  model::EncoderParams params = model::init(model::ArchConfig{}, 3);
  geom::PointCloud cloud = random_cloud(rng, n);
  for (auto _ : state) {
    Eigen::MatrixXd phi = model::embed_values(params, cloud);
    benchmark::DoNotOptimize(phi.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EmbedForward)->Arg(300)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_EmbedBackward(benchmark::State& state) {
  Rng rng(2);
  const int n = static_cast<int>(state.range(0));
  model::EncoderParams params = model::init(model::ArchConfig{}, 3);
  geom::PointCloud cloud = random_cloud(rng, n);
  for (auto _ : state) {
    ad::Tape tape;
    tape.check_finite = false;
    model::StagedParams staged = model::stage(tape, params);
    ad::Tensor loss = ad::frobenius_sq(model::embed(tape, staged, cloud.positions));
    tape.backward(loss);
    benchmark::DoNotOptimize(staged.leaves[0].grad().data());
  }
}
BENCHMARK(BM_EmbedBackward)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_SoftCorrespondence(benchmark::State& state) {
  Rng rng(3);
  const int n = static_cast<int>(state.range(0));
  std::vector<double> x(static_cast<size_t>(n) * 20), y(static_cast<size_t>(n) * 20);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto& v : y) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    ad::Tape tape;
    tape.check_finite = false;
    ad::Tensor s = losses::soft_correspondence(tape.constant(n, 20, x),
                                               tape.constant(n, 20, y), 0.3);
    benchmark::DoNotOptimize(s.value().data());
  }
}
BENCHMARK(BM_SoftCorrespondence)->Arg(300)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_NearestNeighbour(benchmark::State& state) {
  Rng rng(4);
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd a(n, 20), b(n, 20);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 20; ++j) {
      a(i, j) = rng.uniform(-1.0, 1.0);
      b(i, j) = rng.uniform(-1.0, 1.0);
    }
  const infer::SearchMethod method =
      state.range(1) == 0 ? infer::SearchMethod::exact : infer::SearchMethod::grid_bucket;
  infer::SearchIndex index = infer::SearchIndex::build(b, method);
  for (auto _ : state) {
    geom::PointMap map = index.match_all(a);
    benchmark::DoNotOptimize(map.targets.data());
  }
}
BENCHMARK(BM_NearestNeighbour)
    ->Args({1000, 0})
    ->Args({1000, 1})
    ->Args({3000, 0})
    ->Args({3000, 1})
    ->Unit(benchmark::kMillisecond);

static void BM_GeodesicDistances(benchmark::State& state) {
  train::SyntheticPair pair =
      train::generate_synthetic_pair(5, static_cast<int>(state.range(0)), 0.2);
  std::vector<int> sources(32);
  for (size_t i = 0; i < sources.size(); ++i) sources[i] = static_cast<int>(i * 7);
  for (auto _ : state) {
    Eigen::MatrixXd d = geom::geodesic_distances(*pair.template_mesh, sources);
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_GeodesicDistances)->Arg(300)->Arg(1200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
