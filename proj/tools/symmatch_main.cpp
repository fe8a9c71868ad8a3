// symmatch command line: synthesize desk-scale datasets, train the embedding
// network, extract pairwise / self-symmetry maps, and score them.

#include <CLI11.hpp>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "symmatch/eval/metrics.hpp"
#include "symmatch/geom/io.hpp"
#include "symmatch/infer/match.hpp"
#include "symmatch/losses/losses.hpp"
#include "symmatch/model/encoder.hpp"
#include "symmatch/train/config.hpp"
#include "symmatch/train/dataset.hpp"
#include "symmatch/train/synthetic.hpp"
#include "symmatch/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace symmatch;

namespace {

struct SynthArgs {
  std::string out;
  int pairs = 8;
  int points = 3000;
  double amplitude = 0.2;
  uint64_t seed = 1;
  int holdout = 0;
};

void write_shape_entry(std::ostream& json, const std::string& name,
                       const std::string& file, const std::string& sym,
                       bool to_template, bool first) {
  if (!first) json << ",";
  json << "\n    {\"name\": \"" << name << "\", \"file\": \"" << file
       << "\", \"sym_map\": \"" << sym << "\"";
  if (to_template) json << ", \"map_to_template\": \"identity\"";
  json << "}";
}

void save_pair_shape(const fs::path& dir, const std::string& name,
                     const train::SyntheticPair& pair, bool deformed) {
  fs::path file = dir / (name + ".off");
  const auto& mesh = deformed ? pair.deformed_mesh : pair.template_mesh;
  const auto& cloud = deformed ? pair.deformed_cloud : pair.template_cloud;
  if (mesh)
    geom::save_shape(file.string(), *mesh);
  else
    geom::save_shape(file.string(), cloud.positions);
  geom::save_correspondence((dir / (name + ".sym")).string(), pair.sym_map);
}

int run_synth(const SynthArgs& args) {
  fs::create_directories(args.out);
  fs::path dir(args.out);

  auto write_index = [&](const std::string& index_name, int first, int count) {
    std::ofstream json(dir / index_name);
    json << "{\n  \"pairing\": \"to_template\",\n  \"template\": \"template\",\n"
         << "  \"shapes\": [";
    write_shape_entry(json, "template", "template.off", "template.sym", false, true);
    for (int i = first; i < first + count; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "pose_%03d", i);
      write_shape_entry(json, name, std::string(name) + ".off",
                        std::string(name) + ".sym", true, false);
    }
    json << "\n  ]\n}\n";
  };

  // Pair index i reuses the template of `seed` and warps with stream i.
  for (int i = 0; i < args.pairs + args.holdout; ++i) {
    train::SyntheticPair pair = train::generate_synthetic_pair(
        args.seed, static_cast<uint64_t>(i), args.points, args.amplitude);
    if (i == 0) save_pair_shape(dir, "template", pair, false);
    char name[32];
    std::snprintf(name, sizeof(name), "pose_%03d", i);
    save_pair_shape(dir, name, pair, true);
  }
  write_index("index.json", 0, args.pairs);
  if (args.holdout > 0) write_index("holdout.json", args.pairs, args.holdout);
  std::printf("synth: wrote %d training pair(s)%s under %s\n", args.pairs,
              args.holdout > 0 ? (" + " + std::to_string(args.holdout) + " holdout").c_str()
                               : "",
              args.out.c_str());
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string mode;
  bool deterministic = false;
};

int run_train(const TrainArgs& args) {
  train::TrainConfig cfg;
  if (!args.config.empty()) cfg = train::parse_config_file(args.config);
  if (!args.mode.empty()) cfg.loss.mode = losses::mode_from_string(args.mode);
  if (args.deterministic) cfg.deterministic = true;
  train::DatasetIndex index = train::DatasetIndex::load(args.data, cfg.index_file);
  train::TrainResult result = train::train(std::move(index), cfg, args.out);
  double final_nn = result.metrics.empty() ? 0.0 : result.metrics.back().l_nn;
  std::printf("train: %zu step(s), final L_NN %.6g, checkpoint %s, metrics %s\n",
              result.metrics.size(), final_nn, result.checkpoint_path.c_str(),
              result.metrics_path.c_str());
  return 0;
}

geom::PointCloud load_normalized(const std::string& path) {
  geom::LoadedShape shape = geom::load_shape(path);
  return geom::normalize(shape.cloud).cloud;
}

std::array<uint8_t, 3> rainbow(const Eigen::RowVector3d& p) {
  auto channel = [](double v) {
    double c = (v + 1.0) * 0.5;
    c = std::min(1.0, std::max(0.0, c));
    return static_cast<uint8_t>(std::lround(255.0 * c));
  };
  return {channel(p(0)), channel(p(1)), channel(p(2))};
}

struct MatchArgs {
  std::string ckpt, source, target, out, colors;
  bool zero_indexed = false;
  std::string method = "exact";
};

infer::SearchMethod parse_method(const std::string& m) {
  if (m == "exact") return infer::SearchMethod::exact;
  if (m == "grid_bucket") return infer::SearchMethod::grid_bucket;
  throw std::runtime_error("unknown search method '" + m + "'");
}

int run_match(const MatchArgs& args) {
  model::EncoderParams params = model::load_checkpoint(args.ckpt);
  geom::PointCloud source = load_normalized(args.source);
  geom::PointCloud target = load_normalized(args.target);
  infer::MatchResult result =
      infer::match(params, source, target, parse_method(args.method));
  geom::save_correspondence(args.out, result.map, !args.zero_indexed);
  if (!args.colors.empty()) {
    // pull the target's coordinate colors back onto the source
    std::vector<std::array<uint8_t, 3>> colors(source.size());
    for (int i = 0; i < source.size(); ++i)
      colors[i] = rainbow(target.positions.row(result.map.targets[i]));
    geom::save_ply_colored(args.colors, source.positions, colors);
  }
  std::printf("match: %d -> %d vertices in %.1f ms, map %s\n", source.size(),
              target.size(), result.elapsed_ms, args.out.c_str());
  return 0;
}

struct SymArgs {
  std::string ckpt, shape, out;
  bool zero_indexed = false;
  std::string method = "exact";
};

int run_symmetrize(const SymArgs& args) {
  model::EncoderParams params = model::load_checkpoint(args.ckpt);
  geom::PointCloud shape = load_normalized(args.shape);
  infer::MatchResult result =
      infer::self_symmetry(params, shape, parse_method(args.method));
  geom::save_correspondence(args.out, result.map, !args.zero_indexed);
  std::printf("symmetrize: %d vertices in %.1f ms, map %s\n", shape.size(),
              result.elapsed_ms, args.out.c_str());
  return 0;
}

struct EvalArgs {
  std::string pred, gt, target, out;
  int knn = 0;  // 0: use the mesh when the file has faces
  std::string baseline;
  uint64_t baseline_seed = 0;
  bool zero_indexed = false;
};

int run_eval(const EvalArgs& args) {
  geom::LoadedShape target = geom::load_shape(args.target);
  eval::TargetGeometry geometry =
      (target.mesh && args.knn == 0)
          ? eval::TargetGeometry::from_mesh(*target.mesh)
          : eval::TargetGeometry::from_cloud(target.cloud, args.knn > 0 ? args.knn : 8);

  geom::PointMap pred =
      geom::load_correspondence(args.pred, target.cloud.size(), !args.zero_indexed);
  geom::PointMap gt =
      geom::load_correspondence(args.gt, target.cloud.size(), !args.zero_indexed);
  eval::EvalReport report = eval::geodesic_error(pred, gt, geometry);
  eval::write_report(args.out, report);
  std::printf("eval: mean geodesic error x100 = %.6g (normalizer %s)\n",
              report.mean_geo_err_x100, report.normalizer_kind.c_str());

  if (!args.baseline.empty()) {
    eval::BaselineKind kind;
    if (args.baseline == "random") kind = eval::BaselineKind::random;
    else if (args.baseline == "identity") kind = eval::BaselineKind::identity;
    else throw std::runtime_error("unknown baseline '" + args.baseline + "'");
    eval::EvalReport base = eval::baseline(gt, geometry, args.baseline_seed, kind);
    eval::write_report(args.out + ".baseline", base);
    std::printf("eval: %s baseline mean x100 = %.6g\n", args.baseline.c_str(),
                base.mean_geo_err_x100);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "symmatch: joint self-symmetry detection and non-rigid shape matching\n"
      "via learned canonical embeddings"};
  app.footer(
      "File formats:\n"
      "  shapes          OFF, ascii PLY, OBJ (v/f records), triangles only\n"
      "  correspondences one integer per line; line i = 1-indexed target vertex\n"
      "                  of source vertex i (--zero-indexed switches); symmetry\n"
      "                  maps use the same format as self-maps\n"
      "  dataset         directory with index.json (shapes, pairing rule,\n"
      "                  optional sym_map / map_to_template entries; the string\n"
      "                  'identity' stands for the identity map)\n"
      "  train config    key = value with [arch] [loss] [train] [data] sections\n"
      "  checkpoint      text header + binary tensor blobs (+ .opt Adam state)\n"
      "  eval report     JSON summary + .per_point.csv + .curve.csv");
  app.require_subcommand(1);
  bool deterministic = false;
  app.add_flag("--deterministic", deterministic,
               "force single-threaded numerics (runs are then reproducible "
               "byte for byte under a fixed seed)");

  SynthArgs synth;
  CLI::App* cmd_synth =
      app.add_subcommand("synth", "generate a synthetic training dataset");
  cmd_synth->add_option("--out", synth.out, "output directory")->required();
  cmd_synth->add_option("--pairs", synth.pairs, "number of training pairs");
  cmd_synth->add_option("--points", synth.points, "points per shape (even)");
  cmd_synth->add_option("--amplitude", synth.amplitude, "deformation amplitude");
  cmd_synth->add_option("--seed", synth.seed, "random seed");
  cmd_synth->add_option("--holdout", synth.holdout,
                        "extra held-out deformations listed in holdout.json");

  TrainArgs train_args;
  CLI::App* cmd_train = app.add_subcommand("train", "train the embedding network");
  cmd_train->add_option("--config", train_args.config,
                        "key = value config file ([arch]/[loss]/[train]/[data])");
  cmd_train->add_option("--data", train_args.data, "dataset directory")->required();
  cmd_train->add_option("--out", train_args.out, "checkpoint output path")->required();
  cmd_train->add_option("--mode", train_args.mode,
                        "nn_only | nn_plus_sym_nn | supervised_comm | unsupervised_comm");

  MatchArgs match_args;
  CLI::App* cmd_match =
      app.add_subcommand("match", "pairwise map between two shapes");
  cmd_match->add_option("--ckpt", match_args.ckpt, "trained checkpoint")->required();
  cmd_match->add_option("--source", match_args.source, "source shape")->required();
  cmd_match->add_option("--target", match_args.target, "target shape")->required();
  cmd_match->add_option("--out", match_args.out, "correspondence output")->required();
  cmd_match->add_option("--colors", match_args.colors,
                        "write a color-transfer PLY of the source");
  cmd_match->add_option("--method", match_args.method, "exact | grid_bucket");
  cmd_match->add_flag("--zero-indexed", match_args.zero_indexed,
                      "write 0-indexed vertex ids");

  SymArgs sym_args;
  CLI::App* cmd_sym =
      app.add_subcommand("symmetrize", "self-symmetry map of one shape");
  cmd_sym->add_option("--ckpt", sym_args.ckpt, "trained checkpoint")->required();
  cmd_sym->add_option("--shape", sym_args.shape, "input shape")->required();
  cmd_sym->add_option("--out", sym_args.out, "correspondence output")->required();
  cmd_sym->add_option("--method", sym_args.method, "exact | grid_bucket");
  cmd_sym->add_flag("--zero-indexed", sym_args.zero_indexed,
                    "write 0-indexed vertex ids");

  EvalArgs eval_args;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "geodesic error of a map against ground truth");
  cmd_eval->add_option("--pred", eval_args.pred, "predicted correspondence")->required();
  cmd_eval->add_option("--gt", eval_args.gt, "ground-truth correspondence")->required();
  cmd_eval->add_option("--target", eval_args.target,
                       "target geometry (mesh, or cloud scored over a k-NN graph)")
      ->required();
  cmd_eval->add_option("--out", eval_args.out, "report output path")->required();
  cmd_eval->add_option("--knn", eval_args.knn,
                       "force k-NN graph geodesics with this k (default: mesh)");
  cmd_eval->add_option("--baseline", eval_args.baseline,
                       "also score a baseline map: random | identity");
  cmd_eval->add_option("--baseline-seed", eval_args.baseline_seed,
                       "seed for the random baseline");
  cmd_eval->add_flag("--zero-indexed", eval_args.zero_indexed,
                     "map files are 0-indexed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  train_args.deterministic = deterministic;
  try {
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_train->parsed()) return run_train(train_args);
    if (cmd_match->parsed()) return run_match(match_args);
    if (cmd_sym->parsed()) return run_symmetrize(sym_args);
    if (cmd_eval->parsed()) return run_eval(eval_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
