#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symmatch/geom/shape.hpp"
#include "symmatch/train/config.hpp"

namespace symmatch::train {

enum class Pairing { all_pairs, to_template, explicit_list };

struct ShapeEntry {
  std::string name;
  std::string file;
  geom::PointCloud cloud;  // normalized
  std::optional<geom::Mesh> mesh;
  std::optional<geom::PointMap> sym_map;  // full resolution self-map
};

struct PairEntry {
  int source = -1;
  int target = -1;
  geom::PointMap gt_map;  // source -> target, full resolution
};

// Shapes, ground-truth maps and the pairing rule, loaded from an index.json
// manifest (see README for the format). Shapes are normalized at load.
struct DatasetIndex {
  std::vector<ShapeEntry> shapes;
  std::vector<PairEntry> pairs;
  Pairing pairing = Pairing::explicit_list;

  static DatasetIndex load(const std::string& dir,
                           const std::string& index_file = "index.json");

  int shape_by_name(const std::string& name) const;  // -1 if absent
  int min_shape_size() const;

  // Fails fast when the loss mode needs maps the dataset lacks or the sample
  // count exceeds the smallest shape.
  void validate_for(const losses::LossConfig& loss, int sample_count) const;
};

// Everything one training pair contributes to a step.
struct PairBatchItem {
  int pair = -1;
  geom::PointCloud x, y;   // sampled
  geom::Points gt_targets; // positions on full Y of the gt images of x's points
  std::optional<geom::PointMap> sym_x, sym_y;      // supervised modes
  std::optional<geom::PointCloud> x_flip, y_flip;  // unsupervised mode
};

// Samples each listed pair independently. Draws from `rng` in a fixed order
// (X then Y per pair), so batches are identical across loss modes under the
// same seed.
std::vector<PairBatchItem> make_batch(const DatasetIndex& index,
                                      const TrainConfig& config,
                                      const std::vector<int>& pair_ids, Rng& rng);

}  // namespace symmatch::train
