#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "symmatch/autodiff/ops.hpp"
#include "symmatch/common/rng.hpp"
#include "symmatch/geom/shape.hpp"

namespace symmatch::model {

// Point-cloud encoder layout: a shared per-point MLP (the trunk), a global
// max-pooled feature, and a head applied to [last trunk hidden | pooled]
// that produces the k-dimensional embedding row per point.
struct ArchConfig {
  int k = 20;
  std::vector<int> trunk = {64, 64, 128, 1024};
  std::vector<int> head = {512, 256};

  // Reduced widths for tests and quick experiments.
  static ArchConfig scaled(int k, int base = 32);

  void validate() const;
  std::string descriptor() const;
};

struct ParamTensor {
  std::string name;
  int rows = 0, cols = 0;
  std::vector<double> value;
};

struct EncoderParams {
  ArchConfig arch;
  std::vector<ParamTensor> tensors;  // W/b per layer, in forward order

  long total_size() const;
};

// He-style initialization: W ~ N(0, sqrt(2/fan_in)), biases zero.
// Deterministic under the seed.
EncoderParams init(const ArchConfig& arch, uint64_t seed);

// Parameters staged onto a tape as differentiable leaves, in tensors order.
struct StagedParams {
  const EncoderParams* source = nullptr;
  std::vector<autodiff::Tensor> leaves;
};

StagedParams stage(autodiff::Tape& tape, const EncoderParams& params);

// Forward pass: n x 3 positions -> n x k embedding, differentiable through
// the tape w.r.t. the staged parameters.
autodiff::Tensor embed(autodiff::Tape& tape, const StagedParams& staged,
                       const geom::Points& positions);

// Convenience forward without gradient bookkeeping kept around.
Eigen::MatrixXd embed_values(const EncoderParams& params,
                             const geom::PointCloud& cloud);

// Checkpoint: text header (version, architecture, tensor directory) followed
// by flat binary blobs.
void save_checkpoint(const std::string& path, const EncoderParams& params);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace symmatch::model
