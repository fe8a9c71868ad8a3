#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symmatch/autodiff/tensor.hpp"
#include "symmatch/train/adam.hpp"
#include "symmatch/train/dataset.hpp"

namespace symmatch::train {

struct StepMetrics {
  int64_t step = 0;
  double l_nn = 0.0;
  double l_comm = 0.0;
  double l_total = 0.0;
  double wall_ms = 0.0;
};

// Drives one optimizer update per step() call: shuffles pair order per epoch,
// samples a batch, evaluates the configured loss over it, backpropagates and
// applies Adam. Fully deterministic under (seed, single thread).
class Trainer {
 public:
  Trainer(DatasetIndex index, TrainConfig config);

  StepMetrics step();

  int steps_per_epoch() const;
  int64_t steps_done() const { return step_count_; }
  const model::EncoderParams& params() const { return params_; }
  const AdamState& optimizer_state() const { return adam_; }
  const TrainConfig& config() const { return config_; }
  const DatasetIndex& dataset() const { return index_; }

 private:
  std::vector<int> next_chunk();

  DatasetIndex index_;
  TrainConfig config_;
  model::EncoderParams params_;
  AdamState adam_;
  Rng rng_;
  autodiff::Tape tape_;
  std::vector<int> epoch_order_;
  size_t epoch_pos_ = 0;
  int64_t step_count_ = 0;
};

struct TrainResult {
  std::vector<StepMetrics> metrics;
  std::string checkpoint_path;
  std::string metrics_path;
};

// Runs config.epochs epochs, writes the metrics CSV (step, L_NN, L_comm,
// L_total, wall_ms), periodic checkpoints when configured, and the final
// checkpoint plus optimizer state at `checkpoint_path` / `.opt`.
TrainResult train(DatasetIndex index, const TrainConfig& config,
                  const std::string& checkpoint_path);

void write_metrics_csv(const std::string& path,
                       const std::vector<StepMetrics>& metrics);

}  // namespace symmatch::train
