#pragma once

#include <cstdint>
#include <string>

#include "symmatch/losses/losses.hpp"
#include "symmatch/model/encoder.hpp"

namespace symmatch::train {

struct TrainConfig {
  int sample_count = 3000;
  int batch_pairs = 8;
  double lr = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 10;
  uint64_t seed = 0;
  int checkpoint_every = 0;   // steps between periodic checkpoints, 0 = off
  std::string metrics_path;   // empty: derived from the checkpoint path
  std::string index_file = "index.json";
  int flip_axis = 0;          // 0=x, 1=y, 2=z
  bool deterministic = true;  // single-threaded numerics

  losses::LossConfig loss;
  model::ArchConfig arch;

  void validate() const;
};

// Key = value file with [arch] / [loss] / [train] / [data] sections. Unknown
// keys are an error. Missing keys keep the defaults above.
TrainConfig parse_config_file(const std::string& path);
TrainConfig parse_config_text(const std::string& text, const std::string& origin);

std::string to_config_text(const TrainConfig& config);

}  // namespace symmatch::train
