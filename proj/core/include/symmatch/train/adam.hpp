#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symmatch/model/encoder.hpp"
#include "symmatch/train/config.hpp"

namespace symmatch::train {

struct AdamState {
  int64_t step = 0;
  std::vector<std::vector<double>> m;  // first moments, parallel to tensors
  std::vector<std::vector<double>> v;  // second moments

  static AdamState init(const model::EncoderParams& params);
};

// Bias-corrected Adam update in place. `grads` is parallel to params.tensors;
// an empty entry counts as a zero gradient. Throws on non-finite gradients,
// naming the parameter.
void adam_step(model::EncoderParams& params,
               const std::vector<std::vector<double>>& grads, AdamState& state,
               const TrainConfig& config);

void save_adam_state(const std::string& path, const AdamState& state);
AdamState load_adam_state(const std::string& path);

}  // namespace symmatch::train
