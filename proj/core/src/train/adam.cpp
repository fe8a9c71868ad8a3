#include "symmatch/train/adam.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "symmatch/autodiff/serialize.hpp"

namespace symmatch::train {

AdamState AdamState::init(const model::EncoderParams& params) {
  AdamState state;
  state.m.reserve(params.tensors.size());
  state.v.reserve(params.tensors.size());
  for (const model::ParamTensor& t : params.tensors) {
    state.m.emplace_back(t.value.size(), 0.0);
    state.v.emplace_back(t.value.size(), 0.0);
  }
  return state;
}

void adam_step(model::EncoderParams& params,
               const std::vector<std::vector<double>>& grads, AdamState& state,
               const TrainConfig& config) {
  if (grads.size() != params.tensors.size() ||
      state.m.size() != params.tensors.size())
    throw std::runtime_error("adam_step: gradient/state layout mismatch");
  state.step += 1;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t t = 0; t < params.tensors.size(); ++t) {
    model::ParamTensor& p = params.tensors[t];
    std::vector<double>& m = state.m[t];
    std::vector<double>& v = state.v[t];
    const bool zero_grad = grads[t].empty();
    if (!zero_grad && grads[t].size() != p.value.size())
      throw std::runtime_error("adam_step: gradient size mismatch for " + p.name);
    for (size_t i = 0; i < p.value.size(); ++i) {
      double g = zero_grad ? 0.0 : grads[t][i];
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient in " + p.name);
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      double m_hat = m[i] / bias1;
      double v_hat = v[i] / bias2;
      p.value[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
  }
}

namespace {
constexpr const char* kAdamMagic = "SYMMATCH-ADAM";
constexpr int kAdamVersion = 1;
}  // namespace

void save_adam_state(const std::string& path, const AdamState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write optimizer state " + path);
  out << kAdamMagic << " " << kAdamVersion << "\n";
  out << "step " << state.step << "\n";
  out << "tensors " << state.m.size() << "\n";
  out << "blobs\n";
  for (size_t t = 0; t < state.m.size(); ++t) {
    autodiff::write_blob(out, 1, static_cast<int>(state.m[t].size()), state.m[t]);
    autodiff::write_blob(out, 1, static_cast<int>(state.v[t].size()), state.v[t]);
  }
  if (!out) throw std::runtime_error("optimizer state write failed: " + path);
}

AdamState load_adam_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open optimizer state " + path);
  std::string magic, key, line;
  int version = 0;
  in >> magic >> version;
  if (magic != kAdamMagic || version != kAdamVersion)
    throw std::runtime_error(path + ": not a compatible optimizer state file");
  AdamState state;
  size_t count = 0;
  in >> key >> state.step;
  if (key != "step") throw std::runtime_error(path + ": malformed header (step)");
  in >> key >> count;
  if (key != "tensors") throw std::runtime_error(path + ": malformed header (tensors)");
  std::getline(in, line);
  std::getline(in, line);
  if (line != "blobs") throw std::runtime_error(path + ": malformed header (blobs)");
  state.m.resize(count);
  state.v.resize(count);
  for (size_t t = 0; t < count; ++t) {
    int r = 0, c = 0;
    autodiff::read_blob(in, r, c, state.m[t]);
    autodiff::read_blob(in, r, c, state.v[t]);
  }
  return state;
}

}  // namespace symmatch::train
