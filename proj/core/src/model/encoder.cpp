#include "symmatch/model/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "symmatch/autodiff/serialize.hpp"

namespace symmatch::model {

namespace ad = autodiff;

ArchConfig ArchConfig::scaled(int k, int base) {
  ArchConfig a;
  a.k = k;
  a.trunk = {base, base, 2 * base, 8 * base};
  a.head = {4 * base, 2 * base};
  return a;
}

void ArchConfig::validate() const {
  if (k < 1) throw std::runtime_error("arch: k must be >= 1");
  if (trunk.size() < 2) throw std::runtime_error("arch: trunk needs >= 2 layers");
  if (head.empty()) throw std::runtime_error("arch: head needs >= 1 layer");
  for (int w : trunk)
    if (w < 1) throw std::runtime_error("arch: trunk widths must be >= 1");
  for (int w : head)
    if (w < 1) throw std::runtime_error("arch: head widths must be >= 1");
}

std::string ArchConfig::descriptor() const {
  std::ostringstream s;
  s << "k " << k << "; trunk";
  for (int w : trunk) s << " " << w;
  s << "; head";
  for (int w : head) s << " " << w;
  return s.str();
}

long EncoderParams::total_size() const {
  long total = 0;
  for (const ParamTensor& t : tensors) total += static_cast<long>(t.rows) * t.cols;
  return total;
}

namespace {

// Layer dimension chain: trunk over point coordinates, then head over
// [trunk.back-1 hidden | pooled trunk.back].
std::vector<std::pair<int, int>> layer_dims(const ArchConfig& arch) {
  std::vector<std::pair<int, int>> dims;
  int in = 3;
  for (int w : arch.trunk) {
    dims.push_back({in, w});
    in = w;
  }
  int pooled = arch.trunk.back();
  int local = arch.trunk[arch.trunk.size() - 2];
  in = local + pooled;
  for (int w : arch.head) {
    dims.push_back({in, w});
    in = w;
  }
  dims.push_back({in, arch.k});
  return dims;
}

std::string layer_name(const ArchConfig& arch, size_t layer) {
  size_t trunk_n = arch.trunk.size();
  size_t head_n = arch.head.size();
  if (layer < trunk_n) return "trunk" + std::to_string(layer);
  if (layer < trunk_n + head_n) return "head" + std::to_string(layer - trunk_n);
  return "out";
}

}  // namespace

EncoderParams init(const ArchConfig& arch, uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  EncoderParams params;
  params.arch = arch;
  auto dims = layer_dims(arch);
  for (size_t l = 0; l < dims.size(); ++l) {
    auto [fan_in, fan_out] = dims[l];
    ParamTensor w;
    w.name = layer_name(arch, l) + ".W";
    w.rows = fan_in;
    w.cols = fan_out;
    w.value.resize(static_cast<size_t>(fan_in) * fan_out);
    double std_dev = std::sqrt(2.0 / fan_in);
    for (double& v : w.value) v = std_dev * rng.normal();
    params.tensors.push_back(std::move(w));

    ParamTensor b;
    b.name = layer_name(arch, l) + ".b";
    b.rows = 1;
    b.cols = fan_out;
    b.value.assign(static_cast<size_t>(fan_out), 0.0);
    params.tensors.push_back(std::move(b));
  }
  return params;
}

StagedParams stage(ad::Tape& tape, const EncoderParams& params) {
  StagedParams staged;
  staged.source = &params;
  staged.leaves.reserve(params.tensors.size());
  for (const ParamTensor& t : params.tensors)
    staged.leaves.push_back(tape.leaf(t.rows, t.cols, t.value));
  return staged;
}

ad::Tensor embed(ad::Tape& tape, const StagedParams& staged,
                 const geom::Points& positions) {
  const EncoderParams& params = *staged.source;
  const ArchConfig& arch = params.arch;
  const int n = static_cast<int>(positions.rows());
  if (n < 1) throw std::runtime_error("embed: empty point cloud");

  std::vector<double> coords(static_cast<size_t>(n) * 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) coords[static_cast<size_t>(i) * 3 + c] = positions(i, c);
  ad::Tensor h = tape.constant(n, 3, coords);

  // On tapes with finite checking enabled, re-throw op errors with the layer
  // name so a NaN in the forward pass is attributable.
  auto linear = [&](const ad::Tensor& x, size_t layer, bool activate) {
    try {
      const ad::Tensor& w = staged.leaves[2 * layer];
      const ad::Tensor& b = staged.leaves[2 * layer + 1];
      ad::Tensor out = add_row_bias(matmul(x, w), b);
      return activate ? relu(out) : out;
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("embed: layer " + layer_name(arch, layer) + ": " +
                               e.what());
    }
  };

  // Trunk: shared per-point MLP, keeping the pre-pool local feature.
  ad::Tensor local = h;
  size_t layer = 0;
  for (size_t t = 0; t < arch.trunk.size(); ++t, ++layer) {
    h = linear(h, layer, true);
    if (t == arch.trunk.size() - 2) local = h;
  }

  // Global feature, tiled back onto every point.
  ad::Tensor pooled = global_max_pool(h);
  ad::Tensor global = repeat_rows(pooled, n);
  h = concat_cols(local, global);

  // Head; final layer stays linear.
  for (size_t t = 0; t < arch.head.size(); ++t, ++layer)
    h = linear(h, layer, true);
  return linear(h, layer, false);
}

Eigen::MatrixXd embed_values(const EncoderParams& params,
                             const geom::PointCloud& cloud) {
  ad::Tape tape;
  tape.check_finite = false;
  StagedParams staged = stage(tape, params);
  ad::Tensor phi = embed(tape, staged, cloud.positions);
  const int n = phi.rows(), k = phi.cols();
  Eigen::MatrixXd out(n, k);
  const std::vector<double>& v = phi.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = v[static_cast<size_t>(i) * k + j];
  return out;
}

namespace {
constexpr const char* kCkptMagic = "SYMMATCH-CKPT";
constexpr int kCkptVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << kCkptMagic << " " << kCkptVersion << "\n";
  out << "k " << params.arch.k << "\n";
  out << "trunk";
  for (int w : params.arch.trunk) out << " " << w;
  out << "\nhead";
  for (int w : params.arch.head) out << " " << w;
  out << "\ntensors " << params.tensors.size() << "\n";
  for (const ParamTensor& t : params.tensors) out << t.name << "\n";
  out << "blobs\n";
  for (const ParamTensor& t : params.tensors)
    autodiff::write_blob(out, t.rows, t.cols, t.value);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

EncoderParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::string magic, key;
  int version = 0;
  in >> magic >> version;
  if (magic != kCkptMagic)
    throw std::runtime_error(path + ": not a checkpoint file");
  if (version != kCkptVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version " +
                             std::to_string(version));
  EncoderParams params;
  params.arch.trunk.clear();
  params.arch.head.clear();
  in >> key >> params.arch.k;
  if (key != "k") throw std::runtime_error(path + ": malformed header (k)");

  std::string line;
  std::getline(in, line);  // finish the k line
  std::getline(in, line);
  {
    std::istringstream s(line);
    s >> key;
    if (key != "trunk") throw std::runtime_error(path + ": malformed header (trunk)");
    int w;
    while (s >> w) params.arch.trunk.push_back(w);
  }
  std::getline(in, line);
  {
    std::istringstream s(line);
    s >> key;
    if (key != "head") throw std::runtime_error(path + ": malformed header (head)");
    int w;
    while (s >> w) params.arch.head.push_back(w);
  }
  size_t count = 0;
  in >> key >> count;
  if (key != "tensors") throw std::runtime_error(path + ": malformed header (tensors)");
  std::getline(in, line);
  std::vector<std::string> names(count);
  for (size_t i = 0; i < count; ++i) std::getline(in, names[i]);
  std::getline(in, line);
  if (line != "blobs") throw std::runtime_error(path + ": malformed header (blobs)");
  params.arch.validate();
  for (size_t i = 0; i < count; ++i) {
    ParamTensor t;
    t.name = names[i];
    autodiff::read_blob(in, t.rows, t.cols, t.value);
    params.tensors.push_back(std::move(t));
  }
  return params;
}

}  // namespace symmatch::model
