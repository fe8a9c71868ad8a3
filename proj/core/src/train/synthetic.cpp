#include "symmatch/train/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace symmatch::train {

namespace {

constexpr double kPi = 3.14159265358979323846;

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t mix(uint64_t a, uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

// Low-frequency radial bumps, even in phi so both halves agree.
struct BumpSet {
  double alpha[3], f_theta[3], f_phi[3], phase[3];

  static BumpSet draw(Rng& rng) {
    BumpSet b;
    for (int m = 0; m < 3; ++m) {
      b.alpha[m] = rng.uniform(0.04, 0.12);
      b.f_theta[m] = 1.0 + rng.bounded(3);
      b.f_phi[m] = static_cast<double>(rng.bounded(3));
      b.phase[m] = rng.uniform(0.0, 2.0 * kPi);
    }
    return b;
  }

  double factor(double theta, double phi) const {
    double s = 1.0;
    for (int m = 0; m < 3; ++m)
      s += alpha[m] * std::cos(f_theta[m] * theta + phase[m]) *
           std::cos(f_phi[m] * phi);
    return s;
  }
};

// Smooth warp whose x component is odd in x and y/z components even in x.
struct WarpSet {
  double amplitude;
  double freq[3][3], phase[3], axis_freq[3], weight[3];

  static WarpSet draw(Rng& rng, double amplitude) {
    WarpSet w;
    w.amplitude = amplitude;
    for (int m = 0; m < 3; ++m) {
      for (int a = 0; a < 3; ++a) w.freq[m][a] = rng.uniform(0.6, 2.4);
      w.phase[m] = rng.uniform(0.0, 2.0 * kPi);
      w.axis_freq[m] = rng.uniform(0.8, 2.2);
      w.weight[m] = rng.uniform(0.4, 1.0);
    }
    return w;
  }

  Eigen::RowVector3d displacement(const Eigen::RowVector3d& p) const {
    double x = p(0), y = p(1), z = p(2);
    // component m displaces axis m; sin(ax*x) keeps dx odd, cos(ax*x) keeps
    // dy/dz even, so the warp commutes with the mirror exactly.
    double dx = weight[0] * std::sin(freq[0][1] * y + freq[0][2] * z + phase[0]) *
                std::sin(axis_freq[0] * x);
    double dy = weight[1] * std::sin(freq[1][1] * y + freq[1][2] * z + phase[1]) *
                std::cos(axis_freq[1] * x);
    double dz = weight[2] * std::sin(freq[2][1] * y + freq[2][2] * z + phase[2]) *
                std::cos(axis_freq[2] * x);
    return amplitude * Eigen::RowVector3d(dx, dy, dz) / 3.0;
  }
};

// Even C x R factorization of n with C nearest sqrt(2n); nullopt if the grid
// would collapse (fewer than 3 rows or 4 columns).
std::optional<std::pair<int, int>> grid_dims(int n) {
  double ideal = std::sqrt(2.0 * n);
  std::optional<std::pair<int, int>> best;  // (rows, cols)
  for (int c = 4; c <= n / 3; c += 2) {
    if (n % c != 0) continue;
    int r = n / c;
    if (r < 3) break;
    if (!best || std::abs(c - ideal) < std::abs(best->second - ideal))
      best = {{r, c}};
  }
  return best;
}

struct HalfPoint {
  double theta, phi;  // phi > 0 (the x > 0 half)
  int index, twin;    // vertex ids of the point and its mirror
};

geom::Points mirror_assemble(const std::vector<HalfPoint>& half,
                             const BumpSet& bumps, const WarpSet* warp, int n,
                             double a, double b, double c) {
  geom::Points pts(n, 3);
  for (const HalfPoint& h : half) {
    double r = bumps.factor(h.theta, h.phi);
    Eigen::RowVector3d p(a * r * std::sin(h.theta) * std::sin(h.phi),
                         b * r * std::cos(h.theta),
                         c * r * std::sin(h.theta) * std::cos(h.phi));
    if (warp) p += warp->displacement(p);
    pts.row(h.index) = p;
    pts.row(h.twin) = Eigen::RowVector3d(-p(0), p(1), p(2));
  }
  return pts;
}

}  // namespace

SyntheticPair generate_synthetic_pair(uint64_t seed, int n, double amplitude) {
  return generate_synthetic_pair(seed, 0, n, amplitude);
}

SyntheticPair generate_synthetic_pair(uint64_t template_seed, uint64_t pair_index,
                                      int n, double amplitude) {
  if (n < 2 || n % 2 != 0)
    throw std::runtime_error("synthetic pair needs an even point count, got " +
                             std::to_string(n));
  if (amplitude < 0.0)
    throw std::runtime_error("synthetic pair: amplitude must be >= 0");

  Rng template_rng(mix(template_seed, 0x7e3a));
  Rng warp_rng(mix(mix(template_seed, pair_index), 0x3a7e));
  BumpSet bumps = BumpSet::draw(template_rng);
  // Body-like proportions: narrow across the mirror axis, tall in y.
  const double ax = 0.55, ay = 1.0, az = 0.75;
  WarpSet warp = WarpSet::draw(warp_rng, amplitude);

  SyntheticPair out;
  out.gt_map = geom::PointMap::identity(n);
  out.sym_map.source_size = n;
  out.sym_map.target_size = n;
  out.sym_map.targets.resize(n);

  std::vector<HalfPoint> half;
  auto dims = grid_dims(n);
  if (dims) {
    auto [rows, cols] = *dims;
    half.reserve(static_cast<size_t>(n) / 2);
    for (int i = 0; i < rows; ++i) {
      double theta = kPi * (i + 1) / (rows + 1);
      for (int j = cols / 2; j < cols; ++j) {
        double phi = (j + 0.5) * 2.0 * kPi / cols - kPi;  // in (0, pi)
        half.push_back({theta, phi, i * cols + j, i * cols + (cols - 1 - j)});
      }
    }
    // Quad grid wrapping in j, two triangles per quad.
    geom::Faces faces(2 * (rows - 1) * cols, 3);
    int f = 0;
    for (int i = 0; i + 1 < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        int jn = (j + 1) % cols;
        int v00 = i * cols + j, v01 = i * cols + jn;
        int v10 = (i + 1) * cols + j, v11 = (i + 1) * cols + jn;
        faces.row(f++) << v00, v10, v11;
        faces.row(f++) << v00, v11, v01;
      }
    }
    geom::Points tpl = mirror_assemble(half, bumps, nullptr, n, ax, ay, az);
    geom::Points def = mirror_assemble(half, bumps, &warp, n, ax, ay, az);
    out.template_mesh = geom::Mesh{tpl, faces};
    out.deformed_mesh = geom::Mesh{def, faces};
    out.template_cloud = geom::PointCloud::from_positions(std::move(tpl));
    out.deformed_cloud = geom::PointCloud::from_positions(std::move(def));
  } else {
    // No usable grid factorization: meshless symmetric cloud.
    half.reserve(static_cast<size_t>(n) / 2);
    for (int i = 0; i < n / 2; ++i) {
      double theta = std::acos(1.0 - 2.0 * template_rng.uniform());
      double phi = template_rng.uniform(1e-3, kPi - 1e-3);
      half.push_back({theta, phi, i, i + n / 2});
    }
    geom::Points tpl = mirror_assemble(half, bumps, nullptr, n, ax, ay, az);
    geom::Points def = mirror_assemble(half, bumps, &warp, n, ax, ay, az);
    out.template_cloud = geom::PointCloud::from_positions(std::move(tpl));
    out.deformed_cloud = geom::PointCloud::from_positions(std::move(def));
  }

  for (const HalfPoint& h : half) {
    out.sym_map.targets[h.index] = h.twin;
    out.sym_map.targets[h.twin] = h.index;
  }
  return out;
}

}  // namespace symmatch::train
