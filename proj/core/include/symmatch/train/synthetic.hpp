#pragma once

#include <cstdint>
#include <optional>

#include "symmatch/geom/shape.hpp"

namespace symmatch::train {

// One synthetic correspondence pair at desk scale.
//
// The template is exactly bilaterally symmetric about x=0: points come in
// mirror twins (i, i + n/2) and the twin pairing is the ground-truth
// self-symmetry map. The deformation is a smooth sinusoidal warp whose x
// component is odd in x and whose y/z components are even in x, applied by
// computing the right half and mirror-copying, so the deformed shape keeps
// the same exact twin pairing. Vertex order is preserved, making the
// ground-truth pairwise map the identity on indices.
struct SyntheticPair {
  geom::PointCloud template_cloud;
  geom::PointCloud deformed_cloud;
  geom::PointMap gt_map;        // template index -> deformed index (identity)
  geom::PointMap sym_map;       // mirror twin pairing, shared by both clouds
  std::optional<geom::Mesh> template_mesh;  // grid mesh when n factors R x C
  std::optional<geom::Mesh> deformed_mesh;
};

// seed drives both the template bumps and the warp; pairs that should share
// a template must share the template part of the seed (see SyntheticConfig).
SyntheticPair generate_synthetic_pair(uint64_t seed, int n, double deform_amplitude);

// Same template across many deformations: the template is derived from
// `template_seed` alone and the warp from (template_seed, pair_index).
SyntheticPair generate_synthetic_pair(uint64_t template_seed, uint64_t pair_index,
                                      int n, double deform_amplitude);

}  // namespace symmatch::train
