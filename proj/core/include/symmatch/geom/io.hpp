#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "symmatch/geom/shape.hpp"

namespace symmatch::geom {

enum class FileFormat { off, ply, obj };

// Picks the format from the file extension; throws on unknown extensions.
FileFormat format_from_path(const std::string& path);

// A loaded shape: always has positions, faces only when the file carries
// them. Disconnected meshes load fine (the cloud is still usable for
// matching); mesh_components reports the edge-graph component count so
// callers that need geodesics can fail early.
struct LoadedShape {
  PointCloud cloud;
  std::optional<Mesh> mesh;
  int mesh_components = 0;  // 0 when no faces
};

// Parse errors carry the offending line number in the message.
LoadedShape load_shape(const std::string& path);
LoadedShape load_shape(const std::string& path, FileFormat format);

void save_shape(const std::string& path, const Points& positions,
                const Faces* faces = nullptr);
void save_shape(const std::string& path, const Mesh& mesh);

// Ascii PLY with per-vertex RGB, for color-coded map transfer figures.
void save_ply_colored(const std::string& path, const Points& positions,
                      const std::vector<std::array<uint8_t, 3>>& colors);

// Correspondence files: one target vertex id per line, for source vertex on
// line i. 1-indexed on disk by default (common FAUST tooling); pass
// one_indexed=false for 0-indexed files. Self-symmetry maps use the same
// format.
PointMap load_correspondence(const std::string& path, int target_size,
                             bool one_indexed = true);
void save_correspondence(const std::string& path, const PointMap& map,
                         bool one_indexed = true);

}  // namespace symmatch::geom
