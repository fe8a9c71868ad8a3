#include "symmatch/geom/io.hpp"

#include "symmatch/geom/geodesics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace symmatch::geom {

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

// Line reader that skips blank lines and '#' comments and keeps count.
struct LineReader {
  std::ifstream in;
  std::string path;
  int line = 0;

  explicit LineReader(const std::string& p) : in(p), path(p) {
    if (!in) throw std::runtime_error("cannot open " + p);
  }

  bool next(std::string& out) {
    while (std::getline(in, out)) {
      ++line;
      size_t h = out.find('#');
      if (h != std::string::npos) out.erase(h);
      if (out.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  }

  std::string expect() {
    std::string s;
    if (!next(s)) parse_fail(path, line, "unexpected end of file");
    return s;
  }
};

void check_faces(const std::string& path, int line, const Faces& faces, int n) {
  for (int f = 0; f < faces.rows(); ++f) {
    for (int c = 0; c < 3; ++c) {
      if (faces(f, c) < 0 || faces(f, c) >= n)
        parse_fail(path, line,
                   "face " + std::to_string(f) + " references vertex " +
                       std::to_string(faces(f, c)) + " but shape has " +
                       std::to_string(n) + " vertices");
    }
    if (faces(f, 0) == faces(f, 1) || faces(f, 1) == faces(f, 2) ||
        faces(f, 0) == faces(f, 2))
      parse_fail(path, line, "degenerate face " + std::to_string(f) +
                                 " (repeated vertex index)");
  }
}

void check_finite(const std::string& path, const Points& p) {
  if (!p.allFinite())
    throw std::runtime_error(path + ": non-finite vertex coordinate");
}

LoadedShape finish(const std::string& path, int line, Points positions,
                   std::optional<Faces> faces) {
  check_finite(path, positions);
  LoadedShape out;
  if (faces && faces->rows() > 0) {
    check_faces(path, line, *faces, static_cast<int>(positions.rows()));
    out.mesh = Mesh{positions, *faces};
    out.mesh_components = mesh_edge_graph(*out.mesh).component_count();
  }
  out.cloud = PointCloud::from_positions(std::move(positions));
  return out;
}

LoadedShape load_off(const std::string& path) {
  LineReader r(path);
  std::string header = r.expect();
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "OFF") parse_fail(path, r.line, "expected OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(hs >> nv >> nf >> ne)) {
    std::istringstream cs(r.expect());
    if (!(cs >> nv >> nf >> ne))
      parse_fail(path, r.line, "expected vertex/face/edge counts");
  }
  if (nv < 1) parse_fail(path, r.line, "vertex count must be positive");
  Points positions(nv, 3);
  for (long i = 0; i < nv; ++i) {
    std::string s;
    if (!r.next(s))
      parse_fail(path, r.line,
                 "declared " + std::to_string(nv) + " vertices but found " +
                     std::to_string(i));
    std::istringstream vs(s);
    if (!(vs >> positions(i, 0) >> positions(i, 1) >> positions(i, 2)))
      parse_fail(path, r.line, "malformed vertex");
  }
  Faces faces(nf, 3);
  for (long f = 0; f < nf; ++f) {
    std::string s;
    if (!r.next(s))
      parse_fail(path, r.line,
                 "declared " + std::to_string(nf) + " faces but found " +
                     std::to_string(f));
    std::istringstream fs(s);
    int k = 0;
    if (!(fs >> k)) parse_fail(path, r.line, "malformed face");
    if (k != 3)
      parse_fail(path, r.line,
                 "face " + std::to_string(f) + " has " + std::to_string(k) +
                     " vertices; only triangles are supported");
    if (!(fs >> faces(f, 0) >> faces(f, 1) >> faces(f, 2)))
      parse_fail(path, r.line, "malformed face");
  }
  return finish(path, r.line, std::move(positions), faces);
}

LoadedShape load_ply(const std::string& path) {
  LineReader r(path);
  if (r.expect().substr(0, 3) != "ply") parse_fail(path, r.line, "expected ply header");

  long nv = -1, nf = 0;
  int vertex_props = 0, x_at = -1, y_at = -1, z_at = -1;
  std::string current_element;
  bool ascii = false;
  for (;;) {
    std::string s = r.expect();
    std::istringstream ls(s);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string kind;
      ls >> kind;
      ascii = (kind == "ascii");
      if (!ascii) parse_fail(path, r.line, "only ascii PLY is supported");
    } else if (tok == "element") {
      std::string name;
      long count = 0;
      ls >> name >> count;
      current_element = name;
      if (name == "vertex") nv = count;
      else if (name == "face") nf = count;
    } else if (tok == "property") {
      if (current_element == "vertex") {
        std::string type, name;
        ls >> type >> name;
        if (type == "list") parse_fail(path, r.line, "list property on vertex element");
        if (name == "x") x_at = vertex_props;
        if (name == "y") y_at = vertex_props;
        if (name == "z") z_at = vertex_props;
        ++vertex_props;
      }
    } else if (tok == "end_header") {
      break;
    } else if (tok != "comment" && tok != "obj_info") {
      parse_fail(path, r.line, "unrecognized header line: " + tok);
    }
  }
  if (nv < 1) parse_fail(path, r.line, "missing vertex element");
  if (x_at < 0 || y_at < 0 || z_at < 0)
    parse_fail(path, r.line, "vertex element lacks x/y/z properties");

  Points positions(nv, 3);
  std::vector<double> row(vertex_props);
  for (long i = 0; i < nv; ++i) {
    std::istringstream vs(r.expect());
    for (int p = 0; p < vertex_props; ++p) {
      if (!(vs >> row[p]))
        parse_fail(path, r.line, "malformed vertex (expected " +
                                     std::to_string(vertex_props) + " values)");
    }
    positions(i, 0) = row[x_at];
    positions(i, 1) = row[y_at];
    positions(i, 2) = row[z_at];
  }
  Faces faces(nf, 3);
  for (long f = 0; f < nf; ++f) {
    std::istringstream fs(r.expect());
    int k = 0;
    if (!(fs >> k)) parse_fail(path, r.line, "malformed face");
    if (k != 3)
      parse_fail(path, r.line, "face " + std::to_string(f) + " has " +
                                   std::to_string(k) +
                                   " vertices; only triangles are supported");
    if (!(fs >> faces(f, 0) >> faces(f, 1) >> faces(f, 2)))
      parse_fail(path, r.line, "malformed face");
  }
  return finish(path, r.line, std::move(positions), faces);
}

LoadedShape load_obj(const std::string& path) {
  LineReader r(path);
  std::vector<Eigen::RowVector3d> verts;
  std::vector<Eigen::RowVector3i> tris;
  std::string s;
  while (r.next(s)) {
    std::istringstream ls(s);
    std::string tok;
    ls >> tok;
    if (tok == "v") {
      Eigen::RowVector3d v;
      if (!(ls >> v(0) >> v(1) >> v(2))) parse_fail(path, r.line, "malformed vertex");
      verts.push_back(v);
    } else if (tok == "f") {
      std::vector<int> corner;
      std::string ref;
      while (ls >> ref) {
        // "i", "i/t", "i/t/n", "i//n" all start with the vertex index.
        size_t slash = ref.find('/');
        std::string head = slash == std::string::npos ? ref : ref.substr(0, slash);
        int idx = 0;
        try {
          idx = std::stoi(head);
        } catch (const std::exception&) {
          parse_fail(path, r.line, "malformed face reference '" + ref + "'");
        }
        if (idx < 1)
          parse_fail(path, r.line, "face index " + std::to_string(idx) +
                                       " out of range (indices are 1-based)");
        corner.push_back(idx - 1);
      }
      if (corner.size() != 3)
        parse_fail(path, r.line, "face has " + std::to_string(corner.size()) +
                                     " vertices; only triangles are supported");
      tris.push_back({corner[0], corner[1], corner[2]});
    }
    // Other record types (vn, vt, usemtl, ...) are ignored.
  }
  if (verts.empty()) parse_fail(path, r.line, "no vertices found");
  Points positions(static_cast<long>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) positions.row(i) = verts[i];
  Faces faces(static_cast<long>(tris.size()), 3);
  for (size_t f = 0; f < tris.size(); ++f) faces.row(f) = tris[f];
  return finish(path, r.line, std::move(positions), faces);
}

std::string lower_ext(const std::string& path) {
  size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void write_positions(std::FILE* f, const Points& p) {
  for (int i = 0; i < p.rows(); ++i)
    std::fprintf(f, "%.10g %.10g %.10g\n", p(i, 0), p(i, 1), p(i, 2));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_out(const std::string& path) {
  File f(std::fopen(path.c_str(), "w"));
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

}  // namespace

FileFormat format_from_path(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "off") return FileFormat::off;
  if (ext == "ply") return FileFormat::ply;
  if (ext == "obj") return FileFormat::obj;
  throw std::runtime_error("unknown shape format for " + path +
                           " (expected .off, .ply or .obj)");
}

LoadedShape load_shape(const std::string& path) {
  return load_shape(path, format_from_path(path));
}

LoadedShape load_shape(const std::string& path, FileFormat format) {
  switch (format) {
    case FileFormat::off: return load_off(path);
    case FileFormat::ply: return load_ply(path);
    case FileFormat::obj: return load_obj(path);
  }
  throw std::runtime_error("unreachable");
}

void save_shape(const std::string& path, const Points& positions,
                const Faces* faces) {
  FileFormat format = format_from_path(path);
  File f = open_out(path);
  const long nv = positions.rows();
  const long nf = faces ? faces->rows() : 0;
  switch (format) {
    case FileFormat::off:
      std::fprintf(f.get(), "OFF\n%ld %ld 0\n", nv, nf);
      write_positions(f.get(), positions);
      for (long i = 0; i < nf; ++i)
        std::fprintf(f.get(), "3 %d %d %d\n", (*faces)(i, 0), (*faces)(i, 1),
                     (*faces)(i, 2));
      break;
    case FileFormat::ply:
      std::fprintf(f.get(),
                   "ply\nformat ascii 1.0\nelement vertex %ld\n"
                   "property double x\nproperty double y\nproperty double z\n"
                   "element face %ld\nproperty list uchar int vertex_indices\n"
                   "end_header\n",
                   nv, nf);
      write_positions(f.get(), positions);
      for (long i = 0; i < nf; ++i)
        std::fprintf(f.get(), "3 %d %d %d\n", (*faces)(i, 0), (*faces)(i, 1),
                     (*faces)(i, 2));
      break;
    case FileFormat::obj:
      for (long i = 0; i < nv; ++i)
        std::fprintf(f.get(), "v %.10g %.10g %.10g\n", positions(i, 0),
                     positions(i, 1), positions(i, 2));
      for (long i = 0; i < nf; ++i)
        std::fprintf(f.get(), "f %d %d %d\n", (*faces)(i, 0) + 1,
                     (*faces)(i, 1) + 1, (*faces)(i, 2) + 1);
      break;
  }
}

void save_shape(const std::string& path, const Mesh& mesh) {
  save_shape(path, mesh.positions, &mesh.faces);
}

void save_ply_colored(const std::string& path, const Points& positions,
                      const std::vector<std::array<uint8_t, 3>>& colors) {
  if (static_cast<long>(colors.size()) != positions.rows())
    throw std::runtime_error("color count does not match vertex count");
  File f = open_out(path);
  std::fprintf(f.get(),
               "ply\nformat ascii 1.0\nelement vertex %ld\n"
               "property double x\nproperty double y\nproperty double z\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
               "element face 0\nproperty list uchar int vertex_indices\n"
               "end_header\n",
               positions.rows());
  for (long i = 0; i < positions.rows(); ++i)
    std::fprintf(f.get(), "%.10g %.10g %.10g %d %d %d\n", positions(i, 0),
                 positions(i, 1), positions(i, 2), colors[i][0], colors[i][1],
                 colors[i][2]);
}

PointMap load_correspondence(const std::string& path, int target_size,
                             bool one_indexed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  PointMap map;
  map.target_size = target_size;
  std::string s;
  int line = 0;
  while (std::getline(in, s)) {
    ++line;
    if (s.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    long v = 0;
    try {
      v = std::stol(s);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line) +
                               ": expected an integer vertex id");
    }
    map.targets.push_back(static_cast<int>(v - (one_indexed ? 1 : 0)));
  }
  map.source_size = static_cast<int>(map.targets.size());
  map.validate();
  return map;
}

void save_correspondence(const std::string& path, const PointMap& map,
                         bool one_indexed) {
  File f = open_out(path);
  for (int t : map.targets)
    std::fprintf(f.get(), "%d\n", t + (one_indexed ? 1 : 0));
}

}  // namespace symmatch::geom
