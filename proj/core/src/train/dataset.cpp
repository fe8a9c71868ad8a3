#include "symmatch/train/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "symmatch/geom/io.hpp"

namespace symmatch::train {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

geom::PointMap load_map_or_identity(const std::string& spec, const fs::path& dir,
                                    int source_size, int target_size) {
  if (spec == "identity") {
    if (source_size != target_size)
      throw std::runtime_error("identity map requested between shapes of sizes " +
                               std::to_string(source_size) + " and " +
                               std::to_string(target_size));
    return geom::PointMap::identity(source_size);
  }
  geom::PointMap map = geom::load_correspondence((dir / spec).string(), target_size);
  if (map.source_size != source_size)
    throw std::runtime_error(spec + ": map has " + std::to_string(map.source_size) +
                             " entries but the source shape has " +
                             std::to_string(source_size) + " vertices");
  return map;
}

}  // namespace

DatasetIndex DatasetIndex::load(const std::string& dir_str,
                                const std::string& index_file) {
  fs::path dir(dir_str);
  fs::path index_path = dir / index_file;
  std::ifstream in(index_path);
  if (!in) throw std::runtime_error("cannot open dataset index " + index_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(index_path.string() + ": " + e.what());
  }

  DatasetIndex index;
  std::vector<std::string> to_template_maps;
  if (!doc.contains("shapes") || !doc["shapes"].is_array() || doc["shapes"].empty())
    throw std::runtime_error(index_path.string() + ": missing or empty 'shapes' list");
  for (const json& s : doc["shapes"]) {
    ShapeEntry entry;
    entry.name = s.at("name").get<std::string>();
    entry.file = s.at("file").get<std::string>();
    geom::LoadedShape loaded = geom::load_shape((dir / entry.file).string());
    geom::NormalizedCloud normalized = geom::normalize(loaded.cloud);
    entry.cloud = std::move(normalized.cloud);
    if (loaded.mesh) {
      geom::Mesh mesh = std::move(*loaded.mesh);
      mesh.positions = (mesh.positions.rowwise() - normalized.transform.translation) /
                       normalized.transform.scale;
      entry.mesh = std::move(mesh);
    }
    if (s.contains("sym_map")) {
      std::string spec = s["sym_map"].get<std::string>();
      entry.sym_map =
          load_map_or_identity(spec, dir, entry.cloud.size(), entry.cloud.size());
    }
    to_template_maps.push_back(s.value("map_to_template", std::string()));
    if (index.shape_by_name(entry.name) != -1)
      throw std::runtime_error(index_path.string() + ": duplicate shape name '" +
                               entry.name + "'");
    index.shapes.push_back(std::move(entry));
  }

  std::string pairing = doc.value("pairing", std::string("explicit"));
  if (pairing == "to_template") {
    index.pairing = Pairing::to_template;
    std::string template_name = doc.at("template").get<std::string>();
    int tmpl = index.shape_by_name(template_name);
    if (tmpl < 0)
      throw std::runtime_error(index_path.string() + ": template shape '" +
                               template_name + "' not in shapes list");
    for (size_t i = 0; i < index.shapes.size(); ++i) {
      if (static_cast<int>(i) == tmpl) continue;
      PairEntry pair;
      pair.source = static_cast<int>(i);
      pair.target = tmpl;
      const std::string& map_spec = to_template_maps[i];
      if (map_spec.empty())
        throw std::runtime_error(index_path.string() + ": shape '" +
                                 index.shapes[i].name +
                                 "' lacks map_to_template required by pairing");
      pair.gt_map = load_map_or_identity(map_spec, dir, index.shapes[i].cloud.size(),
                                         index.shapes[tmpl].cloud.size());
      index.pairs.push_back(std::move(pair));
    }
  } else if (pairing == "all_pairs") {
    index.pairing = Pairing::all_pairs;
    if (!doc.value("identity_maps", false))
      throw std::runtime_error(index_path.string() +
                               ": all_pairs pairing requires identity_maps=true "
                               "(shapes in common vertex order)");
    for (size_t i = 0; i < index.shapes.size(); ++i) {
      for (size_t j = 0; j < index.shapes.size(); ++j) {
        if (i == j) continue;
        PairEntry pair;
        pair.source = static_cast<int>(i);
        pair.target = static_cast<int>(j);
        pair.gt_map = load_map_or_identity("identity", dir, index.shapes[i].cloud.size(),
                                           index.shapes[j].cloud.size());
        index.pairs.push_back(std::move(pair));
      }
    }
  } else if (pairing == "explicit") {
    index.pairing = Pairing::explicit_list;
    if (!doc.contains("pairs") || !doc["pairs"].is_array())
      throw std::runtime_error(index_path.string() +
                               ": explicit pairing requires a 'pairs' list");
    for (const json& p : doc["pairs"]) {
      PairEntry pair;
      pair.source = index.shape_by_name(p.at("source").get<std::string>());
      pair.target = index.shape_by_name(p.at("target").get<std::string>());
      if (pair.source < 0 || pair.target < 0)
        throw std::runtime_error(index_path.string() + ": pair references unknown shape");
      pair.gt_map =
          load_map_or_identity(p.at("map").get<std::string>(), dir,
                               index.shapes[pair.source].cloud.size(),
                               index.shapes[pair.target].cloud.size());
      index.pairs.push_back(std::move(pair));
    }
  } else {
    throw std::runtime_error(index_path.string() + ": unknown pairing rule '" +
                             pairing + "'");
  }

  if (index.pairs.empty())
    throw std::runtime_error(index_path.string() + ": no training pairs");
  return index;
}

int DatasetIndex::shape_by_name(const std::string& name) const {
  for (size_t i = 0; i < shapes.size(); ++i)
    if (shapes[i].name == name) return static_cast<int>(i);
  return -1;
}

int DatasetIndex::min_shape_size() const {
  int m = std::numeric_limits<int>::max();
  for (const ShapeEntry& s : shapes) m = std::min(m, s.cloud.size());
  return m;
}

void DatasetIndex::validate_for(const losses::LossConfig& loss,
                                int sample_count) const {
  if (sample_count > min_shape_size())
    throw std::runtime_error("sample_count " + std::to_string(sample_count) +
                             " exceeds the smallest shape (" +
                             std::to_string(min_shape_size()) + " points)");
  if (loss.needs_sym_maps()) {
    for (const PairEntry& p : pairs) {
      for (int side : {p.source, p.target}) {
        if (!shapes[side].sym_map)
          throw std::runtime_error("loss mode " + losses::to_string(loss.mode) +
                                   " needs a self-symmetry map for shape '" +
                                   shapes[side].name + "'");
      }
    }
  }
}

namespace {

geom::PointCloud flip_axis(const geom::PointCloud& cloud, int axis) {
  geom::PointCloud out = cloud;
  out.positions.col(axis) = -out.positions.col(axis);
  return out;
}

}  // namespace

std::vector<PairBatchItem> make_batch(const DatasetIndex& index,
                                      const TrainConfig& config,
                                      const std::vector<int>& pair_ids, Rng& rng) {
  std::vector<PairBatchItem> batch;
  batch.reserve(pair_ids.size());
  for (int pid : pair_ids) {
    const PairEntry& pair = index.pairs.at(pid);
    const ShapeEntry& sx = index.shapes[pair.source];
    const ShapeEntry& sy = index.shapes[pair.target];
    PairBatchItem item;
    item.pair = pid;
    item.x = geom::sample(sx.cloud, config.sample_count, rng);
    item.y = geom::sample(sy.cloud, config.sample_count, rng);
    item.gt_targets = geom::restrict_map(pair.gt_map, item.x.ids, sy.cloud);
    if (config.loss.needs_sym_maps()) {
      item.sym_x = geom::restrict_sym_map(*sx.sym_map, item.x, sx.cloud);
      item.sym_y = geom::restrict_sym_map(*sy.sym_map, item.y, sy.cloud);
    }
    if (config.loss.needs_flips()) {
      item.x_flip = flip_axis(item.x, config.flip_axis);
      item.y_flip = flip_axis(item.y, config.flip_axis);
    }
    batch.push_back(std::move(item));
  }
  return batch;
}

}  // namespace symmatch::train
