#include "symmatch/train/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace symmatch::train {

void TrainConfig::validate() const {
  if (sample_count < 1) throw std::runtime_error("train: sample_count must be >= 1");
  if (batch_pairs < 1) throw std::runtime_error("train: batch_pairs must be >= 1");
  if (!(lr > 0.0)) throw std::runtime_error("train: lr must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw std::runtime_error("train: adam betas must be in [0, 1)");
  if (!(adam_eps > 0.0)) throw std::runtime_error("train: adam_eps must be positive");
  if (epochs < 0) throw std::runtime_error("train: epochs must be >= 0");
  if (flip_axis < 0 || flip_axis > 2)
    throw std::runtime_error("train: flip_axis must be x, y or z");
  loss.validate();
  arch.validate();
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct KeyValues {
  std::map<std::string, std::string> entries;  // "section.key" -> value
  std::string origin;

  bool take(const std::string& key, std::string& out) {
    auto it = entries.find(key);
    if (it == entries.end()) return false;
    out = it->second;
    entries.erase(it);
    return true;
  }

  void take_double(const std::string& key, double& out) {
    std::string v;
    if (!take(key, v)) return;
    try {
      out = std::stod(v);
    } catch (const std::exception&) {
      throw std::runtime_error(origin + ": " + key + ": expected a number, got '" + v + "'");
    }
  }

  void take_int(const std::string& key, int& out) {
    std::string v;
    if (!take(key, v)) return;
    try {
      out = std::stoi(v);
    } catch (const std::exception&) {
      throw std::runtime_error(origin + ": " + key + ": expected an integer, got '" + v + "'");
    }
  }

  void take_u64(const std::string& key, uint64_t& out) {
    std::string v;
    if (!take(key, v)) return;
    try {
      out = std::stoull(v);
    } catch (const std::exception&) {
      throw std::runtime_error(origin + ": " + key + ": expected an integer, got '" + v + "'");
    }
  }

  void take_bool(const std::string& key, bool& out) {
    std::string v;
    if (!take(key, v)) return;
    if (v == "true" || v == "1") out = true;
    else if (v == "false" || v == "0") out = false;
    else throw std::runtime_error(origin + ": " + key + ": expected true/false, got '" + v + "'");
  }

  void take_int_list(const std::string& key, std::vector<int>& out) {
    std::string v;
    if (!take(key, v)) return;
    std::istringstream s(v);
    std::vector<int> widths;
    int w;
    while (s >> w) widths.push_back(w);
    if (widths.empty() || !s.eof())
      throw std::runtime_error(origin + ": " + key + ": expected a list of integers");
    out = std::move(widths);
  }
};

KeyValues read_key_values(std::istream& in, const std::string& origin) {
  KeyValues kv;
  kv.origin = origin;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t comment = line.find_first_of(";#");
    if (comment != std::string::npos) line.erase(comment);
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                 ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    if (!kv.entries.emplace(full, value).second)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": duplicate key " + full);
  }
  return kv;
}

}  // namespace

TrainConfig parse_config_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  KeyValues kv = read_key_values(in, origin);
  TrainConfig cfg;

  kv.take_int("arch.k", cfg.arch.k);
  kv.take_int_list("arch.trunk", cfg.arch.trunk);
  kv.take_int_list("arch.head", cfg.arch.head);

  kv.take_double("loss.tau", cfg.loss.tau);
  double gamma;
  {
    std::string v;
    if (kv.take("loss.gamma", v)) {
      try {
        gamma = std::stod(v);
      } catch (const std::exception&) {
        throw std::runtime_error(origin + ": loss.gamma: expected a number");
      }
      cfg.loss.gamma = gamma;
    }
  }
  {
    std::string v;
    if (kv.take("loss.mode", v)) cfg.loss.mode = losses::mode_from_string(v);
    if (kv.take("loss.comm_norm", v)) {
      if (v == "squared_frobenius") cfg.loss.comm_norm = losses::CommNorm::squared_frobenius;
      else if (v == "frobenius_eps") cfg.loss.comm_norm = losses::CommNorm::frobenius_eps;
      else throw std::runtime_error(origin + ": loss.comm_norm: unknown norm '" + v + "'");
    }
  }

  kv.take_int("train.sample_count", cfg.sample_count);
  kv.take_int("train.batch_pairs", cfg.batch_pairs);
  kv.take_double("train.lr", cfg.lr);
  kv.take_double("train.adam_beta1", cfg.adam_beta1);
  kv.take_double("train.adam_beta2", cfg.adam_beta2);
  kv.take_double("train.adam_eps", cfg.adam_eps);
  kv.take_int("train.epochs", cfg.epochs);
  kv.take_u64("train.seed", cfg.seed);
  kv.take_int("train.checkpoint_every", cfg.checkpoint_every);
  kv.take_bool("train.deterministic", cfg.deterministic);
  {
    std::string v;
    if (kv.take("train.metrics", v)) cfg.metrics_path = v;
    if (kv.take("data.index", v)) cfg.index_file = v;
    if (kv.take("data.flip_axis", v)) {
      if (v == "x") cfg.flip_axis = 0;
      else if (v == "y") cfg.flip_axis = 1;
      else if (v == "z") cfg.flip_axis = 2;
      else throw std::runtime_error(origin + ": data.flip_axis: expected x, y or z");
    }
  }

  if (!kv.entries.empty()) {
    std::string unknown;
    for (const auto& [k, v] : kv.entries) unknown += (unknown.empty() ? "" : ", ") + k;
    throw std::runtime_error(origin + ": unknown config keys: " + unknown);
  }
  cfg.validate();
  return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path);
}

std::string to_config_text(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "[arch]\nk = " << cfg.arch.k << "\ntrunk =";
  for (int w : cfg.arch.trunk) out << " " << w;
  out << "\nhead =";
  for (int w : cfg.arch.head) out << " " << w;
  out << "\n\n[loss]\ntau = " << cfg.loss.tau << "\n";
  if (cfg.loss.gamma) out << "gamma = " << *cfg.loss.gamma << "\n";
  out << "mode = " << losses::to_string(cfg.loss.mode) << "\n";
  out << "comm_norm = "
      << (cfg.loss.comm_norm == losses::CommNorm::squared_frobenius
              ? "squared_frobenius"
              : "frobenius_eps")
      << "\n";
  out << "\n[train]\nsample_count = " << cfg.sample_count
      << "\nbatch_pairs = " << cfg.batch_pairs << "\nlr = " << cfg.lr
      << "\nadam_beta1 = " << cfg.adam_beta1 << "\nadam_beta2 = " << cfg.adam_beta2
      << "\nadam_eps = " << cfg.adam_eps << "\nepochs = " << cfg.epochs
      << "\nseed = " << cfg.seed << "\ncheckpoint_every = " << cfg.checkpoint_every
      << "\ndeterministic = " << (cfg.deterministic ? "true" : "false") << "\n";
  if (!cfg.metrics_path.empty()) out << "metrics = " << cfg.metrics_path << "\n";
  out << "\n[data]\nindex = " << cfg.index_file << "\nflip_axis = "
      << "xyz"[cfg.flip_axis] << "\n";
  return out.str();
}

}  // namespace symmatch::train
