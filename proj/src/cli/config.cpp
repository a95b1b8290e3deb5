#include "cli/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

namespace pcfeat::cli {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  return s.substr(b, e - b);
}

double parse_double(const std::string& value, const std::string& where) {
  const std::string t = trim(value);
  if (t.empty()) {
    throw InvalidArgument(where + ": empty value");
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw InvalidArgument(where + ": cannot parse '" + t + "' as a number");
  }
  return v;
}

Index parse_index(const std::string& value, const std::string& where) {
  const std::string t = trim(value);
  if (t.empty()) {
    throw InvalidArgument(where + ": empty value");
  }
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) {
    throw InvalidArgument(where + ": cannot parse '" + t + "' as an integer");
  }
  return static_cast<Index>(v);
}

}  // namespace

void apply_config_value(Config& cfg, const std::string& key,
                        const std::string& value, const std::string& where) {
  if (key == "edge.k") {
    cfg.edge.k = parse_index(value, where);
  } else if (key == "edge.lambda") {
    cfg.edge.lambda = parse_double(value, where);
  } else if (key == "corner.K") {
    cfg.corner.K = parse_index(value, where);
  } else if (key == "corner.R") {
    cfg.corner.R = parse_double(value, where);
  } else if (key == "corner.rho") {
    cfg.corner.rho = parse_double(value, where);
  } else if (key == "corner.epsilon") {
    cfg.corner.epsilon = parse_double(value, where);
  } else if (key == "corner.theta1_deg") {
    cfg.theta1_deg = parse_double(value, where);
  } else if (key == "corner.theta2_deg") {
    cfg.theta2_deg = parse_double(value, where);
  } else if (key == "corner.merge_radius") {
    cfg.corner.merge_radius = parse_double(value, where);
  } else if (key == "seam.delta") {
    cfg.seam.delta = parse_double(value, where);
  } else if (key == "seam.bins") {
    cfg.seam.bins = parse_index(value, where);
  } else if (key == "seam.gamma") {
    cfg.seam.gamma = parse_double(value, where);
  } else if (key == "eval.tau") {
    cfg.eval_tau = parse_double(value, where);
  } else if (key == "voxel.leaf") {
    cfg.voxel_leaf = parse_double(value, where);
  } else {
    throw InvalidArgument(where + ": unknown key '" + key + "'");
  }
}

void apply_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string body = trim(line);
    if (body.empty()) {
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(where + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw InvalidArgument(where + ": empty key");
    }
    apply_config_value(cfg, key, value, where);
  }
}

void validate_config(const Config& cfg) {
  if (!(cfg.theta1_deg < cfg.theta2_deg)) {
    throw InvalidArgument("corner.theta1_deg must be strictly below corner.theta2_deg");
  }
  if (cfg.eval_tau < 0) {
    throw InvalidArgument("eval.tau must be >= 0 (0 means automatic)");
  }
  if (cfg.voxel_leaf < 0) {
    throw InvalidArgument("voxel.leaf must be >= 0 (0 disables downsampling)");
  }
}

}  // namespace pcfeat::cli
