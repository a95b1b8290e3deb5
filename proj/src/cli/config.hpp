#pragma once

#include "pcfeat/corner_detector.hpp"
#include "pcfeat/edge_detector.hpp"
#include "pcfeat/seam.hpp"
#include "pcfeat/types.hpp"

#include <string>

namespace pcfeat::cli {

/// Resolved run parameters. Field names mirror the config file keys; angles
/// are held in degrees here and converted to radians where consumed.
struct Config {
  EdgeParams<double> edge;
  CornerParams<double> corner;  // theta fields ignored; the _deg pair rules
  double theta1_deg = 60;
  double theta2_deg = 130;
  SeamParams<double> seam;
  double eval_tau = 0;    // 0 resolves to 1.5x mean nn spacing at use
  double voxel_leaf = 0;  // 0 disables downsampling

  CornerParams<double> corner_params() const {
    CornerParams<double> cp = corner;
    cp.theta1 = deg_to_rad(theta1_deg);
    cp.theta2 = deg_to_rad(theta2_deg);
    return cp;
  }
};

/// Sets one key using the file syntax names (e.g. "corner.theta1_deg").
/// `where` prefixes error messages with the source location.
void apply_config_value(Config& cfg, const std::string& key,
                        const std::string& value, const std::string& where);

/// Applies `key = value` lines on top of cfg; `#` starts a comment. Unknown
/// keys and unparsable values are invalid-argument errors.
void apply_config_file(Config& cfg, const std::string& path);

/// Cross-field checks shared by every subcommand.
void validate_config(const Config& cfg);

}  // namespace pcfeat::cli
