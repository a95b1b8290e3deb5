#include "cli/report.hpp"

#include <cstdio>
#include <iostream>

namespace pcfeat::cli {
namespace {

Json params_json(const Config& cfg) {
  Json p;
  p["edge"] = Json{{"k", cfg.edge.k}, {"lambda", cfg.edge.lambda}};
  p["corner"] = Json{{"K", cfg.corner.K},
                     {"R", cfg.corner.R},
                     {"rho", cfg.corner.rho},
                     {"epsilon", cfg.corner.epsilon},
                     {"theta1_deg", cfg.theta1_deg},
                     {"theta2_deg", cfg.theta2_deg},
                     {"merge_radius", cfg.corner.merge_radius}};
  p["seam"] = Json{{"delta", cfg.seam.delta},
                   {"bins", cfg.seam.bins},
                   {"gamma", cfg.seam.gamma}};
  p["eval"] = Json{{"tau", cfg.eval_tau}};
  p["voxel"] = Json{{"leaf", cfg.voxel_leaf}};
  return p;
}

}  // namespace

Json make_report(const std::string& command, const Config& cfg,
                 const std::string& input_path, const std::string& input_sha,
                 long long input_points, const StageLog& log,
                 const Json& results) {
  Json r;
  r["schema"] = 1;
  r["command"] = command;
  r["params"] = params_json(cfg);
  r["input"] = Json{
      {"path", input_path}, {"sha256", input_sha}, {"points", input_points}};
  Json stages = Json::array();
  for (const StageEntry& e : log.entries) {
    stages.push_back(Json{{"name", e.name},
                          {"points_in", e.points_in},
                          {"points_out", e.points_out},
                          {"millis", e.millis}});
  }
  r["stages"] = stages;
  r["results"] = results;
  return r;
}

void emit_report(const Json& report, const std::string& path) {
  const std::string text = report.dump(2);
  if (path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    throw IoError("cannot open " + path + " for writing");
  }
  const std::size_t wrote = std::fwrite(text.data(), 1, text.size(), f);
  const bool short_write = wrote != text.size();
  const bool nl_fail = std::fputc('\n', f) == EOF;
  if (std::fclose(f) != 0 || short_write || nl_fail) {
    throw IoError("write failure on " + path);
  }
}

}  // namespace pcfeat::cli
