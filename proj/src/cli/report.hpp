#pragma once

#include "cli/config.hpp"

#include "json.hpp"

#include <chrono>
#include <string>
#include <vector>

namespace pcfeat::cli {

using Json = nlohmann::ordered_json;

class StopWatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct StageEntry {
  std::string name;
  long long points_in = 0;
  long long points_out = 0;
  double millis = 0;
};

struct StageLog {
  std::vector<StageEntry> entries;

  void add(const std::string& name, long long points_in, long long points_out,
           double millis) {
    entries.push_back(StageEntry{name, points_in, points_out, millis});
  }
};

/// Full report: schema marker, command, the resolved parameter set, input
/// identity, per-stage counters, and command-specific results.
Json make_report(const std::string& command, const Config& cfg,
                 const std::string& input_path, const std::string& input_sha,
                 long long input_points, const StageLog& log,
                 const Json& results);

/// Writes the report to path, or to stdout when path is empty.
void emit_report(const Json& report, const std::string& path);

}  // namespace pcfeat::cli
