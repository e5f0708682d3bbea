#pragma once

#include <string>
#include <vector>

#include "nholo/scene.hpp"

namespace nholo {

/// One residual sweep: a named check against an equation anchor, with the
/// worst sampled point and the verdict against the scene tolerance.
struct ReportRow {
  std::string name;
  std::string anchor;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> worst;
  int points = 0;
  bool pass = true;
};

struct Report {
  std::string command;
  std::vector<ReportRow> rows;
  // symbolic field dumps, (label, expression text)
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<std::string> errors;

  bool pass() const;
  /// 0 all rows pass, 1 otherwise.
  int exit_code() const;
};

/// Dispatch: cmd is geometrize | curvature | solve | verify. Check failures
/// land in the report; scene/usage problems throw SceneError.
Report run_command(const std::string& cmd, const Scene& scene);

Report cmd_geometrize(const Scene& scene);
Report cmd_curvature(const Scene& scene);
Report cmd_solve(const Scene& scene);
Report cmd_verify(const Scene& scene);

/// Stable key order, fixed indentation, shortest round-trip doubles: byte
/// identical for identical (scene, flags).
std::string render_json(const Report& r);
std::string render_csv(const Report& r);
std::string render_text(const Report& r);

}  // namespace nholo
