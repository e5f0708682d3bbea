#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nholo/dmetric.hpp"
#include "nholo/expr.hpp"
#include "nholo/rng.hpp"
#include "nholo/solutions.hpp"

namespace nholo {

/// Raised on malformed scene files: bad section, unknown key, wrong shape.
/// Maps to exit code 2 at the CLI.
class SceneError : public Error {
 public:
  using Error::Error;
};

struct SceneOptions {
  double tol = 1e-6;
  int panels = 4096;
  std::uint64_t seed = 0;
  int jet_order = 2;
  int samples = 20;
};

struct SceneWindow {
  std::vector<double> lo, hi;
  double v_margin = 0.5;
  double value_margin = 0.1;
  std::vector<int> count;  // used by the solution generator grid
};

/// Parsed scene file. Exactly one of lagrangian / metric / recipe drives a
/// command; window and options always carry defaults.
struct Scene {
  enum class Driver { Lagrangian, Metric, Recipe };

  Chart chart;
  Driver driver = Driver::Lagrangian;

  ScalarField lagrangian;  // [lagrangian]

  std::vector<ScalarField> g, h;  // [metric], row major blocks
  NConnection ncon;

  SolutionRecipe recipe;  // [recipe]

  SceneWindow window;
  SceneOptions options;
};

/// Line-oriented format: `[section]` headers, `key = value` entries, `#`
/// comments. Sections: chart, lagrangian, metric, recipe, window, options.
Scene parse_scene(std::string_view text);

Scene load_scene(const std::string& path);

/// Deterministic sample points inside the scene window, margins applied by
/// rejection; the stream depends only on the rng state.
std::vector<Point> scene_sample_points(const Scene& scene, int count,
                                       SplitMix64& rng);

/// The scene's d-metric: the metric section verbatim, or the Sasaki lift of
/// the Lagrangian. Throws SceneError when neither is present.
DMetric scene_dmetric(const Scene& scene);

}  // namespace nholo
