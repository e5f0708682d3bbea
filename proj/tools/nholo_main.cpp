#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nholo/report.hpp"
#include "nholo/scene.hpp"

int main(int argc, char** argv) {
  CLI::App app{"N-anholonomic geometry toolkit"};
  app.require_subcommand(1);

  std::string scene_path, format = "text", out_path;
  double tol = -1.0;
  long panels = -1, seed = -1, jet_order = -1, samples = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scene", scene_path, "scene file")->required();
    cmd->add_option("--tol", tol, "residual tolerance (default 1e-6)");
    cmd->add_option("--panels", panels, "quadrature panels (default 4096)");
    cmd->add_option("--seed", seed, "sampling seed (default 0)");
    cmd->add_option("--jet-order", jet_order, "jet truncation order (1 or 2)");
    cmd->add_option("--samples", samples, "sample points per sweep");
    cmd->add_option("--format", format, "output format: json|csv|text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    cmd->add_option("--out", out_path, "write the report to a file");
  };
  add_common(app.add_subcommand("geometrize",
                                "derive metric, spray and connection from L"));
  add_common(app.add_subcommand("curvature",
                                "torsion, curvature, Ricci and Einstein sweeps"));
  add_common(app.add_subcommand("solve", "run a solution-generator recipe"));
  add_common(app.add_subcommand("verify", "run every applicable check suite"));

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    nholo::Scene scene = nholo::load_scene(scene_path);
    if (tol >= 0) scene.options.tol = tol;
    if (panels > 0) scene.options.panels = static_cast<int>(panels);
    if (seed >= 0) scene.options.seed = static_cast<std::uint64_t>(seed);
    if (jet_order > 0) {
      if (jet_order != 1 && jet_order != 2)
        throw nholo::SceneError("jet order must be 1 or 2");
      scene.options.jet_order = static_cast<int>(jet_order);
    }
    if (samples > 0) scene.options.samples = static_cast<int>(samples);
    if (scene.driver == nholo::Scene::Driver::Recipe)
      scene.recipe.tol = scene.options.tol;

    nholo::Report report = nholo::run_command(cmd, scene);
    std::string text = format == "json"  ? nholo::render_json(report)
                       : format == "csv" ? nholo::render_csv(report)
                                         : nholo::render_text(report);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw nholo::SceneError("cannot write '" + out_path + "'");
      out << text;
    }
    return report.exit_code();
  } catch (const nholo::SceneError& e) {
    std::cerr << "scene error: " << e.what() << '\n';
    return 2;
  } catch (const nholo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
