#include "nholo/scene.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "nholo/lagrange.hpp"

namespace nholo {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

using Entries = std::vector<std::pair<std::string, std::string>>;

double as_number(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw SceneError("key '" + key + "' expects a number, got '" + v + "'");
}

long as_integer(const std::string& key, const std::string& v) {
  double x = as_number(key, v);
  long i = static_cast<long>(x);
  if (static_cast<double>(i) != x)
    throw SceneError("key '" + key + "' expects an integer, got '" + v + "'");
  return i;
}

std::vector<double> as_numbers(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(as_number(key, tok));
  return out;
}

ScalarField as_field(const std::string& key, const std::string& v,
                     const Chart& chart) {
  try {
    return parse(v, chart);
  } catch (const ParseError& e) {
    throw SceneError("key '" + key + "': " + e.what());
  }
}

/// g_1_2 -> indices (0, 1); validates range.
std::pair<int, int> entry_indices(const std::string& key, int rows, int cols) {
  size_t u1 = key.find('_');
  size_t u2 = key.find('_', u1 + 1);
  if (u1 == std::string::npos || u2 == std::string::npos)
    throw SceneError("metric key '" + key + "' is not of the form g_i_j");
  long r = as_integer(key, key.substr(u1 + 1, u2 - u1 - 1));
  long c = as_integer(key, key.substr(u2 + 1));
  if (r < 1 || r > rows || c < 1 || c > cols)
    throw SceneError("metric key '" + key + "' is out of range");
  return {static_cast<int>(r - 1), static_cast<int>(c - 1)};
}

Chart build_chart(const Entries& entries) {
  int n = -1, m = -1;
  std::vector<std::string> names;
  for (const auto& [key, value] : entries) {
    if (key == "n")
      n = static_cast<int>(as_integer(key, value));
    else if (key == "m")
      m = static_cast<int>(as_integer(key, value));
    else if (key == "names") {
      std::istringstream in(value);
      std::string tok;
      while (in >> tok) names.push_back(tok);
    } else
      throw SceneError("unknown [chart] key '" + key + "'");
  }
  if (n <= 0 || m <= 0)
    throw SceneError("[chart] needs positive n and m");
  if (static_cast<int>(names.size()) != n + m)
    throw SceneError("[chart] names must list n + m coordinates");
  return Chart(n, m, std::move(names));
}

void build_window(const Entries& entries, const Chart& chart, SceneWindow* w) {
  for (const auto& [key, value] : entries) {
    if (key == "lo")
      w->lo = as_numbers(key, value);
    else if (key == "hi")
      w->hi = as_numbers(key, value);
    else if (key == "count") {
      w->count.clear();
      for (double x : as_numbers(key, value))
        w->count.push_back(static_cast<int>(x));
    } else if (key == "v_margin")
      w->v_margin = as_number(key, value);
    else if (key == "value_margin")
      w->value_margin = as_number(key, value);
    else
      throw SceneError("unknown [window] key '" + key + "'");
  }
  int dim = chart.dim();
  if (static_cast<int>(w->lo.size()) != dim ||
      static_cast<int>(w->hi.size()) != dim)
    throw SceneError("[window] lo/hi must cover all chart coordinates");
  for (int i = 0; i < dim; ++i)
    if (w->lo[i] > w->hi[i]) throw SceneError("[window] has lo > hi");
  if (w->count.empty()) w->count.assign(dim, 3);
  if (static_cast<int>(w->count.size()) != dim)
    throw SceneError("[window] count must cover all chart coordinates");
}

void default_window(const Chart& chart, bool recipe, SceneWindow* w) {
  for (int i = 0; i < chart.dim(); ++i) {
    bool fiber = chart.is_v(i);
    w->lo.push_back(fiber ? (recipe ? 1.0 : 0.2) : (recipe ? -0.4 : -0.8));
    w->hi.push_back(fiber ? (recipe ? 2.0 : 1.2) : (recipe ? 0.4 : 0.8));
    w->count.push_back(3);
  }
}

void build_options(const Entries& entries, SceneOptions* o) {
  for (const auto& [key, value] : entries) {
    if (key == "tol")
      o->tol = as_number(key, value);
    else if (key == "panels")
      o->panels = static_cast<int>(as_integer(key, value));
    else if (key == "seed")
      o->seed = static_cast<std::uint64_t>(as_integer(key, value));
    else if (key == "jet_order")
      o->jet_order = static_cast<int>(as_integer(key, value));
    else if (key == "samples")
      o->samples = static_cast<int>(as_integer(key, value));
    else
      throw SceneError("unknown [options] key '" + key + "'");
  }
  if (o->jet_order != 1 && o->jet_order != 2)
    throw SceneError("jet_order must be 1 or 2");
  if (o->samples <= 0 || o->panels <= 0)
    throw SceneError("samples and panels must be positive");
}

void build_metric(const Entries& entries, const Chart& chart, Scene* s) {
  int n = chart.n(), m = chart.m();
  s->g.assign(n * n, constant(chart, 0.0));
  s->h.assign(m * m, constant(chart, 0.0));
  std::vector<ScalarField> ncoef(m * n, constant(chart, 0.0));
  std::vector<bool> gset(n * n, false), hset(m * m, false);
  for (const auto& [key, value] : entries) {
    if (key.rfind("g_", 0) == 0) {
      auto [i, j] = entry_indices(key, n, n);
      s->g[i * n + j] = as_field(key, value, chart);
      gset[i * n + j] = true;
    } else if (key.rfind("h_", 0) == 0) {
      auto [a, b] = entry_indices(key, m, m);
      s->h[a * m + b] = as_field(key, value, chart);
      hset[a * m + b] = true;
    } else if (key.rfind("N_", 0) == 0) {
      auto [a, i] = entry_indices(key, m, n);
      ncoef[a * n + i] = as_field(key, value, chart);
    } else
      throw SceneError("unknown [metric] key '" + key + "'");
  }
  // mirror entries given on one side only
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (gset[i * n + j] && !gset[j * n + i]) s->g[j * n + i] = s->g[i * n + j];
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (hset[a * m + b] && !hset[b * m + a]) s->h[b * m + a] = s->h[a * m + b];
  s->ncon = NConnection(chart, std::move(ncoef));
}

void build_recipe(const Entries& entries, const Chart& chart,
                  SolutionRecipe* r) {
  bool family_set = false;
  for (const auto& [key, value] : entries) {
    if (key == "family") {
      family_set = true;
      if (value == "exponential")
        r->g.family = GFamily::Exponential;
      else if (value == "profile")
        r->g.family = GFamily::ProfileOde;
      else if (value == "separable")
        r->g.family = GFamily::Separable;
      else
        throw SceneError("unknown recipe family '" + value + "'");
    } else if (key == "g0")
      r->g.g0 = as_number(key, value);
    else if (key == "a2")
      r->g.a2 = as_number(key, value);
    else if (key == "a3")
      r->g.a3 = as_number(key, value);
    else if (key == "g2_profile")
      r->g.g2_profile = as_field(key, value, chart);
    else if (key == "g30")
      r->g.g30 = as_number(key, value);
    else if (key == "c0")
      r->g.c0 = as_number(key, value);
    else if (key == "x2_base")
      r->g.x2_base = as_number(key, value);
    else if (key == "g2")
      r->g.g2_sep = as_field(key, value, chart);
    else if (key == "g3")
      r->g.g3_sep = as_field(key, value, chart);
    else if (key == "g1sign")
      r->g1sign = as_number(key, value);
    else if (key == "hbranch") {
      if (value == "h4_from_h5")
        r->hkind = SolutionRecipe::HKind::H4FromH5;
      else if (value == "h5_from_h4")
        r->hkind = SolutionRecipe::HKind::H5FromH4;
      else
        throw SceneError("unknown hbranch '" + value + "'");
    } else if (key == "h5")
      r->h5_seed = as_field(key, value, chart);
    else if (key == "h0")
      r->h0 = as_field(key, value, chart);
    else if (key == "h4")
      r->h4_seed = as_field(key, value, chart);
    else if (key == "s1")
      r->s1 = as_field(key, value, chart);
    else if (key == "s2")
      r->s2 = as_field(key, value, chart);
    else if (key == "wmode") {
      if (value == "free")
        r->wmode = WMode::Free;
      else if (value == "algebraic")
        r->wmode = WMode::Algebraic;
      else
        throw SceneError("unknown wmode '" + value + "'");
    } else if (key == "w_1" || key == "w_2" || key == "w_3")
      r->w[key[2] - '1'] = as_field(key, value, chart);
    else if (key == "n1_1" || key == "n1_2" || key == "n1_3")
      r->n1[key[3] - '1'] = as_field(key, value, chart);
    else if (key == "n2_1" || key == "n2_2" || key == "n2_3")
      r->n2[key[3] - '1'] = as_field(key, value, chart);
    else if (key == "varpi")
      r->varpi = as_field(key, value, chart);
    else if (key == "q1")
      r->q1 = static_cast<int>(as_integer(key, value));
    else if (key == "q2")
      r->q2 = static_cast<int>(as_integer(key, value));
    else
      throw SceneError("unknown [recipe] key '" + key + "'");
  }
  if (!family_set) throw SceneError("[recipe] needs a family");
}

}  // namespace

Scene parse_scene(std::string_view text) {
  std::map<std::string, Entries> sections;
  std::vector<std::string> order;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw SceneError("line " + std::to_string(lineno) +
                         ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) order.push_back(section);
      sections[section];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      throw SceneError("line " + std::to_string(lineno) +
                       ": expected 'key = value' inside a section");
    sections[section].emplace_back(trim(line.substr(0, eq)),
                                   trim(line.substr(eq + 1)));
  }
  for (const std::string& name : order)
    if (name != "chart" && name != "lagrangian" && name != "metric" &&
        name != "recipe" && name != "window" && name != "options")
      throw SceneError("unknown section [" + name + "]");

  Scene s;
  int drivers = static_cast<int>(sections.count("lagrangian")) +
                static_cast<int>(sections.count("metric")) +
                static_cast<int>(sections.count("recipe"));
  if (drivers != 1)
    throw SceneError(
        "exactly one of [lagrangian], [metric], [recipe] must be present");

  if (sections.count("chart"))
    s.chart = build_chart(sections["chart"]);
  else if (sections.count("recipe"))
    s.chart = solution_chart();
  else
    throw SceneError("missing [chart] section");

  if (sections.count("options")) build_options(sections["options"], &s.options);

  if (sections.count("lagrangian")) {
    s.driver = Scene::Driver::Lagrangian;
    if (s.chart.n() != s.chart.m())
      throw SceneError("[lagrangian] needs a tangent-bundle chart (m = n)");
    for (const auto& [key, value] : sections["lagrangian"]) {
      if (key == "L")
        s.lagrangian = as_field(key, value, s.chart);
      else
        throw SceneError("unknown [lagrangian] key '" + key + "'");
    }
    if (s.lagrangian.empty()) throw SceneError("[lagrangian] needs L");
  } else if (sections.count("metric")) {
    s.driver = Scene::Driver::Metric;
    build_metric(sections["metric"], s.chart, &s);
  } else {
    s.driver = Scene::Driver::Recipe;
    if (s.chart != solution_chart())
      throw SceneError("[recipe] requires the chart x1 x2 x3 v y5");
    build_recipe(sections["recipe"], s.chart, &s.recipe);
  }

  if (sections.count("window"))
    build_window(sections["window"], s.chart, &s.window);
  else
    default_window(s.chart, s.driver == Scene::Driver::Recipe, &s.window);

  if (s.driver == Scene::Driver::Recipe) {
    s.recipe.window.lo = s.window.lo;
    s.recipe.window.hi = s.window.hi;
    s.recipe.window.count = s.window.count;
    s.recipe.window.v_index = s.chart.n();
    s.recipe.window.v_margin = s.window.v_margin;
    s.recipe.window.value_margin = s.window.value_margin;
    s.recipe.tol = s.options.tol;
  }
  return s;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneError("cannot open scene file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

std::vector<Point> scene_sample_points(const Scene& scene, int count,
                                       SplitMix64& rng) {
  const SceneWindow& w = scene.window;
  int dim = scene.chart.dim();
  int vidx = scene.chart.n();  // margin guards the first fiber coordinate
  // only reject when the box reaches outside the margin, so sampling can
  // terminate even for windows placed entirely inside it
  bool can_escape = w.hi[vidx] >= w.v_margin || w.lo[vidx] <= -w.v_margin;
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) {
    for (int tries = 0;; ++tries) {
      if (tries > 1000)
        throw SceneError("window margins exclude the whole sample box");
      std::vector<double> u(dim);
      for (int i = 0; i < dim; ++i) u[i] = rng.uniform(w.lo[i], w.hi[i]);
      if (can_escape && std::fabs(u[vidx]) < w.v_margin) continue;
      out.emplace_back(std::move(u));
      break;
    }
  }
  return out;
}

DMetric scene_dmetric(const Scene& scene) {
  if (scene.driver == Scene::Driver::Metric)
    return DMetric{scene.chart, scene.g, scene.h, scene.ncon};
  if (scene.driver == Scene::Driver::Lagrangian)
    return sasaki_metric(Lagrangian(scene.chart, scene.lagrangian));
  throw SceneError("a recipe scene has no direct d-metric; use the solver");
}

}  // namespace nholo
