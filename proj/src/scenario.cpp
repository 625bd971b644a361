#include "thermoid/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermoid/io.hpp"

namespace thermoid {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, const std::string& p)
{
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

const json& require(const json& obj, const char* key, const std::string& where)
{
  if (!obj.contains(key)) throw ParseError(where + "." + key + ": missing required field");
  return obj[key];
}

std::string get_string(const json& obj, const char* key, const std::string& where)
{
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where)
{
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ParseError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where)
{
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ParseError(where + "." + key + ": expected true or false");
  return obj[key].get<bool>();
}

Vec3 get_vec3(const json& obj, const char* key, const std::string& where)
{
  const json& v = require(obj, key, where);
  if (!v.is_array() || v.size() != 3) throw ParseError(where + "." + key + ": expected [x, y, z]");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ParseError(where + "." + key + ": expected numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: malformed JSON: ") + e.what());
  }
  const std::string w = "scenario";
  Scenario s;
  s.name = doc.value("name", std::string("scenario"));
  s.mesh_path = resolve(base_dir, get_string(doc, "mesh", w));
  const json& cases = require(doc, "load_cases", w);
  if (!cases.is_array() || cases.empty()) throw ParseError("scenario.load_cases: expected a non-empty array");
  for (const auto& c : cases) {
    if (!c.is_string()) throw ParseError("scenario.load_cases: expected file paths");
    s.load_case_paths.push_back(resolve(base_dir, c.get<std::string>()));
  }
  s.sensors_path = resolve(base_dir, get_string(doc, "sensors", w));

  if (doc.contains("target")) {
    const json& t = doc["target"];
    TargetSpec spec;
    if (t.contains("field")) {
      spec.field_path = resolve(base_dir, get_string(t, "field", "scenario.target"));
    } else {
      spec.default_value = get_number(t, "default", 0.0, "scenario.target");
      const json& regions = require(t, "regions", "scenario.target");
      if (!regions.is_array()) throw ParseError("scenario.target.regions: expected an array");
      for (std::size_t i = 0; i < regions.size(); ++i) {
        const std::string rw = "scenario.target.regions[" + std::to_string(i) + "]";
        const json& box = require(regions[i], "box", rw);
        TargetRegion r;
        r.min = get_vec3(box, "min", rw + ".box");
        r.max = get_vec3(box, "max", rw + ".box");
        r.value = get_number(regions[i], "value", 0.0, rw);
        spec.regions.push_back(r);
      }
    }
    s.target = spec;
  }
  if (doc.contains("measurements")) s.measurements_path = resolve(base_dir, get_string(doc, "measurements", w));
  if (s.target.has_value() == s.measurements_path.has_value())
    throw ValidationError("scenario: exactly one of 'target' and 'measurements' is required");
  if (doc.contains("samples")) s.samples_path = resolve(base_dir, get_string(doc, "samples", w));

  if (doc.contains("filter")) {
    const json& f = doc["filter"];
    s.filter_enabled = get_bool(f, "enabled", true, "scenario.filter");
    s.filter_radius = get_number(f, "radius", s.filter_radius, "scenario.filter");
  }
  if (doc.contains("bounds")) {
    const json& b = doc["bounds"];
    s.bounds_enabled = get_bool(b, "enabled", true, "scenario.bounds");
    s.bounds.lower = get_number(b, "lower", s.bounds.lower, "scenario.bounds");
    s.bounds.upper = get_number(b, "upper", s.bounds.upper, "scenario.bounds");
    s.bounds.beta = get_number(b, "beta", s.bounds.beta, "scenario.bounds");
    s.bounds.validate();
  }
  if (doc.contains("optimizer")) {
    const json& o = doc["optimizer"];
    const std::string ow = "scenario.optimizer";
    s.optimizer.max_step = get_number(o, "max_step", s.optimizer.max_step, ow);
    s.optimizer.max_iterations =
        static_cast<int>(get_number(o, "max_iterations", s.optimizer.max_iterations, ow));
    s.optimizer.convergence_factor = get_number(o, "convergence_factor", s.optimizer.convergence_factor, ow);
    s.optimizer.divergence_factor = get_number(o, "divergence_factor", s.optimizer.divergence_factor, ow);
    s.optimizer.snapshot_every = static_cast<int>(get_number(o, "snapshot_every", 0, ow));
    const std::string rule = o.value("step_rule", std::string("barzilai_borwein"));
    if (rule == "barzilai_borwein" || rule == "bb") s.optimizer.step_rule = StepRule::barzilai_borwein;
    else if (rule == "constant") s.optimizer.step_rule = StepRule::constant;
    else throw ParseError("scenario.optimizer.step_rule: unknown rule '" + rule + "'");
    if (o.contains("constant_step")) s.optimizer.constant_step = get_number(o, "constant_step", 0.0, ow);
    if (o.contains("initial_step")) s.optimizer.initial_step = get_number(o, "initial_step", 0.0, ow);
    s.optimizer.validate();
  }
  if (doc.contains("interpolation")) {
    const json& i = doc["interpolation"];
    s.knn_k = static_cast<int>(get_number(i, "k", s.knn_k, "scenario.interpolation"));
    const std::string model = i.value("variogram", std::string("gaussian"));
    if (model == "gaussian") s.variogram_model = VariogramModel::gaussian;
    else if (model == "linear") s.variogram_model = VariogramModel::linear;
    else if (model == "power") s.variogram_model = VariogramModel::power;
    else throw ParseError("scenario.interpolation.variogram: unknown model '" + model + "'");
  }
  s.noise_stddev = get_number(doc, "noise_stddev", 0.0, w);
  s.seed = static_cast<std::uint64_t>(get_number(doc, "seed", 0.0, w));
  s.output_dir = resolve(base_dir, doc.value("output", std::string("out/") + s.name));
  return s;
}

Scenario load_scenario(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), fs::path(path).parent_path().string());
}

NodalField evaluate_target(const TargetSpec& target, const Mesh& mesh)
{
  const int n = static_cast<int>(mesh.num_nodes());
  if (target.field_path) return read_field_csv(*target.field_path, n);
  NodalField f = NodalField::Constant(n, target.default_value);
  for (int i = 0; i < n; ++i) {
    const Vec3& p = mesh.nodes[i].position;
    for (const auto& r : target.regions)
      if ((p.array() >= r.min.array()).all() && (p.array() <= r.max.array()).all()) {
        f[i] = r.value;
        break;
      }
  }
  return f;
}

ScenarioData load_scenario_data(const Scenario& s)
{
  ScenarioData d;
  d.mesh = load_mesh(s.mesh_path);
  for (const auto& p : s.load_case_paths) d.load_cases.push_back(load_load_case(p));
  d.sensors = load_sensors(s.sensors_path);
  if (s.target) {
    d.target = evaluate_target(*s.target, d.mesh);
    d.measurements = synthesize_measurements(d.mesh, d.load_cases, *d.target, d.sensors, s.noise_stddev, s.seed);
  } else {
    d.measurements = read_measurements_csv(*s.measurements_path, d.load_cases, d.sensors);
  }
  return d;
}

DesignMap scenario_design(const Scenario& s, const Mesh& mesh, bool use_filter)
{
  DesignMap design;
  if (use_filter && s.filter_enabled) {
    design.filter = build_kernel(mesh, s.filter_radius);
    if (s.bounds_enabled) design.bounds = s.bounds;
  }
  return design;
}

ReconstructionResult run_reconstruction(const Scenario& s, const ScenarioData& d, bool use_filter,
                                        std::optional<int> max_iterations)
{
  const ThermalProblem problem(d.mesh, d.load_cases, d.sensors, d.measurements);
  OptimizerConfig cfg = s.optimizer;
  if (max_iterations) cfg.max_iterations = *max_iterations;
  return reconstruct(problem, scenario_design(s, d.mesh, use_filter), cfg);
}

SampleSet scenario_samples(const Scenario& s, const ScenarioData& d)
{
  if (s.samples_path) return read_samples_csv(*s.samples_path);
  if (!d.target) throw ValidationError("scenario has neither a target field nor a samples file");
  return samples_from_field(d.mesh, *d.target, d.sensors);
}

InterpolationOutcome run_interpolation(const Scenario& s, const ScenarioData& d, InterpolationMethod method)
{
  InterpolationParams params;
  params.k = s.knn_k;
  params.model = s.variogram_model;
  return interpolate_field(d.mesh, scenario_samples(s, d), method, params);
}

double rmse(const NodalField& a, const NodalField& b)
{
  if (a.size() != b.size())
    throw ShapeError("fields have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " nodes");
  if (a.size() == 0) throw ShapeError("empty fields");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace thermoid
