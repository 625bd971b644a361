#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thermoid/interp.hpp"
#include "thermoid/optimize.hpp"
#include "thermoid/regularize.hpp"

namespace thermoid {

/// Axis-aligned box predicate assigning a value to the nodes it contains.
struct TargetRegion {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  double value = 0.0;
};

/// Target dT either from box regions (first match wins) or a nodal CSV.
struct TargetSpec {
  std::vector<TargetRegion> regions;
  double default_value = 0.0;
  std::optional<std::string> field_path;
};

/// An experiment definition; relative paths are resolved against the file.
struct Scenario {
  std::string name;
  std::string mesh_path;
  std::vector<std::string> load_case_paths;
  std::string sensors_path;
  std::optional<TargetSpec> target;
  std::optional<std::string> measurements_path;
  std::optional<std::string> samples_path;

  bool filter_enabled = true;
  double filter_radius = 1.0;
  bool bounds_enabled = true;
  Bounds bounds;
  OptimizerConfig optimizer;

  int knn_k = 3;
  VariogramModel variogram_model = VariogramModel::gaussian;

  double noise_stddev = 0.0;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

Scenario parse_scenario(const std::string& text, const std::string& base_dir);
Scenario load_scenario(const std::string& path);

NodalField evaluate_target(const TargetSpec& target, const Mesh& mesh);

/// Everything a scenario references, loaded and validated.
struct ScenarioData {
  Mesh mesh;
  std::vector<LoadCase> load_cases;
  SensorSet sensors;
  std::optional<NodalField> target;
  MeasurementSet measurements;  // synthesized from the target when no file is given
};

ScenarioData load_scenario_data(const Scenario& scenario);

/// Design map for the scenario; `use_filter = false` gives plain dT descent.
DesignMap scenario_design(const Scenario& scenario, const Mesh& mesh, bool use_filter);

ReconstructionResult run_reconstruction(const Scenario& scenario, const ScenarioData& data, bool use_filter,
                                        std::optional<int> max_iterations = std::nullopt);

/// Temperature samples at the sensor locations: from the samples file when
/// given, otherwise from the target field.
SampleSet scenario_samples(const Scenario& scenario, const ScenarioData& data);

InterpolationOutcome run_interpolation(const Scenario& scenario, const ScenarioData& data,
                                       InterpolationMethod method);

double rmse(const NodalField& a, const NodalField& b);

}  // namespace thermoid
