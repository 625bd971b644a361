#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "thermoid/fem.hpp"

namespace thermoid {

enum class SensorKind { displacement, strain };

/// One scalar channel. Displacement sensors read u . dir; strain sensors read
/// the normal strain dir^T eps dir of the containing element.
struct Sensor {
  int id = 0;
  Vec3 position = Vec3::Zero();
  SensorKind kind = SensorKind::displacement;
  Vec3 direction = Vec3::UnitX();
  double weight = 1.0;
};

struct SensorSet {
  std::vector<Sensor> sensors;
  std::size_t size() const { return sensors.size(); }
  void validate() const;
};

SensorSet parse_sensors(std::string_view text);
std::string serialize_sensors(const SensorSet& sensors);
SensorSet load_sensors(const std::string& path);
void save_sensors(const std::string& path, const SensorSet& sensors);

/// Containing element and its shape-function values at the point.
struct Location {
  int element = -1;  // index into mesh.elements
  VectorXd shape;
};

Location locate(const Mesh& mesh, const Vec3& point);

/// Sparse map from the global DOF vector (node * dim + component) to sensor
/// readings, one row per sensor.
struct InterpolationOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> rows;
  int dofs_per_node = 3;

  VectorXd apply(const DisplacementField& u) const;
  /// Same rows restricted to the free DOFs of `dofs` (constrained columns dropped).
  SparseMatrix restrict_to(const DofMap& dofs) const;
};

InterpolationOperator build_interpolation(const Mesh& mesh, const SensorSet& sensors);

enum class Provenance { synthetic, external };

/// Readings indexed (load case, sensor) in the order of the case and sensor lists.
struct MeasurementSet {
  std::vector<int> case_ids;
  std::vector<int> sensor_ids;
  MatrixXd values;
  Provenance provenance = Provenance::external;

  void check_complete(const std::vector<LoadCase>& cases, const SensorSet& sensors) const;
};

MeasurementSet synthesize_measurements(const Mesh& mesh, const std::vector<LoadCase>& load_cases,
                                       const NodalField& target, const SensorSet& sensors,
                                       double noise_stddev = 0.0, std::uint64_t seed = 0);

}  // namespace thermoid
