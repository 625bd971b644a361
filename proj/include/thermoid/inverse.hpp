#pragma once

#include <functional>
#include <vector>

#include "thermoid/fem.hpp"
#include "thermoid/sensors.hpp"

namespace thermoid {

/// I = 1/2 sum w (measured - predicted)^2, split by sensor kind.
struct CostBreakdown {
  double total = 0.0;
  double displacement = 0.0;
  double strain = 0.0;
  MatrixXd residuals;  // (case, sensor): measured - predicted
};

CostBreakdown evaluate_cost(const MeasurementSet& measurements, const MatrixXd& predictions, const SensorSet& sensors);

/// dI/du over free DOFs for one case: -H^T (w .* r).
VectorXd adjoint_rhs(const SparseMatrix& free_operator, const SensorSet& sensors, const VectorXd& residuals);

/// Solves K u~ = dI/du with the forward factorization (K is symmetric).
VectorXd adjoint_solve(const LinearSolver& solver, const VectorXd& rhs);
DisplacementField adjoint_solve(const AssembledSystem& system, const VectorXd& rhs);

/// d f_dT / d dT over free DOFs: column j = sum over elements holding node j
/// of (element thermal load at unit mean temperature) / nn.
SparseMatrix thermal_load_operator(const Mesh& mesh, const DofMap& dofs);

/// dI/d dT = sum over cases of G^T u~_case (the direct term is zero).
NodalField gradient(const Mesh& mesh, const DofMap& dofs, const std::vector<VectorXd>& adjoints);
NodalField gradient(const SparseMatrix& thermal_operator, const std::vector<VectorXd>& adjoints);

struct Evaluation {
  CostBreakdown cost;
  NodalField gradient;  // empty when not requested
  MatrixXd predictions;
};

/// Forward/adjoint machinery for a fixed mesh, load set and measurement set.
/// K is factorized once; the thermal load is linear in dT, f = f_ext + G dT.
class ThermalProblem {
public:
  ThermalProblem(const Mesh& mesh, std::vector<LoadCase> load_cases, SensorSet sensors, MeasurementSet measurements);

  Evaluation evaluate(const NodalField& dT, bool with_gradient = true) const;

  /// Nodes whose dT is held fixed; their gradient entries are zeroed.
  void set_frozen(std::vector<bool> frozen);
  /// Optional extra term R(dT) with its gradient, added to the cost.
  using Regularizer = std::function<double(const NodalField&, NodalField*)>;
  void set_regularizer(Regularizer r) { regularizer_ = std::move(r); }

  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const LinearSolver& solver() const { return solver_; }
  const SparseMatrix& thermal_operator() const { return thermal_; }
  const SparseMatrix& sensor_operator() const { return sensing_; }
  const std::vector<LoadCase>& load_cases() const { return cases_; }
  const SensorSet& sensors() const { return sensors_; }
  const MeasurementSet& measurements() const { return measurements_; }
  int num_nodes() const { return static_cast<int>(mesh_.num_nodes()); }

private:
  const Mesh& mesh_;
  std::vector<LoadCase> cases_;
  SensorSet sensors_;
  MeasurementSet measurements_;
  DofMap dofs_;
  LinearSolver solver_;
  SparseMatrix thermal_;
  SparseMatrix sensing_;
  std::vector<VectorXd> external_;
  std::vector<bool> frozen_;
  Regularizer regularizer_;
};

}  // namespace thermoid
