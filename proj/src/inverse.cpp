#include "thermoid/inverse.hpp"

#include <cmath>

namespace thermoid {

CostBreakdown evaluate_cost(const MeasurementSet& measurements, const MatrixXd& predictions, const SensorSet& sensors)
{
  if (predictions.rows() != measurements.values.rows() || predictions.cols() != measurements.values.cols() ||
      predictions.cols() != static_cast<Eigen::Index>(sensors.size()))
    throw ShapeError("predictions are " + std::to_string(predictions.rows()) + "x" +
                     std::to_string(predictions.cols()) + " but measurements are " +
                     std::to_string(measurements.values.rows()) + "x" + std::to_string(measurements.values.cols()) +
                     " for " + std::to_string(sensors.size()) + " sensors");
  CostBreakdown c;
  c.residuals = measurements.values - predictions;
  for (Eigen::Index j = 0; j < c.residuals.cols(); ++j) {
    const Sensor& s = sensors.sensors[j];
    const double part = 0.5 * s.weight * c.residuals.col(j).squaredNorm();
    (s.kind == SensorKind::strain ? c.strain : c.displacement) += part;
  }
  c.total = c.displacement + c.strain;
  return c;
}

VectorXd adjoint_rhs(const SparseMatrix& free_operator, const SensorSet& sensors, const VectorXd& residuals)
{
  if (residuals.size() != free_operator.rows() || residuals.size() != static_cast<Eigen::Index>(sensors.size()))
    throw ShapeError("residual vector does not match the sensor operator");
  VectorXd wr(residuals.size());
  for (Eigen::Index j = 0; j < wr.size(); ++j) wr[j] = sensors.sensors[j].weight * residuals[j];
  return -(free_operator.transpose() * wr);
}

VectorXd adjoint_solve(const LinearSolver& solver, const VectorXd& rhs) { return solver.solve(rhs); }

DisplacementField adjoint_solve(const AssembledSystem& system, const VectorXd& rhs)
{
  return expand_displacements(system.dof_map, LinearSolver(system.stiffness).solve(rhs));
}

SparseMatrix thermal_load_operator(const Mesh& mesh, const DofMap& dofs)
{
  std::vector<Eigen::Triplet<double>> t;
  std::vector<double> ones;
  for (const auto& e : mesh.elements) {
    const double nn = static_cast<double>(e.nodes.size());
    ones.assign(e.nodes.size(), 1.0);
    const VectorXd unit = element_thermal_force(mesh, e, ones) / nn;
    const auto map = dofs.element_dofs(e);
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (map[i] < 0) continue;
      for (int node : e.nodes) t.emplace_back(map[i], node, unit[i]);
    }
  }
  SparseMatrix g(dofs.num_free(), static_cast<Eigen::Index>(mesh.num_nodes()));
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

NodalField gradient(const SparseMatrix& thermal_operator, const std::vector<VectorXd>& adjoints)
{
  NodalField g = NodalField::Zero(thermal_operator.cols());
  for (const auto& a : adjoints) {
    if (a.size() != thermal_operator.rows()) throw ShapeError("adjoint field does not match the free DOF count");
    g += thermal_operator.transpose() * a;
  }
  return g;
}

NodalField gradient(const Mesh& mesh, const DofMap& dofs, const std::vector<VectorXd>& adjoints)
{
  return gradient(thermal_load_operator(mesh, dofs), adjoints);
}

// ---------------------------------------------------------------------------

ThermalProblem::ThermalProblem(const Mesh& mesh, std::vector<LoadCase> load_cases, SensorSet sensors,
                               MeasurementSet measurements)
    : mesh_(mesh), cases_(std::move(load_cases)), sensors_(std::move(sensors)), measurements_(std::move(measurements)),
      dofs_(mesh)
{
  if (cases_.empty()) throw ValidationError("at least one load case is required");
  measurements_.check_complete(cases_, sensors_);
  solver_.factorize(assemble_stiffness(mesh_, dofs_));
  thermal_ = thermal_load_operator(mesh_, dofs_);
  sensing_ = build_interpolation(mesh_, sensors_).restrict_to(dofs_);
  for (const auto& lc : cases_) external_.push_back(assemble_external_load(mesh_, lc, dofs_));
}

void ThermalProblem::set_frozen(std::vector<bool> frozen)
{
  if (!frozen.empty() && frozen.size() != mesh_.num_nodes())
    throw ShapeError("frozen mask has " + std::to_string(frozen.size()) + " entries for " +
                     std::to_string(mesh_.num_nodes()) + " nodes");
  frozen_ = std::move(frozen);
}

Evaluation ThermalProblem::evaluate(const NodalField& dT, bool with_gradient) const
{
  if (dT.size() != num_nodes())
    throw ShapeError("temperature field has " + std::to_string(dT.size()) + " entries, mesh has " +
                     std::to_string(num_nodes()) + " nodes");
  if (!dT.allFinite()) throw OptimizationError("temperature field contains non-finite values");

  const std::size_t n = cases_.size();
  // same arithmetic as synthesize_measurements, so a synthetic target fits at exactly zero cost
  const VectorXd thermal = assemble_thermal_load(mesh_, dT, dofs_);
  std::vector<VectorXd> u(n);
  parallel_for(n, [&](std::size_t i) { u[i] = solver_.solve(external_[i] + thermal); });

  Evaluation ev;
  ev.predictions.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sensors_.size()));
  for (std::size_t i = 0; i < n; ++i) ev.predictions.row(static_cast<Eigen::Index>(i)) = sensing_ * u[i];
  ev.cost = evaluate_cost(measurements_, ev.predictions, sensors_);

  NodalField reg_grad;
  if (regularizer_) {
    reg_grad = NodalField::Zero(dT.size());
    ev.cost.total += regularizer_(dT, with_gradient ? &reg_grad : nullptr);
  }
  if (!with_gradient) return ev;

  std::vector<VectorXd> adjoints(n);
  parallel_for(n, [&](std::size_t i) {
    const VectorXd rhs = adjoint_rhs(sensing_, sensors_, ev.cost.residuals.row(static_cast<Eigen::Index>(i)).transpose());
    adjoints[i] = adjoint_solve(solver_, rhs);
  });
  ev.gradient = gradient(thermal_, adjoints);
  if (regularizer_) ev.gradient += reg_grad;
  for (std::size_t j = 0; j < frozen_.size(); ++j)
    if (frozen_[j]) ev.gradient[static_cast<Eigen::Index>(j)] = 0.0;
  return ev;
}

}  // namespace thermoid
