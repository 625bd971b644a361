#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

#include "thermoid/core.hpp"
#include "thermoid/mesh.hpp"

namespace thermoid {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct NodalLoad {
  int node = 0;
  Vec3 force = Vec3::Zero();  // N
};

/// External loading of one test case: point loads plus a body acceleration
/// applied as rho * a per unit volume.
struct LoadCase {
  int id = 0;
  std::vector<NodalLoad> nodal_loads;
  Vec3 body_force = Vec3::Zero();  // m/s^2
};

LoadCase parse_load_case(std::string_view text);
std::string serialize_load_case(const LoadCase& load_case);
LoadCase load_load_case(const std::string& path);
void save_load_case(const std::string& path, const LoadCase& load_case);

/// Maps (node, component) to a free-DOF index, or -1 when constrained.
/// Components per node equal the mesh dimension.
class DofMap {
public:
  DofMap() = default;
  explicit DofMap(const Mesh& mesh);

  int dofs_per_node() const { return dofs_per_node_; }
  int num_nodes() const { return num_nodes_; }
  int num_free() const { return num_free_; }
  int free_index(int node, int component) const
  {
    return component < dofs_per_node_ ? global_to_free_[node * dofs_per_node_ + component] : -1;
  }
  // element DOF list in kernel order (node-major), -1 for constrained entries
  std::vector<int> element_dofs(const Element& element) const;

private:
  int dofs_per_node_ = 0;
  int num_nodes_ = 0;
  int num_free_ = 0;
  std::vector<int> global_to_free_;
};

struct AssembledSystem {
  SparseMatrix stiffness;  // free DOFs only, full symmetric storage
  VectorXd rhs;
  DofMap dof_map;
};

/// Per-node displacement vectors (rows), zeros at constrained components.
using DisplacementField = Eigen::MatrixX3d;

// Element-level routines (dense, element DOF order).
MatrixXd element_stiffness(const Mesh& mesh, const Element& element);
VectorXd element_thermal_force(const Mesh& mesh, const Element& element, std::span<const double> nodal_dT);
VectorXd element_body_force(const Mesh& mesh, const Element& element, const Vec3& acceleration);
/// Row operator giving the normal strain along `direction` from element DOFs.
Eigen::RowVectorXd element_strain_row(const Mesh& mesh, const Element& element, const Vec3& direction);

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs);
VectorXd assemble_external_load(const Mesh& mesh, const LoadCase& load_case, const DofMap& dofs);
VectorXd assemble_thermal_load(const Mesh& mesh, const NodalField& dT, const DofMap& dofs);

/// K, f_ext + f_dT over free DOFs; constrained DOFs eliminated.
AssembledSystem assemble(const Mesh& mesh, const LoadCase& load_case, const NodalField& dT);

/// SPD solver: sparse Cholesky below 50k DOFs, Jacobi-preconditioned CG above.
/// The factorization is reused across right-hand sides (forward and adjoint).
class LinearSolver {
public:
  static constexpr int kDirectLimit = 50000;
  static constexpr double kResidualTolerance = 1e-10;

  LinearSolver();
  explicit LinearSolver(const SparseMatrix& stiffness, int direct_limit = kDirectLimit);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  void factorize(const SparseMatrix& stiffness, int direct_limit = kDirectLimit);
  VectorXd solve(const VectorXd& rhs) const;
  int size() const;
  bool uses_iterative() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

VectorXd solve_linear(const AssembledSystem& system);

double relative_residual(const SparseMatrix& stiffness, const VectorXd& x, const VectorXd& rhs);

DisplacementField expand_displacements(const DofMap& dofs, const VectorXd& free_values);
VectorXd restrict_to_free(const DofMap& dofs, const DisplacementField& u);

DisplacementField forward_solve(const Mesh& mesh, const LoadCase& load_case, const NodalField& dT);

/// Axial force E*A*(eps - alpha*dT_avg) of a truss member.
double truss_axial_force(const Mesh& mesh, const Element& element, const DisplacementField& u, const NodalField& dT);

}  // namespace thermoid
