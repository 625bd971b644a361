#include "thermoid/fem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "thermoid/elements.hpp"

namespace thermoid {

using nlohmann::json;

// ---------------------------------------------------------------------------
// LoadCase I/O

LoadCase parse_load_case(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("load case: malformed JSON: ") + e.what());
  }
  auto vec3 = [](const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ParseError(where + ": expected [x, y, z]");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ParseError(where + ": expected numbers");
      out[i] = v[i].get<double>();
    }
    if (!out.allFinite()) throw ValidationError(where + ": non-finite value");
    return out;
  };

  LoadCase lc;
  if (!doc.contains("id") || !doc["id"].is_number_integer()) throw ParseError("load_case.id: missing or not an integer");
  lc.id = doc["id"].get<int>();
  if (!doc.contains("nodal_loads") || !doc["nodal_loads"].is_array())
    throw ParseError("load_case.nodal_loads: missing or not an array");
  const auto& loads = doc["nodal_loads"];
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const std::string where = "load_case.nodal_loads[" + std::to_string(i) + "]";
    if (!loads[i].contains("node") || !loads[i]["node"].is_number_integer())
      throw ParseError(where + ".node: missing or not an integer");
    if (!loads[i].contains("f")) throw ParseError(where + ".f: missing required field");
    lc.nodal_loads.push_back({loads[i]["node"].get<int>(), vec3(loads[i]["f"], where + ".f")});
  }
  if (!doc.contains("body_force")) throw ParseError("load_case.body_force: missing required field");
  lc.body_force = vec3(doc["body_force"], "load_case.body_force");
  return lc;
}

std::string serialize_load_case(const LoadCase& lc)
{
  json doc;
  doc["id"] = lc.id;
  json loads = json::array();
  for (const auto& l : lc.nodal_loads)
    loads.push_back({{"node", l.node}, {"f", {l.force.x(), l.force.y(), l.force.z()}}});
  doc["nodal_loads"] = std::move(loads);
  doc["body_force"] = {lc.body_force.x(), lc.body_force.y(), lc.body_force.z()};
  return doc.dump(1);
}

LoadCase load_load_case(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open load case file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_load_case(buffer.str());
}

void save_load_case(const std::string& path, const LoadCase& load_case)
{
  std::ofstream out(path);
  if (!out) throw IoError("cannot write load case file '" + path + "'");
  out << serialize_load_case(load_case) << '\n';
}

// ---------------------------------------------------------------------------
// DofMap

DofMap::DofMap(const Mesh& mesh)
    : dofs_per_node_(mesh.dimension), num_nodes_(static_cast<int>(mesh.num_nodes()))
{
  global_to_free_.assign(static_cast<std::size_t>(num_nodes_ * dofs_per_node_), 0);
  for (const auto& bc : mesh.dirichlet)
    for (int c = 0; c < dofs_per_node_; ++c)
      if (bc.fixed[c]) global_to_free_[bc.node * dofs_per_node_ + c] = -1;
  for (auto& g : global_to_free_)
    g = g < 0 ? -1 : num_free_++;
}

std::vector<int> DofMap::element_dofs(const Element& element) const
{
  std::vector<int> dofs;
  dofs.reserve(element.nodes.size() * dofs_per_node_);
  for (int n : element.nodes)
    for (int c = 0; c < dofs_per_node_; ++c) dofs.push_back(free_index(n, c));
  return dofs;
}

// ---------------------------------------------------------------------------
// Element routines

namespace {

Eigen::Matrix<double, 2, 3> tri_coords(const Mesh& mesh, const Element& e)
{
  Eigen::Matrix<double, 2, 3> xy;
  for (int k = 0; k < 3; ++k) xy.col(k) = mesh.nodes[e.nodes[k]].position.head<2>();
  return xy;
}

Eigen::Matrix<double, 3, 4> tet_coords(const Mesh& mesh, const Element& e)
{
  Eigen::Matrix<double, 3, 4> x;
  for (int k = 0; k < 4; ++k) x.col(k) = mesh.nodes[e.nodes[k]].position;
  return x;
}

void check_measure(const Mesh& mesh, const Element& e)
{
  const double diag = bounding_box_diagonal(mesh);
  const int power = e.kind == ElementKind::truss3d ? 1 : e.kind == ElementKind::tri3 ? 2 : 3;
  if (!(element_measure(mesh, e) > 1e-12 * std::pow(diag, power)))
    throw GeometryError("element " + std::to_string(e.id) + ": singular geometry (zero measure)");
}

}  // namespace

MatrixXd element_stiffness(const Mesh& mesh, const Element& e)
{
  check_measure(mesh, e);
  const Material& m = mesh.material(e.material);
  MatrixXd k;
  switch (e.kind) {
    case ElementKind::truss3d:
      k = kernels::truss_stiffness<double>(mesh.nodes[e.nodes[0]].position, mesh.nodes[e.nodes[1]].position, m.young,
                                           *e.section);
      break;
    case ElementKind::tri3:
      k = kernels::tri3_stiffness<double>(tri_coords(mesh, e), m.young, m.poisson, *e.section);
      break;
    case ElementKind::tet4:
      k = kernels::tet4_stiffness<double>(tet_coords(mesh, e), m.young, m.poisson);
      break;
  }
  // exact symmetry of the assembled operator
  return 0.5 * (k + k.transpose());
}

VectorXd element_thermal_force(const Mesh& mesh, const Element& e, std::span<const double> nodal_dT)
{
  if (nodal_dT.size() != e.nodes.size())
    throw ShapeError("element " + std::to_string(e.id) + ": expected " + std::to_string(e.nodes.size()) +
                     " nodal temperatures, got " + std::to_string(nodal_dT.size()));
  double mean = 0.0;
  for (double t : nodal_dT) mean += t;
  mean /= static_cast<double>(nodal_dT.size());

  const Material& m = mesh.material(e.material);
  switch (e.kind) {
    case ElementKind::truss3d:
      return kernels::truss_thermal_force<double>(mesh.nodes[e.nodes[0]].position, mesh.nodes[e.nodes[1]].position,
                                                  m.young, *e.section, m.alpha, mean);
    case ElementKind::tri3:
      return kernels::tri3_thermal_force<double>(tri_coords(mesh, e), m.young, m.poisson, *e.section, m.alpha, mean);
    case ElementKind::tet4:
      return kernels::tet4_thermal_force<double>(tet_coords(mesh, e), m.young, m.poisson, m.alpha, mean);
  }
  return {};
}

VectorXd element_body_force(const Mesh& mesh, const Element& e, const Vec3& acceleration)
{
  const Material& m = mesh.material(e.material);
  double volume = element_measure(mesh, e);
  if (e.kind != ElementKind::tet4) volume *= *e.section;
  const int nn = static_cast<int>(e.nodes.size());
  const int dpn = mesh.dimension;
  VectorXd f(nn * dpn);
  // linear elements: equal share per node
  for (int k = 0; k < nn; ++k) f.segment(k * dpn, dpn) = m.density * volume / nn * acceleration.head(dpn);
  return f;
}

Eigen::RowVectorXd element_strain_row(const Mesh& mesh, const Element& e, const Vec3& d)
{
  switch (e.kind) {
    case ElementKind::truss3d: {
      const Vec3& a = mesh.nodes[e.nodes[0]].position;
      const Vec3& b = mesh.nodes[e.nodes[1]].position;
      const double c = (b - a).normalized().dot(d);
      return c * c * kernels::truss_strain_operator<double>(a, b);
    }
    case ElementKind::tri3: {
      const Eigen::Vector3d w(d.x() * d.x(), d.y() * d.y(), d.x() * d.y());
      return w.transpose() * kernels::tri3_strain_operator<double>(tri_coords(mesh, e));
    }
    case ElementKind::tet4: {
      Eigen::Matrix<double, 6, 1> w;
      w << d.x() * d.x(), d.y() * d.y(), d.z() * d.z(), d.x() * d.y(), d.y() * d.z(), d.z() * d.x();
      return w.transpose() * kernels::tet4_strain_operator<double>(tet_coords(mesh, e));
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Assembly

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs)
{
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& e : mesh.elements) {
    const MatrixXd ke = element_stiffness(mesh, e);
    const auto map = dofs.element_dofs(e);
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (map[i] < 0) continue;
      for (std::size_t j = 0; j < map.size(); ++j)
        if (map[j] >= 0) triplets.emplace_back(map[i], map[j], ke(i, j));
    }
  }
  SparseMatrix k(dofs.num_free(), dofs.num_free());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

VectorXd assemble_external_load(const Mesh& mesh, const LoadCase& lc, const DofMap& dofs)
{
  VectorXd f = VectorXd::Zero(dofs.num_free());
  for (const auto& load : lc.nodal_loads) {
    if (load.node < 0 || load.node >= static_cast<int>(mesh.num_nodes()))
      throw ValidationError("load case " + std::to_string(lc.id) + " references missing node " +
                            std::to_string(load.node));
    for (int c = 0; c < dofs.dofs_per_node(); ++c) {
      const int idx = dofs.free_index(load.node, c);
      if (idx >= 0) f[idx] += load.force[c];
    }
  }
  if (lc.body_force.squaredNorm() > 0.0) {
    for (const auto& e : mesh.elements) {
      const VectorXd fe = element_body_force(mesh, e, lc.body_force);
      const auto map = dofs.element_dofs(e);
      for (std::size_t i = 0; i < map.size(); ++i)
        if (map[i] >= 0) f[map[i]] += fe[i];
    }
  }
  return f;
}

VectorXd assemble_thermal_load(const Mesh& mesh, const NodalField& dT, const DofMap& dofs)
{
  if (dT.size() != static_cast<Eigen::Index>(mesh.num_nodes()))
    throw ShapeError("temperature field has " + std::to_string(dT.size()) + " entries, mesh has " +
                     std::to_string(mesh.num_nodes()) + " nodes");
  VectorXd f = VectorXd::Zero(dofs.num_free());
  std::vector<double> local;
  for (const auto& e : mesh.elements) {
    local.clear();
    for (int n : e.nodes) local.push_back(dT[n]);
    const VectorXd fe = element_thermal_force(mesh, e, local);
    const auto map = dofs.element_dofs(e);
    for (std::size_t i = 0; i < map.size(); ++i)
      if (map[i] >= 0) f[map[i]] += fe[i];
  }
  return f;
}

AssembledSystem assemble(const Mesh& mesh, const LoadCase& load_case, const NodalField& dT)
{
  AssembledSystem sys;
  sys.dof_map = DofMap(mesh);
  sys.stiffness = assemble_stiffness(mesh, sys.dof_map);
  sys.rhs = assemble_external_load(mesh, load_case, sys.dof_map) + assemble_thermal_load(mesh, dT, sys.dof_map);
  return sys;
}

// ---------------------------------------------------------------------------
// Linear solver

struct LinearSolver::Impl {
  SparseMatrix matrix;
  Eigen::SimplicialLLT<SparseMatrix> cholesky;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  bool iterative = false;
};

LinearSolver::LinearSolver(const SparseMatrix& stiffness, int direct_limit) { factorize(stiffness, direct_limit); }
LinearSolver::LinearSolver() = default;
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

void LinearSolver::factorize(const SparseMatrix& stiffness, int direct_limit)
{
  impl_ = std::make_unique<Impl>();
  impl_->matrix = stiffness;
  if (stiffness.rows() == 0) return;
  impl_->iterative = stiffness.rows() > direct_limit;
  if (impl_->iterative) {
    impl_->cg.setTolerance(1e-13);
    impl_->cg.setMaxIterations(static_cast<Eigen::Index>(20 * stiffness.rows()));
    impl_->cg.compute(impl_->matrix);
    if (impl_->cg.info() != Eigen::Success) throw SolverError("PCG setup failed");
  } else {
    impl_->cholesky.compute(impl_->matrix);
    if (impl_->cholesky.info() != Eigen::Success)
      throw SolverError("sparse Cholesky failed: stiffness is not positive definite (" +
                        std::to_string(stiffness.rows()) + " free DOFs); check Dirichlet constraints");
  }
}

int LinearSolver::size() const { return impl_ ? static_cast<int>(impl_->matrix.rows()) : 0; }
bool LinearSolver::uses_iterative() const { return impl_ && impl_->iterative; }

VectorXd LinearSolver::solve(const VectorXd& rhs) const
{
  if (!impl_) throw SolverError("solve called before factorize");
  if (rhs.size() != impl_->matrix.rows())
    throw ShapeError("rhs size " + std::to_string(rhs.size()) + " does not match system size " +
                     std::to_string(impl_->matrix.rows()));
  if (rhs.size() == 0) return VectorXd();
  if (rhs.squaredNorm() == 0.0) return VectorXd::Zero(rhs.size());

  VectorXd x;
  if (impl_->iterative) {
    x = impl_->cg.solve(rhs);
    if (impl_->cg.info() != Eigen::Success)
      throw SolverError("PCG did not converge after " + std::to_string(impl_->cg.iterations()) +
                        " iterations (estimated error " + std::to_string(impl_->cg.error()) + ")");
  } else {
    x = impl_->cholesky.solve(rhs);
  }
  const double res = relative_residual(impl_->matrix, x, rhs);
  if (!(res <= kResidualTolerance))
    throw SolverError("linear solve residual " + std::to_string(res) + " exceeds tolerance");
  return x;
}

double relative_residual(const SparseMatrix& k, const VectorXd& x, const VectorXd& rhs)
{
  const double denom = std::max(rhs.norm(), std::numeric_limits<double>::min());
  return (rhs - k * x).norm() / denom;
}

VectorXd solve_linear(const AssembledSystem& system)
{
  return LinearSolver(system.stiffness).solve(system.rhs);
}

DisplacementField expand_displacements(const DofMap& dofs, const VectorXd& free_values)
{
  DisplacementField u = DisplacementField::Zero(dofs.num_nodes(), 3);
  for (int n = 0; n < dofs.num_nodes(); ++n)
    for (int c = 0; c < dofs.dofs_per_node(); ++c) {
      const int idx = dofs.free_index(n, c);
      if (idx >= 0) u(n, c) = free_values[idx];
    }
  return u;
}

VectorXd restrict_to_free(const DofMap& dofs, const DisplacementField& u)
{
  VectorXd out(dofs.num_free());
  for (int n = 0; n < dofs.num_nodes(); ++n)
    for (int c = 0; c < dofs.dofs_per_node(); ++c) {
      const int idx = dofs.free_index(n, c);
      if (idx >= 0) out[idx] = u(n, c);
    }
  return out;
}

DisplacementField forward_solve(const Mesh& mesh, const LoadCase& load_case, const NodalField& dT)
{
  const AssembledSystem sys = assemble(mesh, load_case, dT);
  const VectorXd u = solve_linear(sys);
  return expand_displacements(sys.dof_map, u);
}

double truss_axial_force(const Mesh& mesh, const Element& e, const DisplacementField& u, const NodalField& dT)
{
  if (e.kind != ElementKind::truss3d) throw ValidationError("axial force requested for a non-truss element");
  const Vec3& a = mesh.nodes[e.nodes[0]].position;
  const Vec3& b = mesh.nodes[e.nodes[1]].position;
  Eigen::Matrix<double, 6, 1> ue;
  ue << u.row(e.nodes[0]).transpose(), u.row(e.nodes[1]).transpose();
  const double strain = kernels::truss_strain_operator<double>(a, b) * ue;
  const Material& m = mesh.material(e.material);
  const double mean = 0.5 * (dT[e.nodes[0]] + dT[e.nodes[1]]);
  return m.young * *e.section * (strain - m.alpha * mean);
}

}  // namespace thermoid
