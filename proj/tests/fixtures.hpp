#pragma once

// Small meshes with O(1) material constants so finite differences and hand
// values stay well conditioned.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <optional>
#include <string>
#include <vector>

#include "thermoid/inverse.hpp"
#include "thermoid/mesh.hpp"
#include "thermoid/sensors.hpp"

namespace fixtures {

using thermoid::DirichletBC;
using thermoid::Element;
using thermoid::ElementKind;
using thermoid::LoadCase;
using thermoid::Material;
using thermoid::Mesh;
using thermoid::NodalField;
using thermoid::Sensor;
using thermoid::SensorKind;
using thermoid::SensorSet;
using thermoid::Vec3;

inline Material material(double young = 100.0, double poisson = 0.3, double alpha = 0.01, double density = 1.0)
{
  return Material{0, density, young, poisson, alpha};
}

inline void add_node(Mesh& m, double x, double y, double z = 0.0)
{
  m.nodes.push_back({static_cast<int>(m.nodes.size()), Vec3(x, y, z)});
}

inline void add_element(Mesh& m, ElementKind kind, std::vector<int> nodes, std::optional<double> section)
{
  m.elements.push_back({static_cast<int>(m.elements.size()), kind, std::move(nodes), 0, section});
}

/// Two-node bar along x of length L. Node 0 is clamped; node 1 is free in x
/// only, or clamped too when `clamp_both`.
inline Mesh bar(double length = 1.0, const Material& mat = material(), double area = 1.0, bool clamp_both = false)
{
  Mesh m;
  m.dimension = 3;
  add_node(m, 0, 0);
  add_node(m, length, 0);
  m.materials.push_back(mat);
  add_element(m, ElementKind::truss3d, {0, 1}, area);
  m.dirichlet.push_back({0, {true, true, true}});
  m.dirichlet.push_back({1, {clamp_both, true, true}});
  return m;
}

/// 3x3 node grid on [0,2]^2 split into 8 triangles; x = 0 clamped.
inline Mesh tri_patch(const Material& mat = material())
{
  Mesh m;
  m.dimension = 2;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) add_node(m, i, j);
  m.materials.push_back(mat);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      const int a = j * 3 + i, b = a + 1, c = a + 4, d = a + 3;
      add_element(m, ElementKind::tri3, {a, b, c}, 1.0);
      add_element(m, ElementKind::tri3, {a, c, d}, 1.0);
    }
  for (int j = 0; j < 3; ++j) m.dirichlet.push_back({j * 3, {true, true, false}});
  return m;
}

/// 5x2 node strip on [0,4]x[0,1]: 10 nodes, 8 triangles; x = 0 clamped.
inline Mesh strip10(const Material& mat = material())
{
  Mesh m;
  m.dimension = 2;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 5; ++i) add_node(m, i, j);
  m.materials.push_back(mat);
  for (int i = 0; i < 4; ++i) {
    const int a = i, b = i + 1, c = i + 6, d = i + 5;
    add_element(m, ElementKind::tri3, {a, b, c}, 1.0);
    add_element(m, ElementKind::tri3, {a, c, d}, 1.0);
  }
  m.dirichlet.push_back({0, {true, true, false}});
  m.dirichlet.push_back({5, {true, true, false}});
  return m;
}

inline double signed_volume(const Mesh& m, const std::vector<int>& t)
{
  const Vec3& p0 = m.nodes[t[0]].position;
  return (m.nodes[t[1]].position - p0).dot((m.nodes[t[2]].position - p0).cross(m.nodes[t[3]].position - p0)) / 6.0;
}

/// Two unit cubes along x, each split into 6 tetrahedra around its main
/// diagonal: 12 nodes, 12 tets; x = 0 face clamped.
inline Mesh tet_block(const Material& mat = material())
{
  Mesh m;
  m.dimension = 3;
  auto id = [](int i, int j, int k) { return (k * 2 + j) * 3 + i; };
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 3; ++i) add_node(m, i, j, k);
  m.materials.push_back(mat);
  const std::array<std::array<int, 2>, 6> orders{{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};
  for (int c = 0; c < 2; ++c) {
    auto corner = [&](int bits) { return id(c + (bits & 1), (bits >> 1) & 1, (bits >> 2) & 1); };
    for (const auto& o : orders) {
      const int a = 1 << o[0], b = a | (1 << o[1]);
      std::vector<int> t{corner(0), corner(a), corner(b), corner(7)};
      if (signed_volume(m, t) < 0) std::swap(t[2], t[3]);
      add_element(m, ElementKind::tet4, t, std::nullopt);
    }
  }
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) m.dirichlet.push_back({id(0, j, k), {true, true, true}});
  return m;
}

inline Sensor displacement(int id, const Vec3& p, const Vec3& dir, double weight = 1.0)
{
  return Sensor{id, p, SensorKind::displacement, dir.normalized(), weight};
}

inline Sensor strain(int id, const Vec3& p, const Vec3& dir, double weight = 1.0)
{
  return Sensor{id, p, SensorKind::strain, dir.normalized(), weight};
}

inline SensorSet bar_sensors(double weight = 1.0)
{
  return {{displacement(0, Vec3(1, 0, 0), Vec3::UnitX(), weight)}};
}

inline SensorSet bar_sensors_with_strain(double weight = 1.0)
{
  return {{displacement(0, Vec3(1, 0, 0), Vec3::UnitX(), weight), strain(1, Vec3(0.5, 0, 0), Vec3::UnitX(), weight)}};
}

inline SensorSet patch_sensors(double weight = 1e3)
{
  return {{displacement(0, Vec3(2, 1, 0), Vec3::UnitX(), weight), displacement(1, Vec3(2, 1, 0), Vec3::UnitY(), weight),
           displacement(2, Vec3(1, 2, 0), Vec3::UnitY(), weight),
           displacement(3, Vec3(1.5, 0.5, 0), Vec3(1, 1, 0), weight),
           strain(4, Vec3(1.3, 0.7, 0), Vec3::UnitX(), 10 * weight),
           strain(5, Vec3(0.4, 1.7, 0), Vec3(1, 1, 0), 10 * weight)}};
}

inline SensorSet strip_sensors(double weight = 1e3)
{
  return {{displacement(0, Vec3(4, 0, 0), Vec3::UnitX(), weight), displacement(1, Vec3(4, 1, 0), Vec3::UnitY(), weight),
           displacement(2, Vec3(2, 1, 0), Vec3::UnitX(), weight), displacement(3, Vec3(2.5, 0.5, 0), Vec3::UnitY(), weight),
           strain(4, Vec3(1.2, 0.4, 0), Vec3::UnitX(), 10 * weight)}};
}

inline SensorSet block_sensors(double weight = 1e3)
{
  return {{displacement(0, Vec3(2, 1, 1), Vec3::UnitX(), weight), displacement(1, Vec3(2, 0, 1), Vec3::UnitZ(), weight),
           displacement(2, Vec3(2, 0.5, 0.5), Vec3::UnitY(), weight),
           displacement(3, Vec3(1, 0.3, 0.6), Vec3(1, 1, 1), weight),
           strain(4, Vec3(1.5, 0.4, 0.2), Vec3::UnitX(), 10 * weight),
           strain(5, Vec3(0.4, 0.5, 0.5), Vec3(0, 1, 1), 10 * weight)}};
}

/// A point load at `node` plus gravity, and an unloaded case.
inline std::vector<LoadCase> two_cases(int node, const Vec3& force)
{
  LoadCase a;
  a.id = 0;
  a.nodal_loads.push_back({node, force});
  a.body_force = Vec3(0, -0.5, 0);
  LoadCase b;
  b.id = 1;
  return {a, b};
}

inline NodalField random_field(int n, unsigned seed, double lo = -5.0, double hi = 10.0)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  NodalField f(n);
  for (int i = 0; i < n; ++i) f[i] = u(rng);
  return f;
}

/// Bundles a mesh with cases, sensors and measurements synthesized from a
/// known target field.
struct Problem {
  Mesh mesh;
  std::vector<LoadCase> cases;
  SensorSet sensors;
  NodalField target;
  thermoid::MeasurementSet measurements;

  thermoid::ThermalProblem make() const { return {mesh, cases, sensors, measurements}; }
};

inline Problem make_problem(Mesh mesh, std::vector<LoadCase> cases, SensorSet sensors, unsigned seed)
{
  Problem p{std::move(mesh), std::move(cases), std::move(sensors), {}, {}};
  p.target = random_field(static_cast<int>(p.mesh.num_nodes()), seed);
  p.measurements = thermoid::synthesize_measurements(p.mesh, p.cases, p.target, p.sensors);
  return p;
}

inline Problem bar_problem()
{
  return make_problem(bar(), two_cases(1, Vec3(0.3, 0, 0)), bar_sensors_with_strain(1e4), 11);
}

inline Problem patch_problem()
{
  return make_problem(tri_patch(), two_cases(8, Vec3(1, 0.5, 0)), patch_sensors(), 12);
}

inline Problem block_problem()
{
  return make_problem(tet_block(), two_cases(11, Vec3(0.5, 0.2, -0.4)), block_sensors(), 13);
}

inline Problem strip_problem()
{
  return make_problem(strip10(), two_cases(9, Vec3(0.2, -0.3, 0)), strip_sensors(), 14);
}

/// Central differences of the cost with step h at every node.
inline NodalField fd_gradient(const thermoid::ThermalProblem& problem, const NodalField& dT, double h)
{
  NodalField g(dT.size());
  for (int j = 0; j < dT.size(); ++j) {
    NodalField p = dT, m = dT;
    p[j] += h;
    m[j] -= h;
    g[j] = (problem.evaluate(p, false).cost.total - problem.evaluate(m, false).cost.total) / (2 * h);
  }
  return g;
}

/// max_j |a_j - b_j| / max(1, |a|_inf)
inline double scaled_error(const NodalField& a, const NodalField& b)
{
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
}

inline std::string data_path(const std::string& rel) { return std::string(THERMOID_DATA_DIR) + "/" + rel; }

}  // namespace fixtures
