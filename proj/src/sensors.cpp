#include "thermoid/sensors.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thermoid/elements.hpp"

namespace thermoid {

using nlohmann::json;

void SensorSet::validate() const
{
  std::set<int> ids;
  for (const auto& s : sensors) {
    const std::string where = "sensor " + std::to_string(s.id);
    if (!ids.insert(s.id).second) throw ValidationError(where + ": duplicate id");
    if (!s.position.allFinite()) throw ValidationError(where + ": non-finite position");
    if (std::abs(s.direction.norm() - 1.0) > 1e-12) throw ValidationError(where + ": direction is not unit length");
    if (!(s.weight >= 0.0) || !std::isfinite(s.weight)) throw ValidationError(where + ": weight must be >= 0");
  }
}

SensorSet parse_sensors(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("sensors: malformed JSON: ") + e.what());
  }
  if (!doc.contains("sensors") || !doc["sensors"].is_array()) throw ParseError("sensors: missing 'sensors' array");
  auto vec3 = [](const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(where + "." + key + ": missing required field");
    const json& v = obj[key];
    if (!v.is_array() || v.size() != 3) throw ParseError(where + "." + key + ": expected [x, y, z]");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ParseError(where + "." + key + ": expected numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  };

  SensorSet set;
  const auto& arr = doc["sensors"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "sensors[" + std::to_string(i) + "]";
    const json& o = arr[i];
    Sensor s;
    if (!o.contains("id") || !o["id"].is_number_integer()) throw ParseError(where + ".id: missing or not an integer");
    s.id = o["id"].get<int>();
    s.position = vec3(o, "pos", where);
    s.direction = vec3(o, "dir", where);
    const std::string kind = o.value("kind", std::string("displacement"));
    if (kind == "displacement") s.kind = SensorKind::displacement;
    else if (kind == "strain") s.kind = SensorKind::strain;
    else throw ParseError(where + ".kind: unknown sensor kind '" + kind + "'");
    if (o.contains("weight")) {
      if (!o["weight"].is_number()) throw ParseError(where + ".weight: expected a number");
      s.weight = o["weight"].get<double>();
    }
    // accept directions normalized to printing precision
    const double norm = s.direction.norm();
    if (std::abs(norm - 1.0) < 1e-9) s.direction /= norm;
    set.sensors.push_back(s);
  }
  set.validate();
  return set;
}

std::string serialize_sensors(const SensorSet& set)
{
  json arr = json::array();
  for (const auto& s : set.sensors)
    arr.push_back({{"id", s.id},
                   {"pos", {s.position.x(), s.position.y(), s.position.z()}},
                   {"kind", s.kind == SensorKind::strain ? "strain" : "displacement"},
                   {"dir", {s.direction.x(), s.direction.y(), s.direction.z()}},
                   {"weight", s.weight}});
  return json{{"sensors", arr}}.dump(1);
}

SensorSet load_sensors(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sensors file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_sensors(buffer.str());
}

void save_sensors(const std::string& path, const SensorSet& sensors)
{
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sensors file '" + path + "'");
  out << serialize_sensors(sensors) << '\n';
}

// ---------------------------------------------------------------------------
// Point location

namespace {

// Shape values of `p` in element `e`, or an empty vector when p is outside
// by more than `tol` (a length).
VectorXd try_element(const Mesh& mesh, const Element& e, const Vec3& p, double tol)
{
  const auto x = [&](int k) -> const Vec3& { return mesh.nodes[e.nodes[k]].position; };
  switch (e.kind) {
    case ElementKind::truss3d: {
      const Vec3 axis = x(1) - x(0);
      const double len = axis.norm();
      const double t = (p - x(0)).dot(axis) / (len * len);
      if (t < -tol / len || t > 1.0 + tol / len) return {};
      if ((p - x(0) - t * axis).norm() > tol) return {};
      return Eigen::Vector2d(1.0 - t, t);
    }
    case ElementKind::tri3: {
      if (std::abs(p.z()) > tol) return {};
      const Eigen::Vector2d a = x(0).head<2>(), b = x(1).head<2>(), c = x(2).head<2>();
      Eigen::Matrix2d m;
      m << b - a, c - a;
      const Eigen::Vector2d st = m.inverse() * (p.head<2>() - a);
      const Eigen::Vector3d lam(1.0 - st.sum(), st.x(), st.y());
      // barycentric tolerance scaled by the smallest altitude
      const double area = std::abs(m.determinant()) / 2.0;
      const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
      if (lam.minCoeff() < -tol * longest / (2.0 * area)) return {};
      return lam;
    }
    case ElementKind::tet4: {
      Eigen::Matrix3d m;
      m << x(1) - x(0), x(2) - x(0), x(3) - x(0);
      const Eigen::Vector3d st = m.inverse() * (p - x(0));
      Eigen::Vector4d lam(1.0 - st.sum(), st.x(), st.y(), st.z());
      const double vol = std::abs(m.determinant()) / 6.0;
      double max_face = 0.0;
      for (int k = 0; k < 4; ++k) {
        const Vec3& a = x((k + 1) % 4);
        const Vec3& b = x((k + 2) % 4);
        const Vec3& c = x((k + 3) % 4);
        max_face = std::max(max_face, 0.5 * (b - a).cross(c - a).norm());
      }
      if (lam.minCoeff() < -tol * max_face / (3.0 * vol)) return {};
      return lam;
    }
  }
  return {};
}

}  // namespace

Location locate(const Mesh& mesh, const Vec3& point)
{
  const double diag = bounding_box_diagonal(mesh);
  const double tol = 1e-9 * std::max(diag, 1e-300);
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& n : mesh.nodes) {
    lo = lo.cwiseMin(n.position);
    hi = hi.cwiseMax(n.position);
  }
  if (!point.allFinite() || (point.array() < lo.array() - tol).any() || (point.array() > hi.array() + tol).any())
    throw LocationError("point (" + std::to_string(point.x()) + ", " + std::to_string(point.y()) + ", " +
                        std::to_string(point.z()) + ") lies outside the mesh bounding box");

  Location best;
  int best_id = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < mesh.elements.size(); ++i) {
    const Element& e = mesh.elements[i];
    if (e.id >= best_id) continue;
    VectorXd shape = try_element(mesh, e, point, tol);
    if (shape.size() == 0) continue;
    best = {static_cast<int>(i), std::move(shape)};
    best_id = e.id;
  }
  if (best.element < 0)
    throw LocationError("point (" + std::to_string(point.x()) + ", " + std::to_string(point.y()) + ", " +
                        std::to_string(point.z()) + ") is not inside any element");
  return best;
}

// ---------------------------------------------------------------------------
// Interpolation operator

VectorXd InterpolationOperator::apply(const DisplacementField& u) const
{
  VectorXd flat(u.rows() * dofs_per_node);
  for (Eigen::Index n = 0; n < u.rows(); ++n)
    for (int c = 0; c < dofs_per_node; ++c) flat[n * dofs_per_node + c] = u(n, c);
  if (flat.size() != rows.cols()) throw ShapeError("displacement field does not match the interpolation operator");
  return rows * flat;
}

SparseMatrix InterpolationOperator::restrict_to(const DofMap& dofs) const
{
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index r = 0; r < rows.outerSize(); ++r)
    for (decltype(rows)::InnerIterator it(rows, r); it; ++it) {
      const int node = static_cast<int>(it.col()) / dofs_per_node;
      const int comp = static_cast<int>(it.col()) % dofs_per_node;
      const int idx = dofs.free_index(node, comp);
      if (idx >= 0) t.emplace_back(static_cast<int>(r), idx, it.value());
    }
  SparseMatrix out(rows.rows(), dofs.num_free());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

InterpolationOperator build_interpolation(const Mesh& mesh, const SensorSet& sensors)
{
  sensors.validate();
  const int dim = mesh.dimension;
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t r = 0; r < sensors.size(); ++r) {
    const Sensor& s = sensors.sensors[r];
    if (dim == 2 && s.direction.z() != 0.0)
      throw ValidationError("sensor " + std::to_string(s.id) + ": out-of-plane direction on a 2D mesh");
    Location loc;
    try {
      loc = locate(mesh, s.position);
    } catch (const LocationError& e) {
      throw LocationError("sensor " + std::to_string(s.id) + ": " + e.what());
    }
    const Element& e = mesh.elements[loc.element];
    if (s.kind == SensorKind::displacement) {
      VectorXd shape = loc.shape;
      // snap roundoff so node-collocated sensors hit a single node
      for (auto& v : shape)
        if (std::abs(v) < 1e-12) v = 0.0;
      shape /= shape.sum();
      for (std::size_t k = 0; k < e.nodes.size(); ++k)
        for (int c = 0; c < dim; ++c) {
          const double v = shape[k] * s.direction[c];
          if (v != 0.0) t.emplace_back(static_cast<int>(r), e.nodes[k] * dim + c, v);
        }
    } else {
      const Eigen::RowVectorXd row = element_strain_row(mesh, e, s.direction);
      for (std::size_t k = 0; k < e.nodes.size(); ++k)
        for (int c = 0; c < dim; ++c) {
          const double v = row[k * dim + c];
          if (v != 0.0) t.emplace_back(static_cast<int>(r), e.nodes[k] * dim + c, v);
        }
    }
  }
  InterpolationOperator op;
  op.dofs_per_node = dim;
  op.rows.resize(static_cast<Eigen::Index>(sensors.size()), static_cast<Eigen::Index>(mesh.num_nodes()) * dim);
  op.rows.setFromTriplets(t.begin(), t.end());
  return op;
}

// ---------------------------------------------------------------------------
// Measurements

void MeasurementSet::check_complete(const std::vector<LoadCase>& cases, const SensorSet& sensors) const
{
  if (case_ids.size() != cases.size() || sensor_ids.size() != sensors.size() ||
      values.rows() != static_cast<Eigen::Index>(cases.size()) ||
      values.cols() != static_cast<Eigen::Index>(sensors.size()))
    throw ShapeError("measurement set is " + std::to_string(values.rows()) + "x" + std::to_string(values.cols()) +
                     ", expected " + std::to_string(cases.size()) + " cases x " + std::to_string(sensors.size()) +
                     " sensors");
  for (std::size_t i = 0; i < cases.size(); ++i)
    if (case_ids[i] != cases[i].id)
      throw ValidationError("measurement case " + std::to_string(case_ids[i]) + " does not match load case " +
                            std::to_string(cases[i].id));
  for (std::size_t j = 0; j < sensors.size(); ++j)
    if (sensor_ids[j] != sensors.sensors[j].id)
      throw ValidationError("measurement sensor " + std::to_string(sensor_ids[j]) + " does not match sensor " +
                            std::to_string(sensors.sensors[j].id));
  if (!values.allFinite()) throw ValidationError("measurement set contains non-finite values");
}

MeasurementSet synthesize_measurements(const Mesh& mesh, const std::vector<LoadCase>& load_cases,
                                       const NodalField& target, const SensorSet& sensors, double noise_stddev,
                                       std::uint64_t seed)
{
  if (!(noise_stddev >= 0.0)) throw ValidationError("noise standard deviation must be >= 0");
  const DofMap dofs(mesh);
  const LinearSolver solver(assemble_stiffness(mesh, dofs));
  const VectorXd thermal = assemble_thermal_load(mesh, target, dofs);
  const SparseMatrix op = build_interpolation(mesh, sensors).restrict_to(dofs);

  MeasurementSet out;
  out.provenance = Provenance::synthetic;
  for (const auto& lc : load_cases) out.case_ids.push_back(lc.id);
  for (const auto& s : sensors.sensors) out.sensor_ids.push_back(s.id);
  out.values.resize(static_cast<Eigen::Index>(load_cases.size()), static_cast<Eigen::Index>(sensors.size()));

  std::vector<VectorXd> readings(load_cases.size());
  parallel_for(load_cases.size(), [&](std::size_t i) {
    const VectorXd u = solver.solve(assemble_external_load(mesh, load_cases[i], dofs) + thermal);
    readings[i] = op * u;
  });
  for (std::size_t i = 0; i < load_cases.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = readings[i];

  if (noise_stddev > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_stddev);
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
      for (Eigen::Index j = 0; j < out.values.cols(); ++j) out.values(i, j) += noise(rng);
  }
  return out;
}

}  // namespace thermoid
