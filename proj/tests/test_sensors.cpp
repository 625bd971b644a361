#include <doctest.h>

#include "fixtures.hpp"
#include "thermoid/inverse.hpp"
#include "thermoid/sensors.hpp"

using namespace thermoid;

namespace {

double row_entry(const InterpolationOperator& op, int row, int col) { return op.rows.coeff(row, col); }

}  // namespace

TEST_CASE("locate: vertices, centroid, outside")
{
  const Mesh m = fixtures::tri_patch();
  // node 0 belongs only to elements 0 and 1; the lowest id wins
  const Location v = locate(m, Vec3(0, 0, 0));
  CHECK(v.element == 0);
  CHECK(v.shape[0] == 1.0);
  CHECK(v.shape[1] == 0.0);
  CHECK(v.shape[2] == 0.0);

  const Element& e = m.elements[5];
  Vec3 c = Vec3::Zero();
  for (int k : e.nodes) c += m.nodes[k].position / 3.0;
  const Location l = locate(m, c);
  CHECK(l.element == 5);
  for (int k = 0; k < 3; ++k) CHECK(l.shape[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  CHECK_THROWS_AS(locate(m, Vec3(5, 5, 0)), LocationError);
  CHECK_THROWS_AS(locate(m, Vec3(-0.1, 1, 0)), LocationError);
}

TEST_CASE("locate reproduces the point and breaks shared-edge ties by lowest id")
{
  for (const Mesh& m : {fixtures::tri_patch(), fixtures::tet_block()}) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const Vec3 p(2 * u(rng), m.dimension == 2 ? 2 * u(rng) : u(rng), m.dimension == 2 ? 0.0 : u(rng));
      const Location l = locate(m, p);
      Vec3 q = Vec3::Zero();
      const Element& e = m.elements[l.element];
      for (std::size_t k = 0; k < e.nodes.size(); ++k) q += l.shape[k] * m.nodes[e.nodes[k]].position;
      CHECK((q - p).norm() <= 1e-9 * bounding_box_diagonal(m));
      CHECK(l.shape.sum() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(l.shape.minCoeff() >= 0.0);
    }
  }
  // (0.5, 0.5) lies on the diagonal shared by elements 0 and 1
  CHECK(locate(fixtures::tri_patch(), Vec3(0.5, 0.5, 0)).element == 0);
}

TEST_CASE("operator rows for node and centroid sensors")
{
  const Mesh m = fixtures::tri_patch();
  const SensorSet s{{fixtures::displacement(0, m.nodes[4].position, Vec3::UnitX()),
                     fixtures::displacement(1, Vec3(4.0 / 3, 2.0 / 3, 0), Vec3::UnitY())}};
  const InterpolationOperator op = build_interpolation(m, s);
  CHECK(op.dofs_per_node == 2);
  CHECK(op.rows.row(0).nonZeros() == 1);
  CHECK(row_entry(op, 0, 4 * 2 + 0) == 1.0);
  // element 2 = nodes {1, 2, 5}; its centroid is (5/3, 1/3); element 3 = {1, 5, 4}
  const Element& e = m.elements[3];
  double total = 0.0;
  for (int k : e.nodes) {
    CHECK(row_entry(op, 1, k * 2 + 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    total += row_entry(op, 1, k * 2 + 1);
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("truss strain sensor reads axial strain")
{
  const Mesh m = fixtures::bar();
  const SensorSet s{{fixtures::strain(0, Vec3(0.3, 0, 0), Vec3::UnitX())}};
  const InterpolationOperator op = build_interpolation(m, s);
  DisplacementField u = DisplacementField::Zero(2, 3);
  u(1, 0) = 1e-4;
  CHECK(op.apply(u)[0] == doctest::Approx(1e-4).epsilon(1e-14));
  // a truss sensor off the member axis cannot be located
  const SensorSet off{{fixtures::displacement(3, Vec3(0.5, 0.1, 0), Vec3::UnitX())}};
  try {
    build_interpolation(m, off);
    FAIL("expected a location error");
  } catch (const LocationError& e) {
    CHECK(std::string(e.what()).find("sensor 3") != std::string::npos);
  }
}

TEST_CASE("rigid translation: partition of unity and zero strain")
{
  const Mesh tri = fixtures::tri_patch();
  const Mesh tet = fixtures::tet_block();
  const std::vector<std::pair<const Mesh*, SensorSet>> sets{{&tri, fixtures::patch_sensors(1.0)},
                                                            {&tet, fixtures::block_sensors(1.0)}};
  for (const auto& [m, s] : sets) {
    const Vec3 shift = m->dimension == 2 ? Vec3(0.3, -0.7, 0) : Vec3(0.3, -0.7, 1.1);
    DisplacementField u(m->num_nodes(), 3);
    for (std::size_t i = 0; i < m->num_nodes(); ++i) u.row(i) = shift.transpose();
    const VectorXd r = build_interpolation(*m, s).apply(u);
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s.sensors[j].kind == SensorKind::displacement)
        CHECK(r[j] == doctest::Approx(s.sensors[j].direction.dot(shift)).epsilon(1e-14));
      else
        CHECK(std::abs(r[j]) <= 1e-14);
    }
  }
}

TEST_CASE("sensor validation")
{
  CHECK_THROWS_AS(parse_sensors(R"({"sensors": [{"id": 0, "pos": [0, 0, 0], "kind": "displacement",
                                                "dir": [1, 1, 0], "weight": 1}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_sensors(R"({"sensors": [{"id": 0, "pos": [0, 0, 0], "kind": "displacement",
                                                "dir": [1, 0, 0], "weight": -1}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_sensors(R"({"sensors": [{"id": 0, "pos": [0, 0, 0], "kind": "thermometer",
                                                "dir": [1, 0, 0], "weight": 1}]})"),
                  ParseError);
  const SensorSet s = fixtures::patch_sensors();
  const SensorSet back = parse_sensors(serialize_sensors(s));
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.sensors[i].position == s.sensors[i].position);
    CHECK((back.sensors[i].direction - s.sensors[i].direction).norm() <= 1e-15);
    CHECK(back.sensors[i].kind == s.sensors[i].kind);
  }
}

TEST_CASE("synthesis examples")
{
  const Mesh patch = fixtures::tri_patch();
  const MeasurementSet zero =
      synthesize_measurements(patch, {LoadCase{}}, NodalField::Zero(9), fixtures::patch_sensors());
  CHECK(zero.values.isZero(0.0));
  CHECK(zero.provenance == Provenance::synthetic);

  const Mesh bar = fixtures::bar(1.0, fixtures::material(1.0, 0.3, 1e-5));
  const MeasurementSet tip = synthesize_measurements(bar, {LoadCase{}}, NodalField::Constant(2, 10.0),
                                                     fixtures::bar_sensors());
  CHECK(tip.values(0, 0) == doctest::Approx(1e-4).epsilon(1e-12));

  LoadCase a, b;
  a.id = 0;
  b.id = 1;
  a.body_force = b.body_force = Vec3(0, -1, 0);
  const NodalField target = fixtures::random_field(9, 3);
  const MeasurementSet two = synthesize_measurements(patch, {a, b}, target, fixtures::patch_sensors());
  CHECK(two.values.rows() == 2);
  CHECK(two.values.cols() == 6);
  CHECK(two.values.row(0) == two.values.row(1));
}

TEST_CASE("noise is seeded")
{
  const Mesh patch = fixtures::tri_patch();
  const NodalField target = fixtures::random_field(9, 3);
  const auto s = fixtures::patch_sensors();
  const auto x = synthesize_measurements(patch, {LoadCase{}}, target, s, 1e-3, 42);
  const auto y = synthesize_measurements(patch, {LoadCase{}}, target, s, 1e-3, 42);
  const auto z = synthesize_measurements(patch, {LoadCase{}}, target, s, 1e-3, 43);
  const auto clean = synthesize_measurements(patch, {LoadCase{}}, target, s);
  CHECK(x.values == y.values);
  CHECK(x.values != z.values);
  CHECK(x.values != clean.values);
}

TEST_CASE("synthesized readings reproduce themselves at zero cost")
{
  for (const auto& p : {fixtures::bar_problem(), fixtures::patch_problem(), fixtures::block_problem()}) {
    const ThermalProblem problem = p.make();
    CHECK(problem.evaluate(p.target, false).cost.total == 0.0);
  }
}

TEST_CASE("incomplete measurement sets are rejected")
{
  const auto p = fixtures::patch_problem();
  MeasurementSet m = p.measurements;
  m.sensor_ids.pop_back();
  m.values.conservativeResize(Eigen::NoChange, m.values.cols() - 1);
  CHECK_THROWS(m.check_complete(p.cases, p.sensors));
}
