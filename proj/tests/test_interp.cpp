#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "thermoid/interp.hpp"
#include "thermoid/scenario.hpp"

using namespace thermoid;

namespace {

SampleSet make(const std::vector<std::pair<Vec3, double>>& pts)
{
  std::vector<Sample> raw;
  for (const auto& [p, v] : pts) raw.push_back({p, v});
  return SampleSet::merged(raw);
}

SampleSet scattered(int n, unsigned seed, const std::function<double(const Vec3&)>& f, bool planar = true)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<Sample> raw;
  for (int i = 0; i < n; ++i) {
    const Vec3 p(u(rng), u(rng), planar ? 0.0 : u(rng));
    raw.push_back({p, f(p)});
  }
  return SampleSet::merged(raw);
}

Variogram linear_variogram()
{
  Variogram v;
  v.model = VariogramModel::linear;
  v.slope = 1.0;
  return v;
}

}  // namespace

TEST_CASE("knn examples")
{
  const SampleSet s = make({{Vec3(0, 0, 0), 0.0}, {Vec3(1, 0, 0), 10.0}});
  CHECK(knn_interpolate(s, Vec3(0.25, 0, 0), 2) == 2.5);
  CHECK(knn_interpolate(s, Vec3(1, 0, 0), 2) == 10.0);
  CHECK(knn_interpolate(s, Vec3(0.25, 0, 0), 2, Weighting::uniform) == 5.0);
  CHECK(knn_interpolate(s, Vec3(0.25, 0, 0), 1) == 0.0);
  const SampleSet flat = scattered(20, 1, [](const Vec3&) { return 4.25; });
  for (int k : {1, 3, 20}) CHECK(knn_interpolate(flat, Vec3(3, 7, 0), k) == doctest::Approx(4.25).epsilon(1e-15));
  CHECK_THROWS_AS(knn_interpolate(s, Vec3::Zero(), 3), InterpolationError);
  CHECK_THROWS_AS(knn_interpolate(s, Vec3::Zero(), 0), InterpolationError);
  CHECK_THROWS_AS(knn_interpolate(SampleSet{}, Vec3::Zero(), 1), InterpolationError);
}

TEST_CASE("knn stays within its neighbours' range")
{
  const SampleSet s = scattered(30, 2, [](const Vec3& p) { return std::sin(p.x()) * 5 + p.y(); });
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 12.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 q(u(rng), u(rng), 0);
    std::vector<std::pair<double, double>> by_dist;
    for (const auto& smp : s.samples) by_dist.emplace_back((smp.position - q).norm(), smp.value);
    std::sort(by_dist.begin(), by_dist.end());
    const double lo = std::min({by_dist[0].second, by_dist[1].second, by_dist[2].second});
    const double hi = std::max({by_dist[0].second, by_dist[1].second, by_dist[2].second});
    const double v = knn_interpolate(s, q, 3);
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("duplicate positions are merged by averaging")
{
  const SampleSet s = make({{Vec3(1, 2, 3), 4.0}, {Vec3(0, 0, 0), 1.0}, {Vec3(1, 2, 3), 8.0}});
  REQUIRE(s.size() == 2);
  CHECK(s.samples[0].value == 6.0);
  CHECK(s.samples[1].value == 1.0);
}

TEST_CASE("experimental variogram and degenerate fits")
{
  const ExperimentalVariogram ev = experimental_variogram(make({{Vec3(0, 0, 0), 0.0}, {Vec3(1, 0, 0), 10.0}}));
  REQUIRE(ev.lag.size() == 1);
  CHECK(ev.lag[0] == 1.0);
  CHECK(ev.gamma[0] == 50.0);
  CHECK(ev.count[0] == 1);

  const SampleSet flat = scattered(10, 4, [](const Vec3&) { return 3.0; });
  const Variogram v = fit_variogram(flat);
  CHECK(v.degenerate);
  CHECK(v.sill > 0.0);
  const InterpolationOutcome out =
      interpolate_field(fixtures::tri_patch(), flat, InterpolationMethod::ordinary_kriging);
  CHECK(out.degenerate);
  CHECK((out.field.array() - 3.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("fitted variogram models")
{
  Variogram g;
  g.nugget = 0.5;
  g.sill = 2.0;
  g.range = 3.0;
  CHECK(g(0.0) == 0.0);
  CHECK(g(3.0) == doctest::Approx(0.5 + 2.0 * (1 - std::exp(-3.0))));
  double prev = 0.0;
  for (double h = 0.1; h < 20; h += 0.1) {
    CHECK(g(h) >= prev);
    prev = g(h);
  }
  const SampleSet s = scattered(40, 5, [](const Vec3& p) { return std::sin(p.x()) + 0.5 * std::cos(0.7 * p.y()); });
  for (auto model : {VariogramModel::gaussian, VariogramModel::linear, VariogramModel::power}) {
    const Variogram v = fit_variogram(s, model);
    CHECK_FALSE(v.degenerate);
    CHECK(v.nugget >= 0.0);
    CHECK(v(0.0) == 0.0);
    CHECK(v(5.0) >= v(1.0));
  }
}

TEST_CASE("gaussian range is recovered from a simulated field")
{
  // correlated Gaussian field with covariance exp(-3 h^2 / a^2) on ~400 points
  const double a = 3.0, extent = 20.0;
  const int n = 400;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::normal_distribution<double> g;
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), 0.0);
  MatrixXd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = std::exp(-3.0 * (pts[i] - pts[j]).squaredNorm() / (a * a));
  c.diagonal().array() += 1e-6;
  const Eigen::LLT<MatrixXd> llt(c);
  REQUIRE(llt.info() == Eigen::Success);
  VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = g(rng);
  const VectorXd field = llt.matrixL() * z;
  std::vector<Sample> raw;
  for (int i = 0; i < n; ++i) raw.push_back({pts[i], field[i]});
  const Variogram v = fit_variogram(SampleSet::merged(raw), VariogramModel::gaussian);
  MESSAGE("fitted range " << v.range << " sill " << v.sill << " nugget " << v.nugget);
  CHECK(std::abs(v.range - a) <= 0.25 * a);
}

TEST_CASE("ordinary kriging hand-solved system")
{
  const SampleSet s = make({{Vec3(0, 0, 0), 1.0}, {Vec3(1, 0, 0), 2.0}, {Vec3(2, 0, 0), 4.0}});
  // [Gamma 1; 1 0] [l; mu] = [1.5 0.5 0.5 1] solves to l = (0, 1/2, 1/2), mu = 0
  const KrigingEstimate e = ordinary_kriging(s, linear_variogram(), Vec3(1.5, 0, 0));
  CHECK(std::abs(e.weights[0]) <= 1e-10);
  CHECK(e.weights[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(e.weights[2] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(e.value == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(e.variance == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_FALSE(e.jittered);

  const SampleSet pair = make({{Vec3(-1, 0, 0), 2.0}, {Vec3(1, 0, 0), 8.0}});
  CHECK(ordinary_kriging(pair, linear_variogram(), Vec3(0, 3, 0)).value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("kriging exactness and weight sums")
{
  const SampleSet s = scattered(25, 6, [](const Vec3& p) { return std::sin(p.x()) * 3 + p.y() * 0.4; });
  const Variogram v = fit_variogram(s);
  CHECK(v.nugget >= 0.0);
  Variogram exact = v;
  exact.nugget = 0.0;
  const Kriging ok(s, exact, false), uk(s, exact, true);
  CHECK(uk.drift_terms() == 3);
  for (const auto& smp : s.samples) {
    CHECK(std::abs(ok.estimate(smp.position).value - smp.value) <= 1e-8);
    CHECK(std::abs(uk.estimate(smp.position).value - smp.value) <= 1e-8);
  }
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 20; ++t) {
    const KrigingEstimate e = ok.estimate(Vec3(u(rng), u(rng), 0));
    CHECK(std::abs(e.weights.sum() - 1.0) <= 1e-10);
    CHECK(e.variance >= -1e-10);
  }
}

TEST_CASE("universal kriging reproduces linear fields")
{
  const Variogram v = [] {
    Variogram g;
    g.sill = 1.0;
    g.range = 4.0;
    return g;
  }();
  const SampleSet line2d = scattered(15, 8, [](const Vec3& p) { return 2.0 + 3.0 * p.x(); });
  const SampleSet plane3d = scattered(20, 9, [](const Vec3& p) { return -1.0 + 0.5 * p.x() - 2.0 * p.y() + 0.25 * p.z(); }, false);
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(-3.0, 13.0);
  for (int t = 0; t < 20; ++t) {
    const Vec3 q(u(rng), u(rng), u(rng));
    const Vec3 q2(q.x(), q.y(), 0.0);
    CHECK(universal_kriging(line2d, v, q2).value == doctest::Approx(2.0 + 3.0 * q.x()).epsilon(1e-8).scale(1.0));
    CHECK(universal_kriging(plane3d, v, q).value ==
          doctest::Approx(-1.0 + 0.5 * q.x() - 2.0 * q.y() + 0.25 * q.z()).epsilon(1e-8).scale(1.0));
  }
  const SampleSet few = make({{Vec3(0, 0, 0), 1.0}, {Vec3(1, 0, 0), 2.0}, {Vec3(0, 1, 0), 3.0}});
  CHECK_THROWS_AS(universal_kriging(few, v, Vec3::Zero()), InterpolationError);
}

TEST_CASE("universal and ordinary kriging agree on a trend-free field")
{
  Variogram v;
  v.sill = 2.0;
  v.range = 3.0;
  const SampleSet s = make({{Vec3(1, 1, 0), 1.0},
                            {Vec3(-1, 1, 0), 1.0},
                            {Vec3(1, -1, 0), 1.0},
                            {Vec3(-1, -1, 0), 1.0},
                            {Vec3(2, 0, 0), 3.0},
                            {Vec3(-2, 0, 0), 3.0},
                            {Vec3(0, 2, 0), 3.0},
                            {Vec3(0, -2, 0), 3.0}});
  CHECK(universal_kriging(s, v, Vec3::Zero()).value ==
        doctest::Approx(ordinary_kriging(s, v, Vec3::Zero()).value).epsilon(1e-8));
  const SampleSet flat = scattered(12, 11, [](const Vec3&) { return -2.5; });
  const Vec3 q(4.2, 5.1, 0);
  CHECK(universal_kriging(flat, v, q).value == doctest::Approx(-2.5).epsilon(1e-8));
  CHECK(ordinary_kriging(flat, v, q).value == doctest::Approx(-2.5).epsilon(1e-8));
}

TEST_CASE("all methods are translation invariant")
{
  const SampleSet s = scattered(20, 12, [](const Vec3& p) { return std::cos(p.x()) * 4 + p.y(); });
  const Vec3 shift(100.0, -50.0, 3.0);
  std::vector<Sample> moved;
  for (const auto& smp : s.samples) moved.push_back({smp.position + shift, smp.value});
  const SampleSet t = SampleSet::merged(moved);
  const Variogram v = fit_variogram(s);
  const Variogram vt = fit_variogram(t);
  CHECK(vt.range == doctest::Approx(v.range).epsilon(1e-10));
  for (const Vec3& q : {Vec3(1, 2, 0), Vec3(5.5, 7.25, 0), Vec3(9, 0.5, 0)}) {
    CHECK(knn_interpolate(t, q + shift, 3) == doctest::Approx(knn_interpolate(s, q, 3)).epsilon(1e-10));
    CHECK(ordinary_kriging(t, vt, q + shift).value == doctest::Approx(ordinary_kriging(s, v, q).value).epsilon(1e-10));
    CHECK(universal_kriging(t, vt, q + shift).value ==
          doctest::Approx(universal_kriging(s, v, q).value).epsilon(1e-10));
  }
}

TEST_CASE("field interpolation examples")
{
  const Mesh m = fixtures::tri_patch();
  const SampleSet zeros = make({{Vec3(0, 0, 0), 0.0}, {Vec3(1, 2, 0), 0.0}, {Vec3(2, 1, 0), 0.0}, {Vec3(1, 1, 0), 0.0}});
  for (auto method : {InterpolationMethod::knn, InterpolationMethod::ordinary_kriging,
                      InterpolationMethod::universal_kriging})
    CHECK(interpolate_field(m, zeros, method).field.isZero(0.0));
  InterpolationParams one;
  one.k = 1;
  const InterpolationOutcome single = interpolate_field(m, make({{Vec3(1, 1, 0), 10.0}}), InterpolationMethod::knn, one);
  CHECK((single.field.array() == 10.0).all());
}

TEST_CASE("fourteen-sensor plate kNN baseline sits in the expected RMSE band")
{
  const Scenario s = load_scenario(fixtures::data_path("plate/plate-14.json"));
  const ScenarioData d = load_scenario_data(s);
  const double e = rmse(run_interpolation(s, d, InterpolationMethod::knn).field, *d.target);
  MESSAGE("plate-14 kNN rmse " << e);
  CHECK(e >= 0.85 * 1.52);
  CHECK(e <= 1.15 * 1.65);
}
