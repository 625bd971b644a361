#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "thermoid/cli.hpp"
#include "thermoid/io.hpp"
#include "thermoid/scenario.hpp"

using namespace thermoid;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int status = run_command(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
  const fs::path dir = fs::temp_directory_path() / ("thermoid_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A free bar heated uniformly to 10 with one tip sensor.
fs::path write_bar_fixture(const fs::path& dir)
{
  save_mesh((dir / "mesh.json").string(), fixtures::bar(1.0, fixtures::material(1.0, 0.3, 1e-5)));
  save_load_case((dir / "load.json").string(), LoadCase{});
  save_sensors((dir / "sensors.json").string(), fixtures::bar_sensors());
  const nlohmann::json scenario{
      {"name", "bar"},
      {"mesh", "mesh.json"},
      {"load_cases", {"load.json"}},
      {"sensors", "sensors.json"},
      {"target", {{"regions", nlohmann::json::array()}, {"default", 10.0}}},
      {"filter", {{"enabled", false}}},
      {"optimizer", {{"max_step", 100.0}, {"initial_step", 1.0}, {"max_iterations", 10}}}};
  std::ofstream(dir / "bar.json") << scenario.dump(1);
  return dir / "bar.json";
}

}  // namespace

TEST_CASE("rmse examples")
{
  const NodalField f = fixtures::random_field(7, 1);
  CHECK(rmse(f, f) == 0.0);
  CHECK(rmse(NodalField::Ones(4), NodalField::Zero(4)) == 1.0);
  CHECK(rmse(Eigen::Vector4d(3, 0, 0, 0), NodalField::Zero(4)) == 1.5);
  CHECK_THROWS_AS(rmse(NodalField::Ones(3), NodalField::Ones(4)), ShapeError);
}

TEST_CASE("compare on identical fields reports zero")
{
  const fs::path dir = scratch("compare");
  write_field_csv((dir / "a.csv").string(), fixtures::random_field(5, 2));
  const Run r = run({"compare", "--reference", (dir / "a.csv").string(), "same=" + (dir / "a.csv").string(), "--out",
                     (dir / "table.csv").string()});
  CHECK(r.status == 0);
  CHECK(r.out.find("same,0\n") != std::string::npos);
  CHECK(slurp(dir / "table.csv") == "field,rmse\nsame,0\n");
}

TEST_CASE("reconstruct on the bar fixture converges")
{
  const fs::path dir = scratch("bar");
  const fs::path scenario = write_bar_fixture(dir);
  const Run r = run({"--threads", "1", "reconstruct", "--scenario", scenario.string(), "--out", (dir / "out").string()});
  CHECK(r.status == 0);
  CHECK(r.out.find("converged=true") != std::string::npos);
  const NodalField t = read_field_csv((dir / "out" / "delta_T.csv").string(), 2);
  CHECK(std::abs(t[0] - 10.0) <= 1e-6);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["converged"].get<bool>());
  CHECK(slurp(dir / "out" / "convergence.csv").rfind("iteration,cost,step,grad_norm\n", 0) == 0);
}

TEST_CASE("synth, reconstruct, interpolate, compare and export on the plate")
{
  const fs::path dir = scratch("plate");
  const std::string scenario = fixtures::data_path("plate/plate-6.json");
  const std::string meas = (dir / "meas.csv").string();

  Run r = run({"synth", "--scenario", scenario, "--out", meas});
  REQUIRE(r.status == 0);
  CHECK(read_csv(meas).size() == 12);

  r = run({"reconstruct", "--scenario", scenario, "--measurements", meas, "--out", (dir / "rec").string(),
           "--max-iter", "40"});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("iterations=40") != std::string::npos);
  for (const char* f : {"delta_T.csv", "convergence.csv", "target.csv", "summary.json"})
    CHECK(fs::exists(dir / "rec" / f));

  r = run({"reconstruct", "--scenario", scenario, "--no-filter", "--out", (dir / "raw").string(), "--max-iter", "5"});
  REQUIRE(r.status == 0);

  for (const char* m : {"knn", "ok", "uk"}) {
    r = run({"interpolate", "--scenario", scenario, "--method", m, "--out", (dir / (std::string(m) + ".csv")).string()});
    REQUIRE(r.status == 0);
  }

  const std::string mesh = fixtures::data_path("plate/mesh.json");
  r = run({"compare", "--reference", (dir / "rec" / "target.csv").string(), "--mesh", mesh,
           "vm=" + (dir / "rec" / "delta_T.csv").string(), "raw=" + (dir / "raw" / "delta_T.csv").string(),
           "knn=" + (dir / "knn.csv").string(), "--out", (dir / "rmse.csv").string(), "--threshold", "2"});
  REQUIRE(r.status == 0);
  CHECK(r.out.rfind("field,rmse\nvm,", 0) == 0);
  CHECK(read_csv((dir / "rmse.csv").string()).size() == 3);
  const std::string mask = slurp(dir / "mask.csv");
  CHECK(mask.rfind("node_id,reference,vm,raw,knn\n", 0) == 0);

  const std::string vtk = (dir / "field.vtk").string();
  r = run({"export-vtk", "--mesh", mesh, "--field", (dir / "rec" / "delta_T.csv").string(), "--out", vtk});
  REQUIRE(r.status == 0);
  const std::string text = slurp(vtk);
  CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  for (const char* token : {"\nASCII\n", "DATASET UNSTRUCTURED_GRID", "CELL_TYPES 774", "POINT_DATA 444",
                            "SCALARS delta_T double 1", "LOOKUP_TABLE default"})
    CHECK(text.find(token) != std::string::npos);
}

TEST_CASE("commands are idempotent")
{
  const fs::path dir = scratch("idem");
  const std::string scenario = fixtures::data_path("plate/plate-14.json");
  for (const char* name : {"a.csv", "b.csv"})
    REQUIRE(run({"synth", "--scenario", scenario, "--noise", "1e-7", "--seed", "5", "--out", (dir / name).string()}).status == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  for (const char* name : {"r1", "r2"})
    REQUIRE(run({"--threads", "1", "reconstruct", "--scenario", scenario, "--max-iter", "30", "--out",
                 (dir / name).string()}).status == 0);
  CHECK(slurp(dir / "r1" / "delta_T.csv") == slurp(dir / "r2" / "delta_T.csv"));
}

TEST_CASE("generate writes a plate mesh and an edge load")
{
  const fs::path dir = scratch("generate");
  const Run r = run({"generate", "--out", (dir / "m.json").string(), "--length", "60", "--height", "30",
                     "--hole-diameter", "10", "--hole-center", "30", "15", "--edge", "2", "--load-out",
                     (dir / "l.json").string(), "--load-total", "1e5"});
  REQUIRE(r.status == 0);
  const Mesh m = load_mesh((dir / "m.json").string());
  CHECK(m.elements.size() >= 400);
  CHECK(m.elements.size() <= 900);
  CHECK(fs::exists(dir / "l.json"));
  const Run bad = run({"generate", "--out", (dir / "x.json").string(), "--hole-diameter", "0"});
  CHECK(bad.status == 1);
  CHECK(bad.err.rfind("error: geometry: ", 0) == 0);
}

TEST_CASE("errors are single machine-readable lines")
{
  const Run missing = run({"reconstruct", "--scenario", "/nonexistent/s.json"});
  CHECK(missing.status == 1);
  CHECK(missing.err.rfind("error: io: ", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  const Run usage = run({"frobnicate"});
  CHECK(usage.status == 2);
  CHECK(usage.err.rfind("error: usage: ", 0) == 0);

  const Run method = run({"interpolate", "--scenario", fixtures::data_path("plate/plate-6.json"), "--method", "spline"});
  CHECK(method.status == 2);

  const fs::path dir = scratch("errors");
  std::ofstream(dir / "both.json") << R"({"mesh": "m.json", "load_cases": ["l.json"], "sensors": "s.json",
                                         "target": {"regions": []}, "measurements": "x.csv"})";
  const Run both = run({"reconstruct", "--scenario", (dir / "both.json").string()});
  CHECK(both.status == 1);
  CHECK(both.err.rfind("error: validation: ", 0) == 0);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(run({"synth", "--scenario", (dir / "broken.json").string()}).err.rfind("error: parse: ", 0) == 0);
}

TEST_CASE("scenario paths resolve relative to the file")
{
  const Scenario s = parse_scenario(R"({"mesh": "m.json", "load_cases": ["a/l.json"], "sensors": "/abs/s.json",
                                        "measurements": "x.csv", "filter": {"radius": 2.5},
                                        "optimizer": {"max_step": 0.1, "step_rule": "constant", "constant_step": 0.01}})",
                                    "/base/dir");
  CHECK(s.mesh_path == "/base/dir/m.json");
  CHECK(s.load_case_paths[0] == "/base/dir/a/l.json");
  CHECK(s.sensors_path == "/abs/s.json");
  CHECK(s.filter_radius == 2.5);
  CHECK(s.optimizer.step_rule == StepRule::constant);
  CHECK(*s.optimizer.constant_step == 0.01);
  CHECK_THROWS_AS(parse_scenario(R"({"mesh": "m", "load_cases": ["l"], "sensors": "s"})", "/"), ValidationError);
}
