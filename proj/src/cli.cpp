#include "thermoid/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermoid/io.hpp"
#include "thermoid/plate_mesher.hpp"
#include "thermoid/scenario.hpp"

namespace thermoid {

namespace fs = std::filesystem;

namespace {

struct Options {
  int threads = 1;
  std::string out;
  std::string scenario;
  std::string mesh;
  std::string method;
  bool no_filter = false;
  int max_iter = -1;
  long long seed = -1;

  // generate
  double length = 60.0, height = 30.0, hole_diameter = 10.0, edge = 2.0;
  std::vector<double> hole_center{30.0, 15.0};
  std::string load_out;
  double load_total = 1e5;

  // synth / reconstruct
  double noise = -1.0;
  std::string measurements;

  // compare / export
  std::string reference;
  std::vector<std::string> fields;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::string mask_out;
  std::string field;
};

void ensure_parent(const std::string& path)
{
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

InterpolationMethod parse_method(const std::string& m)
{
  if (m == "knn") return InterpolationMethod::knn;
  if (m == "ok") return InterpolationMethod::ordinary_kriging;
  if (m == "uk") return InterpolationMethod::universal_kriging;
  throw ValidationError("unknown interpolation method '" + m + "' (expected knn, ok or uk)");
}

Scenario scenario_with_overrides(const Options& o)
{
  Scenario s = load_scenario(o.scenario);
  if (o.seed >= 0) s.seed = static_cast<std::uint64_t>(o.seed);
  if (o.noise >= 0.0) s.noise_stddev = o.noise;
  if (!o.measurements.empty()) {
    s.measurements_path = o.measurements;
  }
  return s;
}

// Measurements from an explicit file take precedence over synthesis.
ScenarioData scenario_data(const Scenario& s)
{
  if (s.target && s.measurements_path) {
    Scenario measured = s;
    measured.target.reset();
    ScenarioData d = load_scenario_data(measured);
    d.target = evaluate_target(*s.target, d.mesh);
    return d;
  }
  return load_scenario_data(s);
}

void cmd_generate(const Options& o, std::ostream& out)
{
  if (o.hole_center.size() != 2) throw ValidationError("--hole-center takes two values");
  const Mesh mesh =
      generate_plate_with_hole(o.length, o.height, o.hole_diameter, {o.hole_center[0], o.hole_center[1]}, o.edge);
  ensure_parent(o.out);
  save_mesh(o.out, mesh);
  out << "mesh: " << mesh.num_nodes() << " nodes, " << mesh.elements.size() << " tri3 elements -> " << o.out
      << '\n';
  if (!o.load_out.empty()) {
    ensure_parent(o.load_out);
    save_load_case(o.load_out, plate_edge_load(mesh, o.length, Vec3(o.load_total, 0.0, 0.0)));
    out << "load case: " << o.load_total << " N on x = " << o.length << " -> " << o.load_out << '\n';
  }
}

void cmd_synth(const Options& o, std::ostream& out)
{
  Scenario s = scenario_with_overrides(o);
  if (!s.target) throw ValidationError("synth needs a scenario with a target field");
  s.measurements_path.reset();
  const ScenarioData d = load_scenario_data(s);
  const std::string path = o.out.empty() ? (fs::path(s.output_dir) / "measurements.csv").string() : o.out;
  ensure_parent(path);
  write_measurements_csv(path, d.measurements);
  out << "measurements: " << d.measurements.values.size() << " readings -> " << path << '\n';
}

void cmd_reconstruct(const Options& o, std::ostream& out)
{
  if (!o.method.empty() && o.method != "adjoint")
    throw ValidationError("reconstruct supports --method adjoint; use 'interpolate' for " + o.method);
  const Scenario s = scenario_with_overrides(o);
  const ScenarioData d = scenario_data(s);
  const std::optional<int> iters = o.max_iter >= 0 ? std::optional<int>(o.max_iter) : std::nullopt;
  const ReconstructionResult r = run_reconstruction(s, d, !o.no_filter, iters);

  const fs::path dir = o.out.empty() ? fs::path(s.output_dir) : fs::path(o.out);
  fs::create_directories(dir);
  write_field_csv((dir / "delta_T.csv").string(), r.temperature);
  write_convergence_csv((dir / "convergence.csv").string(), r.log);
  for (const auto& [it, field] : r.snapshots)
    write_field_csv((dir / ("snapshot_" + std::to_string(it) + ".csv")).string(), field);
  if (d.target) write_field_csv((dir / "target.csv").string(), *d.target);

  nlohmann::json summary{{"scenario", s.name},
                         {"converged", r.converged},
                         {"stop_reason", r.stop_reason},
                         {"iterations", r.iterations},
                         {"initial_cost", r.cost_history.front()},
                         {"final_cost", r.cost_history.back()},
                         {"wall_time_s", r.wall_time},
                         {"filter", !o.no_filter && s.filter_enabled}};
  if (d.target) summary["rmse_vs_target"] = rmse(r.temperature, *d.target);
  std::ofstream((dir / "summary.json").string()) << summary.dump(1) << '\n';

  out << "converged=" << (r.converged ? "true" : "false") << " iterations=" << r.iterations
      << " initial_cost=" << format_double(r.cost_history.front())
      << " final_cost=" << format_double(r.cost_history.back());
  if (d.target) out << " rmse=" << format_double(rmse(r.temperature, *d.target));
  out << " -> " << dir.string() << '\n';
}

void cmd_interpolate(const Options& o, std::ostream& out)
{
  const Scenario s = scenario_with_overrides(o);
  const ScenarioData d = scenario_data(s);
  const std::string method = o.method.empty() ? "knn" : o.method;
  const InterpolationOutcome r = run_interpolation(s, d, parse_method(method));
  const std::string path =
      o.out.empty() ? (fs::path(s.output_dir) / ("interp_" + method + ".csv")).string() : o.out;
  ensure_parent(path);
  write_field_csv(path, r.field);
  out << method << ": " << r.field.size() << " nodes";
  if (r.variogram)
    out << " (variogram nugget=" << r.variogram->nugget << " sill=" << r.variogram->sill
        << " range=" << r.variogram->range << ")";
  if (r.degenerate) out << " [degenerate samples: constant field]";
  if (r.jittered) out << " [kriging matrix jittered]";
  if (d.target) out << " rmse=" << format_double(rmse(r.field, *d.target));
  out << " -> " << path << '\n';
}

void cmd_compare(const Options& o, std::ostream& out)
{
  int nodes = -1;
  if (!o.mesh.empty()) nodes = static_cast<int>(load_mesh(o.mesh).num_nodes());
  auto read_any = [&](const std::string& path) {
    if (nodes >= 0) return read_field_csv(path, nodes);
    const auto rows = read_csv(path);
    return read_field_csv(path, static_cast<int>(rows.size()));
  };
  const NodalField ref = read_any(o.reference);
  nodes = static_cast<int>(ref.size());

  std::vector<std::pair<std::string, double>> table;
  std::vector<std::pair<std::string, NodalField>> loaded;
  for (const auto& spec : o.fields) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    NodalField f = read_any(path);
    table.emplace_back(name, rmse(f, ref));
    loaded.emplace_back(name, std::move(f));
  }

  out << "field,rmse\n";
  for (const auto& [name, v] : table) out << name << ',' << format_double(v) << '\n';
  if (!o.out.empty()) {
    ensure_parent(o.out);
    std::ofstream csv(o.out);
    if (!csv) throw IoError("cannot write '" + o.out + "'");
    csv << "field,rmse\n";
    for (const auto& [name, v] : table) csv << name << ',' << format_double(v) << '\n';
  }

  if (!std::isnan(o.threshold)) {
    // one column per field: 1 where dT exceeds the threshold
    const std::string path = !o.mask_out.empty()  ? o.mask_out
                             : !o.out.empty()     ? (fs::path(o.out).parent_path() / "mask.csv").string()
                                                  : std::string("mask.csv");
    ensure_parent(path);
    std::ofstream csv(path);
    if (!csv) throw IoError("cannot write '" + path + "'");
    csv << "node_id,reference";
    for (const auto& [name, f] : loaded) csv << ',' << name;
    csv << '\n';
    for (int i = 0; i < nodes; ++i) {
      csv << i << ',' << (ref[i] > o.threshold ? 1 : 0);
      for (const auto& [name, f] : loaded) csv << ',' << (f[i] > o.threshold ? 1 : 0);
      csv << '\n';
    }
    out << "mask (dT > " << o.threshold << ") -> " << path << '\n';
  }
}

void cmd_export_vtk(const Options& o, std::ostream& out)
{
  const Mesh mesh = load_mesh(o.mesh);
  const NodalField f = read_field_csv(o.field, static_cast<int>(mesh.num_nodes()));
  ensure_parent(o.out);
  write_vtk(o.out, mesh, f);
  out << "vtk: " << mesh.num_nodes() << " points, " << mesh.elements.size() << " cells -> " << o.out << '\n';
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"thermoid: temperature-field identification from displacement sensors"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "worker threads (1 = deterministic sequential)")
      ->check(CLI::Range(1, 256));

  auto* gen = app.add_subcommand("generate", "mesh a plate with a circular hole");
  gen->add_option("--out", o.out, "mesh JSON path")->required();
  gen->add_option("--length", o.length);
  gen->add_option("--height", o.height);
  gen->add_option("--hole-diameter", o.hole_diameter);
  gen->add_option("--hole-center", o.hole_center)->expected(2);
  gen->add_option("--edge", o.edge, "lattice row pitch");
  gen->add_option("--load-out", o.load_out, "also write an axial edge load case");
  gen->add_option("--load-total", o.load_total, "total edge force in N");

  auto* syn = app.add_subcommand("synth", "synthesize sensor readings from a scenario target");
  syn->add_option("--scenario", o.scenario)->required();
  syn->add_option("--out", o.out, "measurements CSV path");
  syn->add_option("--seed", o.seed);
  syn->add_option("--noise", o.noise, "Gaussian noise standard deviation");

  auto* rec = app.add_subcommand("reconstruct", "identify dT with the adjoint method");
  rec->add_option("--scenario", o.scenario)->required();
  rec->add_option("--out", o.out, "output directory");
  rec->add_option("--method", o.method)->check(CLI::IsMember({"adjoint"}));
  rec->add_flag("--no-filter", o.no_filter, "optimize dT directly, no smoothing or bounds");
  rec->add_option("--max-iter", o.max_iter);
  rec->add_option("--measurements", o.measurements, "readings CSV overriding the scenario");
  rec->add_option("--seed", o.seed);

  auto* itp = app.add_subcommand("interpolate", "interpolation baseline from sensor-location samples");
  itp->add_option("--scenario", o.scenario)->required();
  itp->add_option("--method", o.method)->check(CLI::IsMember({"knn", "ok", "uk"}));
  itp->add_option("--out", o.out, "field CSV path");

  auto* cmp = app.add_subcommand("compare", "RMSE of fields against a reference");
  cmp->add_option("--reference", o.reference, "reference field CSV")->required();
  cmp->add_option("--mesh", o.mesh);
  cmp->add_option("fields", o.fields, "[name=]path of each field")->required();
  cmp->add_option("--out", o.out, "RMSE table CSV");
  cmp->add_option("--threshold", o.threshold, "write a node mask of dT > threshold");
  cmp->add_option("--mask-out", o.mask_out);

  auto* vtk = app.add_subcommand("export-vtk", "write a legacy VTK file of a nodal field");
  vtk->add_option("--mesh", o.mesh)->required();
  vtk->add_option("--field", o.field)->required();
  vtk->add_option("--out", o.out)->required();

  for (auto* sub : {gen, syn, rec, itp, cmp, vtk}) sub->fallthrough();

  std::vector<std::string> argv_store{"thermoid"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return 2;
  }

  const int previous_threads = thread_count();
  set_thread_count(o.threads);
  int status = 0;
  try {
    if (*gen) cmd_generate(o, out);
    else if (*syn) cmd_synth(o, out);
    else if (*rec) cmd_reconstruct(o, out);
    else if (*itp) cmd_interpolate(o, out);
    else if (*cmp) cmd_compare(o, out);
    else if (*vtk) cmd_export_vtk(o, out);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    status = 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: " << e.what() << '\n';
    status = 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    status = 1;
  }
  set_thread_count(previous_threads);
  return status;
}

}  // namespace thermoid
