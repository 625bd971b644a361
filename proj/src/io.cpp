#include "thermoid/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace thermoid {

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

std::string trim(std::string s)
{
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

double parse_double(const std::string& cell, const std::string& where)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": '" + cell + "' is not a number");
  }
}

int parse_int(const std::string& cell, const std::string& where)
{
  int v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw ParseError(where + ": '" + cell + "' is not an integer");
  return v;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (first) {
      first = false;
      double probe;
      const auto& c0 = cells.front();
      if (std::from_chars(c0.data(), c0.data() + c0.size(), probe).ec != std::errc()) continue;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

// ---------------------------------------------------------------------------

void write_field_csv(std::ostream& out, const NodalField& field, const std::string& value_name)
{
  out << "node_id," << value_name << '\n';
  for (Eigen::Index i = 0; i < field.size(); ++i) out << i << ',' << format_double(field[i]) << '\n';
}

void write_field_csv(const std::string& path, const NodalField& field, const std::string& value_name)
{
  auto out = open_out(path);
  write_field_csv(out, field, value_name);
}

NodalField read_field_csv(const std::string& path, int expected_nodes)
{
  const auto rows = read_csv(path);
  NodalField f = NodalField::Constant(expected_nodes, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = path + ":" + std::to_string(r + 1);
    if (rows[r].size() != 2) throw ParseError(where + ": expected node_id,value");
    const int id = parse_int(rows[r][0], where);
    if (id < 0 || id >= expected_nodes)
      throw ValidationError(where + ": node " + std::to_string(id) + " is not in the mesh");
    f[id] = parse_double(rows[r][1], where);
  }
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (std::isnan(f[i])) throw ValidationError(path + ": no value for node " + std::to_string(i));
  return f;
}

void write_measurements_csv(const std::string& path, const MeasurementSet& m)
{
  auto out = open_out(path);
  out << "case_id,sensor_id,value\n";
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      out << m.case_ids[i] << ',' << m.sensor_ids[j] << ',' << format_double(m.values(i, j)) << '\n';
}

MeasurementSet read_measurements_csv(const std::string& path, const std::vector<LoadCase>& cases,
                                     const SensorSet& sensors)
{
  std::map<int, int> case_row, sensor_col;
  MeasurementSet m;
  m.provenance = Provenance::external;
  for (const auto& c : cases) {
    case_row[c.id] = static_cast<int>(m.case_ids.size());
    m.case_ids.push_back(c.id);
  }
  for (const auto& s : sensors.sensors) {
    sensor_col[s.id] = static_cast<int>(m.sensor_ids.size());
    m.sensor_ids.push_back(s.id);
  }
  m.values = MatrixXd::Constant(static_cast<Eigen::Index>(cases.size()), static_cast<Eigen::Index>(sensors.size()),
                                std::numeric_limits<double>::quiet_NaN());
  const auto rows = read_csv(path);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = path + ":" + std::to_string(r + 1);
    if (rows[r].size() != 3) throw ParseError(where + ": expected case_id,sensor_id,value");
    const int c = parse_int(rows[r][0], where);
    const int s = parse_int(rows[r][1], where);
    if (!case_row.count(c)) throw ValidationError(where + ": unknown load case " + std::to_string(c));
    if (!sensor_col.count(s)) throw ValidationError(where + ": unknown sensor " + std::to_string(s));
    m.values(case_row[c], sensor_col[s]) = parse_double(rows[r][2], where);
  }
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      if (std::isnan(m.values(i, j)))
        throw ValidationError(path + ": missing reading for case " + std::to_string(m.case_ids[i]) + ", sensor " +
                              std::to_string(m.sensor_ids[j]));
  return m;
}

void write_displacements_csv(const std::string& path, const DisplacementField& u)
{
  auto out = open_out(path);
  out << "node_id,ux,uy,uz\n";
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    out << i << ',' << format_double(u(i, 0)) << ',' << format_double(u(i, 1)) << ',' << format_double(u(i, 2))
        << '\n';
}

void write_convergence_csv(const std::string& path, const std::vector<IterationRecord>& log)
{
  auto out = open_out(path);
  out << "iteration,cost,step,grad_norm\n";
  for (const auto& r : log)
    out << r.iteration << ',' << format_double(r.cost) << ',' << format_double(r.step) << ','
        << format_double(r.grad_norm) << '\n';
}

void write_samples_csv(const std::string& path, const SampleSet& samples)
{
  auto out = open_out(path);
  out << "x,y,z,value\n";
  for (const auto& s : samples.samples)
    out << format_double(s.position.x()) << ',' << format_double(s.position.y()) << ','
        << format_double(s.position.z()) << ',' << format_double(s.value) << '\n';
}

SampleSet read_samples_csv(const std::string& path)
{
  std::vector<Sample> raw;
  const auto rows = read_csv(path);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = path + ":" + std::to_string(r + 1);
    if (rows[r].size() != 4) throw ParseError(where + ": expected x,y,z,value");
    raw.push_back({Vec3(parse_double(rows[r][0], where), parse_double(rows[r][1], where),
                        parse_double(rows[r][2], where)),
                   parse_double(rows[r][3], where)});
  }
  return SampleSet::merged(raw);
}

void write_vtk(std::ostream& out, const Mesh& mesh, const NodalField& field, const std::string& name)
{
  if (field.size() != static_cast<Eigen::Index>(mesh.num_nodes()))
    throw ShapeError("field does not match the mesh node count");
  out << "# vtk DataFile Version 3.0\n"
      << name << " field\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& n : mesh.nodes)
    out << format_double(n.position.x()) << ' ' << format_double(n.position.y()) << ' '
        << format_double(n.position.z()) << '\n';
  std::size_t total = 0;
  for (const auto& e : mesh.elements) total += e.nodes.size() + 1;
  out << "CELLS " << mesh.elements.size() << ' ' << total << '\n';
  for (const auto& e : mesh.elements) {
    out << e.nodes.size();
    for (int n : e.nodes) out << ' ' << n;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.elements.size() << '\n';
  for (const auto& e : mesh.elements)
    out << (e.kind == ElementKind::truss3d ? 3 : e.kind == ElementKind::tri3 ? 5 : 10) << '\n';
  out << "POINT_DATA " << mesh.num_nodes() << '\n'
      << "SCALARS " << name << " double 1\n"
      << "LOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < field.size(); ++i) out << format_double(field[i]) << '\n';
}

void write_vtk(const std::string& path, const Mesh& mesh, const NodalField& field, const std::string& name)
{
  auto out = open_out(path);
  write_vtk(out, mesh, field, name);
}

}  // namespace thermoid
