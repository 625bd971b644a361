#include "thermoid/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "thermoid/elements.hpp"

namespace thermoid {

using nlohmann::json;

int nodes_per_element(ElementKind kind)
{
  switch (kind) {
    case ElementKind::truss3d: return 2;
    case ElementKind::tri3: return 3;
    case ElementKind::tet4: return 4;
  }
  return 0;
}

std::string to_string(ElementKind kind)
{
  switch (kind) {
    case ElementKind::truss3d: return "truss3d";
    case ElementKind::tri3: return "tri3";
    case ElementKind::tet4: return "tet4";
  }
  return "?";
}

ElementKind parse_element_kind(std::string_view name)
{
  if (name == "truss3d") return ElementKind::truss3d;
  if (name == "tri3") return ElementKind::tri3;
  if (name == "tet4") return ElementKind::tet4;
  throw ParseError("unknown element kind '" + std::string(name) + "'");
}

const Material& Mesh::material(int id) const
{
  for (const auto& m : materials)
    if (m.id == id) return m;
  throw ValidationError("material " + std::to_string(id) + " is not defined");
}

double element_measure(const Mesh& mesh, const Element& element)
{
  const auto pos = [&](int k) -> const Vec3& { return mesh.nodes[element.nodes[k]].position; };
  switch (element.kind) {
    case ElementKind::truss3d:
      return kernels::truss_length<double>(pos(0), pos(1));
    case ElementKind::tri3: {
      Eigen::Matrix<double, 2, 3> xy;
      for (int k = 0; k < 3; ++k) xy.col(k) = pos(k).head<2>();
      return std::abs(kernels::tri3_signed_area(xy));
    }
    case ElementKind::tet4: {
      Eigen::Matrix<double, 3, 4> x;
      for (int k = 0; k < 4; ++k) x.col(k) = pos(k);
      return std::abs(kernels::tet4_signed_volume(x));
    }
  }
  return 0.0;
}

double bounding_box_diagonal(const Mesh& mesh)
{
  if (mesh.nodes.empty()) return 0.0;
  Vec3 lo = mesh.nodes.front().position;
  Vec3 hi = lo;
  for (const auto& n : mesh.nodes) {
    lo = lo.cwiseMin(n.position);
    hi = hi.cwiseMax(n.position);
  }
  return (hi - lo).norm();
}

void Mesh::validate() const
{
  if (dimension != 2 && dimension != 3)
    throw ValidationError("dimension must be 2 or 3, got " + std::to_string(dimension));

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != static_cast<int>(i))
      throw ValidationError("node ids must be dense 0..N-1 (node at index " + std::to_string(i) + ")");
    if (!nodes[i].position.allFinite())
      throw ValidationError("node " + std::to_string(i) + " has a non-finite position");
  }

  std::set<int> material_ids;
  for (const auto& m : materials) {
    if (!material_ids.insert(m.id).second)
      throw ValidationError("duplicate material id " + std::to_string(m.id));
    const std::string where = "material " + std::to_string(m.id);
    if (!(m.young > 0.0)) throw ValidationError(where + ": young must be > 0");
    if (!(m.poisson > -1.0 && m.poisson < 0.5)) throw ValidationError(where + ": poisson must lie in (-1, 0.5)");
    if (!(m.alpha >= 0.0)) throw ValidationError(where + ": alpha must be >= 0");
    if (!(m.density >= 0.0)) throw ValidationError(where + ": rho must be >= 0");
  }

  std::set<int> element_ids;
  const double diag = bounding_box_diagonal(*this);
  for (const auto& e : elements) {
    const std::string where = "element " + std::to_string(e.id);
    if (!element_ids.insert(e.id).second) throw ValidationError("duplicate element id " + std::to_string(e.id));
    if (static_cast<int>(e.nodes.size()) != nodes_per_element(e.kind))
      throw ValidationError(where + ": " + to_string(e.kind) + " needs " +
                            std::to_string(nodes_per_element(e.kind)) + " nodes");
    for (int n : e.nodes)
      if (n < 0 || n >= static_cast<int>(nodes.size()))
        throw ValidationError(where + ": references missing node " + std::to_string(n));
    std::set<int> unique(e.nodes.begin(), e.nodes.end());
    if (unique.size() != e.nodes.size()) throw ValidationError(where + ": repeated node id");
    if (!material_ids.count(e.material))
      throw ValidationError(where + ": references missing material " + std::to_string(e.material));
    if (e.kind == ElementKind::tri3 && dimension != 2)
      throw ValidationError(where + ": tri3 requires a 2D mesh");
    if (e.kind != ElementKind::tri3 && dimension != 3)
      throw ValidationError(where + ": " + to_string(e.kind) + " requires a 3D mesh");
    if (e.kind == ElementKind::tet4) {
      if (e.section) throw ValidationError(where + ": tet4 takes no section");
    } else if (!e.section || !(*e.section > 0.0)) {
      throw ValidationError(where + ": section must be present and > 0");
    }
    const double measure = element_measure(*this, e);
    const int power = e.kind == ElementKind::truss3d ? 1 : e.kind == ElementKind::tri3 ? 2 : 3;
    if (!(measure > 1e-12 * std::pow(diag, power))) throw GeometryError(where + ": zero-measure element");
  }

  for (const auto& bc : dirichlet)
    if (bc.node < 0 || bc.node >= static_cast<int>(nodes.size()))
      throw ValidationError("dirichlet references missing node " + std::to_string(bc.node));
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {

const json& field(const json& obj, const char* key, const std::string& where)
{
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "." + key + ": missing required field");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where)
{
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where)
{
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

const json& array(const json& obj, const char* key, const std::string& where)
{
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw ParseError(where + "." + key + ": expected an array");
  return v;
}

std::string dofs_string(const std::array<bool, 3>& fixed)
{
  std::string s;
  if (fixed[0]) s += 'x';
  if (fixed[1]) s += 'y';
  if (fixed[2]) s += 'z';
  return s;
}

}  // namespace

Mesh parse_mesh(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("mesh: malformed JSON: ") + e.what());
  }

  Mesh mesh;
  mesh.dimension = integer(doc, "dimension", "mesh");

  const json& nodes = array(doc, "nodes", "mesh");
  std::vector<std::optional<Node>> slots(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "mesh.nodes[" + std::to_string(i) + "]";
    Node n;
    n.id = integer(nodes[i], "id", where);
    n.position = Vec3(number(nodes[i], "x", where), number(nodes[i], "y", where), number(nodes[i], "z", where));
    if (n.id < 0 || n.id >= static_cast<int>(nodes.size()) || slots[n.id])
      throw ValidationError(where + ".id: node ids must be a permutation of 0..N-1");
    slots[n.id] = n;
  }
  for (auto& s : slots) mesh.nodes.push_back(*s);

  const json& materials = array(doc, "materials", "mesh");
  for (std::size_t i = 0; i < materials.size(); ++i) {
    const std::string where = "mesh.materials[" + std::to_string(i) + "]";
    Material m;
    m.id = integer(materials[i], "id", where);
    m.density = number(materials[i], "rho", where);
    m.young = number(materials[i], "young", where);
    m.poisson = number(materials[i], "poisson", where);
    m.alpha = number(materials[i], "alpha", where);
    mesh.materials.push_back(m);
  }

  const json& elements = array(doc, "elements", "mesh");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string where = "mesh.elements[" + std::to_string(i) + "]";
    Element e;
    e.id = integer(elements[i], "id", where);
    const json& kind = field(elements[i], "kind", where);
    if (!kind.is_string()) throw ParseError(where + ".kind: expected a string");
    try {
      e.kind = parse_element_kind(kind.get<std::string>());
    } catch (const ParseError& err) {
      throw ParseError(where + ".kind: " + err.what());
    }
    for (const auto& n : array(elements[i], "nodes", where)) {
      if (!n.is_number_integer()) throw ParseError(where + ".nodes: expected integer node ids");
      e.nodes.push_back(n.get<int>());
    }
    e.material = integer(elements[i], "material", where);
    if (elements[i].contains("section") && !elements[i]["section"].is_null())
      e.section = number(elements[i], "section", where);
    mesh.elements.push_back(std::move(e));
  }

  const json& dirichlet = array(doc, "dirichlet", "mesh");
  for (std::size_t i = 0; i < dirichlet.size(); ++i) {
    const std::string where = "mesh.dirichlet[" + std::to_string(i) + "]";
    DirichletBC bc;
    bc.node = integer(dirichlet[i], "node", where);
    const json& dofs = field(dirichlet[i], "dofs", where);
    if (!dofs.is_string()) throw ParseError(where + ".dofs: expected a string");
    for (char c : dofs.get<std::string>()) {
      if (c < 'x' || c > 'z') throw ParseError(where + ".dofs: unexpected component '" + std::string(1, c) + "'");
      bc.fixed[c - 'x'] = true;
    }
    mesh.dirichlet.push_back(bc);
  }

  mesh.validate();
  return mesh;
}

std::string serialize_mesh(const Mesh& mesh)
{
  json doc;
  doc["dimension"] = mesh.dimension;
  json nodes = json::array();
  for (const auto& n : mesh.nodes)
    nodes.push_back({{"id", n.id}, {"x", n.position.x()}, {"y", n.position.y()}, {"z", n.position.z()}});
  doc["nodes"] = std::move(nodes);

  json materials = json::array();
  for (const auto& m : mesh.materials)
    materials.push_back({{"id", m.id}, {"rho", m.density}, {"young", m.young}, {"poisson", m.poisson}, {"alpha", m.alpha}});
  doc["materials"] = std::move(materials);

  json elements = json::array();
  for (const auto& e : mesh.elements) {
    json j = {{"id", e.id}, {"kind", to_string(e.kind)}, {"nodes", e.nodes}, {"material", e.material}};
    if (e.section) j["section"] = *e.section;
    elements.push_back(std::move(j));
  }
  doc["elements"] = std::move(elements);

  json dirichlet = json::array();
  for (const auto& bc : mesh.dirichlet) dirichlet.push_back({{"node", bc.node}, {"dofs", dofs_string(bc.fixed)}});
  doc["dirichlet"] = std::move(dirichlet);
  return doc.dump(1);
}

Mesh load_mesh(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mesh(buffer.str());
}

void save_mesh(const std::string& path, const Mesh& mesh)
{
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path + "'");
  out << serialize_mesh(mesh) << '\n';
}

bool structurally_equal(const Mesh& a, const Mesh& b)
{
  if (a.dimension != b.dimension || a.nodes.size() != b.nodes.size() || a.elements.size() != b.elements.size() ||
      a.materials.size() != b.materials.size() || a.dirichlet.size() != b.dirichlet.size())
    return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    if (a.nodes[i].id != b.nodes[i].id || a.nodes[i].position != b.nodes[i].position) return false;
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    const auto& x = a.elements[i];
    const auto& y = b.elements[i];
    if (x.id != y.id || x.kind != y.kind || x.nodes != y.nodes || x.material != y.material || x.section != y.section)
      return false;
  }
  for (std::size_t i = 0; i < a.materials.size(); ++i) {
    const auto& x = a.materials[i];
    const auto& y = b.materials[i];
    if (x.id != y.id || x.density != y.density || x.young != y.young || x.poisson != y.poisson || x.alpha != y.alpha)
      return false;
  }
  for (std::size_t i = 0; i < a.dirichlet.size(); ++i)
    if (a.dirichlet[i].node != b.dirichlet[i].node || a.dirichlet[i].fixed != b.dirichlet[i].fixed) return false;
  return true;
}

}  // namespace thermoid
