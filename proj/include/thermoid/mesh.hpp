#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermoid/core.hpp"

namespace thermoid {

enum class ElementKind { truss3d, tri3, tet4 };

int nodes_per_element(ElementKind kind);
std::string to_string(ElementKind kind);
ElementKind parse_element_kind(std::string_view name);

struct Node {
  int id = 0;
  Vec3 position = Vec3::Zero();
};

struct Element {
  int id = 0;
  ElementKind kind = ElementKind::tri3;
  std::vector<int> nodes;
  int material = 0;
  // cross-section area (truss3d) or thickness (tri3); absent for tet4
  std::optional<double> section;
};

struct Material {
  int id = 0;
  double density = 0.0;  // kg/m^3
  double young = 0.0;    // Pa
  double poisson = 0.0;
  double alpha = 0.0;  // 1/K
};

// Homogeneous Dirichlet constraint on a subset of the displacement components.
struct DirichletBC {
  int node = 0;
  std::array<bool, 3> fixed{false, false, false};
};

struct Mesh {
  int dimension = 3;
  std::vector<Node> nodes;  // nodes[i].id == i
  std::vector<Element> elements;
  std::vector<Material> materials;
  std::vector<DirichletBC> dirichlet;

  std::size_t num_nodes() const { return nodes.size(); }
  const Material& material(int id) const;

  // Throws ValidationError (dangling references, bad sizes) or GeometryError
  // (non-positive element measure).
  void validate() const;
};

// Length, area or volume of an element.
double element_measure(const Mesh& mesh, const Element& element);

double bounding_box_diagonal(const Mesh& mesh);

Mesh parse_mesh(std::string_view text);
std::string serialize_mesh(const Mesh& mesh);
Mesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const Mesh& mesh);

bool structurally_equal(const Mesh& a, const Mesh& b);

}  // namespace thermoid
