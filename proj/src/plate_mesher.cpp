#include "thermoid/plate_mesher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace thermoid {

namespace {

using P2 = Eigen::Vector2d;

struct Triangle {
  std::array<int, 3> v;
  P2 center;
  double radius2;
};

double orient(const P2& a, const P2& b, const P2& c)
{
  return (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
}

Triangle make_triangle(const std::vector<P2>& p, int a, int b, int c)
{
  const P2& A = p[a];
  const P2& B = p[b];
  const P2& C = p[c];
  const double d = 2.0 * orient(A, B, C);
  const double a2 = A.squaredNorm(), b2 = B.squaredNorm(), c2 = C.squaredNorm();
  P2 center((a2 * (B.y() - C.y()) + b2 * (C.y() - A.y()) + c2 * (A.y() - B.y())) / d,
            (a2 * (C.x() - B.x()) + b2 * (A.x() - C.x()) + c2 * (B.x() - A.x())) / d);
  return {{a, b, c}, center, (A - center).squaredNorm()};
}

// Bowyer-Watson on points that are in general position (the caller jitters).
std::vector<std::array<int, 3>> delaunay(std::vector<P2> pts)
{
  const int n = static_cast<int>(pts.size());
  P2 lo = pts.front(), hi = pts.front();
  for (const auto& q : pts) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const P2 mid = 0.5 * (lo + hi);
  const double span = std::max((hi - lo).maxCoeff(), 1.0) * 100.0;
  pts.push_back(mid + P2(-span, -span));
  pts.push_back(mid + P2(span, -span));
  pts.push_back(mid + P2(0.0, span));

  std::vector<Triangle> tris{make_triangle(pts, n, n + 1, n + 2)};
  for (int i = 0; i < n; ++i) {
    const P2& q = pts[i];
    std::map<std::pair<int, int>, int> edges;
    std::vector<Triangle> keep;
    keep.reserve(tris.size() + 2);
    for (const auto& t : tris) {
      if ((q - t.center).squaredNorm() < t.radius2) {
        for (int k = 0; k < 3; ++k) {
          int a = t.v[k], b = t.v[(k + 1) % 3];
          ++edges[{std::min(a, b), std::max(a, b)}];
        }
      } else {
        keep.push_back(t);
      }
    }
    // re-walk bad triangles for oriented cavity edges
    for (const auto& t : tris) {
      if (!((q - t.center).squaredNorm() < t.radius2)) continue;
      for (int k = 0; k < 3; ++k) {
        int a = t.v[k], b = t.v[(k + 1) % 3];
        if (edges[{std::min(a, b), std::max(a, b)}] == 1) keep.push_back(make_triangle(pts, a, b, i));
      }
    }
    tris = std::move(keep);
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris)
    if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t.v);
  return out;
}

}  // namespace

Mesh generate_plate_with_hole(double length, double height, double hole_diameter, const Eigen::Vector2d& c,
                              double h, const PlateOptions& options)
{
  if (!(length > 0.0) || !(height > 0.0)) throw GeometryError("plate dimensions must be positive");
  if (!(h > 0.0)) throw GeometryError("target edge size must be positive");
  if (!(hole_diameter > 0.0)) throw GeometryError("hole diameter must be positive");
  const double r = 0.5 * hole_diameter;
  if (c.x() - r <= 0.0 || c.x() + r >= length || c.y() - r <= 0.0 || c.y() + r >= height)
    throw GeometryError("hole intersects or touches the plate boundary");
  if (options.hole_segments < 8) throw GeometryError("hole polygon needs at least 8 segments");

  const double pi = std::numbers::pi;
  const int nx = std::max(1, static_cast<int>(std::lround(length / (2.0 * h / std::sqrt(3.0)))));
  const int ny = std::max(1, static_cast<int>(std::lround(height / h)));
  const double dx = length / nx;
  const double dy = height / ny;
  const double clearance = r + 0.65 * h;

  std::vector<P2> pts;
  std::vector<int> side;  // 0 interior, 1 bottom, 2 top, 3 left, 4 right, 5 hole
  auto add = [&](double x, double y, int s) {
    pts.emplace_back(x, y);
    side.push_back(s);
  };

  for (int i = 0; i <= nx; ++i) add(i * dx, 0.0, i == 0 ? 3 : i == nx ? 4 : 1);
  for (int i = 0; i <= nx; ++i) add(i * dx, height, i == 0 ? 3 : i == nx ? 4 : 2);
  for (int j = 1; j < ny; ++j) {
    add(0.0, j * dy, 3);
    add(length, j * dy, 4);
  }
  for (int j = 1; j < ny; ++j) {
    const double shift = (j % 2) ? 0.5 * dx : 0.0;
    for (int i = 0; i <= nx + 1; ++i) {
      const double x = i * dx + shift;
      if (x < 0.5 * dx - 1e-9 * dx || x > length - 0.5 * dx + 1e-9 * dx) continue;
      if ((P2(x, j * dy) - c).norm() < clearance) continue;
      add(x, j * dy, 0);
    }
  }
  // drop boundary points that crowd the hole as well
  for (std::size_t k = 0; k < pts.size();) {
    if (side[k] != 0 && (pts[k] - c).norm() < r + 0.3 * h) {
      pts.erase(pts.begin() + static_cast<long>(k));
      side.erase(side.begin() + static_cast<long>(k));
    } else {
      ++k;
    }
  }
  const int first_hole = static_cast<int>(pts.size());
  const int segs = options.hole_segments;
  for (int k = 0; k < segs; ++k) {
    const double t = 2.0 * pi * k / segs;
    add(c.x() + r * std::cos(t), c.y() + r * std::sin(t), 5);
  }
  const int center_id = static_cast<int>(pts.size());
  add(c.x(), c.y(), 0);

  // Perturb a copy so the triangulation never meets cocircular or collinear
  // hull points; exact coordinates are restored afterwards.
  std::vector<P2> work = pts;
  std::mt19937 rng(20240611u);
  const double eps = 1e-4 * h;
  for (std::size_t k = 0; k < work.size(); ++k) {
    const double jx = static_cast<double>(rng()) / rng.max() - 0.5;
    const double jy = static_cast<double>(rng()) / rng.max() - 0.5;
    const double tx = pts[k].x() / length;
    const double ty = pts[k].y() / height;
    switch (side[k]) {
      case 1: work[k].y() -= eps * 4.0 * tx * (1.0 - tx); break;
      case 2: work[k].y() += eps * 4.0 * tx * (1.0 - tx); break;
      case 3: work[k].x() -= eps * 4.0 * ty * (1.0 - ty); break;
      case 4: work[k].x() += eps * 4.0 * ty * (1.0 - ty); break;
      default: work[k] += eps * P2(jx, jy); break;
    }
  }

  auto tris = delaunay(work);
  std::vector<std::array<int, 3>> kept;
  for (auto t : tris) {
    if (t[0] == center_id || t[1] == center_id || t[2] == center_id) continue;
    const P2 centroid = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    if ((centroid - c).norm() < r * std::cos(pi / segs)) continue;
    if (orient(pts[t[0]], pts[t[1]], pts[t[2]]) < 0.0) std::swap(t[1], t[2]);
    kept.push_back(t);
  }

  // renumber without the hole center
  std::vector<int> remap(pts.size(), -1);
  Mesh mesh;
  mesh.dimension = 2;
  mesh.materials.push_back(options.material);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (static_cast<int>(k) == center_id) continue;
    remap[k] = static_cast<int>(mesh.nodes.size());
    mesh.nodes.push_back({remap[k], Vec3(pts[k].x(), pts[k].y(), 0.0)});
  }
  for (const auto& t : kept) {
    Element e;
    e.id = static_cast<int>(mesh.elements.size());
    e.kind = ElementKind::tri3;
    e.nodes = {remap[t[0]], remap[t[1]], remap[t[2]]};
    e.material = options.material.id;
    e.section = options.thickness;
    mesh.elements.push_back(std::move(e));
  }
  for (const auto& n : mesh.nodes)
    if (n.position.x() == 0.0) mesh.dirichlet.push_back({n.id, {true, true, false}});

  // audits
  double area = 0.0;
  for (const auto& e : mesh.elements) {
    const double a = element_measure(mesh, e);
    if (!(a > 1e-6 * h * h)) throw GeometryError("plate mesher produced a degenerate triangle");
    area += a;
  }
  const double polygon = 0.5 * segs * r * r * std::sin(2.0 * pi / segs);
  if (std::abs(area - (length * height - polygon)) > 1e-9 * length * height)
    throw GeometryError("plate mesh does not tile the domain (area mismatch)");
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& e : mesh.elements)
    for (int k = 0; k < 3; ++k) {
      int a = e.nodes[k], b = e.nodes[(k + 1) % 3];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  for (int k = 0; k < segs; ++k) {
    int a = remap[first_hole + k], b = remap[first_hole + (k + 1) % segs];
    if (edge_count[{std::min(a, b), std::max(a, b)}] != 1)
      throw GeometryError("plate mesher lost a hole boundary edge");
  }
  mesh.validate();
  return mesh;
}

LoadCase plate_edge_load(const Mesh& mesh, double length, const Vec3& total_force, int id)
{
  std::vector<std::pair<double, int>> edge;
  for (const auto& n : mesh.nodes)
    if (n.position.x() == length) edge.emplace_back(n.position.y(), n.id);
  if (edge.size() < 2) throw GeometryError("no loaded edge at x = " + std::to_string(length));
  std::sort(edge.begin(), edge.end());
  const double span = edge.back().first - edge.front().first;
  std::vector<double> share(edge.size(), 0.0);
  for (std::size_t k = 0; k + 1 < edge.size(); ++k) {
    const double w = 0.5 * (edge[k + 1].first - edge[k].first) / span;
    share[k] += w;
    share[k + 1] += w;
  }
  LoadCase lc;
  lc.id = id;
  for (std::size_t k = 0; k < edge.size(); ++k) lc.nodal_loads.push_back({edge[k].second, share[k] * total_force});
  return lc;
}

}  // namespace thermoid
