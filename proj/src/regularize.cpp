#include "thermoid/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace thermoid {

FilterKernel build_kernel(const Mesh& mesh, double radius)
{
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("filter radius must be positive");
  const int n = static_cast<int>(mesh.num_nodes());

  // bucket nodes on a grid of cell size r; neighbors lie in adjacent cells
  using Cell = std::tuple<long, long, long>;
  auto cell_of = [&](const Vec3& p) {
    return Cell{std::lround(std::floor(p.x() / radius)), std::lround(std::floor(p.y() / radius)),
                std::lround(std::floor(p.z() / radius))};
  };
  std::map<Cell, std::vector<int>> grid;
  for (int i = 0; i < n; ++i) grid[cell_of(mesh.nodes[i].position)].push_back(i);

  std::vector<std::vector<std::pair<int, double>>> rows(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t pi) {
    const int p = static_cast<int>(pi);
    const Vec3& xp = mesh.nodes[p].position;
    const auto [cx, cy, cz] = cell_of(xp);
    auto& row = rows[pi];
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(Cell{cx + dx, cy + dy, cz + dz});
          if (it == grid.end()) continue;
          for (int q : it->second) {
            const double w = 1.0 - (mesh.nodes[q].position - xp).norm() / radius;
            if (w > 0.0) row.emplace_back(q, w);
          }
        }
    std::sort(row.begin(), row.end());
    double sum = 0.0;
    for (const auto& [q, w] : row) sum += w;
    for (auto& [q, w] : row) w /= sum;
  });

  std::vector<Eigen::Triplet<double>> t;
  for (int p = 0; p < n; ++p)
    for (const auto& [q, w] : rows[p]) t.emplace_back(p, q, w);
  FilterKernel k;
  k.radius = radius;
  k.matrix.resize(n, n);
  k.matrix.setFromTriplets(t.begin(), t.end());
  return k;
}

FilterKernel identity_kernel(int size)
{
  FilterKernel k;
  k.matrix.resize(size, size);
  k.matrix.setIdentity();
  return k;
}

NodalField forward_filter(const FilterKernel& kernel, const NodalField& control)
{
  if (control.size() != kernel.matrix.cols())
    throw ShapeError("filter expects " + std::to_string(kernel.matrix.cols()) + " values, got " +
                     std::to_string(control.size()));
  return kernel.matrix * control;
}

NodalField backward_filter(const FilterKernel& kernel, const NodalField& gradient)
{
  if (gradient.size() != kernel.matrix.rows())
    throw ShapeError("filter expects " + std::to_string(kernel.matrix.rows()) + " values, got " +
                     std::to_string(gradient.size()));
  return kernel.matrix.transpose() * gradient;
}

void Bounds::validate() const
{
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper))
    throw ValidationError("bounds require finite lower < upper");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("sigmoid sharpness must be positive");
}

SigmoidValue sigmoid_map(double s, const Bounds& b)
{
  const double t = std::clamp(b.beta * s, -30.0, 30.0);
  double sigma;
  if (t >= 0.0) {
    sigma = 1.0 / (1.0 + std::exp(-t));
  } else {
    const double e = std::exp(t);
    sigma = e / (1.0 + e);
  }
  const double range = b.upper - b.lower;
  return {b.lower + range * sigma, range * b.beta * sigma * (1.0 - sigma)};
}

double sigmoid_inverse(double dT, const Bounds& b)
{
  const double sigma = (dT - b.lower) / (b.upper - b.lower);
  if (!(sigma > 0.0 && sigma < 1.0)) throw ValidationError("value lies outside the open bounds");
  return std::log(sigma / (1.0 - sigma)) / b.beta;
}

NodalField chain_gradient(const FilterKernel& kernel, const Bounds& bounds, const NodalField& control,
                          const NodalField& dI_dT)
{
  const NodalField s = forward_filter(kernel, control);
  if (dI_dT.size() != s.size()) throw ShapeError("gradient size does not match the control field");
  NodalField scaled(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) scaled[i] = sigmoid_map(s[i], bounds).derivative * dI_dT[i];
  return backward_filter(kernel, scaled);
}

NodalField DesignMap::temperature(const NodalField& control) const
{
  NodalField s = filter ? forward_filter(*filter, control) : control;
  if (bounds)
    for (auto& v : s) v = sigmoid_map(v, *bounds).value;
  return s;
}

NodalField DesignMap::pull_back(const NodalField& control, const NodalField& dI_dT) const
{
  NodalField g = dI_dT;
  if (bounds) {
    const NodalField s = filter ? forward_filter(*filter, control) : control;
    for (Eigen::Index i = 0; i < s.size(); ++i) g[i] *= sigmoid_map(s[i], *bounds).derivative;
  }
  return filter ? backward_filter(*filter, g) : g;
}

NodalField DesignMap::initial_control(int size) const
{
  // rows of A sum to one, so a constant control maps to the same constant
  const double s0 = bounds ? sigmoid_inverse(0.0, *bounds) : 0.0;
  return NodalField::Constant(size, s0);
}

}  // namespace thermoid
