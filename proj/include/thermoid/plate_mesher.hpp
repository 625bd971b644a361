#pragma once

#include "thermoid/fem.hpp"
#include "thermoid/mesh.hpp"

namespace thermoid {

struct PlateOptions {
  Material material{0, 7800.0, 2e12, 0.3, 1e-5};
  double thickness = 0.1;
  int hole_segments = 32;
};

/// Tri3 plane-stress mesh of a rectangle [0,L]x[0,H] minus a circular hole.
/// target_edge_size is the row pitch of the triangular lattice (element
/// altitude); edges are about 1.15x that. Nodes on x = 0 are clamped in x, y.
Mesh generate_plate_with_hole(double length, double height, double hole_diameter, const Eigen::Vector2d& hole_center,
                              double target_edge_size, const PlateOptions& options = {});

/// Total force spread over the nodes on x = length by trapezoidal lumping.
LoadCase plate_edge_load(const Mesh& mesh, double length, const Vec3& total_force, int id = 0);

}  // namespace thermoid
