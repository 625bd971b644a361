#pragma once

// Linear element kernels, templated on the scalar type. DOFs are ordered
// node-major: truss3d and tet4 carry (x, y, z) per node, tri3 carries (x, y).

#include <cmath>

#include <Eigen/Dense>

namespace thermoid::kernels {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;

// ---------------------------------------------------------------------------
// Constitutive matrices

/// Plane-stress elasticity matrix in Voigt order [xx, yy, xy(engineering)].
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> plane_stress_matrix(Scalar young, Scalar poisson)
{
  const Scalar c = young / (Scalar(1) - poisson * poisson);
  Eigen::Matrix<Scalar, 3, 3> d;
  d << c, c * poisson, Scalar(0),
       c * poisson, c, Scalar(0),
       Scalar(0), Scalar(0), c * (Scalar(1) - poisson) / Scalar(2);
  return d;
}

/// 3D isotropic elasticity matrix in Voigt order [xx, yy, zz, xy, yz, zx].
template <typename Scalar>
Eigen::Matrix<Scalar, 6, 6> isotropic_matrix(Scalar young, Scalar poisson)
{
  const Scalar lambda = young * poisson / ((Scalar(1) + poisson) * (Scalar(1) - Scalar(2) * poisson));
  const Scalar mu = young / (Scalar(2) * (Scalar(1) + poisson));
  Eigen::Matrix<Scalar, 6, 6> d = Eigen::Matrix<Scalar, 6, 6>::Zero();
  d.template topLeftCorner<3, 3>().setConstant(lambda);
  for (int i = 0; i < 3; ++i) {
    d(i, i) = lambda + Scalar(2) * mu;
    d(i + 3, i + 3) = mu;
  }
  return d;
}

// ---------------------------------------------------------------------------
// truss3d

template <typename Scalar>
Scalar truss_length(const Vec3T<Scalar>& a, const Vec3T<Scalar>& b)
{
  return (b - a).norm();
}

/// Axial strain operator: eps = B * u_e with B = [-e^T, e^T] / L.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, 6> truss_strain_operator(const Vec3T<Scalar>& a, const Vec3T<Scalar>& b)
{
  const Scalar length = truss_length(a, b);
  const Vec3T<Scalar> e = (b - a) / length;
  Eigen::Matrix<Scalar, 1, 6> op;
  op << -e.transpose() / length, e.transpose() / length;
  return op;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 6, 6> truss_stiffness(const Vec3T<Scalar>& a, const Vec3T<Scalar>& b,
                                            Scalar young, Scalar area)
{
  const Scalar length = truss_length(a, b);
  const Vec3T<Scalar> e = (b - a) / length;
  const Eigen::Matrix<Scalar, 3, 3> k = (young * area / length) * (e * e.transpose());
  Eigen::Matrix<Scalar, 6, 6> ke;
  ke << k, -k, -k, k;
  return ke;
}

/// Equivalent nodal load of a uniform axial thermal strain alpha*dT_avg:
/// the outward pair +/- E*A*alpha*dT_avg along the member axis.
template <typename Scalar>
Eigen::Matrix<Scalar, 6, 1> truss_thermal_force(const Vec3T<Scalar>& a, const Vec3T<Scalar>& b,
                                                Scalar young, Scalar area, Scalar alpha,
                                                Scalar mean_dT)
{
  const Vec3T<Scalar> e = (b - a) / truss_length(a, b);
  const Scalar axial = young * area * alpha * mean_dT;
  Eigen::Matrix<Scalar, 6, 1> f;
  f << -axial * e, axial * e;
  return f;
}

// ---------------------------------------------------------------------------
// tri3 plane stress

template <typename Scalar>
Scalar tri3_signed_area(const Eigen::Matrix<Scalar, 2, 3>& xy)
{
  return ((xy(0, 1) - xy(0, 0)) * (xy(1, 2) - xy(1, 0)) -
          (xy(0, 2) - xy(0, 0)) * (xy(1, 1) - xy(1, 0))) / Scalar(2);
}

/// Constant strain-displacement matrix [eps_xx, eps_yy, gamma_xy] = B * u_e.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 6> tri3_strain_operator(const Eigen::Matrix<Scalar, 2, 3>& xy)
{
  const Scalar two_area = Scalar(2) * tri3_signed_area(xy);
  Eigen::Matrix<Scalar, 3, 6> b = Eigen::Matrix<Scalar, 3, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    const Scalar dndx = (xy(1, j) - xy(1, k)) / two_area;
    const Scalar dndy = (xy(0, k) - xy(0, j)) / two_area;
    b(0, 2 * i) = dndx;
    b(1, 2 * i + 1) = dndy;
    b(2, 2 * i) = dndy;
    b(2, 2 * i + 1) = dndx;
  }
  return b;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 6, 6> tri3_stiffness(const Eigen::Matrix<Scalar, 2, 3>& xy, Scalar young,
                                           Scalar poisson, Scalar thickness)
{
  const auto b = tri3_strain_operator(xy);
  const Scalar area = std::abs(tri3_signed_area(xy));
  return thickness * area * b.transpose() * plane_stress_matrix(young, poisson) * b;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 6, 1> tri3_thermal_force(const Eigen::Matrix<Scalar, 2, 3>& xy, Scalar young,
                                               Scalar poisson, Scalar thickness, Scalar alpha,
                                               Scalar mean_dT)
{
  const auto b = tri3_strain_operator(xy);
  const Scalar area = std::abs(tri3_signed_area(xy));
  Eigen::Matrix<Scalar, 3, 1> eps_th(alpha * mean_dT, alpha * mean_dT, Scalar(0));
  return thickness * area * b.transpose() * (plane_stress_matrix(young, poisson) * eps_th);
}

// ---------------------------------------------------------------------------
// tet4

template <typename Scalar>
Scalar tet4_signed_volume(const Eigen::Matrix<Scalar, 3, 4>& x)
{
  Eigen::Matrix<Scalar, 3, 3> m;
  m << x.col(1) - x.col(0), x.col(2) - x.col(0), x.col(3) - x.col(0);
  return m.determinant() / Scalar(6);
}

/// Shape function gradients (rows: nodes, cols: x/y/z) of the linear tetrahedron.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 3> tet4_shape_gradients(const Eigen::Matrix<Scalar, 3, 4>& x)
{
  Eigen::Matrix<Scalar, 4, 4> a;
  for (int i = 0; i < 4; ++i) {
    a(i, 0) = Scalar(1);
    a.template block<1, 3>(i, 1) = x.col(i).transpose();
  }
  // N_i = c_i0 + c_i1 x + c_i2 y + c_i3 z, coefficient rows are inverse columns
  const Eigen::Matrix<Scalar, 4, 4> inv = a.inverse();
  return inv.template bottomRows<3>().transpose();
}

/// Strain-displacement matrix, Voigt [xx, yy, zz, xy, yz, zx] with engineering shears.
template <typename Scalar>
Eigen::Matrix<Scalar, 6, 12> tet4_strain_operator(const Eigen::Matrix<Scalar, 3, 4>& x)
{
  const auto g = tet4_shape_gradients(x);
  Eigen::Matrix<Scalar, 6, 12> b = Eigen::Matrix<Scalar, 6, 12>::Zero();
  for (int i = 0; i < 4; ++i) {
    const int c = 3 * i;
    b(0, c) = g(i, 0);
    b(1, c + 1) = g(i, 1);
    b(2, c + 2) = g(i, 2);
    b(3, c) = g(i, 1);
    b(3, c + 1) = g(i, 0);
    b(4, c + 1) = g(i, 2);
    b(4, c + 2) = g(i, 1);
    b(5, c) = g(i, 2);
    b(5, c + 2) = g(i, 0);
  }
  return b;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 12, 12> tet4_stiffness(const Eigen::Matrix<Scalar, 3, 4>& x, Scalar young,
                                             Scalar poisson)
{
  const auto b = tet4_strain_operator(x);
  const Scalar volume = std::abs(tet4_signed_volume(x));
  return volume * b.transpose() * isotropic_matrix(young, poisson) * b;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 12, 1> tet4_thermal_force(const Eigen::Matrix<Scalar, 3, 4>& x, Scalar young,
                                                Scalar poisson, Scalar alpha, Scalar mean_dT)
{
  const auto b = tet4_strain_operator(x);
  const Scalar volume = std::abs(tet4_signed_volume(x));
  Eigen::Matrix<Scalar, 6, 1> eps_th = Eigen::Matrix<Scalar, 6, 1>::Zero();
  eps_th.template head<3>().setConstant(alpha * mean_dT);
  return volume * b.transpose() * (isotropic_matrix(young, poisson) * eps_th);
}

}  // namespace thermoid::kernels
