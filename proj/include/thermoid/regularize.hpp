#pragma once

#include <optional>

#include "thermoid/core.hpp"
#include "thermoid/mesh.hpp"

#include <Eigen/Sparse>

namespace thermoid {

/// Row-normalized linear-hat smoothing matrix over mesh nodes.
struct FilterKernel {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  double radius = 0.0;
};

FilterKernel build_kernel(const Mesh& mesh, double radius);
FilterKernel identity_kernel(int size);

NodalField forward_filter(const FilterKernel& kernel, const NodalField& control);
NodalField backward_filter(const FilterKernel& kernel, const NodalField& gradient);

struct Bounds {
  double lower = -5.0;
  double upper = 15.0;
  double beta = 1.0;
  void validate() const;
};

struct SigmoidValue {
  double value;
  double derivative;
};

/// dT = L + (U - L) sigma(beta s). The exponent is clamped to +/-30 so the
/// image stays strictly inside (L, U).
SigmoidValue sigmoid_map(double s, const Bounds& bounds);
/// Latent value whose image is dT (dT strictly inside the bounds).
double sigmoid_inverse(double dT, const Bounds& bounds);

/// dI/dPhi~ = A^T diag(d dT/ds at s = A Phi~) dI/d dT.
NodalField chain_gradient(const FilterKernel& kernel, const Bounds& bounds, const NodalField& control,
                          const NodalField& dI_dT);

/// Latent-to-temperature map: optional filter, then optional bounds.
/// With neither, the design variable is dT itself.
struct DesignMap {
  std::optional<FilterKernel> filter;
  std::optional<Bounds> bounds;

  NodalField temperature(const NodalField& control) const;
  NodalField pull_back(const NodalField& control, const NodalField& dI_dT) const;
  /// Control field whose image is dT = 0 everywhere.
  NodalField initial_control(int size) const;
};

}  // namespace thermoid
