#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace thermoid {

using Vec3 = Eigen::Vector3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Nodal scalar field (temperature difference in K, gradients, latent controls).
using NodalField = Eigen::VectorXd;

// Error hierarchy. Every error carries a short machine-readable kind used by
// the CLI when it prints the single-line diagnostic.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error("parse", w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error("validation", w) {}
};
struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error("geometry", w) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string& w) : Error("solver", w) {}
};
struct LocationError : Error {
  explicit LocationError(const std::string& w) : Error("location", w) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape", w) {}
};
struct OptimizationError : Error {
  explicit OptimizationError(const std::string& w) : Error("optimization", w) {}
};
struct InterpolationError : Error {
  explicit InterpolationError(const std::string& w) : Error("interpolation", w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w) {}
};

// Worker count used by parallel_for. 1 means strictly sequential execution.
void set_thread_count(int n);
int thread_count();

// Runs fn(i) for i in [0, n). Each index must write only to its own output
// slot; results are then independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace thermoid
