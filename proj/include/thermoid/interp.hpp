#pragma once

#include <optional>
#include <vector>

#include "thermoid/mesh.hpp"
#include "thermoid/sensors.hpp"

namespace thermoid {

struct Sample {
  Vec3 position = Vec3::Zero();
  double value = 0.0;
};

/// Temperature samples with pairwise distinct positions.
struct SampleSet {
  std::vector<Sample> samples;

  /// Merges exactly coincident positions by averaging their values, keeping
  /// first-appearance order.
  static SampleSet merged(const std::vector<Sample>& raw);
  std::size_t size() const { return samples.size(); }
};

/// Target values at the distinct sensor positions, interpolated from the
/// nodal field with the finite-element shape functions.
SampleSet samples_from_field(const Mesh& mesh, const NodalField& field, const SensorSet& sensors);

enum class Weighting { uniform, inverse_distance };

double knn_interpolate(const SampleSet& samples, const Vec3& query, int k,
                       Weighting weighting = Weighting::inverse_distance);

enum class VariogramModel { gaussian, linear, power };

/// Semivariogram gamma(h); gamma(0) = 0 and the nugget applies for h > 0.
///   gaussian: n + s (1 - exp(-3 h^2 / a^2))
///   linear:   n + slope h
///   power:    n + slope h^exponent
struct Variogram {
  VariogramModel model = VariogramModel::gaussian;
  double nugget = 0.0;
  double sill = 1.0;
  double range = 1.0;
  double slope = 1.0;
  double exponent = 1.0;
  bool degenerate = false;  // fitted to a constant sample set

  double operator()(double h) const;
};

struct ExperimentalVariogram {
  std::vector<double> lag;    // mean pair distance per non-empty bin
  std::vector<double> gamma;  // half mean squared difference
  std::vector<int> count;
};

ExperimentalVariogram experimental_variogram(const SampleSet& samples);
Variogram fit_variogram(const SampleSet& samples, VariogramModel model = VariogramModel::gaussian);

struct KrigingEstimate {
  double value = 0.0;
  double variance = 0.0;
  VectorXd weights;  // lambda over samples
  bool jittered = false;
};

/// Factorized kriging system reused across queries. drift = false gives
/// ordinary kriging; drift = true adds the regional-linear terms in every
/// coordinate that varies across the samples.
class Kriging {
public:
  Kriging(const SampleSet& samples, const Variogram& variogram, bool drift);
  KrigingEstimate estimate(const Vec3& query) const;
  bool jittered() const { return jittered_; }
  int drift_terms() const { return static_cast<int>(axes_.size()) + 1; }

private:
  VectorXd rhs(const Vec3& query) const;

  SampleSet samples_;
  Variogram variogram_;
  std::vector<int> axes_;
  Vec3 origin_ = Vec3::Zero();
  Eigen::FullPivLU<MatrixXd> lu_;
  bool jittered_ = false;
};

KrigingEstimate ordinary_kriging(const SampleSet& samples, const Variogram& variogram, const Vec3& query);
KrigingEstimate universal_kriging(const SampleSet& samples, const Variogram& variogram, const Vec3& query);

enum class InterpolationMethod { knn, ordinary_kriging, universal_kriging };

struct InterpolationParams {
  int k = 3;
  Weighting weighting = Weighting::inverse_distance;
  VariogramModel model = VariogramModel::gaussian;
  std::optional<Variogram> variogram;  // fitted from the samples when absent
};

struct InterpolationOutcome {
  NodalField field;
  std::optional<Variogram> variogram;
  bool degenerate = false;
  bool jittered = false;
};

InterpolationOutcome interpolate_field(const Mesh& mesh, const SampleSet& samples, InterpolationMethod method,
                                       const InterpolationParams& params = {});

}  // namespace thermoid
