#include "thermoid/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thermoid {

SampleSet SampleSet::merged(const std::vector<Sample>& raw)
{
  SampleSet out;
  std::vector<int> count;
  for (const auto& s : raw) {
    if (!s.position.allFinite() || !std::isfinite(s.value)) throw InterpolationError("sample is not finite");
    auto it = std::find_if(out.samples.begin(), out.samples.end(),
                           [&](const Sample& o) { return o.position == s.position; });
    if (it == out.samples.end()) {
      out.samples.push_back(s);
      count.push_back(1);
    } else {
      const std::size_t i = static_cast<std::size_t>(it - out.samples.begin());
      it->value += s.value;
      ++count[i];
    }
  }
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i].value /= count[i];
  return out;
}

SampleSet samples_from_field(const Mesh& mesh, const NodalField& field, const SensorSet& sensors)
{
  if (field.size() != static_cast<Eigen::Index>(mesh.num_nodes()))
    throw ShapeError("field does not match the mesh node count");
  std::vector<Sample> raw;
  for (const auto& s : sensors.sensors) {
    const Location loc = locate(mesh, s.position);
    const Element& e = mesh.elements[loc.element];
    double v = 0.0;
    for (std::size_t k = 0; k < e.nodes.size(); ++k) v += loc.shape[static_cast<Eigen::Index>(k)] * field[e.nodes[k]];
    raw.push_back({s.position, v});
  }
  return SampleSet::merged(raw);
}

// ---------------------------------------------------------------------------
// kNN

double knn_interpolate(const SampleSet& samples, const Vec3& query, int k, Weighting weighting)
{
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw InterpolationError("kNN needs at least one sample");
  if (k < 1 || k > n)
    throw InterpolationError("kNN neighbour count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  std::vector<std::pair<double, int>> d(n);
  for (int i = 0; i < n; ++i) d[i] = {(samples.samples[i].position - query).norm(), i};
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  if (d[0].first == 0.0) return samples.samples[d[0].second].value;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = weighting == Weighting::inverse_distance ? 1.0 / d[i].first : 1.0;
    num += w * samples.samples[d[i].second].value;
    den += w;
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Variograms

double Variogram::operator()(double h) const
{
  if (h <= 0.0) return 0.0;
  switch (model) {
    case VariogramModel::gaussian: return nugget + sill * (1.0 - std::exp(-3.0 * h * h / (range * range)));
    case VariogramModel::linear: return nugget + slope * h;
    case VariogramModel::power: return nugget + slope * std::pow(h, exponent);
  }
  return 0.0;
}

ExperimentalVariogram experimental_variogram(const SampleSet& samples)
{
  const std::size_t n = samples.size();
  std::vector<std::pair<double, double>> pairs;  // (distance, half squared difference)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dv = samples.samples[i].value - samples.samples[j].value;
      pairs.emplace_back((samples.samples[i].position - samples.samples[j].position).norm(), 0.5 * dv * dv);
    }
  ExperimentalVariogram ev;
  if (pairs.empty()) return ev;
  double dmax = 0.0;
  for (const auto& p : pairs) dmax = std::max(dmax, p.first);
  const int bins = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pairs.size()))));
  std::vector<double> lag(bins, 0.0), gam(bins, 0.0);
  std::vector<int> cnt(bins, 0);
  for (const auto& [d, g] : pairs) {
    const int b = std::min(bins - 1, static_cast<int>(d / dmax * bins));
    lag[b] += d;
    gam[b] += g;
    ++cnt[b];
  }
  for (int b = 0; b < bins; ++b) {
    if (cnt[b] == 0) continue;
    ev.lag.push_back(lag[b] / cnt[b]);
    ev.gamma.push_back(gam[b] / cnt[b]);
    ev.count.push_back(cnt[b]);
  }
  return ev;
}

namespace {

constexpr double kSillFloor = 1e-12;

struct LinearFit {
  double nugget;
  double scale;
  double sse;
};

// Weighted least squares for gamma ~ n + s f(h) with n >= 0 and s >= floor.
LinearFit fit_two(const ExperimentalVariogram& ev, const std::vector<double>& f)
{
  double sw = 0, sf = 0, sg = 0, sff = 0, sfg = 0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double w = ev.count[k];
    sw += w;
    sf += w * f[k];
    sg += w * ev.gamma[k];
    sff += w * f[k] * f[k];
    sfg += w * f[k] * ev.gamma[k];
  }
  double n = 0.0, s = 0.0;
  const double det = sw * sff - sf * sf;
  if (det > 1e-14 * sw * sff) {
    n = (sff * sg - sf * sfg) / det;
    s = (sw * sfg - sf * sg) / det;
  }
  if (n < 0.0 || det <= 1e-14 * sw * sff) {
    n = 0.0;
    s = sff > 0.0 ? sfg / sff : 0.0;
  }
  if (s < kSillFloor) {
    s = kSillFloor;
    n = std::max(0.0, (sg - s * sf) / sw);
  }
  double sse = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double r = n + s * f[k] - ev.gamma[k];
    sse += ev.count[k] * r * r;
  }
  return {n, s, sse};
}

// Minimizes a 1-D function of a parameter over [lo, hi] by a log-spaced scan
// followed by golden-section refinement.
template <typename F>
double scan_minimize(F&& sse, double lo, double hi, bool log_scale)
{
  const int steps = 120;
  auto at = [&](int i) {
    const double t = static_cast<double>(i) / steps;
    return log_scale ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  };
  int best = 0;
  double best_val = sse(at(0));
  for (int i = 1; i <= steps; ++i) {
    const double v = sse(at(i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = at(std::max(0, best - 1));
  double b = at(std::min(steps, best + 1));
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = sse(c), fd = sse(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = sse(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = sse(d);
    }
  }
  const double mid = 0.5 * (a + b);
  return sse(mid) <= best_val ? mid : at(best);
}

}  // namespace

Variogram fit_variogram(const SampleSet& samples, VariogramModel model)
{
  if (samples.size() < 3) throw InterpolationError("variogram fit needs at least 3 samples");
  const ExperimentalVariogram ev = experimental_variogram(samples);
  Variogram v;
  v.model = model;

  double vmin = samples.samples.front().value, vmax = vmin;
  for (const auto& s : samples.samples) {
    vmin = std::min(vmin, s.value);
    vmax = std::max(vmax, s.value);
  }
  const double lag_max = *std::max_element(ev.lag.begin(), ev.lag.end());
  const double lag_min = *std::min_element(ev.lag.begin(), ev.lag.end());
  if (vmax - vmin <= 1e-12 * std::max(1.0, std::abs(vmax))) {
    v.degenerate = true;
    v.sill = kSillFloor;
    v.slope = kSillFloor;
    v.range = lag_max > 0.0 ? lag_max : 1.0;
    return v;
  }
  if (ev.lag.size() < 2) throw InterpolationError("variogram fit needs at least two distinct pair distances");

  auto basis = [&](auto&& fn) {
    std::vector<double> f(ev.lag.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = fn(ev.lag[k]);
    return f;
  };
  switch (model) {
    case VariogramModel::gaussian: {
      auto f_of = [&](double a) { return basis([a](double h) { return 1.0 - std::exp(-3.0 * h * h / (a * a)); }); };
      const double a = scan_minimize([&](double r) { return fit_two(ev, f_of(r)).sse; }, 0.25 * lag_min,
                                     3.0 * lag_max, true);
      const LinearFit fit = fit_two(ev, f_of(a));
      v.range = a;
      v.nugget = fit.nugget;
      v.sill = fit.scale;
      break;
    }
    case VariogramModel::linear: {
      const LinearFit fit = fit_two(ev, basis([](double h) { return h; }));
      v.nugget = fit.nugget;
      v.slope = fit.scale;
      break;
    }
    case VariogramModel::power: {
      auto f_of = [&](double e) { return basis([e](double h) { return std::pow(h, e); }); };
      const double e = scan_minimize([&](double x) { return fit_two(ev, f_of(x)).sse; }, 0.01, 1.99, false);
      const LinearFit fit = fit_two(ev, f_of(e));
      v.exponent = e;
      v.nugget = fit.nugget;
      v.slope = fit.scale;
      break;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Kriging

Kriging::Kriging(const SampleSet& samples, const Variogram& variogram, bool drift)
    : samples_(samples), variogram_(variogram)
{
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw InterpolationError("kriging needs at least one sample");
  for (const auto& s : samples.samples) origin_ += s.position;
  origin_ /= n;
  if (drift) {
    for (int a = 0; a < 3; ++a) {
      const double first = samples.samples.front().position[a];
      for (const auto& s : samples.samples)
        if (s.position[a] != first) {
          axes_.push_back(a);
          break;
        }
    }
  }
  const int m = 1 + static_cast<int>(axes_.size());
  if (drift && n <= m)
    throw InterpolationError("universal kriging needs more than " + std::to_string(m) + " samples, got " +
                             std::to_string(n));

  MatrixXd sys = MatrixXd::Zero(n + m, n + m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sys(i, j) = variogram_((samples.samples[i].position - samples.samples[j].position).norm());
  for (int i = 0; i < n; ++i) {
    sys(i, n) = sys(n, i) = 1.0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const double c = samples.samples[i].position[axes_[a]] - origin_[axes_[a]];
      sys(i, n + 1 + a) = sys(n + 1 + a, i) = c;
    }
  }
  lu_.compute(sys);
  if (!lu_.isInvertible()) {
    // one retry with a tiny diagonal perturbation of the variogram block
    const double scale = std::max(sys.topLeftCorner(n, n).cwiseAbs().maxCoeff(), 1.0);
    for (int i = 0; i < n; ++i) sys(i, i) -= 1e-12 * scale;
    lu_.compute(sys);
    jittered_ = true;
    if (!lu_.isInvertible())
      throw InterpolationError(drift ? "singular universal kriging system (duplicate or coplanar/collinear samples)"
                                     : "singular ordinary kriging system (duplicate sample positions)");
  }
}

VectorXd Kriging::rhs(const Vec3& q) const
{
  const int n = static_cast<int>(samples_.size());
  VectorXd b(n + 1 + static_cast<int>(axes_.size()));
  for (int i = 0; i < n; ++i) b[i] = variogram_((samples_.samples[i].position - q).norm());
  b[n] = 1.0;
  for (std::size_t a = 0; a < axes_.size(); ++a) b[n + 1 + a] = q[axes_[a]] - origin_[axes_[a]];
  return b;
}

KrigingEstimate Kriging::estimate(const Vec3& query) const
{
  const int n = static_cast<int>(samples_.size());
  const VectorXd b = rhs(query);
  const VectorXd sol = lu_.solve(b);
  KrigingEstimate e;
  e.weights = sol.head(n);
  for (int i = 0; i < n; ++i) e.value += e.weights[i] * samples_.samples[i].value;
  e.variance = sol.dot(b);
  e.jittered = jittered_;
  return e;
}

KrigingEstimate ordinary_kriging(const SampleSet& samples, const Variogram& variogram, const Vec3& query)
{
  return Kriging(samples, variogram, false).estimate(query);
}

KrigingEstimate universal_kriging(const SampleSet& samples, const Variogram& variogram, const Vec3& query)
{
  return Kriging(samples, variogram, true).estimate(query);
}

InterpolationOutcome interpolate_field(const Mesh& mesh, const SampleSet& samples, InterpolationMethod method,
                                       const InterpolationParams& params)
{
  if (samples.size() == 0) throw InterpolationError("no samples to interpolate");
  InterpolationOutcome out;
  const auto n = static_cast<std::size_t>(mesh.num_nodes());
  out.field.resize(static_cast<Eigen::Index>(n));

  if (method == InterpolationMethod::knn) {
    const int k = std::min(params.k, static_cast<int>(samples.size()));
    parallel_for(n, [&](std::size_t i) {
      out.field[static_cast<Eigen::Index>(i)] = knn_interpolate(samples, mesh.nodes[i].position, k, params.weighting);
    });
    return out;
  }

  const Variogram v = params.variogram ? *params.variogram : fit_variogram(samples, params.model);
  out.variogram = v;
  if (v.degenerate) {
    double mean = 0.0;
    for (const auto& s : samples.samples) mean += s.value;
    out.field.setConstant(mean / static_cast<double>(samples.size()));
    out.degenerate = true;
    return out;
  }
  const Kriging k(samples, v, method == InterpolationMethod::universal_kriging);
  out.jittered = k.jittered();
  parallel_for(n, [&](std::size_t i) {
    out.field[static_cast<Eigen::Index>(i)] = k.estimate(mesh.nodes[i].position).value;
  });
  return out;
}

}  // namespace thermoid
