#include "thermoid/optimize.hpp"

#include <chrono>
#include <cmath>

namespace thermoid {

void OptimizerConfig::validate() const
{
  if (!(max_step > 0.0)) throw ValidationError("max_step must be > 0");
  if (max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
  if (!(convergence_factor > 0.0 && convergence_factor < 1.0))
    throw ValidationError("convergence_factor must lie in (0, 1)");
  if (step_rule == StepRule::constant && !(constant_step.value_or(max_step) > 0.0))
    throw ValidationError("constant_step must be > 0");
  if (initial_step && !(*initial_step > 0.0)) throw ValidationError("initial_step must be > 0");
  if (!(divergence_factor > 1.0)) throw ValidationError("divergence_factor must be > 1");
}

double bb_step(const VectorXd& d, const VectorXd& y, double fallback)
{
  const double dy = d.dot(y);
  const double gamma = d.squaredNorm() / dy;
  if (!(dy > 0.0) || !std::isfinite(gamma) || !(gamma > 0.0)) return fallback;
  return gamma;
}

MinimizeResult minimize(const Objective& objective, VectorXd x, const OptimizerConfig& config)
{
  config.validate();
  MinimizeResult res;
  OptimizerState state;
  VectorXd g;
  double initial_cost = 0.0;

  for (int it = 0;; ++it) {
    state.iteration = it;
    state.design = x;
    double cost;
    try {
      cost = objective(x, &g);
    } catch (const Error& e) {
      throw ReconstructionAborted("iteration " + std::to_string(it) + ": " + e.what(), state);
    }
    if (!std::isfinite(cost) || !g.allFinite())
      throw ReconstructionAborted("iteration " + std::to_string(it) + ": non-finite cost or gradient", state);
    if (it == 0) initial_cost = cost;
    res.cost_history.push_back(cost);
    state.cost_history.push_back(cost);

    IterationRecord rec;
    rec.iteration = it;
    rec.cost = cost;
    rec.grad_norm = g.norm();
    if (config.snapshot_every > 0 && it % config.snapshot_every == 0) res.snapshots.emplace_back(it, x);

    if (cost > config.divergence_factor * initial_cost)
      throw ReconstructionAborted("diverged at iteration " + std::to_string(it) + " (cost " + std::to_string(cost) +
                                      " exceeds " + std::to_string(config.divergence_factor) + "x initial)",
                                  state);

    const double gmax = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (cost <= config.convergence_factor * initial_cost || gmax == 0.0) {
      res.converged = true;
      res.stop_reason = cost <= config.convergence_factor * initial_cost ? "cost reduction reached" : "zero gradient";
      res.log.push_back(rec);
      res.iterations = it;
      break;
    }
    if (it >= config.max_iterations) {
      res.stop_reason = "iteration limit";
      res.log.push_back(rec);
      res.iterations = it;
      break;
    }

    // gamma scales the raw gradient; gamma * |g|_inf is the step in design units
    double step;
    double gamma;
    if (config.step_rule == StepRule::constant) {
      gamma = config.constant_step.value_or(config.max_step);
      step = gamma * gmax;
    } else {
      if (it == 0) {
        step = config.initial_step.value_or(config.max_step);
      } else {
        const double raw = bb_step(x - state.previous_design, g - state.previous_gradient, -1.0);
        step = raw > 0.0 ? raw * gmax : config.max_step;
      }
      step = std::min(step, config.max_step);
      gamma = step / gmax;
    }
    rec.step = step;
    rec.raw_step = gamma;
    res.log.push_back(rec);

    state.previous_design = x;
    state.previous_gradient = g;
    x -= gamma * g;
  }
  res.design = std::move(x);
  return res;
}

ReconstructionResult reconstruct(const ThermalProblem& problem, const DesignMap& design, const OptimizerConfig& config)
{
  const auto start = std::chrono::steady_clock::now();
  const int n = problem.num_nodes();
  if (design.filter && design.filter->matrix.rows() != n) throw ShapeError("filter kernel does not match the mesh");
  if (design.bounds) design.bounds->validate();

  const Objective objective = [&](const VectorXd& control, VectorXd* grad) {
    const NodalField dT = design.temperature(control);
    Evaluation ev = problem.evaluate(dT, grad != nullptr);
    if (grad) *grad = design.pull_back(control, ev.gradient);
    return ev.cost.total;
  };

  MinimizeResult m = minimize(objective, design.initial_control(n), config);

  ReconstructionResult r;
  r.control = m.design;
  r.temperature = design.temperature(m.design);
  r.cost_history = std::move(m.cost_history);
  r.log = std::move(m.log);
  for (auto& [it, c] : m.snapshots) r.snapshots.emplace_back(it, design.temperature(c));
  r.iterations = m.iterations;
  r.converged = m.converged;
  r.stop_reason = m.stop_reason;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace thermoid
