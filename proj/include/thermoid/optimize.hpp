#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "thermoid/inverse.hpp"
#include "thermoid/regularize.hpp"

namespace thermoid {

enum class StepRule { barzilai_borwein, constant };

/// Steps are expressed in design units: the applied update is
/// x -= gamma * g with gamma * |g|_inf equal to the reported step, so a step
/// of 0.1 moves the most sensitive node by 0.1. The constant rule instead
/// applies constant_step as a plain gradient multiplier.
struct OptimizerConfig {
  double max_step = 2.5e-3;
  int max_iterations = 5000;
  double convergence_factor = 1e-5;
  StepRule step_rule = StepRule::barzilai_borwein;
  std::optional<double> constant_step;
  std::optional<double> initial_step;  // defaults to max_step
  double divergence_factor = 1e6;
  int snapshot_every = 0;  // 0 disables snapshots

  void validate() const;
};

/// Eq. (d.d)/(d.y); returns `fallback` when the denominator is not positive
/// or the ratio is not finite.
double bb_step(const VectorXd& d, const VectorXd& y, double fallback);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double step = 0.0;      // applied step in design units (0 on the final record)
  double raw_step = 0.0;  // gamma multiplying the gradient
  double grad_norm = 0.0;
};

struct OptimizerState {
  int iteration = 0;
  VectorXd design;
  VectorXd previous_design;
  VectorXd previous_gradient;
  std::vector<double> cost_history;
};

struct MinimizeResult {
  VectorXd design;
  std::vector<double> cost_history;
  std::vector<IterationRecord> log;
  std::vector<std::pair<int, VectorXd>> snapshots;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Returns the cost at x and writes the gradient into *grad.
using Objective = std::function<double(const VectorXd& x, VectorXd* grad)>;

/// Steepest descent with Barzilai-Borwein or constant steps.
MinimizeResult minimize(const Objective& objective, VectorXd x0, const OptimizerConfig& config);

struct ReconstructionResult {
  NodalField temperature;
  NodalField control;
  std::vector<double> cost_history;
  std::vector<IterationRecord> log;
  std::vector<std::pair<int, NodalField>> snapshots;  // (iteration, dT)
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  double wall_time = 0.0;  // seconds
};

/// Thrown when the loop stops abnormally; carries the state at that point.
class ReconstructionAborted : public OptimizationError {
public:
  ReconstructionAborted(const std::string& what, OptimizerState state)
      : OptimizationError(what), state_(std::move(state)) {}
  const OptimizerState& state() const { return state_; }

private:
  OptimizerState state_;
};

ReconstructionResult reconstruct(const ThermalProblem& problem, const DesignMap& design,
                                 const OptimizerConfig& config);

}  // namespace thermoid
