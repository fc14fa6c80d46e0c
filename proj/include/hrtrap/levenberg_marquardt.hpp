#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hrtrap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Residual system r(x) for damped least squares. `retract` maps x + step
/// back onto the feasible manifold (identity by default).
class LeastSquaresProblem {
 public:
  virtual ~LeastSquaresProblem() = default;
  virtual Vec residual(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
  virtual Vec retract(const Vec& x, const Vec& step) const { return x + step; }
};

struct LmOptions {
  int max_iterations = 200;
  /// Initial damping relative to the largest diagonal entry of J^T J.
  double initial_damping = 1e-3;
  /// Stop as soon as |r| <= target_norm.
  double target_norm = 0.0;
  /// Stop when the accepted step is below step_tolerance * (|x| + step_tolerance).
  double step_tolerance = 1e-15;
  double max_damping = 1e20;
};

struct LmResult {
  Vec x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool reached_target = false;
  bool diverged = false;
  /// 0.5 |r|^2 after each accepted step, starting with the initial value.
  std::vector<double> cost_history;
};

/// Levenberg-Marquardt with damping halved on accepted steps and doubled on
/// rejected ones. Steps producing non-finite residuals are rejected.
LmResult levenberg_marquardt(const LeastSquaresProblem& problem, const Vec& x0, const LmOptions& opts);

}  // namespace hrtrap
