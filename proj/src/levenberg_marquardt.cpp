#include "hrtrap/levenberg_marquardt.hpp"

#include <cmath>
#include <limits>

namespace hrtrap {

LmResult levenberg_marquardt(const LeastSquaresProblem& problem, const Vec& x0, const LmOptions& opts) {
  LmResult out;
  out.x = x0;
  Vec r = problem.residual(out.x);
  if (!r.allFinite()) {
    out.diverged = true;
    out.residual_norm = std::numeric_limits<double>::infinity();
    return out;
  }
  double cost = 0.5 * r.squaredNorm();
  out.cost_history.push_back(cost);
  out.residual_norm = r.norm();
  if (out.residual_norm <= opts.target_norm) {
    out.reached_target = true;
    return out;
  }

  Mat jac = problem.jacobian(out.x);
  Mat jtj = jac.transpose() * jac;
  Vec grad = jac.transpose() * r;
  double mu = opts.initial_damping * std::max(jtj.diagonal().maxCoeff(), 1e-300);

  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it + 1;
    Mat lhs = jtj;
    lhs.diagonal().array() += mu;
    const Vec step = lhs.ldlt().solve(-grad);
    if (!step.allFinite()) {
      out.diverged = true;
      break;
    }
    const Vec candidate = problem.retract(out.x, step);
    const Vec r_new = problem.residual(candidate);
    const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm() : std::numeric_limits<double>::infinity();

    if (cost_new < cost) {
      const double moved = (candidate - out.x).norm();
      out.x = candidate;
      r = r_new;
      cost = cost_new;
      out.cost_history.push_back(cost);
      out.residual_norm = r.norm();
      mu *= 0.5;
      if (out.residual_norm <= opts.target_norm) {
        out.reached_target = true;
        break;
      }
      if (moved <= opts.step_tolerance * (out.x.norm() + opts.step_tolerance)) break;
      jac = problem.jacobian(out.x);
      jtj = jac.transpose() * jac;
      grad = jac.transpose() * r;
    } else {
      mu *= 2.0;
      if (mu > opts.max_damping) break;
    }
  }
  return out;
}

}  // namespace hrtrap
