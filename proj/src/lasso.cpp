#include "rpf/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "rpf/error.hpp"

namespace rpf {

namespace {

using Index = Eigen::Index;

Error lasso_error(ErrorKind kind, const std::string& message) {
  return Error("lasso", kind, message);
}

void validate(const LassoProblem& problem) {
  if (problem.E.size() != problem.phi.rows()) {
    throw lasso_error(ErrorKind::Domain, "E has length " + std::to_string(problem.E.size()) +
                                             " but the design has " +
                                             std::to_string(problem.phi.rows()) + " rows");
  }
  if (problem.phi.rows() == 0 || problem.phi.cols() == 0) {
    throw lasso_error(ErrorKind::Domain, "empty design");
  }
  if (!(problem.r > 0.0) || !std::isfinite(problem.r)) {
    throw lasso_error(ErrorKind::Domain, "regularization parameter r must be positive");
  }
}

// Largest violation of the optimality conditions, from the gradient
// g = (1/n) Phi^T (E - Phi S).
double kkt_violation(const Eigen::VectorXd& g, const Eigen::VectorXd& s, double r) {
  double worst = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    const double v = s(i) != 0.0 ? std::abs(g(i) - std::copysign(r, s(i)))
                                 : std::max(0.0, std::abs(g(i)) - r);
    worst = std::max(worst, v);
  }
  return worst;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& u) {
  const double n = static_cast<double>(problem.phi.rows());
  return (problem.E - problem.phi * u).squaredNorm() / n + 2.0 * problem.r * u.lpNorm<1>();
}

double lambda_max(const Eigen::VectorXd& E, const Eigen::MatrixXd& phi) {
  if (E.size() != phi.rows()) throw lasso_error(ErrorKind::Domain, "E and design size mismatch");
  return (phi.transpose() * E).cwiseAbs().maxCoeff() / static_cast<double>(phi.rows());
}

LassoSolution solve(const LassoProblem& problem, const LassoOptions& options,
                    const Eigen::VectorXd& warm_start) {
  validate(problem);
  if (!(options.tol > 0.0)) throw lasso_error(ErrorKind::Domain, "tolerance must be positive");
  const auto& phi = problem.phi;
  const Index p = phi.cols();
  const double n = static_cast<double>(phi.rows());
  const double r = problem.r;

  LassoSolution sol;
  sol.r = r;
  sol.s_hat = Eigen::VectorXd::Zero(p);
  const bool warm = warm_start.size() == p && !warm_start.isZero(0.0);
  if (warm_start.size() != 0 && warm_start.size() != p) {
    throw lasso_error(ErrorKind::Domain, "warm start has the wrong length");
  }

  // Zero is optimal above r_max; return it exactly.
  if (!warm && r >= lambda_max(problem.E, phi)) {
    const Eigen::VectorXd g = phi.transpose() * problem.E / n;
    sol.objective = lasso_objective(problem, sol.s_hat);
    sol.kkt_residual = kkt_violation(g, sol.s_hat, r);
    sol.converged = true;
    if (options.record_trace) sol.trace.push_back(sol.objective);
    return sol;
  }
  if (warm) sol.s_hat = warm_start;

  // curvature_i = ||Phi_i||^2 / n; the coordinate minimizer is
  // soft((1/n) Phi_i^T r_{-i}, r) / curvature_i.
  Eigen::VectorXd curvature = phi.colwise().squaredNorm().transpose() / n;
  Eigen::VectorXd residual = problem.E - phi * sol.s_hat;
  const double kkt_target = options.tol * std::min(1.0, r);

  for (std::size_t sweep = 0; sweep < options.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index i = 0; i < p; ++i) {
      const double old = sol.s_hat(i);
      double updated = 0.0;
      if (curvature(i) > 0.0) {
        const double z = phi.col(i).dot(residual) / n + curvature(i) * old;
        updated = soft_threshold(z, r) / curvature(i);
      }
      const double delta = updated - old;
      if (delta != 0.0) {
        residual.noalias() -= delta * phi.col(i);
        sol.s_hat(i) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    sol.iterations = sweep + 1;
    if (options.record_trace) sol.trace.push_back(lasso_objective(problem, sol.s_hat));

    const double scale = std::max(1.0, sol.s_hat.lpNorm<Eigen::Infinity>());
    if (max_change <= options.tol * scale) {
      // Refresh the running residual before certifying.
      residual = problem.E - phi * sol.s_hat;
      const Eigen::VectorXd g = phi.transpose() * residual / n;
      sol.kkt_residual = kkt_violation(g, sol.s_hat, r);
      if (sol.kkt_residual <= kkt_target) {
        sol.converged = true;
        break;
      }
    }
  }
  if (!sol.converged) {
    const Eigen::VectorXd g = phi.transpose() * (problem.E - phi * sol.s_hat) / n;
    sol.kkt_residual = kkt_violation(g, sol.s_hat, r);
  }
  sol.objective = lasso_objective(problem, sol.s_hat);
  return sol;
}

std::vector<double> default_r_grid(double r_max, std::size_t count, double ratio) {
  if (!(r_max > 0.0)) throw lasso_error(ErrorKind::Numerical, "r_max is zero: E is orthogonal to every column");
  if (count == 0 || !(ratio > 0.0 && ratio < 1.0)) {
    throw lasso_error(ErrorKind::Domain, "grid needs count >= 1 and ratio in (0, 1)");
  }
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    grid[k] = r_max * std::pow(ratio, frac);
  }
  return grid;
}

std::vector<LassoSolution> path(const Eigen::VectorXd& E, const Eigen::MatrixXd& phi,
                                const std::vector<double>& r_grid, const LassoOptions& options) {
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    if (!(r_grid[k] > 0.0)) throw lasso_error(ErrorKind::Domain, "grid values must be positive");
    if (k > 0 && !(r_grid[k] < r_grid[k - 1])) {
      throw lasso_error(ErrorKind::Domain, "grid must be strictly decreasing");
    }
  }
  std::vector<LassoSolution> out;
  out.reserve(r_grid.size());
  LassoProblem problem{E, phi, 0.0};
  Eigen::VectorXd warm;
  for (double r : r_grid) {
    problem.r = r;
    out.push_back(solve(problem, options, warm));
    warm = out.back().s_hat;
  }
  return out;
}

KktReport kkt_check(const LassoProblem& problem, const Eigen::VectorXd& s_hat, double tol) {
  validate(problem);
  if (s_hat.size() != problem.phi.cols()) throw lasso_error(ErrorKind::Domain, "solution has the wrong length");
  const double n = static_cast<double>(problem.phi.rows());
  const Eigen::VectorXd g = problem.phi.transpose() * (problem.E - problem.phi * s_hat) / n;
  KktReport rep;
  rep.dantzig_value = g.lpNorm<Eigen::Infinity>();
  rep.dantzig_ok = rep.dantzig_value <= problem.r + tol;
  double support_worst = 0.0;
  for (Index i = 0; i < s_hat.size(); ++i) {
    if (s_hat(i) != 0.0) {
      support_worst = std::max(support_worst, std::abs(g(i) - std::copysign(problem.r, s_hat(i))));
    }
  }
  rep.support_stationarity_ok = support_worst <= tol;
  rep.max_violation = std::max(support_worst, std::max(0.0, rep.dantzig_value - problem.r));
  return rep;
}

void write_path_csv(std::ostream& out, const std::vector<LassoSolution>& path, bool full) {
  out << (full ? "r,i,s_hat_i\n" : "r,index,value\n");
  for (const auto& sol : path) {
    const std::string r = format_double(sol.r);
    for (Index i = 0; i < sol.s_hat.size(); ++i) {
      if (!full && sol.s_hat(i) == 0.0) continue;
      out << r << ',' << i + 1 << ',' << format_double(sol.s_hat(i)) << '\n';
    }
  }
}

}  // namespace rpf
