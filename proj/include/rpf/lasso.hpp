#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

namespace rpf {

/// min_U (1/n) ||E - Phi U||_2^2 + 2 r ||U||_1
struct LassoProblem {
  Eigen::VectorXd E;
  Eigen::MatrixXd phi;
  double r = 0.0;
};

struct LassoOptions {
  double tol = 1e-9;
  std::size_t max_iter = 100'000;  // sweeps
  /// Keep the objective value after every sweep in LassoSolution::trace.
  bool record_trace = false;
};

struct LassoSolution {
  double r = 0.0;
  Eigen::VectorXd s_hat;
  std::size_t iterations = 0;
  double objective = 0.0;
  /// Largest violation of the first-order conditions at s_hat.
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<double> trace;
};

/// Soft-thresholding sign(z) max(|z| - gamma, 0).
inline double soft_threshold(double z, double gamma) noexcept {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& u);

/// ||(1/n) Phi^T E||_inf: the smallest r whose solution is exactly zero.
double lambda_max(const Eigen::VectorXd& E, const Eigen::MatrixXd& phi);

/// Cyclic coordinate descent from `warm_start` (zero when empty).
/// Converged when the largest coordinate move in a sweep is at most
/// tol max(1, ||S||_inf) and the KKT residual is at most tol min(1, r).
/// Hitting max_iter returns converged = false rather than throwing.
LassoSolution solve(const LassoProblem& problem, const LassoOptions& options = {},
                    const Eigen::VectorXd& warm_start = {});

/// `count` log-spaced values from r_max down to r_max * ratio.
std::vector<double> default_r_grid(double r_max, std::size_t count = 60, double ratio = 1e-3);

/// Warm-started solves along a strictly decreasing grid.
std::vector<LassoSolution> path(const Eigen::VectorXd& E, const Eigen::MatrixXd& phi,
                                const std::vector<double>& r_grid,
                                const LassoOptions& options = {});

struct KktReport {
  bool dantzig_ok = false;
  bool support_stationarity_ok = false;
  double dantzig_value = 0.0;  // ||(1/n) Phi^T (E - Phi S)||_inf
  double max_violation = 0.0;
};

/// Dantzig constraint ||g||_inf <= r + tol and |g_i - r sign(S_i)| <= tol on
/// the support, with g = (1/n) Phi^T (E - Phi S).
KktReport kkt_check(const LassoProblem& problem, const Eigen::VectorXd& s_hat, double tol);

/// CSV "r,index,value" with the nonzero coordinates of each path point
/// (1-based index); `full` writes every coordinate instead.
void write_path_csv(std::ostream& out, const std::vector<LassoSolution>& path, bool full = false);

}  // namespace rpf
