#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace rpf {

using IndexSet = std::vector<std::size_t>;  // sorted, 0-based

struct SupportComparison {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  bool exact = false;
};

/// Thresholded-LASSO classification. support, rejected and undecided
/// partition {0, ..., p-1}.
struct RecoveryReport {
  double threshold = 0.0;
  std::optional<double> s_min;
  IndexSet support;    // S_hat_i > t
  IndexSet rejected;   // S_hat_i < s_min - t, and not in the support rule
  IndexSet undecided;  // everything else, including ties at t
  /// Least-squares values on the support (length p, zero elsewhere);
  /// empty until refit.
  Eigen::VectorXd refit_values;
  std::optional<SupportComparison> truth;
};

/// Without s_min only the positive rule applies, so every index outside
/// the support is undecided. An index caught by both rules is undecided.
RecoveryReport threshold_support(const Eigen::VectorXd& s_hat, double t,
                                 std::optional<double> s_min = std::nullopt);

/// argmin_u ||E - Phi_support u||_2 through a Cholesky factorization of the
/// restricted Gram matrix; zeros off the support. Throws a Numerical error
/// with the condition number when the restricted Gram matrix is singular
/// or its condition number exceeds max_condition.
Eigen::VectorXd refit_least_squares(const Eigen::VectorXd& E, const Eigen::MatrixXd& phi,
                                    const IndexSet& support, double max_condition = 1e12);

/// Data-driven threshold k * sigma * sqrt(2 ln p / (theta n)), with sigma the
/// per-row noise scale of E and theta the mean of ||Phi_i||^2 / n. Used when
/// no bound calculator applies at the run's (n, p).
double noise_threshold(double sigma, const Eigen::MatrixXd& phi, double k = 2.0);

SupportComparison compare_support(const IndexSet& recovered, const IndexSet& truth);

/// Indices with nonzero entries.
IndexSet support_of(const Eigen::VectorXd& v);

}  // namespace rpf
