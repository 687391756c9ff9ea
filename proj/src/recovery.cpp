#include "rpf/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <string>

#include "rpf/error.hpp"

namespace rpf {

namespace {

Error recovery_error(ErrorKind kind, const std::string& message) {
  return Error("recovery", kind, message);
}

IndexSet normalized(IndexSet set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

}  // namespace

RecoveryReport threshold_support(const Eigen::VectorXd& s_hat, double t, std::optional<double> s_min) {
  if (!(t >= 0.0)) throw recovery_error(ErrorKind::Domain, "threshold must be non-negative");
  if (s_min && !std::isfinite(*s_min)) throw recovery_error(ErrorKind::Domain, "s_min must be finite");
  RecoveryReport rep;
  rep.threshold = t;
  rep.s_min = s_min;
  for (Eigen::Index i = 0; i < s_hat.size(); ++i) {
    const double v = s_hat(i);
    const bool positive = v > t;
    const bool negative = s_min && v < *s_min - t;
    const auto idx = static_cast<std::size_t>(i);
    if (positive && !negative) rep.support.push_back(idx);
    else if (negative && !positive) rep.rejected.push_back(idx);
    else rep.undecided.push_back(idx);
  }
  return rep;
}

Eigen::VectorXd refit_least_squares(const Eigen::VectorXd& E, const Eigen::MatrixXd& phi,
                                    const IndexSet& support, double max_condition) {
  if (E.size() != phi.rows()) throw recovery_error(ErrorKind::Domain, "E and design size mismatch");
  const IndexSet sup = normalized(support);
  const auto p = static_cast<std::size_t>(phi.cols());
  if (!sup.empty() && sup.back() >= p) throw recovery_error(ErrorKind::Domain, "support index out of range");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(phi.cols());
  if (sup.empty()) return out;
  if (sup.size() > static_cast<std::size_t>(phi.rows())) {
    throw recovery_error(ErrorKind::Numerical, "support of size " + std::to_string(sup.size()) +
                                                   " exceeds the " + std::to_string(phi.rows()) + " rows");
  }

  const auto k = static_cast<Eigen::Index>(sup.size());
  Eigen::MatrixXd sub(phi.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) sub.col(j) = phi.col(static_cast<Eigen::Index>(sup[j]));
  const Eigen::MatrixXd gram = sub.transpose() * sub;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || !(cond <= max_condition)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", cond);
    throw recovery_error(ErrorKind::Numerical,
                         std::string("restricted design is rank deficient (condition number ") + buf + ")");
  }
  const Eigen::VectorXd u = llt.solve(sub.transpose() * E);
  for (Eigen::Index j = 0; j < k; ++j) out(static_cast<Eigen::Index>(sup[j])) = u(j);
  return out;
}

double noise_threshold(double sigma, const Eigen::MatrixXd& phi, double k) {
  if (!(sigma >= 0.0) || !(k >= 0.0)) throw recovery_error(ErrorKind::Domain, "noise scale and multiplier must be non-negative");
  if (phi.rows() == 0 || phi.cols() < 2) throw recovery_error(ErrorKind::Domain, "design needs at least two columns");
  const double n = static_cast<double>(phi.rows());
  const double theta = phi.colwise().squaredNorm().mean() / n;
  if (!(theta > 0.0)) throw recovery_error(ErrorKind::Numerical, "design has only zero columns");
  return k * sigma * std::sqrt(2.0 * std::log(static_cast<double>(phi.cols())) / (theta * n));
}

SupportComparison compare_support(const IndexSet& recovered, const IndexSet& truth) {
  const IndexSet a = normalized(recovered);
  const IndexSet b = normalized(truth);
  IndexSet common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  SupportComparison out;
  out.true_positives = common.size();
  out.false_positives = a.size() - common.size();
  out.false_negatives = b.size() - common.size();
  out.exact = a == b;
  return out;
}

IndexSet support_of(const Eigen::VectorXd& v) {
  IndexSet out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace rpf
