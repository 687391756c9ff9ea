#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace rpf {

// Closed-form recovery guarantees for the thresholded LASSO on pick-freeze
// estimates. All logarithms are natural logarithms.

/// Inputs shared by the calculators. Each calculator reads only the fields
/// it needs and throws an Error naming any missing or out-of-range field.
struct BoundParams {
  std::optional<std::uint64_t> p, s, n, N, d;
  std::optional<double> mu, delta, delta_prime, A, sigma, c, C1, C2, C3, e, r;
  // UDP-level inputs (udp_linf_bound).
  std::optional<double> rho, kappa, theta1, theta2, r0;
};

struct BoundReport {
  std::string calculator;
  double r = 0.0;      // penalty the bound is evaluated at
  double r_min = 0.0;  // smallest admissible penalty (an infimum when exclusive)
  double t = 0.0;      // l-infinity error bound
  std::optional<double> alpha;      // failure probability; empty if not probabilistic
  std::optional<std::uint64_t> n_min;
  bool vacuous = false;  // alpha >= 1
  std::map<std::string, double> extras;
};

/// l-infinity bound for i.i.d. Bernoulli(mu) designs, r = A sigma sqrt(mu (1+delta)) sqrt(ln p / n).
/// Needs p, s, n, mu, delta, A, sigma with 0 < delta < (1-mu)/(16 s), A > 2 sqrt 2.
BoundReport bernoulli_bound(const BoundParams& params);

struct BernoulliMinN {
  std::uint64_t from_delta = 0;     // ceil(ln p / (delta^2 mu^2))
  std::uint64_t from_sparsity = 0;  // ceil(256 s^2 ln p / (mu^2 (1-mu)^2))
};

BernoulliMinN bernoulli_min_n(std::uint64_t p, std::uint64_t s, double mu, double delta);

/// l-infinity bound for Rademacher designs, r = A sigma sqrt(ln p / n),
/// delta = 1 / (7 delta' s). Needs p, s, n, delta_prime > 1, A > 2 sqrt 2, sigma.
BoundReport rademacher_bound(const BoundParams& params);

/// 49 delta^2 s^2 with delta = 1 / (7 delta' s). Generic so the identity
/// 49 delta^2 s^2 = 1 / delta'^2 can be checked in exact arithmetic.
template <class T>
T rademacher_concentration_coefficient(const T& delta_prime, const T& s) {
  const T delta = T(1) / (T(7) * delta_prime * s);
  return T(49) * delta * delta * s * s;
}

/// l-infinity bound implied by a UDP(rho, kappa) design with coherence theta1
/// and column norms theta2 on the event (1/n)||Phi^T eps||_inf <= r0.
/// extras["l1_bound"] carries the intermediate l1 bound.
BoundReport udp_linf_bound(double rho, double kappa, double theta1, double theta2, double r,
                           double r0, std::uint64_t n, std::uint64_t s);

/// Exact recovery with Rademacher designs beyond the s^2 barrier.
/// Needs p, s, n, sigma, c > 1, C1, C2, C3; r defaults to r1.
BoundReport tiebreak_bound(const BoundParams& params);

/// Expander-graph designs. Plain mode needs p, n, d, s, A > sqrt 2,
/// sigma (noise level relative to signal), e in (1/p, 1/6); SNR mode fixes
/// e = 1/12 and needs p, n, s, A, sigma, c > 1, C2 (C1 optional).
BoundReport expander_bound(const BoundParams& params, bool snr_mode);

/// Exact recovery with sparse Bernoulli designs, mu = 799 (1+c) ln p / n.
/// Needs p > 7, s, n >= 12982 (1+c) s ln p, sigma, c > 1; r defaults to r1.
BoundReport bernoulli_design_bound(const BoundParams& params);

/// Coherence level max_{k != l} |Psi_kl| <= sqrt(8 (2+c) / (3 C1)) / sqrt(s),
/// holding with probability >= 1 - 2 p^{-c} for Rademacher designs when
/// n >= C1 s ln p and s >= 3 (2+c) / C1.
struct CoherenceLevel {
  double threshold = 0.0;
  double probability = 0.0;
};
CoherenceLevel rademacher_coherence_level(std::uint64_t p, std::uint64_t n, std::uint64_t s,
                                          double c, double C1);

/// Standard normal quantile (Wichura's AS241, relative error ~1e-16).
double normal_quantile(double probability);

/// Cost of p simultaneous one-at-a-time confidence intervals at family
/// confidence `confidence` with Sidak correction.
struct ClassicalCost {
  double per_test_level = 0.0;
  double z = 0.0;
  double interval_width_constant = 0.0;  // 2 z: interval width is this / sqrt(N)
  std::uint64_t N_prime = 0;
  double total_evals = 0.0;  // 2 N' (p + 1)
};
ClassicalCost classical_cost(std::uint64_t p, double target_width, double confidence);

enum class Calculator { Bernoulli, Rademacher, Udp, Tiebreak, Expander, ExpanderSnr, BernoulliDesign };

Calculator parse_calculator(const std::string& name);
std::string calculator_name(Calculator calc);

/// Minimizes t over the free parameters (A together with delta or delta')
/// subject to alpha <= alpha_max: a log grid over delta/delta', golden-section
/// refinement, and bisection on A. Throws with the smallest attainable
/// alpha when no point is feasible.
BoundReport optimize_params(Calculator calc, const BoundParams& fixed, double alpha_max);

}  // namespace rpf
