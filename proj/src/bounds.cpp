#include "rpf/bounds.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <vector>

#include "rpf/error.hpp"

namespace rpf {

namespace {

Error bounds_error(ErrorKind kind, const std::string& message) {
  return Error("bounds", kind, message);
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class T>
T need(const std::optional<T>& field, const char* name, const char* calculator) {
  if (!field) throw bounds_error(ErrorKind::Config, std::string(calculator) + " needs " + name);
  return *field;
}

double need_pos(const std::optional<double>& field, const char* name, const char* calculator) {
  const double v = need(field, name, calculator);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw bounds_error(ErrorKind::Domain, std::string(calculator) + ": " + name + " must be positive");
  }
  return v;
}

double need_count(const std::optional<std::uint64_t>& field, const char* name, const char* calculator,
                  std::uint64_t minimum = 1) {
  const std::uint64_t v = need(field, name, calculator);
  if (v < minimum) {
    throw bounds_error(ErrorKind::Domain,
                       std::string(calculator) + ": " + name + " must be at least " + std::to_string(minimum));
  }
  return static_cast<double>(v);
}

void set_alpha(BoundReport& rep, double alpha) {
  rep.alpha = alpha;
  rep.vacuous = alpha >= 1.0;
}

std::uint64_t ceil_count(double v) {
  if (!(v > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::ceil(v));
}

// Penalty used when r is omitted: the smallest admissible one.
double chosen_r(const BoundParams& params, double r_min, const char* calculator) {
  if (!params.r) return r_min;
  const double r = need_pos(params.r, "r", calculator);
  if (r < r_min) {
    throw bounds_error(ErrorKind::Domain, std::string(calculator) + ": r = " + fmt_num(r) +
                                              " is below r1 = " + fmt_num(r_min));
  }
  return r;
}

}  // namespace

BoundReport bernoulli_bound(const BoundParams& params) {
  const char* name = "bernoulli";
  const double p = need_count(params.p, "p", name, 2);
  const double s = need_count(params.s, "s", name);
  const double n = need_count(params.n, "n", name);
  const double mu = need(params.mu, "mu", name);
  const double delta = need(params.delta, "delta", name);
  const double A = need(params.A, "A", name);
  const double sigma = need_pos(params.sigma, "sigma", name);
  if (!(mu > 0.0 && mu < 1.0)) throw bounds_error(ErrorKind::Domain, "bernoulli: mu must lie in (0, 1)");
  const double delta_max = (1.0 - mu) / (16.0 * s);
  if (!(delta > 0.0 && delta < delta_max)) {
    throw bounds_error(ErrorKind::Domain,
                       "bernoulli: delta must lie in (0, (1-mu)/(16 s)) = (0, " + fmt_num(delta_max) + ")");
  }
  const double a_floor = 2.0 * std::numbers::sqrt2;
  if (!(A > a_floor)) throw bounds_error(ErrorKind::Domain, "bernoulli: A must exceed 2 sqrt 2");

  const double lnp = std::log(p);
  const double scale = sigma * std::sqrt(mu * (1.0 + delta)) * std::sqrt(lnp / n);
  BoundReport rep;
  rep.calculator = name;
  rep.r = A * scale;
  rep.r_min = a_floor * scale;
  rep.t = (1.5 + 24.0 * (mu + delta) / ((1.0 - mu) / s - 16.0 * delta)) * rep.r / mu;

  const double tail = std::pow(p, 1.0 - A * A / 8.0);
  const double expo = -2.0 * n * delta * delta * mu * mu;
  set_alpha(rep, 1.0 - (1.0 - tail) * (1.0 - 2.0 * std::exp(expo + lnp)) + std::exp(expo + 2.0 * lnp));

  const BernoulliMinN nm = bernoulli_min_n(*params.p, *params.s, mu, delta);
  rep.n_min = nm.from_delta;
  rep.extras["n_min_sparsity"] = static_cast<double>(nm.from_sparsity);
  rep.extras["delta_max"] = delta_max;
  return rep;
}

BernoulliMinN bernoulli_min_n(std::uint64_t p, std::uint64_t s, double mu, double delta) {
  if (!(mu > 0.0 && mu < 1.0)) throw bounds_error(ErrorKind::Domain, "bernoulli_min_n: mu must lie in (0, 1)");
  if (!(delta > 0.0)) throw bounds_error(ErrorKind::Domain, "bernoulli_min_n: delta must be positive");
  const double lnp = std::log(static_cast<double>(p));
  const double sd = static_cast<double>(s);
  BernoulliMinN out;
  out.from_delta = ceil_count(lnp / (delta * delta * mu * mu));
  out.from_sparsity = ceil_count(256.0 * sd * sd * lnp / (mu * mu * (1.0 - mu) * (1.0 - mu)));
  return out;
}

BoundReport rademacher_bound(const BoundParams& params) {
  const char* name = "rademacher";
  const double p = need_count(params.p, "p", name, 2);
  const double s = need_count(params.s, "s", name);
  const double n = need_count(params.n, "n", name);
  const double dp = need(params.delta_prime, "delta_prime", name);
  const double A = need(params.A, "A", name);
  const double sigma = need_pos(params.sigma, "sigma", name);
  if (!(dp > 1.0) || !std::isfinite(dp)) throw bounds_error(ErrorKind::Domain, "rademacher: delta_prime must exceed 1");
  const double a_floor = 2.0 * std::numbers::sqrt2;
  if (!(A > a_floor)) throw bounds_error(ErrorKind::Domain, "rademacher: A must exceed 2 sqrt 2");

  const double lnp = std::log(p);
  const double scale = sigma * std::sqrt(lnp / n);
  BoundReport rep;
  rep.calculator = name;
  rep.r = A * scale;
  rep.r_min = a_floor * scale;
  rep.t = 1.5 * (1.0 + 16.0 / (5.0 * (dp - 1.0))) * rep.r;

  const double coef = rademacher_concentration_coefficient(dp, s);
  const double tail = std::pow(p, 1.0 - A * A / 8.0);
  set_alpha(rep, 1.0 - (1.0 - tail) * (1.0 - std::exp(-n * coef / 2.0 + 2.0 * lnp)));

  // Smallest integer n with 4 delta'^2 ln p < n.
  rep.n_min = static_cast<std::uint64_t>(std::floor(4.0 * dp * dp * lnp)) + 1;
  rep.extras["delta"] = 1.0 / (7.0 * dp * s);
  return rep;
}

BoundReport udp_linf_bound(double rho, double kappa, double theta1, double theta2, double r,
                           double r0, std::uint64_t n, std::uint64_t s) {
  if (!(kappa > 0.0 && kappa < 0.5)) throw bounds_error(ErrorKind::Domain, "udp: kappa must lie in (0, 1/2)");
  if (!(theta2 > 0.0)) throw bounds_error(ErrorKind::Domain, "udp: theta2 must be positive");
  if (!(rho > 0.0)) throw bounds_error(ErrorKind::Domain, "udp: rho must be positive");
  if (!(theta1 >= 0.0) || !(r0 >= 0.0)) {
    throw bounds_error(ErrorKind::Domain, "udp: theta1 and r0 must be non-negative");
  }
  const double r_min = r0 / (1.0 - 2.0 * kappa);
  if (!(r > r_min) || !(r > 0.0)) {
    throw bounds_error(ErrorKind::Domain, "udp: r must exceed r0/(1-2 kappa) = " + fmt_num(r_min));
  }
  const double nd = static_cast<double>(n);
  const double sd = static_cast<double>(s);
  const double gap = 1.0 - r0 / r - 2.0 * kappa;
  BoundReport rep;
  rep.calculator = "udp";
  rep.r = r;
  rep.r_min = r_min;
  rep.t = (1.0 + r0 / r + 2.0 * nd * theta1 * rho * rho * sd / gap) * r / theta2;
  rep.extras["l1_bound"] = 2.0 * r * nd * rho * rho * sd / gap;
  return rep;
}

BoundReport tiebreak_bound(const BoundParams& params) {
  const char* name = "tiebreak";
  const double p = need_count(params.p, "p", name, 2);
  const double s = need_count(params.s, "s", name);
  const double n = need_count(params.n, "n", name);
  const double sigma = need_pos(params.sigma, "sigma", name);
  const double c = need(params.c, "c", name);
  const double C1 = need_pos(params.C1, "C1", name);
  const double C2 = need_pos(params.C2, "C2", name);
  const double C3 = need_pos(params.C3, "C3", name);
  if (!(c > 1.0)) throw bounds_error(ErrorKind::Domain, "tiebreak: c must exceed 1");
  const double s_floor = 6.0 * (2.0 + c) / C1;
  if (s < s_floor) throw bounds_error(ErrorKind::Domain, "tiebreak: s must be at least 6 (2+c)/C1 = " + fmt_num(s_floor));
  const double lnp = std::log(p);
  const double n0 = C1 * s * std::log(C2 * p);
  if (n < n0) throw bounds_error(ErrorKind::Domain, "tiebreak: n must be at least C1 s ln(C2 p) = " + fmt_num(n0));

  BoundReport rep;
  rep.calculator = name;
  rep.r_min = 45.0 * sigma * std::sqrt(c * lnp / n);
  rep.r = chosen_r(params, rep.r_min, name);
  const double c1p = 35869.0 * std::sqrt(c * (2.0 + c)) / C1;
  const double c2p = 46.31 * std::sqrt(c) / std::sqrt(C1);
  rep.t = sigma * std::sqrt(n0 / n) * (rep.r / rep.r_min) * (c1p + c2p / std::sqrt(s)) * std::sqrt(s);
  set_alpha(rep, 3.0 * std::pow(p, -c) + 2.0 * std::exp(-C3 * n));
  rep.n_min = ceil_count(n0);
  rep.extras["n0"] = n0;
  rep.extras["r1"] = rep.r_min;
  rep.extras["C1_prime"] = c1p;
  rep.extras["C2_prime"] = c2p;
  return rep;
}

BoundReport expander_bound(const BoundParams& params, bool snr_mode) {
  const char* name = snr_mode ? "expander_snr" : "expander";
  const double p = need_count(params.p, "p", name, 2);
  const double s = need_count(params.s, "s", name);
  const double n = need_count(params.n, "n", name);
  const double A = need(params.A, "A", name);
  const double sigma = need_pos(params.sigma, "sigma", name);
  const double lnp = std::log(p);
  BoundReport rep;
  rep.calculator = name;

  if (!snr_mode) {
    const double e = need(params.e, "e", name);
    const double d = need_count(params.d, "d", name);
    if (!(e > 1.0 / p && e < 1.0 / 6.0)) throw bounds_error(ErrorKind::Domain, "expander: e must lie in (1/p, 1/6)");
    if (!(A > std::numbers::sqrt2)) throw bounds_error(ErrorKind::Domain, "expander: A must exceed sqrt 2");
    if (!(d < p)) throw bounds_error(ErrorKind::Domain, "expander: d must be smaller than p");
    const double ratio = (1.0 - 2.0 * e) / (1.0 - 6.0 * e);
    const double bracket = 1.0 + 2.0 * ratio + 16.0 * e * s / ((1.0 - 6.0 * e) * (1.0 - 6.0 * e));
    rep.r_min = 2.0 * A * sigma * ratio * d * std::sqrt(lnp) / std::pow(n, 1.5);
    rep.r = chosen_r(params, rep.r_min, name);
    rep.t = A * sigma * std::sqrt(lnp / n) * bracket * (rep.r / rep.r_min);
    set_alpha(rep, std::pow(p, 1.0 - A * A / 2.0));
    rep.extras["ratio"] = ratio;
    rep.extras["bracket"] = bracket;
    rep.extras["r1"] = rep.r_min;
    return rep;
  }

  const double c = need(params.c, "c", name);
  const double C2 = need_pos(params.C2, "C2", name);
  if (!(c > 1.0)) throw bounds_error(ErrorKind::Domain, "expander_snr: c must exceed 1");
  const double a_floor = std::sqrt(params.C1 ? std::min(need_pos(params.C1, "C1", name), 2.0) : 2.0);
  if (!(A > a_floor)) throw bounds_error(ErrorKind::Domain, "expander_snr: A must exceed " + fmt_num(a_floor));
  if (p < 4.0 * s) throw bounds_error(ErrorKind::Domain, "expander_snr: p must be at least 4 s");
  const double n0 = C2 * s * lnp;
  if (n < n0) throw bounds_error(ErrorKind::Domain, "expander_snr: n must be at least C2 s ln p = " + fmt_num(n0));
  const double e = 1.0 / 12.0;
  rep.r_min = 3.34 * A * sigma * std::pow(lnp / n, 1.5);
  rep.r = chosen_r(params, rep.r_min, name);
  rep.t = 51.7 * A / std::sqrt(C2) * sigma * (rep.r / rep.r_min) * std::sqrt(n0 / n) * std::sqrt(s);
  set_alpha(rep, std::pow(p, 1.0 - A * A / 2.0) + 2.0 * s * std::pow(p, -c));
  rep.n_min = ceil_count(n0);
  rep.extras["e"] = e;
  rep.extras["ratio"] = (1.0 - 2.0 * e) / (1.0 - 6.0 * e);
  rep.extras["n0"] = n0;
  rep.extras["r1"] = rep.r_min;
  rep.extras["d"] = std::ceil(C2 * lnp);
  return rep;
}

BoundReport bernoulli_design_bound(const BoundParams& params) {
  const char* name = "bernoulli_design";
  const double p = need_count(params.p, "p", name, 8);
  const double s = need_count(params.s, "s", name);
  const double n = need_count(params.n, "n", name);
  const double sigma = need_pos(params.sigma, "sigma", name);
  const double c = need(params.c, "c", name);
  if (!(c > 1.0)) throw bounds_error(ErrorKind::Domain, "bernoulli_design: c must exceed 1");
  const double lnp = std::log(p);
  const double n_floor = 12982.0 * (1.0 + c) * s * lnp;
  if (n < n_floor) {
    throw bounds_error(ErrorKind::Domain, "bernoulli_design: n must be at least 12982 (1+c) s ln p = " + fmt_num(n_floor));
  }
  BoundReport rep;
  rep.calculator = name;
  rep.r_min = 9692.0 * sigma * (1.0 + c) * lnp / n;
  rep.r = chosen_r(params, rep.r_min, name);
  rep.t = 775.36 * (rep.r / rep.r_min) * sigma * s;
  set_alpha(rep, 3.0 * std::pow(p, 1.0 - c));
  rep.n_min = ceil_count(n_floor);
  rep.extras["mu"] = 799.0 * (1.0 + c) * lnp / n;
  rep.extras["r1"] = rep.r_min;
  rep.extras["r0"] = 6.0 * sigma * std::sqrt(46.0 * c * (1.0 + c)) * lnp / n;
  return rep;
}

CoherenceLevel rademacher_coherence_level(std::uint64_t p, std::uint64_t n, std::uint64_t s,
                                          double c, double C1) {
  if (p < 2 || s == 0) throw bounds_error(ErrorKind::Domain, "coherence: need p >= 2 and s >= 1");
  if (!(c > 0.0) || !(C1 > 0.0)) throw bounds_error(ErrorKind::Domain, "coherence: c and C1 must be positive");
  const double sd = static_cast<double>(s);
  const double lnp = std::log(static_cast<double>(p));
  if (static_cast<double>(n) < C1 * sd * lnp) {
    throw bounds_error(ErrorKind::Domain, "coherence: n must be at least C1 s ln p = " + fmt_num(C1 * sd * lnp));
  }
  if (sd < 3.0 * (2.0 + c) / C1) {
    throw bounds_error(ErrorKind::Domain, "coherence: s must be at least 3 (2+c)/C1 = " + fmt_num(3.0 * (2.0 + c) / C1));
  }
  return {std::sqrt(8.0 * (2.0 + c) / (3.0 * C1)) / std::sqrt(sd),
          1.0 - 2.0 * std::pow(static_cast<double>(p), -c)};
}

double normal_quantile(double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    if (probability == 0.0) return -std::numeric_limits<double>::infinity();
    if (probability == 1.0) return std::numeric_limits<double>::infinity();
    throw bounds_error(ErrorKind::Domain, "normal_quantile: probability must lie in [0, 1]");
  }
  auto poly = [](const std::array<double, 8>& k, double x) {
    double acc = k[7];
    for (int i = 6; i >= 0; --i) acc = acc * x + k[static_cast<std::size_t>(i)];
    return acc;
  };
  static constexpr std::array<double, 8> a{3.387132872796366608,  133.14166789178437745,
                                           1971.5909503065514427, 13731.693765509461125,
                                           45921.953931549871457, 67265.770927008700853,
                                           33430.575583588128105, 2509.0809287301226727};
  static constexpr std::array<double, 8> b{1.0,                   42.313330701600911252,
                                           687.1870074920579083,  5394.1960214247511077,
                                           21213.794301586595867, 39307.89580009271061,
                                           28729.085735721942674, 5226.495278852545925};
  static constexpr std::array<double, 8> c{1.42343711074968357734,  4.6303378461565452959,
                                           5.7694972214606914055,   3.64784832476320460504,
                                           1.27045825245236838258,  0.24178072517745061177,
                                           0.0227238449892691845833, 7.7454501427834140764e-4};
  static constexpr std::array<double, 8> d{1.0,                     2.05319162663775882187,
                                           1.6763848301838038494,   0.68976733498510000455,
                                           0.14810397642748007459,  0.0151986665636164571966,
                                           5.475938084995344946e-4, 1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e{6.6579046435011037772,   5.4637849111641143699,
                                           1.7848265399172913358,   0.29656057182850489123,
                                           0.026532189526576123093, 0.0012426609473880784386,
                                           2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f{1.0,                      0.59983220655588793769,
                                           0.13692988092273580531,   0.0148753612908506148525,
                                           7.868691311456132591e-4,  1.8463183175100546818e-5,
                                           1.4215117583164458887e-7, 2.04426310338993978564e-15};

  const double q = probability - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = q < 0.0 ? probability : 1.0 - probability;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    value = poly(e, r) / poly(f, r);
  }
  return q < 0.0 ? -value : value;
}

ClassicalCost classical_cost(std::uint64_t p, double target_width, double confidence) {
  if (p == 0) throw bounds_error(ErrorKind::Domain, "classical_cost: p must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw bounds_error(ErrorKind::Domain, "classical_cost: confidence must lie in (0, 1)");
  }
  if (!(target_width > 0.0)) throw bounds_error(ErrorKind::Domain, "classical_cost: target width must be positive");
  const double pd = static_cast<double>(p);
  ClassicalCost out;
  // 1 - confidence^{1/p} without cancellation.
  out.per_test_level = -std::expm1(std::log(confidence) / pd);
  // Upper quantile at level/2, taken from the lower tail for accuracy.
  out.z = -normal_quantile(out.per_test_level / 2.0);
  out.interval_width_constant = 2.0 * out.z;
  const double ratio = out.interval_width_constant / target_width;
  out.N_prime = std::max<std::uint64_t>(1, ceil_count(ratio * ratio));
  out.total_evals = 2.0 * static_cast<double>(out.N_prime) * (pd + 1.0);
  return out;
}

Calculator parse_calculator(const std::string& name) {
  if (name == "bernoulli") return Calculator::Bernoulli;
  if (name == "rademacher") return Calculator::Rademacher;
  if (name == "udp") return Calculator::Udp;
  if (name == "tiebreak") return Calculator::Tiebreak;
  if (name == "expander") return Calculator::Expander;
  if (name == "expander_snr") return Calculator::ExpanderSnr;
  if (name == "bernoulli_design") return Calculator::BernoulliDesign;
  throw bounds_error(ErrorKind::Config,
                     "unknown calculator '" + name +
                         "' (bernoulli, rademacher, udp, tiebreak, expander, expander_snr, bernoulli_design)");
}

std::string calculator_name(Calculator calc) {
  switch (calc) {
    case Calculator::Bernoulli: return "bernoulli";
    case Calculator::Rademacher: return "rademacher";
    case Calculator::Udp: return "udp";
    case Calculator::Tiebreak: return "tiebreak";
    case Calculator::Expander: return "expander";
    case Calculator::ExpanderSnr: return "expander_snr";
    case Calculator::BernoulliDesign: return "bernoulli_design";
  }
  return "unknown";
}

namespace {

// One point of the outer search: the free parameter u (log(delta'-1) for
// Rademacher, logit(delta/delta_max) for Bernoulli) and the best report at
// that u.
struct Probe {
  bool feasible = false;
  double t = std::numeric_limits<double>::infinity();
  double alpha_floor = std::numeric_limits<double>::infinity();  // alpha at the largest A tried
  double A = 0.0;
  BoundReport report;
};

class Search {
 public:
  Search(Calculator calc, const BoundParams& fixed, double alpha_max)
      : calc_(calc), fixed_(fixed), alpha_max_(alpha_max) {
    if (calc_ == Calculator::Bernoulli) {
      const double mu = need(fixed.mu, "mu", "bernoulli");
      const double s = need_count(fixed.s, "s", "bernoulli");
      if (!(mu > 0.0 && mu < 1.0)) throw bounds_error(ErrorKind::Domain, "bernoulli: mu must lie in (0, 1)");
      delta_max_ = (1.0 - mu) / (16.0 * s);
    }
  }

  double lo() const { return calc_ == Calculator::Rademacher ? std::log(1e-3) : -14.0; }
  double hi() const { return calc_ == Calculator::Rademacher ? std::log(1e3) : 14.0; }

  BoundParams at(double u, double A) const {
    BoundParams q = fixed_;
    q.A = A;
    if (calc_ == Calculator::Rademacher) {
      q.delta_prime = 1.0 + std::exp(u);
    } else {
      q.delta = delta_max_ / (1.0 + std::exp(-u));
    }
    return q;
  }

  BoundReport eval(double u, double A) const {
    const BoundParams q = at(u, A);
    return calc_ == Calculator::Rademacher ? rademacher_bound(q) : bernoulli_bound(q);
  }

  // Smallest A meeting alpha <= alpha_max by bisection; alpha falls with A
  // while t grows with it.
  Probe probe(double u) const {
    static constexpr double kAMax = 1e3;
    const double a_floor = 2.0 * std::numbers::sqrt2;
    Probe out;
    const BoundReport top = eval(u, kAMax);
    out.alpha_floor = *top.alpha;
    if (!(*top.alpha <= alpha_max_)) return out;
    double lo = a_floor;
    double hi = kAMax;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (*eval(u, mid).alpha <= alpha_max_) hi = mid;
      else lo = mid;
    }
    out.feasible = true;
    out.A = hi;
    out.report = eval(u, hi);
    out.t = out.report.t;
    return out;
  }

  std::string free_name() const { return calc_ == Calculator::Rademacher ? "delta_prime" : "delta"; }
  double free_value(double u) const {
    return calc_ == Calculator::Rademacher ? 1.0 + std::exp(u) : delta_max_ / (1.0 + std::exp(-u));
  }

 private:
  Calculator calc_;
  BoundParams fixed_;
  double alpha_max_;
  double delta_max_ = 0.0;
};

}  // namespace

BoundReport optimize_params(Calculator calc, const BoundParams& fixed, double alpha_max) {
  if (calc != Calculator::Bernoulli && calc != Calculator::Rademacher) {
    throw bounds_error(ErrorKind::Config, "optimize_params supports the bernoulli and rademacher calculators");
  }
  if (!(alpha_max > 0.0 && alpha_max < 1.0)) {
    throw bounds_error(ErrorKind::Domain, "optimize_params: alpha_max must lie in (0, 1)");
  }
  const Search search(calc, fixed, alpha_max);

  constexpr int kGrid = 241;
  std::vector<double> us(kGrid);
  std::vector<Probe> probes(kGrid);
  int best = -1;
  int nearest = 0;
  for (int k = 0; k < kGrid; ++k) {
    us[k] = search.lo() + (search.hi() - search.lo()) * k / (kGrid - 1);
    probes[k] = search.probe(us[k]);
    if (probes[k].alpha_floor < probes[nearest].alpha_floor) nearest = k;
    if (probes[k].feasible && (best < 0 || probes[k].t < probes[best].t)) best = k;
  }
  if (best < 0) {
    throw bounds_error(ErrorKind::Numerical,
                       "optimize_params: no parameters reach alpha <= " + fmt_num(alpha_max) +
                           "; the smallest alpha found is " + fmt_num(probes[nearest].alpha_floor) + " at " +
                           search.free_name() + " = " + fmt_num(search.free_value(us[nearest])) +
                           " (increase n)");
  }

  // Golden-section refinement between the neighbours of the best grid point.
  double a = us[std::max(best - 1, 0)];
  double b = us[std::min(best + 1, kGrid - 1)];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  Probe p1 = search.probe(x1);
  Probe p2 = search.probe(x2);
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    if (p1.t <= p2.t) {
      b = x2;
      x2 = x1;
      p2 = p1;
      x1 = b - g * (b - a);
      p1 = search.probe(x1);
    } else {
      a = x1;
      x1 = x2;
      p1 = p2;
      x2 = a + g * (b - a);
      p2 = search.probe(x2);
    }
  }
  double u_best = us[best];
  Probe chosen = probes[best];
  if (p1.feasible && p1.t < chosen.t) {
    chosen = p1;
    u_best = x1;
  }
  if (p2.feasible && p2.t < chosen.t) {
    chosen = p2;
    u_best = x2;
  }
  BoundReport rep = chosen.report;
  rep.extras["A"] = chosen.A;
  rep.extras[search.free_name()] = search.free_value(u_best);
  return rep;
}

}  // namespace rpf
