#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/rational.hpp>
#include <cmath>
#include <numbers>

#include "rpf/bounds.hpp"
#include "rpf/error.hpp"

using namespace rpf;

namespace {

BoundParams rademacher_example() {
  BoundParams b;
  b.p = 30000;
  b.s = 3;
  b.n = 100;
  b.sigma = 1e-3;
  b.A = 3.3;
  b.delta_prime = 1.35;
  return b;
}

BoundParams bernoulli_example() {
  BoundParams b;
  b.p = 300;
  b.s = 3;
  b.mu = 0.5;
  b.delta = 0.005;
  b.A = 3.0;
  b.sigma = 1.0;
  b.n = 300000;
  return b;
}

BoundParams tiebreak_example() {
  BoundParams b;
  b.p = 1000;
  b.s = 24;
  b.n = 5000;
  b.sigma = 0.1;
  b.c = 2.0;
  b.C1 = 1.0;
  b.C2 = 2.0;
  b.C3 = 0.01;
  return b;
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("Bernoulli reference value") {
  const BoundReport r = bernoulli_bound(bernoulli_example());
  // Independent high-precision evaluation.
  CHECK(r.t == doctest::Approx(2.62134467255365869).epsilon(1e-12));
  CHECK(r.r == doctest::Approx(3.0 * std::sqrt(0.5 * 1.005) * std::sqrt(std::log(300.0) / 300000.0)).epsilon(1e-14));
  CHECK(r.r_min < r.r);
  REQUIRE(r.alpha);
  CHECK(r.vacuous == (*r.alpha >= 1.0));
}

TEST_CASE("Bernoulli vacuous below n_min and limits") {
  BoundParams b = bernoulli_example();
  const BoundReport base = bernoulli_bound(b);
  REQUIRE(base.n_min);
  CHECK(*base.n_min == static_cast<std::uint64_t>(std::ceil(std::log(300.0) / (0.005 * 0.005 * 0.25))));
  b.n = *base.n_min / 2;
  CHECK(bernoulli_bound(b).vacuous);
  // Large n with a looser delta makes alpha small.
  b.delta = 0.01;
  b.n = 2000000;
  b.A = 4.0;
  const BoundReport ok = bernoulli_bound(b);
  CHECK_FALSE(ok.vacuous);
  CHECK(*ok.alpha < 0.1);
  // delta -> 0 limit of the prefactor.
  b.delta = 1e-12;
  const BoundReport lim = bernoulli_bound(b);
  CHECK(lim.t == doctest::Approx((1.5 + 24.0 * 0.5 * 3 / 0.5) * lim.r / 0.5).epsilon(1e-9));
}

TEST_CASE("Bernoulli preconditions") {
  BoundParams b = bernoulli_example();
  b.delta = (1.0 - 0.5) / 48.0;
  CHECK_THROWS_AS(bernoulli_bound(b), Error);
  b.delta = 0.0;
  CHECK_THROWS_AS(bernoulli_bound(b), Error);
  b = bernoulli_example();
  b.A = 2.0 * std::numbers::sqrt2;
  CHECK_THROWS_AS(bernoulli_bound(b), Error);
  b = bernoulli_example();
  b.mu.reset();
  try {
    bernoulli_bound(b);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("mu") != std::string::npos);
  }
}

TEST_CASE("Bernoulli minimal sample sizes") {
  const BernoulliMinN m = bernoulli_min_n(300, 3, 0.5, 0.5 / 48.0);
  CHECK(m.from_sparsity == 210265);
  CHECK(std::abs(static_cast<double>(m.from_sparsity) - 210300.0) < 0.001 * 210300.0);
  const BernoulliMinN a = bernoulli_min_n(300, 3, 0.5, 0.004);
  const BernoulliMinN h = bernoulli_min_n(300, 3, 0.5, 0.002);
  CHECK(std::abs(static_cast<double>(h.from_delta) / static_cast<double>(a.from_delta) - 4.0) < 1e-4);
  CHECK(bernoulli_min_n(1, 3, 0.5, 0.01).from_delta == 0);
  CHECK(bernoulli_min_n(1, 3, 0.5, 0.01).from_sparsity == 0);
}

TEST_CASE("Rademacher reference value") {
  const BoundReport r = rademacher_bound(rademacher_example());
  CHECK(r.t == doctest::Approx(0.0161202873983878526).epsilon(1e-12));
  REQUIRE(r.alpha);
  CHECK(*r.alpha == doctest::Approx(0.0252032321857767765).epsilon(1e-10));
  CHECK_FALSE(r.vacuous);
  // Smallest integer above 4 delta'^2 ln p.
  const double edge = 4.0 * 1.35 * 1.35 * std::log(30000.0);
  CHECK(static_cast<double>(*r.n_min) > edge);
  CHECK(static_cast<double>(*r.n_min) - 1.0 <= edge);
}

TEST_CASE("Rademacher limits and preconditions") {
  BoundParams b = rademacher_example();
  b.delta_prime = 1e12;
  const BoundReport far = rademacher_bound(b);
  CHECK(far.t == doctest::Approx(1.5 * far.r).epsilon(1e-10));
  b.delta_prime = 1.0;
  CHECK_THROWS_AS(rademacher_bound(b), Error);
  b = rademacher_example();
  b.A = 2.8;
  CHECK_THROWS_AS(rademacher_bound(b), Error);
  b = rademacher_example();
  b.n = 5;
  CHECK(rademacher_bound(b).vacuous);
}

TEST_CASE("concentration coefficient identity in exact arithmetic") {
  using Q = boost::rational<long long>;
  for (long long num = 11; num <= 40; num += 3) {
    for (long long den = 1; den <= 10; den += 3) {
      if (num <= den) continue;
      const Q dp(num, den);
      for (long long s = 1; s <= 6; ++s) {
        CHECK(rademacher_concentration_coefficient(dp, Q(s)) == Q(1) / (dp * dp));
      }
    }
  }
  CHECK(rademacher_concentration_coefficient(1.35, 3.0) == doctest::Approx(1.0 / (1.35 * 1.35)).epsilon(1e-15));
}

TEST_CASE("monotone in n and s") {
  for (std::uint64_t s : {1u, 2u, 4u}) {
    double prev_r = 1e300, prev_b = 1e300;
    for (std::uint64_t n = 50; n <= 50000; n *= 3) {
      BoundParams r = rademacher_example();
      r.s = s;
      r.n = n;
      const double tr = rademacher_bound(r).t;
      CHECK(tr <= prev_r);
      prev_r = tr;
      BoundParams b = bernoulli_example();
      b.s = s;
      b.delta = 0.002;
      b.n = n;
      const double tb = bernoulli_bound(b).t;
      CHECK(tb <= prev_b);
      prev_b = tb;
    }
  }
  for (std::uint64_t n : {100u, 10000u}) {
    double prev_r = 0.0, prev_b = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      BoundParams r = rademacher_example();
      r.s = s;
      r.n = n;
      const double tr = rademacher_bound(r).t;
      CHECK(tr >= prev_r);
      prev_r = tr;
      BoundParams b = bernoulli_example();
      b.s = s;
      b.delta = 0.001;
      b.n = n;
      const double tb = bernoulli_bound(b).t;
      CHECK(tb >= prev_b);
      prev_b = tb;
    }
  }
}

TEST_CASE("identical inputs give identical outputs") {
  const BoundReport a = rademacher_bound(rademacher_example());
  const BoundReport b = rademacher_bound(rademacher_example());
  CHECK(a.t == b.t);
  CHECK(*a.alpha == *b.alpha);
  CHECK(a.extras == b.extras);
}

TEST_CASE("UDP bound") {
  const BoundReport orth = udp_linf_bound(0.3, 0.2, 0.0, 1.0, 0.7, 0.0, 50, 3);
  CHECK(orth.t == doctest::Approx(0.7).epsilon(1e-15));
  const BoundReport a = udp_linf_bound(0.05, 0.3, 0.01, 0.8, 0.2, 0.0, 100, 4);
  const BoundReport b = udp_linf_bound(0.05, 0.3, 0.01, 0.8, 0.4, 0.0, 100, 4);
  CHECK(b.t == doctest::Approx(2.0 * a.t).epsilon(1e-14));
  CHECK(b.extras.at("l1_bound") == doctest::Approx(2.0 * a.extras.at("l1_bound")).epsilon(1e-14));
  CHECK(a.extras.at("l1_bound") == doctest::Approx(2.0 * 0.2 * 100 * 0.05 * 0.05 * 4 / (1 - 0.6)).epsilon(1e-14));
  CHECK(a.r_min == 0.0);
  CHECK_THROWS_AS(udp_linf_bound(0.05, 0.5, 0.01, 0.8, 0.4, 0.0, 100, 4), Error);
  CHECK_THROWS_AS(udp_linf_bound(0.05, 0.3, 0.01, 0.8, 0.05, 0.04, 100, 4), Error);
  CHECK_THROWS_AS(udp_linf_bound(0.05, 0.3, 0.01, 0.0, 0.4, 0.0, 100, 4), Error);
}

TEST_CASE("UDP constants of the Bernoulli design reproduce its bound") {
  const double c = 2.0, sigma = 1.0;
  const std::uint64_t p = 1000;
  const double L = std::log(static_cast<double>(p));
  for (std::uint64_t s = 1; s <= 5; ++s) {
    BoundParams b;
    b.p = p;
    b.s = s;
    b.c = c;
    b.sigma = sigma;
    const auto n = static_cast<std::uint64_t>(std::ceil(12982.0 * (1 + c) * static_cast<double>(s) * L));
    b.n = n;
    const BoundReport design = bernoulli_design_bound(b);
    const double nd = static_cast<double>(n);
    const double rho = 0.0551 / std::sqrt((1 + c) * L);
    const double theta1 = 879.0 * (1 + c) * L / nd;
    const double theta2 = 759.0 * (1 + c) * L / nd;
    CHECK(2.0 * nd * theta1 * rho * rho == doctest::Approx(5.338).epsilon(1e-3));
    const double r1 = design.r;
    CHECK(r1 / design.extras.at("r0") >= 238.1);
    // Worst case allowed by r1 >= 238.1 r0.
    const BoundReport udp = udp_linf_bound(rho, 0.4529, theta1, theta2, r1, r1 / 238.1, n, s);
    CHECK(udp.t <= design.t);
    CHECK(udp.t >= 0.97 * design.t);
  }
}

TEST_CASE("tiebreak constants") {
  const BoundReport r = tiebreak_bound(tiebreak_example());
  CHECK(r.extras.at("C1_prime") == doctest::Approx(35869.0 * std::sqrt(8.0)).epsilon(1e-12));
  CHECK(r.extras.at("C1_prime") == doctest::Approx(101452.852537521).epsilon(1e-12));
  CHECK(r.extras.at("C2_prime") == doctest::Approx(46.31 * std::sqrt(2.0)).epsilon(1e-12));
  const double n0 = 1.0 * 24 * std::log(2000.0);
  CHECK(r.extras.at("n0") == doctest::Approx(n0).epsilon(1e-14));
  // r = r1: the ratio cancels.
  const double want = 0.1 * std::sqrt(n0 / 5000.0) * (r.extras.at("C1_prime") * std::sqrt(24.0) + r.extras.at("C2_prime"));
  CHECK(r.t == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.r == doctest::Approx(45.0 * 0.1 * std::sqrt(2.0 * std::log(1000.0) / 5000.0)).epsilon(1e-14));
  CHECK(*r.alpha == doctest::Approx(3.0 * std::pow(1000.0, -2.0) + 2.0 * std::exp(-50.0)).epsilon(1e-14));
  // Doubling r doubles the bound.
  BoundParams b = tiebreak_example();
  b.r = 2.0 * r.r;
  CHECK(tiebreak_bound(b).t == doctest::Approx(2.0 * r.t).epsilon(1e-14));
}

TEST_CASE("tiebreak preconditions") {
  BoundParams b = tiebreak_example();
  b.c = 1.0;
  CHECK_THROWS_AS(tiebreak_bound(b), Error);
  b = tiebreak_example();
  b.s = 23;
  CHECK_THROWS_AS(tiebreak_bound(b), Error);
  b = tiebreak_example();
  b.n = 100;
  CHECK_THROWS_AS(tiebreak_bound(b), Error);
  b = tiebreak_example();
  b.r = 1e-6;
  CHECK_THROWS_AS(tiebreak_bound(b), Error);
  b = tiebreak_example();
  b.C3.reset();
  CHECK_THROWS_AS(tiebreak_bound(b), Error);
}

TEST_CASE("expander bounds") {
  BoundParams b;
  b.p = 500;
  b.n = 200;
  b.d = 8;
  b.s = 3;
  b.A = 2.0;
  b.sigma = 0.5;
  b.e = 1.0 / 12.0;
  const BoundReport r = expander_bound(b, false);
  CHECK(r.extras.at("ratio") == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  const double bracket = 1.0 + 10.0 / 3.0 + 16.0 * 3.0 / 12.0 / 0.25;
  CHECK(r.extras.at("bracket") == doctest::Approx(bracket).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(2.0 * 0.5 * std::sqrt(std::log(500.0) / 200.0) * bracket).epsilon(1e-12));
  CHECK(r.r == doctest::Approx(2.0 * 2.0 * 0.5 * (5.0 / 3.0) * 8 * std::sqrt(std::log(500.0)) / std::pow(200.0, 1.5)).epsilon(1e-12));
  CHECK(*r.alpha == doctest::Approx(std::pow(500.0, -1.0)).epsilon(1e-12));
  b.e = 1e-9 + 1.0 / 500.0;
  const BoundReport small = expander_bound(b, false);
  CHECK(small.extras.at("bracket") == doctest::Approx(3.0).epsilon(0.05));
  b.e = 1.0 / 6.0;
  CHECK_THROWS_AS(expander_bound(b, false), Error);
  b.e = 1.0 / 600.0;
  CHECK_THROWS_AS(expander_bound(b, false), Error);
  b.e = 0.1;
  b.A = 1.4;
  CHECK_THROWS_AS(expander_bound(b, false), Error);
}

TEST_CASE("expander SNR mode at r = r1") {
  BoundParams b;
  b.p = 2000;
  b.s = 4;
  b.A = 2.0;
  b.sigma = 0.2;
  b.c = 1.5;
  b.C2 = 3.0;
  const double n0 = 3.0 * 4 * std::log(2000.0);
  b.n = static_cast<std::uint64_t>(std::ceil(4 * n0));
  const BoundReport r = expander_bound(b, true);
  const double nd = static_cast<double>(*b.n);
  CHECK(r.extras.at("ratio") == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(51.7 * 2.0 / std::sqrt(3.0) * 0.2 * std::sqrt(n0 / nd) * 2.0).epsilon(1e-12));
  CHECK(*r.alpha == doctest::Approx(std::pow(2000.0, -1.0) + 8.0 * std::pow(2000.0, -1.5)).epsilon(1e-12));
  b.n = 10;
  CHECK_THROWS_AS(expander_bound(b, true), Error);
}

TEST_CASE("Bernoulli design bound") {
  BoundParams b;
  b.p = 100;
  b.s = 2;
  b.c = 2.0;
  b.sigma = 0.3;
  b.n = static_cast<std::uint64_t>(std::ceil(12982.0 * 3 * 2 * std::log(100.0)));
  const BoundReport r = bernoulli_design_bound(b);
  CHECK(r.t == doctest::Approx(775.36 * 0.3 * 2).epsilon(1e-12));
  CHECK(r.extras.at("mu") == doctest::Approx(799.0 * 3 * std::log(100.0) / static_cast<double>(*b.n)).epsilon(1e-14));
  CHECK(*r.alpha == doctest::Approx(3.0 * std::pow(100.0, -1.0)).epsilon(1e-14));
  b.s = 4;
  b.n = *b.n * 2;
  CHECK(bernoulli_design_bound(b).t == doctest::Approx(2.0 * r.t).epsilon(1e-12));
  b.n = 1000;
  CHECK_THROWS_AS(bernoulli_design_bound(b), Error);
  b.p = 7;
  CHECK_THROWS_AS(bernoulli_design_bound(b), Error);
}

TEST_CASE("coherence level") {
  const CoherenceLevel c = rademacher_coherence_level(200, 100, 6, 1.5, 3.0);
  CHECK(c.threshold == doctest::Approx(std::sqrt(8.0 * 3.5 / 9.0) / std::sqrt(6.0)).epsilon(1e-14));
  CHECK(c.probability == doctest::Approx(1.0 - 2.0 * std::pow(200.0, -1.5)).epsilon(1e-14));
  CHECK_THROWS_AS(rademacher_coherence_level(200, 90, 6, 1.5, 3.0), Error);
  CHECK_THROWS_AS(rademacher_coherence_level(200, 100, 3, 1.5, 3.0), Error);
}

TEST_CASE("normal quantile against Boost") {
  const boost::math::normal_distribution<double> nd;
  double worst = 0.0;
  for (double q : {1e-300, 1e-100, 1e-20, 1e-12, 8.5489e-7, 1e-4, 0.01, 0.025, 0.2, 0.5, 0.7, 0.975, 0.999, 1 - 1e-12}) {
    const double want = boost::math::quantile(nd, q);
    const double got = normal_quantile(q);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  for (int k = 1; k < 1000; ++k) {
    const double q = k / 1000.0;
    worst = std::max(worst, std::abs(normal_quantile(q) - boost::math::quantile(nd, q)));
  }
  CHECK(worst < 1e-13);
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK_THROWS_AS(normal_quantile(1.5), Error);
}

TEST_CASE("classical cost") {
  const ClassicalCost c = classical_cost(30000, 0.03, 0.95);
  CHECK(c.per_test_level == doctest::Approx(1.71e-6).epsilon(5e-3));
  const boost::math::normal_distribution<double> nd;
  const double z = boost::math::quantile(boost::math::complement(nd, c.per_test_level / 2.0));
  CHECK(c.z == doctest::Approx(z).epsilon(1e-13));
  CHECK(c.interval_width_constant == doctest::Approx(9.570023096736785).epsilon(1e-12));
  CHECK(c.N_prime == 101762);
  CHECK(c.total_evals == 2.0 * 101762 * 30001);
  CHECK(std::abs(static_cast<double>(c.N_prime) - 101720.0) < 0.005 * 101720.0);
  CHECK(std::abs(c.total_evals - 6.1032e9) < 0.01 * 6.1032e9);
  const ClassicalCost half = classical_cost(30000, 0.015, 0.95);
  CHECK(static_cast<double>(half.N_prime) / static_cast<double>(c.N_prime) == doctest::Approx(4.0).epsilon(1e-4));
  const ClassicalCost tiny = classical_cost(10, 0.03, 1e-300);
  CHECK(tiny.z < 1e-10);
  CHECK(tiny.N_prime == 1);
  CHECK_THROWS_AS(classical_cost(10, 0.03, 1.0), Error);
  CHECK_THROWS_AS(classical_cost(10, 0.0, 0.9), Error);
}

TEST_CASE("optimizer beats hand-picked parameters") {
  BoundParams fixed = rademacher_example();
  fixed.A.reset();
  fixed.delta_prime.reset();
  const BoundReport best = optimize_params(Calculator::Rademacher, fixed, 0.05);
  CHECK(best.t <= 0.03);
  CHECK(*best.alpha <= 0.05);
  CHECK(best.t <= rademacher_bound(rademacher_example()).t);
  // The reported optimum is itself a valid evaluation.
  BoundParams again = fixed;
  again.A = best.extras.at("A");
  again.delta_prime = best.extras.at("delta_prime");
  CHECK(rademacher_bound(again).t == doctest::Approx(best.t).epsilon(1e-12));

  const BoundReport loose = optimize_params(Calculator::Rademacher, fixed, 0.9999);
  for (double A : {2.9, 3.0, 3.5, 5.0}) {
    for (double dp : {1.05, 1.2, 1.5, 2.0, 3.0}) {
      BoundParams hand = fixed;
      hand.A = A;
      hand.delta_prime = dp;
      const BoundReport h = rademacher_bound(hand);
      if (*h.alpha <= 0.9999) CHECK(loose.t <= h.t * (1 + 1e-9));
    }
  }

  BoundParams bfixed;
  bfixed.p = 300;
  bfixed.s = 3;
  bfixed.mu = 0.5;
  bfixed.sigma = 1.0;
  bfixed.n = 3000000;
  const BoundReport bb = optimize_params(Calculator::Bernoulli, bfixed, 0.05);
  CHECK(*bb.alpha <= 0.05);
  for (double A : {3.0, 3.5, 4.0}) {
    for (double d : {0.004, 0.006, 0.008, 0.01}) {
      BoundParams hand = bfixed;
      hand.A = A;
      hand.delta = d;
      const BoundReport h = bernoulli_bound(hand);
      if (*h.alpha <= 0.05) CHECK(bb.t <= h.t * (1 + 1e-9));
    }
  }
}

TEST_CASE("optimizer reports infeasible instances") {
  BoundParams fixed = rademacher_example();
  fixed.A.reset();
  fixed.delta_prime.reset();
  fixed.n = 1;
  try {
    optimize_params(Calculator::Rademacher, fixed, 0.05);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
    CHECK(std::string(e.what()).find("smallest alpha") != std::string::npos);
  }
  CHECK_THROWS_AS(optimize_params(Calculator::Tiebreak, fixed, 0.05), Error);
  CHECK_THROWS_AS(optimize_params(Calculator::Rademacher, fixed, 1.0), Error);
}

TEST_CASE("calculator names") {
  for (Calculator c : {Calculator::Bernoulli, Calculator::Rademacher, Calculator::Udp, Calculator::Tiebreak,
                       Calculator::Expander, Calculator::ExpanderSnr, Calculator::BernoulliDesign}) {
    CHECK(parse_calculator(calculator_name(c)) == c);
  }
  CHECK_THROWS_AS(parse_calculator("nope"), Error);
}

}
