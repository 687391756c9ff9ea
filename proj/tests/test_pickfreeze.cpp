#include <doctest.h>

#include <atomic>
#include <memory>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rpf/error.hpp"
#include "rpf/pickfreeze.hpp"

using namespace rpf;

namespace {

struct Counted {
  AdditiveModel model;
  std::shared_ptr<std::atomic<std::uint64_t>> calls = std::make_shared<std::atomic<std::uint64_t>>(0);

  ModelFunction fn() const {
    return [m = model, c = calls](std::span<const double> x) {
      c->fetch_add(1, std::memory_order_relaxed);
      return m(x);
    };
  }
};

}  // namespace

TEST_SUITE("pickfreeze") {

TEST_CASE("model calls follow the cost formulas") {
  const AdditiveModel model = AdditiveModel::reference(40);
  for (unsigned workers : {1u, 3u}) {
    for (std::size_t n : {1u, 7u, 16u}) {
      const Counted cb{model};
      const DesignMatrix b = sample_design(Bernoulli{0.5}, n, 40, 1);
      const auto sb = simulate(cb.fn(), 40, b, {123, 9, EstimatorKind::Closed, workers});
      CHECK(cb.calls->load() == (n + 1) * 123);
      CHECK(sb.eval_count == (n + 1) * 123);
      CHECK(expected_eval_count(EstimatorKind::Closed, n, 123) == (n + 1) * 123);

      const Counted cr{model};
      const DesignMatrix r = sample_design(Rademacher{}, n, 40, 1);
      const auto sr = simulate(cr.fn(), 40, r, {123, 9, EstimatorKind::Delta, workers});
      CHECK(cr.calls->load() == (2 * n + 1) * 123);
      CHECK(sr.eval_count == (2 * n + 1) * 123);
    }
  }
}

TEST_CASE("results do not depend on the number of workers") {
  const AdditiveModel model = AdditiveModel::reference(30);
  const DesignMatrix r = sample_design(Rademacher{}, 10, 30, 2);
  const auto a = simulate(model, r, {501, 4, EstimatorKind::Delta, 1});
  const auto b = simulate(model, r, {501, 4, EstimatorKind::Delta, 4});
  CHECK(a.y == b.y);
  CHECK(a.y_frozen == b.y_frozen);
  CHECK(a.y_frozen_complement == b.y_frozen_complement);
}

TEST_CASE("closed estimator matches the two-pass formula") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  std::vector<double> y(1000), yf(1000);
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] = z(gen);
    yf[k] = 0.6 * y[k] + 0.8 * z(gen);
  }
  CHECK(closed_estimator(y, yf) == doctest::Approx(oracle::naive_closed(y, yf)).epsilon(1e-12));
  // Symmetric in its two arguments.
  CHECK(closed_estimator(yf, y) == doctest::Approx(closed_estimator(y, yf)).epsilon(1e-14));
  const std::vector<double> flat(10, 3.0);
  CHECK_THROWS_AS(closed_estimator(flat, flat), Error);
}

TEST_CASE("closed estimates are consistent with the analytic indices") {
  const AdditiveModel model = AdditiveModel::reference(12);
  const SobolVector truth = analytic_sobol(model);
  const DesignMatrix b = sample_design(Bernoulli{0.5}, 15, 12, 3);
  const auto sample = simulate(model, b, {20000, 8, EstimatorKind::Closed, 2});
  const auto sets = freeze_sets(b);
  for (std::size_t j = 0; j < 15; ++j) {
    const double want = closed_index(truth, sets[j]);
    CHECK(std::abs(estimate_closed(sample, j) - want) < 5.0 * jackknife_se(sample, j) + 1e-12);
  }
}

TEST_CASE("delta estimates are consistent with Phi S") {
  const AdditiveModel model = AdditiveModel::reference(12);
  const SobolVector truth = analytic_sobol(model);
  const DesignMatrix r = sample_design(Rademacher{}, 15, 12, 3);
  const auto sample = simulate(model, r, {20000, 8, EstimatorKind::Delta, 2});
  const auto E = estimate_vector(sample);
  for (std::size_t j = 0; j < 15; ++j) {
    double want = 0.0;
    for (std::size_t i = 0; i < 12; ++i) want += r(j, i) * truth.values[i];
    CHECK(std::abs(E.values[j] - want) < 5.0 * jackknife_se(sample, j));
    CHECK(E.values[j] == doctest::Approx(estimate_closed(sample, j) - estimate_complement(sample, j)));
    CHECK(estimate_delta(sample, j) == E.values[j]);
  }
}

TEST_CASE("jackknife equals explicit delete-one recomputation") {
  const AdditiveModel model = AdditiveModel::reference(6);
  for (const auto& [scheme, kind] : {std::pair{DesignScheme{Bernoulli{0.5}}, EstimatorKind::Closed},
                                     std::pair{DesignScheme{Rademacher{}}, EstimatorKind::Delta}}) {
    const DesignMatrix d = sample_design(scheme, 4, 6, 1);
    const auto sample = simulate(model, d, {150, 2, kind, 1});
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t N = sample.N;
      std::vector<double> theta(N);
      for (std::size_t drop = 0; drop < N; ++drop) {
        std::vector<double> y, yf, yc;
        for (std::size_t k = 0; k < N; ++k) {
          if (k == drop) continue;
          y.push_back(sample.y[k]);
          yf.push_back(sample.frozen_row(j)[k]);
          if (kind == EstimatorKind::Delta) yc.push_back(sample.complement_row(j)[k]);
        }
        theta[drop] = oracle::naive_closed(y, yf) - (kind == EstimatorKind::Delta ? oracle::naive_closed(y, yc) : 0.0);
      }
      double mean = 0.0;
      for (double t : theta) mean += t;
      mean /= static_cast<double>(N);
      double ss = 0.0;
      for (double t : theta) ss += (t - mean) * (t - mean);
      const double se = std::sqrt(ss * static_cast<double>(N - 1) / static_cast<double>(N));
      CHECK(jackknife_se(sample, j) == doctest::Approx(se).epsilon(1e-8));
    }
  }
}

TEST_CASE("jackknife agrees with a bootstrap") {
  const AdditiveModel model = AdditiveModel::reference(5);
  const DesignMatrix d = sample_design(Bernoulli{0.5}, 3, 5, 4);
  const auto sample = simulate(model, d, {3000, 6, EstimatorKind::Closed, 1});
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<std::size_t> pick(0, sample.N - 1);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> reps;
    std::vector<double> y(sample.N), yf(sample.N);
    for (int b = 0; b < 400; ++b) {
      for (std::size_t k = 0; k < sample.N; ++k) {
        const std::size_t at = pick(gen);
        y[k] = sample.y[at];
        yf[k] = sample.frozen_row(j)[at];
      }
      reps.push_back(oracle::naive_closed(y, yf));
    }
    double mean = 0.0, ss = 0.0;
    for (double v : reps) mean += v;
    mean /= static_cast<double>(reps.size());
    for (double v : reps) ss += (v - mean) * (v - mean);
    const double boot = std::sqrt(ss / static_cast<double>(reps.size() - 1));
    CHECK(jackknife_se(sample, j) == doctest::Approx(boot).epsilon(0.2));
  }
  CHECK(noise_scale(sample) >= jackknife_se(sample, 0));
}

TEST_CASE("one-at-a-time baseline") {
  const AdditiveModel model = AdditiveModel::reference(8);
  const Counted c{model};
  const auto sweep = one_at_a_time(c.fn(), 8, 500, 3);
  CHECK(c.calls->load() == 9 * 500);
  CHECK(sweep.eval_count == 9 * 500);
  for (std::size_t i = 0; i < 8; ++i) {
    const SingleEstimate one = estimate_single(model, i, 500, 3);
    CHECK(one.eval_count == 1000);
    CHECK(one.value == doctest::Approx(sweep.values[i]).epsilon(1e-14));
  }
  const SobolVector truth = analytic_sobol(model);
  const auto big = one_at_a_time([&](std::span<const double> x) { return model(x); }, 8, 40000, 5);
  for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(big.values[i] - truth.values[i]) < 0.03);
}

TEST_CASE("argument validation") {
  const AdditiveModel model = AdditiveModel::reference(10);
  const DesignMatrix r = sample_design(Rademacher{}, 4, 10, 1);
  const DesignMatrix b = sample_design(Bernoulli{0.5}, 4, 10, 1);
  CHECK_THROWS_AS(simulate(model, r, {100, 1, EstimatorKind::Closed, 1}), Error);
  CHECK_THROWS_AS(simulate(model, b, {100, 1, EstimatorKind::Delta, 1}), Error);
  CHECK_THROWS_AS(simulate(model, b, {1, 1, EstimatorKind::Closed, 1}), Error);
  const DesignMatrix wide = sample_design(Bernoulli{0.5}, 4, 11, 1);
  CHECK_THROWS_AS(simulate(model, wide, {100, 1, EstimatorKind::Closed, 1}), Error);
  const auto sb = simulate(model, b, {100, 1, EstimatorKind::Closed, 1});
  CHECK_THROWS_AS(estimate_complement(sb, 0), Error);
  CHECK(estimator_kind_for(r) == EstimatorKind::Delta);
  CHECK(estimator_kind_for(b) == EstimatorKind::Closed);
}

TEST_CASE("frozen rows with constant output report a numerical error") {
  // Output depends on input 0 only; a row freezing it gives Y^F = Y, one
  // freezing nothing gives an independent copy; a constant model breaks both.
  const AdditiveModel flat(InputSpec::uniform(3), {{0, {1.0}}});
  const DesignMatrix b = sample_design(Bernoulli{0.5}, 2, 3, 1);
  const auto s = simulate(flat, b, {50, 1, EstimatorKind::Closed, 1});
  try {
    (void)estimate_vector(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }
}

TEST_CASE("sample dump round trip") {
  const AdditiveModel model = AdditiveModel::reference(6);
  const DesignMatrix r = sample_design(Rademacher{}, 3, 6, 1);
  const auto s = simulate(model, r, {40, 1, EstimatorKind::Delta, 1});
  std::stringstream io;
  write_sample_dump(io, s);
  const auto back = read_sample_dump(io);
  CHECK(back.N == s.N);
  CHECK(back.n == s.n);
  CHECK(back.kind == s.kind);
  CHECK(back.y == s.y);
  CHECK(back.y_frozen == s.y_frozen);
  CHECK(back.y_frozen_complement == s.y_frozen_complement);
  std::istringstream junk("40 3 closed\nxx");
  CHECK_THROWS_AS(read_sample_dump(junk), Error);
}

}
