#include "rpf/pickfreeze.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>
#include <string>
#include <thread>

#include "rpf/error.hpp"
#include "rpf/rng.hpp"

namespace rpf {

namespace {

Error pf_error(ErrorKind kind, const std::string& message) {
  return Error("pickfreeze", kind, message);
}

void draw_inputs(std::uint64_t seed, std::size_t k, std::span<double> x, std::span<double> xp) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = counter_uniform(seed, Stream::InputX, k, i);
    xp[i] = counter_uniform(seed, Stream::InputXPrime, k, i);
  }
}

// Runs body(begin, end) over [0, count) split into contiguous chunks.
template <class Body>
void parallel_chunks(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
}

// Sums needed by the ratio estimator, so that jackknife replicates can be
// formed by subtracting a single observation.
struct PairSums {
  double cross = 0.0;   // sum y yF
  double mean2 = 0.0;   // sum (y + yF) / 2
  double square = 0.0;  // sum (y^2 + yF^2) / 2

  void add(double a, double b, double sign = 1.0) noexcept {
    cross += sign * a * b;
    mean2 += sign * 0.5 * (a + b);
    square += sign * 0.5 * (a * a + b * b);
  }

  double ratio(double count) const noexcept {
    const double m = mean2 / count;
    return (cross / count - m * m) / (square / count - m * m);
  }
};

PairSums pair_sums(std::span<const double> y, std::span<const double> yf) {
  PairSums s;
  for (std::size_t k = 0; k < y.size(); ++k) s.add(y[k], yf[k]);
  return s;
}

void check_row(const PickFreezeSample& sample, std::size_t j) {
  if (j >= sample.n) {
    throw pf_error(ErrorKind::Domain, "row " + std::to_string(j + 1) + " out of range (n=" +
                                          std::to_string(sample.n) + ")");
  }
}

void require_delta(const PickFreezeSample& sample) {
  if (sample.kind != EstimatorKind::Delta || sample.y_frozen_complement.size() != sample.n * sample.N) {
    throw pf_error(ErrorKind::Domain, "sample has no complement outputs (needs a delta plan)");
  }
}

const char* kind_token(EstimatorKind kind) { return kind == EstimatorKind::Delta ? "delta" : "closed"; }

void write_f64(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
}

void read_f64(std::istream& in, std::vector<double>& values, std::size_t count) {
  values.resize(count);
  for (auto& v : values) {
    char buf[8];
    if (!in.read(buf, 8)) throw pf_error(ErrorKind::Config, "sample dump truncated");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
}

}  // namespace

EstimatorKind estimator_kind_for(const DesignMatrix& design) noexcept {
  return design.alphabet() == Alphabet::Sign ? EstimatorKind::Delta : EstimatorKind::Closed;
}

std::span<const double> PickFreezeSample::frozen_row(std::size_t j) const {
  return std::span<const double>(y_frozen).subspan(j * N, N);
}

std::span<const double> PickFreezeSample::complement_row(std::size_t j) const {
  return std::span<const double>(y_frozen_complement).subspan(j * N, N);
}

std::uint64_t expected_eval_count(EstimatorKind kind, std::size_t n, std::size_t N) noexcept {
  const std::uint64_t per = kind == EstimatorKind::Delta ? 2 * n + 1 : n + 1;
  return per * N;
}

PickFreezeSample simulate(const ModelFunction& f, std::size_t p, const DesignMatrix& design,
                          const MonteCarloPlan& plan) {
  if (design.cols() != p) {
    throw pf_error(ErrorKind::Domain, "design has p=" + std::to_string(design.cols()) +
                                          " columns, model has p=" + std::to_string(p));
  }
  if (plan.N < 2) throw pf_error(ErrorKind::Domain, "Monte Carlo size N must be >= 2");
  if (plan.kind != estimator_kind_for(design)) {
    throw pf_error(ErrorKind::Domain, std::string("estimator kind '") + kind_token(plan.kind) +
                                          "' does not match the design alphabet");
  }
  const std::size_t n = design.rows();
  const std::size_t N = plan.N;
  const bool delta = plan.kind == EstimatorKind::Delta;
  const auto sets = freeze_sets(design);

  PickFreezeSample out;
  out.N = N;
  out.n = n;
  out.kind = plan.kind;
  out.y.resize(N);
  out.y_frozen.resize(n * N);
  if (delta) out.y_frozen_complement.resize(n * N);

  std::vector<std::uint64_t> counts(std::max(1u, plan.workers), 0);
  std::atomic<unsigned> next_slot{0};
  parallel_chunks(N, plan.workers, [&](std::size_t begin, std::size_t end) {
    const unsigned slot = next_slot++;
    std::uint64_t calls = 0;
    std::vector<double> x(p), xp(p), mix(p), comp(p);
    for (std::size_t k = begin; k < end; ++k) {
      draw_inputs(plan.seed, k, x, xp);
      out.y[k] = f(x);
      ++calls;
      for (std::size_t j = 0; j < n; ++j) {
        // X^F takes X on F and X' elsewhere; X^{F^c} the reverse.
        std::copy(xp.begin(), xp.end(), mix.begin());
        for (auto i : sets[j]) mix[i] = x[i];
        out.y_frozen[j * N + k] = f(mix);
        ++calls;
        if (delta) {
          std::copy(x.begin(), x.end(), comp.begin());
          for (auto i : sets[j]) comp[i] = xp[i];
          out.y_frozen_complement[j * N + k] = f(comp);
          ++calls;
        }
      }
    }
    counts[slot] = calls;
  });
  for (auto c : counts) out.eval_count += c;
  return out;
}

PickFreezeSample simulate(const AdditiveModel& model, const DesignMatrix& design,
                          const MonteCarloPlan& plan) {
  return simulate([&model](std::span<const double> x) { return model.evaluate(x); }, model.dim(),
                  design, plan);
}

double closed_estimator(std::span<const double> y, std::span<const double> y_frozen) {
  if (y.size() != y_frozen.size() || y.size() < 2) {
    throw pf_error(ErrorKind::Domain, "estimator needs two equal-length samples of size >= 2");
  }
  const auto [lo1, hi1] = std::minmax_element(y.begin(), y.end());
  const auto [lo2, hi2] = std::minmax_element(y_frozen.begin(), y_frozen.end());
  const double range = std::max(*hi1, *hi2) - std::min(*lo1, *lo2);
  const double count = static_cast<double>(y.size());
  const PairSums s = pair_sums(y, y_frozen);
  const double m = s.mean2 / count;
  const double numerator = s.cross / count - m * m;
  const double denominator = s.square / count - m * m;
  if (!(range > 0.0) || !(denominator >= 1e-12 * range * range)) {
    throw pf_error(ErrorKind::Numerical, "degenerate output variance in pick-freeze estimator");
  }
  return numerator / denominator;
}

double estimate_closed(const PickFreezeSample& sample, std::size_t j) {
  check_row(sample, j);
  return closed_estimator(sample.y, sample.frozen_row(j));
}

double estimate_complement(const PickFreezeSample& sample, std::size_t j) {
  check_row(sample, j);
  require_delta(sample);
  return closed_estimator(sample.y, sample.complement_row(j));
}

double estimate_delta(const PickFreezeSample& sample, std::size_t j) {
  require_delta(sample);
  return estimate_closed(sample, j) - estimate_complement(sample, j);
}

EstimateVector estimate_vector(const PickFreezeSample& sample) {
  EstimateVector e;
  e.kind = sample.kind;
  e.N = sample.N;
  e.values.resize(sample.n);
  for (std::size_t j = 0; j < sample.n; ++j) {
    try {
      e.values[j] = sample.kind == EstimatorKind::Delta ? estimate_delta(sample, j)
                                                        : estimate_closed(sample, j);
    } catch (const Error& err) {
      throw Error("pickfreeze", err.kind(), "row " + std::to_string(j + 1) + ": " + err.what());
    }
  }
  return e;
}

double jackknife_se(const PickFreezeSample& sample, std::size_t j) {
  check_row(sample, j);
  const std::size_t N = sample.N;
  const bool delta = sample.kind == EstimatorKind::Delta;
  const auto yf = sample.frozen_row(j);
  const PairSums full = pair_sums(sample.y, yf);
  PairSums full_c;
  std::span<const double> yc;
  if (delta) {
    require_delta(sample);
    yc = sample.complement_row(j);
    full_c = pair_sums(sample.y, yc);
  }
  const double m = static_cast<double>(N - 1);
  std::vector<double> reps(N);
  for (std::size_t k = 0; k < N; ++k) {
    PairSums loo = full;
    loo.add(sample.y[k], yf[k], -1.0);
    double theta = loo.ratio(m);
    if (delta) {
      PairSums loo_c = full_c;
      loo_c.add(sample.y[k], yc[k], -1.0);
      theta -= loo_c.ratio(m);
    }
    reps[k] = theta;
  }
  double mean = 0.0;
  for (double r : reps) mean += r;
  mean /= static_cast<double>(N);
  double ss = 0.0;
  for (double r : reps) ss += (r - mean) * (r - mean);
  return std::sqrt(m / static_cast<double>(N) * ss);
}

double noise_scale(const PickFreezeSample& sample) {
  double worst = 0.0;
  for (std::size_t j = 0; j < sample.n; ++j) worst = std::max(worst, jackknife_se(sample, j));
  return worst;
}

SingleEstimate estimate_single(const AdditiveModel& model, std::size_t i, std::size_t N,
                               std::uint64_t seed) {
  const std::size_t p = model.dim();
  if (i >= p) throw pf_error(ErrorKind::Domain, "input index out of range");
  if (N < 2) throw pf_error(ErrorKind::Domain, "Monte Carlo size N must be >= 2");
  std::vector<double> y(N), yi(N), x(p), xp(p);
  SingleEstimate out;
  for (std::size_t k = 0; k < N; ++k) {
    draw_inputs(seed, k, x, xp);
    y[k] = model.evaluate(x);
    xp[i] = x[i];
    yi[k] = model.evaluate(xp);
    out.eval_count += 2;
  }
  out.value = closed_estimator(y, yi);
  return out;
}

OneAtATimeSweep one_at_a_time(const ModelFunction& f, std::size_t p, std::size_t N,
                              std::uint64_t seed) {
  if (p == 0) throw pf_error(ErrorKind::Domain, "p must be >= 1");
  if (N < 2) throw pf_error(ErrorKind::Domain, "Monte Carlo size N must be >= 2");
  std::vector<double> y(N), yi(p * N), x(p), xp(p);
  OneAtATimeSweep out;
  for (std::size_t k = 0; k < N; ++k) {
    draw_inputs(seed, k, x, xp);
    y[k] = f(x);
    ++out.eval_count;
    for (std::size_t i = 0; i < p; ++i) {
      const double saved = xp[i];
      xp[i] = x[i];
      yi[i * N + k] = f(xp);
      xp[i] = saved;
      ++out.eval_count;
    }
  }
  out.values.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    out.values[i] = closed_estimator(y, std::span<const double>(yi).subspan(i * N, N));
  }
  return out;
}

void write_sample_dump(std::ostream& out, const PickFreezeSample& sample) {
  out << sample.N << ' ' << sample.n << ' ' << kind_token(sample.kind) << '\n';
  write_f64(out, sample.y);
  write_f64(out, sample.y_frozen);
  if (sample.kind == EstimatorKind::Delta) write_f64(out, sample.y_frozen_complement);
}

PickFreezeSample read_sample_dump(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw pf_error(ErrorKind::Config, "empty sample dump");
  std::istringstream fields(header);
  PickFreezeSample s;
  std::string kind;
  if (!(fields >> s.N >> s.n >> kind) || (kind != "closed" && kind != "delta")) {
    throw pf_error(ErrorKind::Config, "malformed sample dump header '" + header + "'");
  }
  s.kind = kind == "delta" ? EstimatorKind::Delta : EstimatorKind::Closed;
  read_f64(in, s.y, s.N);
  read_f64(in, s.y_frozen, s.n * s.N);
  if (s.kind == EstimatorKind::Delta) read_f64(in, s.y_frozen_complement, s.n * s.N);
  s.eval_count = expected_eval_count(s.kind, s.n, s.N);
  return s;
}

}  // namespace rpf
