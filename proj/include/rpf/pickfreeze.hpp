#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "rpf/design.hpp"
#include "rpf/model.hpp"

namespace rpf {

/// Closed: E_j estimates S_{F_j} (0/1 designs).
/// Delta: E_j estimates S_{F_j} - S_{F_j^c} (+-1 designs).
enum class EstimatorKind { Closed, Delta };

EstimatorKind estimator_kind_for(const DesignMatrix& design) noexcept;

struct MonteCarloPlan {
  std::size_t N = 0;
  std::uint64_t seed = 0;
  EstimatorKind kind = EstimatorKind::Closed;
  /// Threads used by simulate; results do not depend on this.
  unsigned workers = 1;
};

/// Any pure model f : [0,1]^p -> R. Must be safe to call concurrently when
/// the plan uses more than one worker.
using ModelFunction = std::function<double(std::span<const double>)>;

/// Pick-freeze replications sharing one draw of (X, X', Y) across all rows.
struct PickFreezeSample {
  std::size_t N = 0;
  std::size_t n = 0;
  EstimatorKind kind = EstimatorKind::Closed;
  std::vector<double> y;                    // length N
  std::vector<double> y_frozen;             // n x N, row-major
  std::vector<double> y_frozen_complement;  // n x N, Delta only
  std::uint64_t eval_count = 0;

  std::span<const double> frozen_row(std::size_t j) const;
  std::span<const double> complement_row(std::size_t j) const;
};

/// (n + 1) N for Closed, (2n + 1) N for Delta.
std::uint64_t expected_eval_count(EstimatorKind kind, std::size_t n, std::size_t N) noexcept;

PickFreezeSample simulate(const ModelFunction& f, std::size_t p, const DesignMatrix& design,
                          const MonteCarloPlan& plan);
PickFreezeSample simulate(const AdditiveModel& model, const DesignMatrix& design,
                          const MonteCarloPlan& plan);

/// The pick-freeze ratio estimator of S_F from paired outputs (Y_k, Y^F_k).
/// Throws when the denominator is below 1e-12 times the squared sample range.
double closed_estimator(std::span<const double> y, std::span<const double> y_frozen);

double estimate_closed(const PickFreezeSample& sample, std::size_t j);
/// Estimator of S_{F_j^c}; Delta samples only.
double estimate_complement(const PickFreezeSample& sample, std::size_t j);
/// estimate_closed(j) - estimate_complement(j); Delta samples only.
double estimate_delta(const PickFreezeSample& sample, std::size_t j);

struct EstimateVector {
  std::vector<double> values;
  EstimatorKind kind = EstimatorKind::Closed;
  std::size_t N = 0;
  std::uint64_t seed = 0;
};

EstimateVector estimate_vector(const PickFreezeSample& sample);

/// Delete-1 jackknife standard error of E_j.
double jackknife_se(const PickFreezeSample& sample, std::size_t j);
/// max_j jackknife_se(j): the plug-in noise scale for the bound calculators.
double noise_scale(const PickFreezeSample& sample);

struct SingleEstimate {
  double value = 0.0;
  std::uint64_t eval_count = 0;
};

/// Classical one-variable estimator of S_i with F = {i}; costs 2N calls.
SingleEstimate estimate_single(const AdditiveModel& model, std::size_t i, std::size_t N,
                               std::uint64_t seed);

struct OneAtATimeSweep {
  std::vector<double> values;
  std::uint64_t eval_count = 0;
};

/// All p classical estimators sharing one Y sample: (p + 1) N calls.
/// values[i] equals estimate_single(model, i, N, seed).value.
OneAtATimeSweep one_at_a_time(const ModelFunction& f, std::size_t p, std::size_t N,
                              std::uint64_t seed);

/// Binary dump: ASCII header line "N n kind", then little-endian float64
/// arrays y, y_frozen (row-major) and, for Delta, y_frozen_complement.
void write_sample_dump(std::ostream& out, const PickFreezeSample& sample);
PickFreezeSample read_sample_dump(std::istream& in);

}  // namespace rpf
