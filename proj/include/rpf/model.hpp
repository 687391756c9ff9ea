#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace rpf {

/// Per-coordinate input law. Only the uniform law on [0, 1] is supported.
enum class InputDistribution { Uniform01 };

struct InputSpec {
  std::size_t p = 0;
  std::vector<InputDistribution> distributions;

  /// p independent uniform [0, 1] inputs.
  static InputSpec uniform(std::size_t p);
};

/// One univariate polynomial f_i(x) = c0 + c1 x + c2 x^2 + ...
struct AdditiveTerm {
  std::size_t index = 0;  // 0-based input coordinate
  std::vector<double> coefficients;

  double operator()(double x) const noexcept;
};

/// f(x) = sum of univariate polynomial terms, at most one per coordinate.
/// Coordinates without a term contribute nothing.
class AdditiveModel {
 public:
  AdditiveModel(InputSpec input, std::vector<AdditiveTerm> terms);

  std::size_t dim() const noexcept { return input_.p; }
  const InputSpec& input() const noexcept { return input_; }
  const std::vector<AdditiveTerm>& terms() const noexcept { return terms_; }

  /// Throws on dimension mismatch.
  double evaluate(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return evaluate(x); }

  /// Number of terms with nonzero variance.
  std::size_t sparsity() const;

  /// The model used in the reference experiments:
  /// f = X1^2 + 4 X1 + 4 X2 + 10 X3 on p uniform inputs.
  static AdditiveModel reference(std::size_t p = 300);

 private:
  InputSpec input_;
  std::vector<AdditiveTerm> terms_;  // sorted by index
};

/// Sobol index vector. For analytic results the values are nonnegative and
/// sum to one; estimated vectors carry no such guarantee.
struct SobolVector {
  std::vector<double> values;
  double total_variance = 0.0;
};

/// Exact Var(p(X)) for X ~ U[0, 1], from E[X^k] = 1 / (k + 1).
double uniform_polynomial_variance(std::span<const double> coefficients);

/// Exact first-order indices of an additive model with uniform inputs.
/// Throws when the total variance is zero.
SobolVector analytic_sobol(const AdditiveModel& model);

/// S_F = sum over i in F of S_i (0-based indices).
double closed_index(const AdditiveModel& model, std::span<const std::size_t> F);
double closed_index(const SobolVector& sobol, std::span<const std::size_t> F);

/// Text form: one term per line "index c0 c1 c2 ...", 1-based index,
/// '#' starts a comment. The input dimension is not part of the file.
AdditiveModel read_model(std::istream& in, std::size_t p);
AdditiveModel load_model(const std::string& path, std::size_t p);
void write_model(std::ostream& out, const AdditiveModel& model);

}  // namespace rpf
