#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace rpf {

/// i.i.d. entries, P(entry = 1) = mu, otherwise 0.
struct Bernoulli {
  double mu = 0.5;
};
/// i.i.d. symmetric +-1 entries.
struct Rademacher {};
/// Each column an independent uniform d-subset of the rows (left d-regular
/// bipartite graph, no repeated edges).
struct ExpanderRandom {
  std::size_t d = 1;
};

using DesignScheme = std::variant<Bernoulli, Rademacher, ExpanderRandom>;

enum class Alphabet { Binary, Sign };

Alphabet alphabet_of(const DesignScheme& scheme) noexcept;
std::string scheme_name(const DesignScheme& scheme);
/// Inverse of scheme_name: "bernoulli:0.5", "rademacher", "expander:3".
DesignScheme parse_scheme(const std::string& text);

/// n x p design; row j encodes the freeze set F_j.
class DesignMatrix {
 public:
  /// Validates that every entry belongs to the scheme's alphabet and, for
  /// ExpanderRandom, that every column has exactly d ones.
  DesignMatrix(Eigen::MatrixXd entries, DesignScheme scheme, std::uint64_t seed);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries_.cols()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(std::size_t j, std::size_t i) const {
    return entries_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  }
  const DesignScheme& scheme() const noexcept { return scheme_; }
  Alphabet alphabet() const noexcept { return alphabet_of(scheme_); }
  std::uint64_t seed() const noexcept { return seed_; }

  /// True iff entry (j, i) marks input i as frozen in row j.
  bool frozen(std::size_t j, std::size_t i) const { return (*this)(j, i) == 1.0; }

  friend bool operator==(const DesignMatrix& a, const DesignMatrix& b) {
    return a.seed_ == b.seed_ && scheme_name(a.scheme_) == scheme_name(b.scheme_) &&
           a.entries_ == b.entries_;
  }

 private:
  Eigen::MatrixXd entries_;
  DesignScheme scheme_;
  std::uint64_t seed_;
};

/// Identical (scheme, n, p, seed) always gives an identical matrix.
DesignMatrix sample_design(const DesignScheme& scheme, std::size_t n, std::size_t p,
                           std::uint64_t seed);

using IndexSet = std::vector<std::size_t>;

/// F_j = { i : Phi(j, i) = 1 }, sorted, 0-based, for both alphabets.
std::vector<IndexSet> freeze_sets(const DesignMatrix& design);

/// Inverse of freeze_sets: rebuilds the matrix in the scheme's alphabet.
DesignMatrix encode_freeze_sets(const std::vector<IndexSet>& sets, std::size_t p,
                                const DesignScheme& scheme, std::uint64_t seed);

/// Statistics of Psi = (1/n) Phi^T Phi.
struct GramStats {
  double max_coherence = 0.0;          // max_{k != l} |Psi_kl|
  double min_col_normsq_over_n = 0.0;  // min_i Psi_ii
  double diag_min = 0.0;
  double diag_max = 0.0;
  double offdiag_mean = 0.0;
};

GramStats gram_stats(const DesignMatrix& design);

/// Outcome of an expansion check over subsets of columns.
struct ExpanderCheck {
  bool is_expander = true;
  std::size_t left_degree = 0;
  /// Subset with the smallest ratio #N(I) / (d #I) among those examined.
  IndexSet witness;
  std::size_t witness_neighbors = 0;
  double worst_ratio = 1.0;
  std::uint64_t subsets_checked = 0;
};

inline constexpr std::uint64_t kDefaultExpanderBudget = 2'000'000;

/// Exhaustive check of #N(I) >= (1 - e) d #I for every nonempty I with
/// #I <= s. Throws when the matrix is not 0/1 left-regular, or when the
/// number of subsets exceeds `budget` (use sample_expansion instead).
ExpanderCheck verify_expander(const DesignMatrix& design, std::size_t s, double e,
                              std::uint64_t budget = kDefaultExpanderBudget);

/// Random-subset version of verify_expander: a falsifier only.
ExpanderCheck sample_expansion(const DesignMatrix& design, std::size_t s, double e,
                               std::uint64_t samples, std::uint64_t seed);

/// A (gamma, T) pair violating ||gamma_T||_1 <= rho sqrt(s) ||Phi gamma||_2 + kappa ||gamma||_1.
struct UdpCounterexample {
  std::vector<double> gamma;
  IndexSet T;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Randomized search for a UDP violation. Tries every basis vector first,
/// then `trials` random candidates (sparse, dense, sign patterns); for each
/// gamma the worst T is its s largest-magnitude coordinates. Finding
/// nothing is evidence, not a certificate.
std::optional<UdpCounterexample> falsify_udp(const DesignMatrix& design, std::size_t s,
                                             double rho, double kappa, std::uint64_t trials,
                                             std::uint64_t seed);

/// Header "n p alphabet seed scheme" followed by n rows of entries.
void write_design(std::ostream& out, const DesignMatrix& design);
DesignMatrix read_design(std::istream& in);
DesignMatrix load_design(const std::string& path);

}  // namespace rpf
