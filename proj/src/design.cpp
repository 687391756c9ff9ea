#include "rpf/design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rpf/error.hpp"
#include "rpf/rng.hpp"

namespace rpf {

namespace {

Error design_error(ErrorKind kind, const std::string& message) {
  return Error("design", kind, message);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using Index = Eigen::Index;

// Standard normal draw from two counter-based uniforms (Box-Muller), so the
// search sequence is identical across standard library implementations.
double normal_draw(StreamRng& rng) {
  const double u1 = 1.0 - rng.uniform();  // (0, 1]
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Row lists for each column of a 0/1 left-regular matrix; throws otherwise.
std::vector<std::vector<std::size_t>> column_neighbors(const DesignMatrix& design,
                                                       std::size_t& degree) {
  const auto& m = design.entries();
  std::vector<std::vector<std::size_t>> cols(design.cols());
  for (Index i = 0; i < m.cols(); ++i) {
    for (Index j = 0; j < m.rows(); ++j) {
      const double v = m(j, i);
      if (v == 1.0) {
        cols[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(j));
      } else if (v != 0.0) {
        throw design_error(ErrorKind::Domain, "expansion check needs a 0/1 matrix");
      }
    }
  }
  degree = cols.empty() ? 0 : cols.front().size();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].size() != degree) {
      throw design_error(ErrorKind::Domain,
                         "matrix is not left-regular: column 1 has " + std::to_string(degree) +
                             " ones, column " + std::to_string(i + 1) + " has " +
                             std::to_string(cols[i].size()));
    }
  }
  if (degree == 0) throw design_error(ErrorKind::Domain, "left degree is zero");
  return cols;
}

// Incremental neighbourhood of a growing set of columns.
class NeighborCounter {
 public:
  NeighborCounter(const std::vector<std::vector<std::size_t>>& cols, std::size_t n)
      : cols_(cols), hits_(n, 0) {}

  void add(std::size_t col) {
    for (auto row : cols_[col]) distinct_ += (hits_[row]++ == 0);
  }
  void remove(std::size_t col) {
    for (auto row : cols_[col]) distinct_ -= (--hits_[row] == 0);
  }
  std::size_t distinct() const noexcept { return distinct_; }

 private:
  const std::vector<std::vector<std::size_t>>& cols_;
  std::vector<std::uint32_t> hits_;
  std::size_t distinct_ = 0;
};

void record(ExpanderCheck& out, const IndexSet& set, std::size_t neighbors, double e) {
  ++out.subsets_checked;
  const double needed = (1.0 - e) * static_cast<double>(out.left_degree * set.size());
  if (static_cast<double>(neighbors) + 1e-9 < needed) out.is_expander = false;
  const double ratio =
      static_cast<double>(neighbors) / static_cast<double>(out.left_degree * set.size());
  if (ratio < out.worst_ratio || out.witness.empty()) {
    out.worst_ratio = ratio;
    out.witness = set;
    out.witness_neighbors = neighbors;
  }
}

}  // namespace

Alphabet alphabet_of(const DesignScheme& scheme) noexcept {
  return std::holds_alternative<Rademacher>(scheme) ? Alphabet::Sign : Alphabet::Binary;
}

std::string scheme_name(const DesignScheme& scheme) {
  return std::visit(Overloaded{
                        [](const Bernoulli& b) {
                          std::ostringstream os;
                          os.precision(std::numeric_limits<double>::max_digits10);
                          os << "bernoulli:" << b.mu;
                          return os.str();
                        },
                        [](const Rademacher&) { return std::string("rademacher"); },
                        [](const ExpanderRandom& x) { return "expander:" + std::to_string(x.d); },
                    },
                    scheme);
}

DesignScheme parse_scheme(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "rademacher" && arg.empty()) return Rademacher{};
    if (kind == "bernoulli") {
      const double mu = arg.empty() ? 0.5 : std::stod(arg);
      return Bernoulli{mu};
    }
    if (kind == "expander" && !arg.empty()) {
      const long long d = std::stoll(arg);
      if (d < 1) throw std::invalid_argument(arg);
      return ExpanderRandom{static_cast<std::size_t>(d)};
    }
  } catch (const std::exception&) {
  }
  throw design_error(ErrorKind::Config, "unrecognized design scheme '" + text +
                                            "' (expected bernoulli:<mu>, rademacher, expander:<d>)");
}

DesignMatrix::DesignMatrix(Eigen::MatrixXd entries, DesignScheme scheme, std::uint64_t seed)
    : entries_(std::move(entries)), scheme_(scheme), seed_(seed) {
  if (entries_.rows() == 0 || entries_.cols() == 0) {
    throw design_error(ErrorKind::Domain, "design must have n, p >= 1");
  }
  if (const auto* b = std::get_if<Bernoulli>(&scheme_); b && !(b->mu > 0.0 && b->mu < 1.0)) {
    throw design_error(ErrorKind::Domain, "Bernoulli parameter must lie in (0, 1)");
  }
  const bool sign = alphabet() == Alphabet::Sign;
  for (Index i = 0; i < entries_.cols(); ++i) {
    for (Index j = 0; j < entries_.rows(); ++j) {
      const double v = entries_(j, i);
      const bool ok = sign ? (v == 1.0 || v == -1.0) : (v == 0.0 || v == 1.0);
      if (!ok) {
        throw design_error(ErrorKind::Domain, "entry (" + std::to_string(j + 1) + ", " +
                                                  std::to_string(i + 1) +
                                                  ") outside the scheme alphabet");
      }
    }
  }
  if (const auto* x = std::get_if<ExpanderRandom>(&scheme_)) {
    for (Index i = 0; i < entries_.cols(); ++i) {
      if (entries_.col(i).sum() != static_cast<double>(x->d)) {
        throw design_error(ErrorKind::Domain, "expander column " + std::to_string(i + 1) +
                                                  " does not have exactly d ones");
      }
    }
  }
}

DesignMatrix sample_design(const DesignScheme& scheme, std::size_t n, std::size_t p,
                           std::uint64_t seed) {
  if (n == 0 || p == 0) throw design_error(ErrorKind::Domain, "n and p must be >= 1");
  Eigen::MatrixXd m(static_cast<Index>(n), static_cast<Index>(p));
  std::visit(Overloaded{
                 [&](const Bernoulli& b) {
                   if (!(b.mu > 0.0 && b.mu < 1.0)) {
                     throw design_error(ErrorKind::Domain, "Bernoulli parameter must lie in (0, 1)");
                   }
                   for (Index i = 0; i < m.cols(); ++i)
                     for (Index j = 0; j < m.rows(); ++j)
                       m(j, i) = counter_uniform(seed, Stream::DesignEntry, j, i) < b.mu ? 1.0 : 0.0;
                 },
                 [&](const Rademacher&) {
                   for (Index i = 0; i < m.cols(); ++i)
                     for (Index j = 0; j < m.rows(); ++j)
                       m(j, i) = (counter_bits(seed, Stream::DesignEntry, j, i) >> 63) ? 1.0 : -1.0;
                 },
                 [&](const ExpanderRandom& x) {
                   if (x.d == 0 || x.d > n) {
                     throw design_error(ErrorKind::Domain, "expander degree d=" + std::to_string(x.d) +
                                                               " must lie in [1, n=" +
                                                               std::to_string(n) + "]");
                   }
                   m.setZero();
                   std::vector<std::size_t> rows(n);
                   for (Index i = 0; i < m.cols(); ++i) {
                     // Partial Fisher-Yates: first d slots are a uniform d-subset.
                     std::iota(rows.begin(), rows.end(), std::size_t{0});
                     StreamRng rng(seed, Stream::ExpanderColumn, static_cast<std::uint64_t>(i));
                     for (std::size_t k = 0; k < x.d; ++k) {
                       const std::size_t pick = k + rng.below(n - k);
                       std::swap(rows[k], rows[pick]);
                       m(static_cast<Index>(rows[k]), i) = 1.0;
                     }
                   }
                 },
             },
             scheme);
  return DesignMatrix(std::move(m), scheme, seed);
}

std::vector<IndexSet> freeze_sets(const DesignMatrix& design) {
  std::vector<IndexSet> sets(design.rows());
  for (std::size_t j = 0; j < design.rows(); ++j) {
    for (std::size_t i = 0; i < design.cols(); ++i) {
      if (design.frozen(j, i)) sets[j].push_back(i);
    }
  }
  return sets;
}

DesignMatrix encode_freeze_sets(const std::vector<IndexSet>& sets, std::size_t p,
                                const DesignScheme& scheme, std::uint64_t seed) {
  const double off = alphabet_of(scheme) == Alphabet::Sign ? -1.0 : 0.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Index>(sets.size()),
                                                static_cast<Index>(p), off);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    for (auto i : sets[j]) {
      if (i >= p) throw design_error(ErrorKind::Domain, "freeze set element out of range");
      m(static_cast<Index>(j), static_cast<Index>(i)) = 1.0;
    }
  }
  return DesignMatrix(std::move(m), scheme, seed);
}

GramStats gram_stats(const DesignMatrix& design) {
  const auto& m = design.entries();
  const double n = static_cast<double>(m.rows());
  const Index p = m.cols();
  GramStats g;
  g.diag_min = std::numeric_limits<double>::infinity();
  g.diag_max = -std::numeric_limits<double>::infinity();
  double offdiag_sum = 0.0;
  // Pairwise column products; O(p^2 n) time, O(1) extra memory.
  for (Index k = 0; k < p; ++k) {
    const double diag = m.col(k).squaredNorm() / n;
    g.diag_min = std::min(g.diag_min, diag);
    g.diag_max = std::max(g.diag_max, diag);
    for (Index l = k + 1; l < p; ++l) {
      const double psi = m.col(k).dot(m.col(l)) / n;
      g.max_coherence = std::max(g.max_coherence, std::abs(psi));
      offdiag_sum += psi;
    }
  }
  g.min_col_normsq_over_n = g.diag_min;
  if (p > 1) {
    g.offdiag_mean = offdiag_sum / (0.5 * static_cast<double>(p) * static_cast<double>(p - 1));
  }
  return g;
}

ExpanderCheck verify_expander(const DesignMatrix& design, std::size_t s, double e,
                              std::uint64_t budget) {
  if (s == 0) throw design_error(ErrorKind::Domain, "subset size s must be >= 1");
  ExpanderCheck out;
  const auto cols = column_neighbors(design, out.left_degree);
  const std::size_t p = cols.size();
  s = std::min(s, p);

  // Sum_{k<=s} C(p, k), in floating point to detect overflow of the budget.
  double total = 0.0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= s; ++k) {
    binom = binom * static_cast<double>(p - k + 1) / static_cast<double>(k);
    total += binom;
  }
  if (total > static_cast<double>(budget)) {
    throw design_error(ErrorKind::Domain,
                       "exhaustive expansion check needs " + std::to_string(total) +
                           " subsets, above the budget of " + std::to_string(budget) +
                           "; use the sampling mode instead");
  }

  NeighborCounter counter(cols, design.rows());
  IndexSet chosen;
  chosen.reserve(s);
  // Depth-first enumeration in lexicographic order.
  auto visit = [&](auto&& self, std::size_t start) -> void {
    for (std::size_t i = start; i < p; ++i) {
      counter.add(i);
      chosen.push_back(i);
      record(out, chosen, counter.distinct(), e);
      if (chosen.size() < s) self(self, i + 1);
      chosen.pop_back();
      counter.remove(i);
    }
  };
  visit(visit, 0);
  return out;
}

ExpanderCheck sample_expansion(const DesignMatrix& design, std::size_t s, double e,
                               std::uint64_t samples, std::uint64_t seed) {
  if (s == 0) throw design_error(ErrorKind::Domain, "subset size s must be >= 1");
  ExpanderCheck out;
  const auto cols = column_neighbors(design, out.left_degree);
  const std::size_t p = cols.size();
  s = std::min(s, p);
  NeighborCounter counter(cols, design.rows());
  std::vector<std::size_t> perm(p);
  StreamRng rng(seed, Stream::UdpSearch, 0x65787061ULL);
  for (std::uint64_t t = 0; t < samples; ++t) {
    const std::size_t size = 1 + rng.below(s);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    IndexSet set;
    for (std::size_t k = 0; k < size; ++k) {
      std::swap(perm[k], perm[k + rng.below(p - k)]);
      set.push_back(perm[k]);
      counter.add(perm[k]);
    }
    std::sort(set.begin(), set.end());
    record(out, set, counter.distinct(), e);
    for (auto i : set) counter.remove(i);
  }
  return out;
}

std::optional<UdpCounterexample> falsify_udp(const DesignMatrix& design, std::size_t s,
                                             double rho, double kappa, std::uint64_t trials,
                                             std::uint64_t seed) {
  if (s == 0) throw design_error(ErrorKind::Domain, "s must be >= 1");
  if (trials == 0) throw design_error(ErrorKind::Domain, "trials must be >= 1");
  const auto& phi = design.entries();
  const std::size_t p = design.cols();
  const std::size_t keep = std::min(s, p);
  const double sqrt_s = std::sqrt(static_cast<double>(s));
  Eigen::VectorXd gamma(static_cast<Index>(p));
  std::vector<std::size_t> order(p);

  auto test = [&]() -> std::optional<UdpCounterexample> {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return std::abs(gamma(static_cast<Index>(a))) >
                               std::abs(gamma(static_cast<Index>(b)));
                      });
    double lhs = 0.0;
    for (std::size_t k = 0; k < keep; ++k) lhs += std::abs(gamma(static_cast<Index>(order[k])));
    const double rhs = rho * sqrt_s * (phi * gamma).norm() + kappa * gamma.lpNorm<1>();
    if (lhs > rhs * (1.0 + 1e-12) + std::numeric_limits<double>::min()) {
      UdpCounterexample cx;
      cx.gamma.assign(gamma.data(), gamma.data() + gamma.size());
      cx.T.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
      std::sort(cx.T.begin(), cx.T.end());
      cx.lhs = lhs;
      cx.rhs = rhs;
      return cx;
    }
    return std::nullopt;
  };

  for (std::size_t j = 0; j < p; ++j) {
    gamma.setZero();
    gamma(static_cast<Index>(j)) = 1.0;
    if (auto cx = test()) return cx;
  }

  StreamRng rng(seed, Stream::UdpSearch, 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    gamma.setZero();
    switch (t % 3) {
      case 0: {  // sparse Gaussian on a random support of size <= 2s
        const std::size_t size = 1 + rng.below(std::min<std::size_t>(2 * s, p));
        for (std::size_t k = 0; k < size; ++k) {
          gamma(static_cast<Index>(rng.below(p))) = normal_draw(rng);
        }
        break;
      }
      case 1:  // dense Gaussian
        for (std::size_t i = 0; i < p; ++i) gamma(static_cast<Index>(i)) = normal_draw(rng);
        break;
      default: {  // sign pattern on a random support
        const std::size_t size = 1 + rng.below(p);
        for (std::size_t k = 0; k < size; ++k) {
          gamma(static_cast<Index>(rng.below(p))) = (rng() >> 63) ? 1.0 : -1.0;
        }
        break;
      }
    }
    if (gamma.isZero(0.0)) continue;
    if (auto cx = test()) return cx;
  }
  return std::nullopt;
}

void write_design(std::ostream& out, const DesignMatrix& design) {
  out << design.rows() << ' ' << design.cols() << ' '
      << (design.alphabet() == Alphabet::Sign ? "sign" : "binary") << ' ' << design.seed() << ' '
      << scheme_name(design.scheme()) << '\n';
  for (std::size_t j = 0; j < design.rows(); ++j) {
    for (std::size_t i = 0; i < design.cols(); ++i) {
      if (i) out << ' ';
      out << static_cast<int>(design(j, i));
    }
    out << '\n';
  }
}

DesignMatrix read_design(std::istream& in) {
  std::size_t n = 0, p = 0;
  std::string alphabet, scheme_text;
  std::uint64_t seed = 0;
  if (!(in >> n >> p >> alphabet >> seed >> scheme_text) || n == 0 || p == 0) {
    throw design_error(ErrorKind::Config, "malformed design header (expected 'n p alphabet seed scheme')");
  }
  const DesignScheme scheme = parse_scheme(scheme_text);
  const bool sign = alphabet == "sign";
  if (!sign && alphabet != "binary") {
    throw design_error(ErrorKind::Config, "unknown alphabet '" + alphabet + "'");
  }
  if (sign != (alphabet_of(scheme) == Alphabet::Sign)) {
    throw design_error(ErrorKind::Config, "alphabet '" + alphabet + "' does not match scheme " + scheme_text);
  }
  Eigen::MatrixXd m(static_cast<Index>(n), static_cast<Index>(p));
  for (Index j = 0; j < m.rows(); ++j) {
    for (Index i = 0; i < m.cols(); ++i) {
      int v = 0;
      if (!(in >> v)) throw design_error(ErrorKind::Config, "design file truncated");
      m(j, i) = v;
    }
  }
  try {
    return DesignMatrix(std::move(m), scheme, seed);
  } catch (const Error& e) {
    throw design_error(ErrorKind::Config, e.what());
  }
}

DesignMatrix load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw design_error(ErrorKind::Config, "cannot open design file '" + path + "'");
  return read_design(in);
}

}  // namespace rpf
