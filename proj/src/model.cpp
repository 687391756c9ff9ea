#include "rpf/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rpf/error.hpp"

namespace rpf {

namespace {

Error model_error(ErrorKind kind, const std::string& message) {
  return Error("model", kind, message);
}

}  // namespace

InputSpec InputSpec::uniform(std::size_t p) {
  return InputSpec{p, std::vector<InputDistribution>(p, InputDistribution::Uniform01)};
}

double AdditiveTerm::operator()(double x) const noexcept {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

AdditiveModel::AdditiveModel(InputSpec input, std::vector<AdditiveTerm> terms)
    : input_(std::move(input)), terms_(std::move(terms)) {
  if (input_.p == 0) {
    throw model_error(ErrorKind::Domain, "input dimension must be at least 1");
  }
  if (input_.distributions.size() != input_.p) {
    throw model_error(ErrorKind::Domain,
                      "distribution list length does not match input dimension");
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const AdditiveTerm& a, const AdditiveTerm& b) { return a.index < b.index; });
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].index >= input_.p) {
      throw model_error(ErrorKind::Domain,
                        "term index " + std::to_string(terms_[k].index + 1) +
                            " outside [1, " + std::to_string(input_.p) + "]");
    }
    if (k > 0 && terms_[k].index == terms_[k - 1].index) {
      throw model_error(ErrorKind::Domain,
                        "duplicate term for input " + std::to_string(terms_[k].index + 1));
    }
  }
}

double AdditiveModel::evaluate(std::span<const double> x) const {
  if (x.size() != input_.p) {
    throw model_error(ErrorKind::Domain, "point has dimension " + std::to_string(x.size()) +
                                             ", model expects " + std::to_string(input_.p));
  }
  double y = 0.0;
  for (const auto& term : terms_) y += term(x[term.index]);
  return y;
}

std::size_t AdditiveModel::sparsity() const {
  return static_cast<std::size_t>(std::count_if(terms_.begin(), terms_.end(), [](const AdditiveTerm& t) {
    return uniform_polynomial_variance(t.coefficients) > 0.0;
  }));
}

AdditiveModel AdditiveModel::reference(std::size_t p) {
  if (p < 3) throw model_error(ErrorKind::Domain, "reference model needs p >= 3");
  return AdditiveModel(InputSpec::uniform(p), {
                                                  {0, {0.0, 4.0, 1.0}},
                                                  {1, {0.0, 4.0}},
                                                  {2, {0.0, 10.0}},
                                              });
}

double uniform_polynomial_variance(std::span<const double> c) {
  // E[p] = sum c_a / (a+1);  E[p^2] = sum_{a,b} c_a c_b / (a+b+1).
  double mean = 0.0;
  for (std::size_t a = 0; a < c.size(); ++a) mean += c[a] / static_cast<double>(a + 1);
  double second = 0.0;
  for (std::size_t a = 0; a < c.size(); ++a) {
    for (std::size_t b = 0; b < c.size(); ++b) {
      second += c[a] * c[b] / static_cast<double>(a + b + 1);
    }
  }
  // Constant terms can leave a tiny negative residue.
  return std::max(0.0, second - mean * mean);
}

SobolVector analytic_sobol(const AdditiveModel& model) {
  for (auto d : model.input().distributions) {
    if (d != InputDistribution::Uniform01) {
      throw model_error(ErrorKind::Domain, "analytic indices need uniform [0,1] inputs");
    }
  }
  SobolVector out;
  out.values.assign(model.dim(), 0.0);
  for (const auto& term : model.terms()) {
    const double v = uniform_polynomial_variance(term.coefficients);
    out.values[term.index] = v;
    out.total_variance += v;
  }
  if (!(out.total_variance > 0.0)) {
    throw model_error(ErrorKind::Numerical, "model output has zero variance");
  }
  for (auto& v : out.values) v /= out.total_variance;
  return out;
}

double closed_index(const SobolVector& sobol, std::span<const std::size_t> F) {
  double acc = 0.0;
  for (auto i : F) {
    if (i >= sobol.values.size()) {
      throw model_error(ErrorKind::Domain, "index set element out of range");
    }
    acc += sobol.values[i];
  }
  return acc;
}

double closed_index(const AdditiveModel& model, std::span<const std::size_t> F) {
  return closed_index(analytic_sobol(model), F);
}

AdditiveModel read_model(std::istream& in, std::size_t p) {
  std::vector<AdditiveTerm> terms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long index = 0;
    if (!(fields >> index)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw model_error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected term index");
    }
    if (index < 1) {
      throw model_error(ErrorKind::Config, "line " + std::to_string(line_no) + ": index must be >= 1");
    }
    AdditiveTerm term{static_cast<std::size_t>(index - 1), {}};
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        term.coefficients.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw model_error(ErrorKind::Config,
                          "line " + std::to_string(line_no) + ": bad coefficient '" + token + "'");
      }
    }
    if (term.coefficients.empty()) {
      throw model_error(ErrorKind::Config, "line " + std::to_string(line_no) + ": no coefficients");
    }
    terms.push_back(std::move(term));
  }
  try {
    return AdditiveModel(InputSpec::uniform(p), std::move(terms));
  } catch (const Error& e) {
    throw model_error(ErrorKind::Config, e.what());
  }
}

AdditiveModel load_model(const std::string& path, std::size_t p) {
  std::ifstream in(path);
  if (!in) throw model_error(ErrorKind::Config, "cannot open model file '" + path + "'");
  return read_model(in, p);
}

void write_model(std::ostream& out, const AdditiveModel& model) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& term : model.terms()) {
    out << term.index + 1;
    for (double c : term.coefficients) out << ' ' << c;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace rpf
