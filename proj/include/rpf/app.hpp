#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rpf/bounds.hpp"
#include "rpf/design.hpp"
#include "rpf/lasso.hpp"
#include "rpf/model.hpp"
#include "rpf/pickfreeze.hpp"
#include "rpf/recovery.hpp"

namespace rpf::app {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kCheckFailed = 4 };

/// Flat key=value settings. '#' starts a comment; later assignments win.
/// Keys are normalized so that "alpha-max" and "alpha_max" are the same.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "config");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  std::uint64_t count(const std::string& key) const;
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::optional<double> maybe_real(const std::string& key) const;
  std::optional<std::uint64_t> maybe_count(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  /// Sorted "key=value" lines; the input of hash().
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical().
  std::uint64_t hash() const;

  static std::string normalize_key(std::string key);

 private:
  std::map<std::string, std::string> entries_;
};

/// Named text outputs held in memory and written together, so a failed
/// run leaves nothing behind.
class Artifacts {
 public:
  void add(std::string name, std::string content);
  const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }
  const std::string* find(const std::string& name) const;
  /// Creates `dir` if needed and writes every file.
  void write(const std::string& dir) const;

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct RunConfig {
  std::optional<std::string> model_path;  // empty: the built-in reference model
  std::size_t p = 300;
  DesignScheme scheme = Rademacher{};
  std::optional<std::string> design_path;  // overrides scheme sampling
  std::size_t n = 30;
  std::size_t N = 2000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t r_count = 60;
  double r_ratio = 1e-3;
  std::optional<double> r;  // recovery penalty; default is the smallest grid value
  std::string threshold = "auto";  // auto | bound | <number>
  double threshold_k = 2.0;
  std::optional<double> s_min;
  std::string refit = "same";  // same | fresh | none
  std::string calculator;       // for threshold=bound; defaults by design alphabet
  double alpha_max = 0.05;
  LassoOptions lasso;
  std::string out = "out";
};

RunConfig run_config(const Config& config);

struct EstimateRun {
  EstimateRun(AdditiveModel m, DesignMatrix d) : model(std::move(m)), design(std::move(d)) {}

  AdditiveModel model;
  DesignMatrix design;
  PickFreezeSample sample;
  EstimateVector E;
  std::vector<double> se;
  double noise = 0.0;
  std::vector<LassoSolution> path;
  LassoSolution chosen;
  RecoveryReport recovery;
  SobolVector truth;
  IndexSet true_support;
  std::uint64_t expected_evals = 0;
  std::uint64_t refit_evals = 0;
  std::optional<BoundReport> bound;
};

/// Sample design, simulate, estimate, LASSO path, threshold and refit.
EstimateRun run_estimate(const RunConfig& rc);

Artifacts estimate_artifacts(const RunConfig& rc, const EstimateRun& run);

/// Adds manifest.json describing `artifacts` and the run configuration.
void add_manifest(Artifacts& artifacts, const std::string& command, const Config& config);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string id;
  std::vector<Check> checks;
  Artifacts artifacts;
  bool pass() const;
};

/// fig1, fig2, scenario232 or baseline.
ExperimentResult reproduce(const std::string& id, const Config& config);

/// Support recovered with the right ordering of the three active indices.
bool recovers_reference(const EstimateRun& run);

/// Flat JSON of a bound report: r, r_min, t, alpha, n_min, vacuous, extras.*.
std::string bound_json(const BoundReport& report);
BoundParams bound_params(const Config& config);

/// Runs one subcommand; never throws. Module errors are printed to `err`
/// and mapped to exit codes.
int run_command(const std::string& command, const std::string& argument, const Config& config,
                std::ostream& out, std::ostream& err);

std::string version();

}  // namespace rpf::app
