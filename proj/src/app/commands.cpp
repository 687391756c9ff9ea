#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "rpf/app.hpp"
#include "rpf/error.hpp"
#include "rpf/rng.hpp"

namespace rpf::app {

using json = nlohmann::ordered_json;

namespace {

Error cli_error(ErrorKind kind, const std::string& message) { return Error("cli", kind, message); }

const std::set<std::string> kPipelineKeys = {
    "model", "p", "scheme", "design", "n", "N", "seed", "workers", "r_count", "r_ratio", "r",
    "threshold", "threshold_k", "s_min", "refit", "calculator", "alpha_max", "tol", "max_iter", "out"};

const std::set<std::string> kBoundKeys = {
    "calculator", "optimize", "alpha_max", "p", "s", "n", "N", "d", "mu", "delta", "delta_prime",
    "A", "sigma", "c", "C1", "C2", "C3", "e", "r", "rho", "kappa", "theta1", "theta2", "r0",
    "width", "confidence", "out"};

const std::set<std::string> kDesignKeys = {"design", "scheme", "n", "p", "seed", "s", "e", "mode",
                                           "samples", "rho", "kappa", "trials", "out"};

void check_keys(const Config& config, const std::set<std::string>& allowed, const std::string& command,
                std::initializer_list<const char*> extra = {}) {
  for (const auto& [k, v] : config.entries()) {
    if (allowed.count(k)) continue;
    if (std::any_of(extra.begin(), extra.end(), [&](const char* e) { return k == e; })) continue;
    throw cli_error(ErrorKind::Config, "unknown key '" + k + "' for " + command);
  }
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double choose_threshold(const RunConfig& rc, const DesignMatrix& design, double noise, std::size_t s,
                        std::optional<BoundReport>& bound) {
  if (rc.threshold == "auto") return noise_threshold(noise, design.entries(), rc.threshold_k);
  if (rc.threshold != "bound") return std::stod(rc.threshold);

  std::string calc = rc.calculator;
  if (calc.empty()) calc = design.alphabet() == Alphabet::Sign ? "rademacher" : "bernoulli";
  const Calculator id = parse_calculator(calc);
  BoundParams bp;
  bp.p = design.cols();
  bp.s = std::max<std::size_t>(s, 1);
  bp.n = design.rows();
  bp.sigma = noise;
  if (id == Calculator::Bernoulli) {
    const auto* b = std::get_if<Bernoulli>(&design.scheme());
    if (!b) throw cli_error(ErrorKind::Config, "the bernoulli calculator needs a bernoulli design");
    bp.mu = b->mu;
  }
  bound = optimize_params(id, bp, rc.alpha_max);
  return bound->t;
}

IndexSet positive_support(const SobolVector& truth) {
  IndexSet out;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    if (truth.values[i] > 0.0) out.push_back(i);
  }
  return out;
}

}  // namespace

EstimateRun run_estimate(const RunConfig& rc) {
  AdditiveModel model = rc.model_path ? load_model(*rc.model_path, rc.p) : AdditiveModel::reference(rc.p);
  DesignMatrix design = rc.design_path ? load_design(*rc.design_path) : sample_design(rc.scheme, rc.n, rc.p, rc.seed);
  if (design.cols() != model.dim()) {
    throw cli_error(ErrorKind::Config, fmt::format("design has {} columns but the model has {} inputs",
                                                   design.cols(), model.dim()));
  }
  EstimateRun run{std::move(model), std::move(design)};
  const auto& phi = run.design.entries();

  const MonteCarloPlan plan{rc.N, rc.seed, estimator_kind_for(run.design), rc.workers};
  run.sample = simulate(run.model, run.design, plan);
  run.expected_evals = expected_eval_count(plan.kind, run.design.rows(), rc.N);
  run.E = estimate_vector(run.sample);
  run.se.resize(run.E.values.size());
  for (std::size_t j = 0; j < run.se.size(); ++j) run.se[j] = jackknife_se(run.sample, j);
  run.noise = *std::max_element(run.se.begin(), run.se.end());

  const Eigen::VectorXd E = as_vector(run.E.values);
  run.path = path(E, phi, default_r_grid(lambda_max(E, phi), rc.r_count, rc.r_ratio), rc.lasso);
  if (rc.r) {
    // Warm start from the closest path point above r.
    Eigen::VectorXd warm;
    for (const auto& sol : run.path) {
      if (sol.r >= *rc.r) warm = sol.s_hat;
    }
    run.chosen = solve({E, phi, *rc.r}, rc.lasso, warm);
  } else {
    run.chosen = run.path.back();
  }

  run.truth = analytic_sobol(run.model);
  run.true_support = positive_support(run.truth);
  const double t = choose_threshold(rc, run.design, run.noise, run.true_support.size(), run.bound);
  run.recovery = threshold_support(run.chosen.s_hat, t, rc.s_min);
  run.recovery.truth = compare_support(run.recovery.support, run.true_support);

  if (rc.refit == "same") {
    run.recovery.refit_values = refit_least_squares(E, phi, run.recovery.support);
  } else if (rc.refit == "fresh") {
    const MonteCarloPlan fresh{rc.N, counter_bits(rc.seed, Stream::Refit, 0, 0), plan.kind, rc.workers};
    const PickFreezeSample second = simulate(run.model, run.design, fresh);
    run.refit_evals = second.eval_count;
    run.recovery.refit_values = refit_least_squares(as_vector(estimate_vector(second).values), phi,
                                                    run.recovery.support);
  }
  return run;
}

bool recovers_reference(const EstimateRun& run) {
  if (!run.recovery.truth || !run.recovery.truth->exact) return false;
  // Every pair of active indices must be ordered as the true indices are.
  const auto& sup = run.true_support;
  for (std::size_t a = 0; a < sup.size(); ++a) {
    for (std::size_t b = 0; b < sup.size(); ++b) {
      const auto i = static_cast<Eigen::Index>(sup[a]);
      const auto k = static_cast<Eigen::Index>(sup[b]);
      if (run.truth.values[sup[a]] > run.truth.values[sup[b]] && !(run.chosen.s_hat(i) > run.chosen.s_hat(k))) {
        return false;
      }
    }
  }
  return true;
}

bool ExperimentResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

ExperimentResult reproduce_figure(const std::string& id, const Config& user) {
  Config cfg;
  const bool bernoulli = id == "fig1";
  cfg.set("scheme", bernoulli ? "bernoulli:0.5" : "rademacher");
  cfg.set("N", bernoulli ? "3000" : "2000");
  cfg.set("n", "30");
  cfg.set("p", "300");
  for (const auto& [k, v] : user.entries()) cfg.set(k, v);
  const std::uint64_t seeds = cfg.count("seeds", 10);
  const double rate = cfg.real("required_rate", bernoulli ? 0.8 : 0.9);
  Config pipeline;
  for (const auto& [k, v] : cfg.entries()) {
    if (k != "seeds" && k != "required_rate") pipeline.set(k, v);
  }
  check_keys(pipeline, kPipelineKeys, "reproduce " + id);
  RunConfig rc = run_config(pipeline);
  const std::uint64_t base = rc.seed;

  ExperimentResult res;
  res.id = id;
  json runs = json::array();
  std::uint64_t ok = 0;
  bool evals_ok = true;
  for (std::uint64_t k = 0; k < seeds; ++k) {
    rc.seed = base + k;
    const EstimateRun run = run_estimate(rc);
    const bool success = recovers_reference(run);
    ok += success ? 1 : 0;
    evals_ok = evals_ok && run.sample.eval_count == run.expected_evals;
    std::ostringstream csv;
    write_path_csv(csv, run.path);
    res.artifacts.add(fmt::format("{}_seed{}_path.csv", id, rc.seed), csv.str());
    json s_hat = json::array();
    for (std::size_t i : run.true_support) s_hat.push_back(run.chosen.s_hat(static_cast<Eigen::Index>(i)));
    json support = json::array();
    for (std::size_t i : run.recovery.support) support.push_back(i + 1);
    runs.push_back({{"seed", rc.seed},
                    {"threshold", run.recovery.threshold},
                    {"r", run.chosen.r},
                    {"support", support},
                    {"s_hat_active", s_hat},
                    {"success", success},
                    {"eval_count", run.sample.eval_count},
                    {"expected_evals", run.expected_evals}});
  }
  const auto required = static_cast<std::uint64_t>(std::ceil(rate * static_cast<double>(seeds) - 1e-9));
  res.checks.push_back({"support_and_ordering", ok >= required,
                        fmt::format("{}/{} seeds recover the support and ordering (need {})", ok, seeds, required)});
  res.checks.push_back({"eval_accounting", evals_ok,
                        bernoulli ? "model calls equal (n+1)N on every run" : "model calls equal (2n+1)N on every run"});
  json summary;
  summary["experiment"] = id;
  summary["scheme"] = scheme_name(rc.scheme);
  summary["runs"] = runs;
  summary["successes"] = ok;
  summary["required"] = required;
  json checks = json::array();
  for (const auto& c : res.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  summary["checks"] = checks;
  res.artifacts.add(id + "_summary.json", summary.dump(2) + "\n");
  return res;
}

ExperimentResult reproduce_scenario(const Config& user) {
  Config cfg;
  cfg.set("p", "30000");
  cfg.set("s", "3");
  cfg.set("n", "100");
  cfg.set("sigma", "1e-3");
  cfg.set("alpha_max", "0.05");
  cfg.set("target_t", "0.03");
  cfg.set("width", "0.03");
  cfg.set("confidence", "0.95");
  for (const auto& [k, v] : user.entries()) cfg.set(k, v);

  BoundParams bp;
  bp.p = cfg.count("p");
  bp.s = cfg.count("s");
  bp.n = cfg.count("n");
  bp.sigma = cfg.real("sigma");
  const double alpha_max = cfg.real("alpha_max");
  const double target_t = cfg.real("target_t");
  const BoundReport best = optimize_params(Calculator::Rademacher, bp, alpha_max);
  const std::uint64_t p = *bp.p;
  const std::uint64_t n = *bp.n;
  const ClassicalCost classical = classical_cost(p, cfg.real("width"), cfg.real("confidence"));

  // Unit-variance estimators averaged over N draws have noise 1/sqrt(N).
  const double N = std::round(1.0 / (*bp.sigma * *bp.sigma));
  const double rpf_rounded = 3.0 * N * static_cast<double>(n);
  const double rpf_exact = (2.0 * static_cast<double>(n) + 1.0) * N;

  ExperimentResult res;
  res.id = "scenario232";
  res.checks.push_back({"bound_feasible", best.t <= target_t && best.alpha && *best.alpha <= alpha_max,
                        fmt::format("t = {:.6g} with alpha = {:.6g} (A = {:.6g}, delta' = {:.6g})", best.t,
                                    best.alpha.value_or(1.0), best.extras.at("A"), best.extras.at("delta_prime"))});
  res.checks.push_back({"interval_constant", std::abs(classical.interval_width_constant - 9.568) <= 1e-3,
                        fmt::format("2z = {:.6f} (reference 9.568)", classical.interval_width_constant)});
  res.checks.push_back({"classical_sample_size",
                        std::abs(static_cast<double>(classical.N_prime) - 101720.0) <= 0.005 * 101720.0,
                        fmt::format("N' = {} (reference 101720)", classical.N_prime)});
  res.checks.push_back({"classical_total", std::abs(classical.total_evals - 6.1032e9) <= 0.01 * 6.1032e9,
                        fmt::format("total = {:.6g} (reference 6.1032e9)", classical.total_evals)});
  res.checks.push_back({"rpf_cheaper", rpf_exact < classical.total_evals && rpf_rounded < classical.total_evals,
                        fmt::format("pick-freeze {:.6g} calls ((2n+1)N; 3Nn = {:.6g}) vs {:.6g}", rpf_exact,
                                    rpf_rounded, classical.total_evals)});

  json j;
  j["experiment"] = res.id;
  j["bound"] = json::parse(bound_json(best));
  j["classical"] = {{"per_test_level", classical.per_test_level},
                    {"z", classical.z},
                    {"interval_width_constant", classical.interval_width_constant},
                    {"N_prime", classical.N_prime},
                    {"total_evals", classical.total_evals}};
  j["pick_freeze"] = {{"N", N}, {"n", n}, {"evals_exact", rpf_exact}, {"evals_3Nn", rpf_rounded}};
  json checks = json::array();
  for (const auto& c : res.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = checks;
  res.artifacts.add("scenario232.json", j.dump(2) + "\n");
  return res;
}

ExperimentResult reproduce_baseline(const Config& user) {
  const std::size_t p = user.count("p", 300);
  const std::size_t N = user.count("N", 1000);
  const std::size_t n = user.count("n", 30);
  const std::uint64_t seed = user.count("seed", 1);
  const AdditiveModel model = user.has("model") && user.str("model") != "reference"
                                  ? load_model(user.str("model"), p)
                                  : AdditiveModel::reference(p);
  std::atomic<std::uint64_t> calls{0};
  const ModelFunction counted = [&](std::span<const double> x) {
    calls.fetch_add(1, std::memory_order_relaxed);
    return model(x);
  };
  const OneAtATimeSweep sweep = one_at_a_time(counted, p, N, seed);
  const std::uint64_t expected = static_cast<std::uint64_t>(p + 1) * N;
  const SobolVector truth = analytic_sobol(model);

  ExperimentResult res;
  res.id = "baseline";
  res.checks.push_back({"eval_accounting", calls.load() == expected && sweep.eval_count == expected,
                        fmt::format("counted {} calls, reported {}, expected (p+1)N = {}", calls.load(),
                                    sweep.eval_count, expected)});
  json j;
  j["experiment"] = res.id;
  j["p"] = p;
  j["N"] = N;
  j["seed"] = seed;
  j["eval_count"] = calls.load();
  j["expected"] = expected;
  j["pick_freeze_cost"] = {{"closed", expected_eval_count(EstimatorKind::Closed, n, N)},
                           {"delta", expected_eval_count(EstimatorKind::Delta, n, N)},
                           {"n", n}};
  json values = json::array();
  for (std::size_t i = 0; i < p; ++i) values.push_back(json::array({i + 1, sweep.values[i], truth.values[i]}));
  j["values"] = values;
  json checks = json::array();
  for (const auto& c : res.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = checks;
  res.artifacts.add("baseline.json", j.dump(2) + "\n");
  return res;
}

}  // namespace

ExperimentResult reproduce(const std::string& id, const Config& config) {
  if (id == "fig1" || id == "fig2") return reproduce_figure(id, config);
  if (id == "scenario232") {
    check_keys(config, {"p", "s", "n", "sigma", "alpha_max", "target_t", "width", "confidence", "out"},
               "reproduce scenario232");
    return reproduce_scenario(config);
  }
  if (id == "baseline") {
    check_keys(config, {"p", "N", "n", "seed", "model", "out"}, "reproduce baseline");
    return reproduce_baseline(config);
  }
  throw cli_error(ErrorKind::Config, "unknown experiment '" + id + "' (fig1, fig2, scenario232, baseline)");
}

namespace {

struct EFile {
  std::vector<double> values;
  std::vector<double> se;
};

EFile read_e_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cli_error(ErrorKind::Config, "cannot open " + path);
  EFile f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("j,", 0) == 0) continue;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    try {
      if (cells.size() < 2 || std::stoull(cells[0]) != f.values.size() + 1) throw std::invalid_argument("row");
      f.values.push_back(std::stod(cells[1]));
      if (cells.size() >= 3) f.se.push_back(std::stod(cells[2]));
    } catch (const std::exception&) {
      throw cli_error(ErrorKind::Config, fmt::format("{}:{}: expected 'j,E_j[,se_j]' with j = {}", path, lineno,
                                                     f.values.size() + 1));
    }
  }
  if (!f.se.empty() && f.se.size() != f.values.size()) {
    throw cli_error(ErrorKind::Config, path + ": se_j must be given on every row or none");
  }
  return f;
}

int path_command(const Config& config, std::ostream& out) {
  check_keys(config, {"E", "design", "r_count", "r_ratio", "r", "threshold", "threshold_k", "s_min", "refit",
                      "tol", "max_iter", "out"},
             "path");
  const EFile ef = read_e_csv(config.str("E"));
  const DesignMatrix design = load_design(config.str("design"));
  const auto& phi = design.entries();
  const Eigen::VectorXd E = as_vector(ef.values);
  Config pc;
  for (const auto& [k, v] : config.entries()) {
    if (k != "E") pc.set(k, v);
  }
  const RunConfig rc = run_config(pc);

  const auto sols = path(E, phi, default_r_grid(lambda_max(E, phi), rc.r_count, rc.r_ratio), rc.lasso);
  LassoSolution chosen = sols.back();
  if (rc.r) chosen = solve({E, phi, *rc.r}, rc.lasso);

  double t = 0.0;
  if (rc.threshold == "auto") {
    if (ef.se.empty()) throw cli_error(ErrorKind::Config, "threshold=auto needs the se_j column in E");
    t = noise_threshold(*std::max_element(ef.se.begin(), ef.se.end()), phi, rc.threshold_k);
  } else if (rc.threshold == "bound") {
    throw cli_error(ErrorKind::Config, "threshold=bound is available in estimate only");
  } else {
    t = std::stod(rc.threshold);
  }
  RecoveryReport rec = threshold_support(chosen.s_hat, t, rc.s_min);
  if (rc.refit != "none") rec.refit_values = refit_least_squares(E, phi, rec.support);

  Artifacts a;
  std::ostringstream csv;
  write_path_csv(csv, sols);
  a.add("path.csv", csv.str());
  json j;
  j["threshold"] = t;
  j["r"] = chosen.r;
  j["converged"] = chosen.converged;
  json sup = json::array();
  for (std::size_t i : rec.support) sup.push_back(i + 1);
  j["support"] = sup;
  json refit = json::array();
  for (std::size_t i : rec.support) {
    if (rec.refit_values.size() > 0) refit.push_back(json::array({i + 1, rec.refit_values(static_cast<Eigen::Index>(i))}));
  }
  j["refit"] = refit;
  a.add("recovery.json", j.dump(2) + "\n");
  add_manifest(a, "path", config);
  a.write(rc.out);
  out << "support:";
  for (std::size_t i : rec.support) out << ' ' << i + 1;
  out << fmt::format("\nthreshold {:.6g} at r = {:.6g}; wrote {}\n", t, chosen.r, rc.out);
  return kOk;
}

int estimate_command(const Config& config, std::ostream& out) {
  check_keys(config, kPipelineKeys, "estimate");
  const RunConfig rc = run_config(config);
  const EstimateRun run = run_estimate(rc);
  Artifacts a = estimate_artifacts(rc, run);
  add_manifest(a, "estimate", config);
  a.write(rc.out);
  out << "support:";
  for (std::size_t i : run.recovery.support) out << ' ' << i + 1;
  out << fmt::format("\nthreshold {:.6g} at r = {:.6g}; {} model calls (expected {}); wrote {}\n",
                     run.recovery.threshold, run.chosen.r, run.sample.eval_count, run.expected_evals, rc.out);
  return run.sample.eval_count == run.expected_evals ? kOk : kCheckFailed;
}

int bounds_command(const Config& config, std::ostream& out) {
  check_keys(config, kBoundKeys, "bounds");
  const std::string calc = config.str("calculator");
  std::string text;
  if (calc == "classical") {
    const ClassicalCost c = classical_cost(config.count("p"), config.real("width"), config.real("confidence"));
    json j;
    j["per_test_level"] = c.per_test_level;
    j["z"] = c.z;
    j["interval_width_constant"] = c.interval_width_constant;
    j["N_prime"] = c.N_prime;
    j["total_evals"] = c.total_evals;
    text = j.dump(2);
  } else {
    const Calculator id = parse_calculator(calc);
    const BoundParams bp = bound_params(config);
    BoundReport rep;
    if (config.flag("optimize", false)) {
      rep = optimize_params(id, bp, config.real("alpha_max", 0.05));
    } else {
      switch (id) {
        case Calculator::Bernoulli: rep = bernoulli_bound(bp); break;
        case Calculator::Rademacher: rep = rademacher_bound(bp); break;
        case Calculator::Tiebreak: rep = tiebreak_bound(bp); break;
        case Calculator::Expander: rep = expander_bound(bp, false); break;
        case Calculator::ExpanderSnr: rep = expander_bound(bp, true); break;
        case Calculator::BernoulliDesign: rep = bernoulli_design_bound(bp); break;
        case Calculator::Udp:
          rep = udp_linf_bound(config.real("rho"), config.real("kappa"), config.real("theta1"),
                               config.real("theta2"), config.real("r"), config.real("r0", 0.0), config.count("n"),
                               config.count("s"));
          break;
      }
    }
    text = bound_json(rep);
  }
  out << text << '\n';
  if (config.has("out")) {
    Artifacts a;
    a.add("bounds.json", text + "\n");
    add_manifest(a, "bounds", config);
    a.write(config.str("out"));
  }
  return kOk;
}

int verify_design_command(const Config& config, std::ostream& out) {
  check_keys(config, kDesignKeys, "verify-design");
  const DesignMatrix design =
      config.has("design")
          ? load_design(config.str("design"))
          : sample_design(parse_scheme(config.str("scheme")), config.count("n"), config.count("p"),
                          config.count("seed", 1));
  const std::size_t s = config.count("s", 2);
  bool ok = true;
  json j;
  j["rows"] = design.rows();
  j["cols"] = design.cols();
  j["scheme"] = scheme_name(design.scheme());
  const GramStats g = gram_stats(design);
  j["gram"] = {{"max_coherence", g.max_coherence},
               {"diag_min", g.diag_min},
               {"diag_max", g.diag_max},
               {"offdiag_mean", g.offdiag_mean}};
  if (design.alphabet() == Alphabet::Binary && config.has("e")) {
    const double e = config.real("e");
    const std::string mode = config.str("mode", "exhaustive");
    const ExpanderCheck chk = mode == "sample"
                                  ? sample_expansion(design, s, e, config.count("samples", 100000), config.count("seed", 1))
                                  : verify_expander(design, s, e);
    json witness = json::array();
    for (std::size_t i : chk.witness) witness.push_back(i + 1);
    j["expander"] = {{"mode", mode},
                     {"s", s},
                     {"e", e},
                     {"is_expander", chk.is_expander},
                     {"left_degree", chk.left_degree},
                     {"witness", witness},
                     {"witness_neighbors", chk.witness_neighbors},
                     {"worst_ratio", chk.worst_ratio},
                     {"subsets_checked", chk.subsets_checked}};
    ok = ok && chk.is_expander;
  }
  if (config.has("rho") && config.has("kappa")) {
    const auto ce = falsify_udp(design, s, config.real("rho"), config.real("kappa"), config.count("trials", 10000),
                                config.count("seed", 1));
    if (ce) {
      json T = json::array();
      for (std::size_t i : ce->T) T.push_back(i + 1);
      j["udp"] = {{"counterexample", true}, {"T", T}, {"lhs", ce->lhs}, {"rhs", ce->rhs}, {"gamma", ce->gamma}};
    } else {
      j["udp"] = {{"counterexample", false}};
    }
    ok = ok && !ce;
  }
  j["pass"] = ok;
  const std::string text = j.dump(2);
  out << text << '\n';
  if (config.has("out")) {
    Artifacts a;
    a.add("verify_design.json", text + "\n");
    add_manifest(a, "verify-design", config);
    a.write(config.str("out"));
  }
  return ok ? kOk : kCheckFailed;
}

int reproduce_command(const std::string& id, const Config& config, std::ostream& out) {
  Config inner;
  for (const auto& [k, v] : config.entries()) {
    if (k != "out") inner.set(k, v);
  }
  ExperimentResult res = reproduce(id, inner);
  add_manifest(res.artifacts, "reproduce " + id, config);
  res.artifacts.write(config.str("out", "out"));
  for (const auto& c : res.checks) {
    out << fmt::format("{} {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
  }
  return res.pass() ? kOk : kCheckFailed;
}

}  // namespace

int run_command(const std::string& command, const std::string& argument, const Config& config,
                std::ostream& out, std::ostream& err) {
  try {
    if (command == "estimate") return estimate_command(config, out);
    if (command == "path") return path_command(config, out);
    if (command == "bounds") return bounds_command(config, out);
    if (command == "verify-design") return verify_design_command(config, out);
    if (command == "reproduce") return reproduce_command(argument, config, out);
    if (command == "baseline") return reproduce_command("baseline", config, out);
    err << "error: unknown command '" << command << "'\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Numerical ? kNumericalError : kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace rpf::app
