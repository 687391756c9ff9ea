#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <fmt/format.h>
#include <json.hpp>

#include "rpf/app.hpp"
#include "rpf/error.hpp"

namespace rpf::app {

using json = nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json one_based(const IndexSet& set) {
  json arr = json::array();
  for (std::size_t i : set) arr.push_back(i + 1);
  return arr;
}

json sparse_pairs(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) arr.push_back(json::array({i + 1, v(i)}));
  }
  return arr;
}

}  // namespace

std::string version() { return RPF_VERSION; }

void Artifacts::add(std::string name, std::string content) {
  for (auto& [n, c] : files_) {
    if (n == name) {
      c = std::move(content);
      return;
    }
  }
  files_.emplace_back(std::move(name), std::move(content));
}

const std::string* Artifacts::find(const std::string& name) const {
  for (const auto& [n, c] : files_) {
    if (n == name) return &c;
  }
  return nullptr;
}

void Artifacts::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cli", ErrorKind::Config, "cannot create output directory " + dir + ": " + ec.message());
  for (const auto& [name, content] : files_) {
    const fs::path target = fs::path(dir) / name;
    const fs::path tmp = fs::path(dir) / ("." + name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw Error("cli", ErrorKind::Config, "cannot write " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) throw Error("cli", ErrorKind::Config, "cannot write " + target.string() + ": " + ec.message());
  }
}

void add_manifest(Artifacts& artifacts, const std::string& command, const Config& config) {
  json m;
  m["command"] = command;
  m["version"] = version();
  // The output directory does not affect results, so it stays out.
  Config hashed;
  for (const auto& [k, v] : config.entries()) {
    if (k != "out") hashed.set(k, v);
  }
  m["config_hash"] = fmt::format("{:016x}", hashed.hash());
  m["seed"] = config.has("seed") ? json(config.str("seed")) : json(nullptr);
  json cfg = json::object();
  for (const auto& [k, v] : hashed.entries()) cfg[k] = v;
  m["config"] = cfg;
  json files = json::array();
  for (const auto& [name, content] : artifacts.files()) {
    files.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a", fmt::format("{:016x}", fnv1a(content))}});
  }
  m["artifacts"] = files;
  m["build"] = {{"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                {"compiler", __VERSION__}};
  artifacts.add("manifest.json", m.dump(2) + "\n");
}

std::string bound_json(const BoundReport& report) {
  json j;
  j["calculator"] = report.calculator;
  j["r"] = report.r;
  j["r_min"] = report.r_min;
  j["t"] = report.t;
  j["alpha"] = report.alpha ? json(*report.alpha) : json(nullptr);
  j["n_min"] = report.n_min ? json(*report.n_min) : json(nullptr);
  j["vacuous"] = report.vacuous;
  for (const auto& [k, v] : report.extras) j["extras." + k] = v;
  return j.dump(2);
}

Artifacts estimate_artifacts(const RunConfig& rc, const EstimateRun& run) {
  Artifacts a;

  std::string e_csv = "j,E_j,se_j\n";
  for (std::size_t j = 0; j < run.E.values.size(); ++j) {
    e_csv += fmt::format("{},{:.17g},{:.17g}\n", j + 1, run.E.values[j], run.se[j]);
  }
  a.add("E.csv", std::move(e_csv));

  std::ostringstream path_csv;
  write_path_csv(path_csv, run.path);
  a.add("path.csv", path_csv.str());

  std::ostringstream design_txt;
  write_design(design_txt, run.design);
  a.add("design.txt", design_txt.str());

  json rec;
  rec["threshold"] = run.recovery.threshold;
  rec["threshold_rule"] = rc.threshold;
  rec["r"] = run.chosen.r;
  rec["converged"] = run.chosen.converged;
  rec["kkt_residual"] = run.chosen.kkt_residual;
  rec["support"] = one_based(run.recovery.support);
  rec["rejected"] = one_based(run.recovery.rejected);
  rec["undecided"] = one_based(run.recovery.undecided);
  rec["s_min"] = run.recovery.s_min ? json(*run.recovery.s_min) : json(nullptr);
  rec["s_hat"] = sparse_pairs(run.chosen.s_hat);
  if (run.recovery.refit_values.size() > 0) {
    rec["refit"] = {{"source", rc.refit}, {"values", sparse_pairs(run.recovery.refit_values)}};
  } else {
    rec["refit"] = nullptr;
  }
  if (run.recovery.truth) {
    const auto& t = *run.recovery.truth;
    rec["truth"] = {{"support", one_based(run.true_support)},
                    {"true_positives", t.true_positives},
                    {"false_positives", t.false_positives},
                    {"false_negatives", t.false_negatives},
                    {"exact", t.exact}};
  }
  rec["noise_scale"] = run.noise;
  if (run.bound) rec["bound"] = json::parse(bound_json(*run.bound));
  a.add("recovery.json", rec.dump(2) + "\n");

  json ev;
  ev["scheme"] = scheme_name(run.design.scheme());
  ev["estimator"] = run.sample.kind == EstimatorKind::Delta ? "delta" : "closed";
  ev["n"] = run.sample.n;
  ev["N"] = run.sample.N;
  ev["eval_count"] = run.sample.eval_count;
  ev["expected"] = run.expected_evals;
  ev["formula"] = run.sample.kind == EstimatorKind::Delta ? "(2n+1)N" : "(n+1)N";
  ev["matches"] = run.sample.eval_count == run.expected_evals;
  ev["refit_eval_count"] = run.refit_evals;
  ev["one_at_a_time_cost"] = static_cast<std::uint64_t>(run.model.dim() + 1) * run.sample.N;
  a.add("evals.json", ev.dump(2) + "\n");
  return a;
}

}  // namespace rpf::app
