#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rpf/app.hpp"
#include "rpf/error.hpp"

namespace rpf::app {

namespace {

Error config_error(const std::string& message) {
  return Error("config", ErrorKind::Config, message);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string Config::normalize_key(std::string key) {
  key = trim(key);
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

Config Config::parse(std::istream& in, const std::string& origin) {
  Config cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw config_error(origin + ":" + std::to_string(lineno) + ": expected key=value");
    }
    cfg.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) {
  const std::string k = normalize_key(key);
  if (k.empty()) throw config_error("empty key");
  entries_[k] = trim(value);
}

bool Config::has(const std::string& key) const { return entries_.count(normalize_key(key)) != 0; }

std::string Config::str(const std::string& key) const {
  const auto it = entries_.find(normalize_key(key));
  if (it == entries_.end()) throw config_error("missing required key '" + key + "'");
  return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

double Config::real(const std::string& key) const {
  const std::string v = str(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw config_error("key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

double Config::real(const std::string& key, double fallback) const {
  return has(key) ? real(key) : fallback;
}

std::uint64_t Config::count(const std::string& key) const {
  const std::string v = str(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) return out;
  // Accept integral values written in floating notation, e.g. 1e6.
  const double d = real(key);
  if (d < 0.0 || d != std::floor(d) || d > 9007199254740992.0) {
    throw config_error("key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return static_cast<std::uint64_t>(d);
}

std::uint64_t Config::count(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? count(key) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = str(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw config_error("key '" + key + "': '" + v + "' is not a boolean");
}

std::optional<double> Config::maybe_real(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return real(key);
}

std::optional<std::uint64_t> Config::maybe_count(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return count(key);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig run_config(const Config& config) {
  RunConfig rc;
  if (config.has("model")) {
    const std::string m = config.str("model");
    if (m != "reference") rc.model_path = m;
  }
  rc.p = config.count("p", rc.p);
  if (config.has("scheme")) rc.scheme = parse_scheme(config.str("scheme"));
  if (config.has("design")) rc.design_path = config.str("design");
  rc.n = config.count("n", rc.n);
  rc.N = config.count("N", rc.N);
  rc.seed = config.count("seed", rc.seed);
  rc.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, config.count("workers", 1)));
  rc.r_count = config.count("r_count", rc.r_count);
  rc.r_ratio = config.real("r_ratio", rc.r_ratio);
  rc.r = config.maybe_real("r");
  rc.threshold = config.str("threshold", rc.threshold);
  rc.threshold_k = config.real("threshold_k", rc.threshold_k);
  rc.s_min = config.maybe_real("s_min");
  rc.refit = config.str("refit", rc.refit);
  rc.calculator = config.str("calculator", rc.calculator);
  rc.alpha_max = config.real("alpha_max", rc.alpha_max);
  rc.lasso.tol = config.real("tol", rc.lasso.tol);
  rc.lasso.max_iter = config.count("max_iter", rc.lasso.max_iter);
  rc.out = config.str("out", rc.out);

  if (rc.p == 0) throw config_error("p must be positive");
  if (rc.n == 0 && !rc.design_path) throw config_error("n must be positive");
  if (rc.N < 2) throw config_error("N must be at least 2");
  if (rc.r_count == 0) throw config_error("r_count must be positive");
  if (!(rc.r_ratio > 0.0 && rc.r_ratio < 1.0)) throw config_error("r_ratio must lie in (0, 1)");
  if (rc.r && !(*rc.r > 0.0)) throw config_error("r must be positive");
  if (rc.refit != "same" && rc.refit != "fresh" && rc.refit != "none") {
    throw config_error("refit must be same, fresh or none");
  }
  if (rc.threshold != "auto" && rc.threshold != "bound") {
    std::istringstream probe(rc.threshold);
    double t = 0.0;
    if (!(probe >> t) || !probe.eof() || !(t >= 0.0)) {
      throw config_error("threshold must be auto, bound or a non-negative number");
    }
  }
  if (!(rc.alpha_max > 0.0 && rc.alpha_max < 1.0)) throw config_error("alpha_max must lie in (0, 1)");
  if (!(rc.lasso.tol > 0.0)) throw config_error("tol must be positive");
  return rc;
}

BoundParams bound_params(const Config& config) {
  BoundParams bp;
  bp.p = config.maybe_count("p");
  bp.s = config.maybe_count("s");
  bp.n = config.maybe_count("n");
  bp.N = config.maybe_count("N");
  bp.d = config.maybe_count("d");
  bp.mu = config.maybe_real("mu");
  bp.delta = config.maybe_real("delta");
  bp.delta_prime = config.maybe_real("delta_prime");
  bp.A = config.maybe_real("A");
  bp.sigma = config.maybe_real("sigma");
  bp.c = config.maybe_real("c");
  bp.C1 = config.maybe_real("C1");
  bp.C2 = config.maybe_real("C2");
  bp.C3 = config.maybe_real("C3");
  bp.e = config.maybe_real("e");
  bp.r = config.maybe_real("r");
  bp.rho = config.maybe_real("rho");
  bp.kappa = config.maybe_real("kappa");
  bp.theta1 = config.maybe_real("theta1");
  bp.theta2 = config.maybe_real("theta2");
  bp.r0 = config.maybe_real("r0");
  return bp;
}

}  // namespace rpf::app
