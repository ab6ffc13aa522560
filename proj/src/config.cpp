#include "tcanard/config.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tcanard {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"run", {"command", "model", "output", "workers"}},
      {"params",
       {"epsilon", "k", "alpha", "a", "j_xx", "j_xy", "j_yx", "j_yy", "delta", "rho", "g1", "g2", "sigma_x", "sigma_y",
        "lambda_x", "lambda_y"}},
      {"integrator", {"rel_tol", "abs_tol", "max_step", "max_steps"}},
      {"classify",
       {"discard_slow", "horizon_slow", "y0", "r_quiet", "r_spike", "d_branch", "s_min", "r_tonic", "converge_tol",
        "drift_rate", "mu_escape", "min_bursts"}},
      {"simulate", {"sample_every"}},
      {"sweep", {"k", "k_min", "k_max", "k_count"}},
      {"hunt", {"k_lo", "k_hi", "predicate", "tol_k"}},
      {"singular", {"family", "p0", "p1", "p3", "mu_max", "samples", "per_family"}},
      {"fastbif", {"mu_lo", "mu_hi"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) throw ConfigError(key, "not a number: '" + text + "'");
  return v;
}

long to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) throw ConfigError(key, "not an integer: '" + text + "'");
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& t) : t_(t) {}

  std::optional<std::string> str(const std::string& key) const {
    if (auto v = t_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return trim(*v);
    return std::nullopt;
  }
  bool num(const std::string& key, double& out) const {
    if (auto v = str(key)) {
      out = to_double(key, *v);
      return true;
    }
    return false;
  }
  template <typename I>
  bool integer(const std::string& key, I& out) const {
    if (auto v = str(key)) {
      out = static_cast<I>(to_int(key, *v));
      return true;
    }
    return false;
  }
  std::string need(const std::string& key) const {
    auto v = str(key);
    if (!v) throw ConfigError(key, "required");
    return *v;
  }

 private:
  const pt::ptree& t_;
};

template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

void check_schema(const pt::ptree& t) {
  for (const auto& [section, body] : t) {
    const auto it = schema().find(section);
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside a section");
    if (it == schema().end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
      if (!value.empty()) throw ConfigError(section + "." + key, "nested value");
    }
  }
}

RunConfig from_tree(pt::ptree t) {
  check_schema(t);
  const Reader r(t);
  RunConfig c;
  c.raw = std::move(t);
  c.command = keyed("run.command", [&] { return parse_command(r.need("run.command")); });
  c.model = keyed("run.model", [&] { return parse_model_name(r.need("run.model")); });
  c.output = r.str("run.output").value_or("");
  if (c.output.find('/') != std::string::npos) throw ConfigError("run.output", "must be a file stem, not a path");
  r.integer("run.workers", c.workers);
  if (c.workers < 1) throw ConfigError("run.workers", "must be >= 1");

  ParamSet& p = c.params;
  if (c.model == ModelName::WilsonCowan) p = wilson_cowan_reference();
  r.num("params.epsilon", p.epsilon);
  r.num("params.k", p.k);
  r.num("params.alpha", p.alpha);
  r.num("params.a", p.a);
  auto& w = p.wc;
  for (auto [name, field] : std::initializer_list<std::pair<const char*, double*>>{
           {"j_xx", &w.j_xx}, {"j_xy", &w.j_xy}, {"j_yx", &w.j_yx}, {"j_yy", &w.j_yy}, {"delta", &w.delta},
           {"rho", &w.rho}, {"g1", &w.g1}, {"g2", &w.g2}, {"sigma_x", &w.sigma_x}, {"sigma_y", &w.sigma_y},
           {"lambda_x", &w.lambda_x}, {"lambda_y", &w.lambda_y}})
    r.num(std::string("params.") + name, *field);
  keyed("params", [&] { p.validate(); });

  auto& h = c.classify;
  auto& ic = h.integrator;
  r.num("integrator.rel_tol", ic.rel_tol);
  r.num("integrator.abs_tol", ic.abs_tol);
  r.num("integrator.max_step", ic.max_step);
  r.integer("integrator.max_steps", ic.max_steps);
  r.num("classify.discard_slow", h.discard_slow);
  r.num("classify.horizon_slow", h.horizon_slow);
  if (auto y = r.str("classify.y0")) {
    const auto v = to_list("classify.y0", *y);
    if (v.size() != 3) throw ConfigError("classify.y0", "needs 3 entries");
    h.y0 = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  Thresholds th = Thresholds::for_model(c.model);
  bool any = false;
  for (auto [name, field] : std::initializer_list<std::pair<const char*, double*>>{
           {"r_quiet", &th.r_quiet}, {"r_spike", &th.r_spike}, {"d_branch", &th.d_branch}, {"s_min", &th.s_min},
           {"r_tonic", &th.r_tonic}, {"converge_tol", &th.converge_tol}, {"drift_rate", &th.drift_rate},
           {"mu_escape", &th.mu_escape}})
    any |= r.num(std::string("classify.") + name, *field);
  any |= r.integer("classify.min_bursts", th.min_bursts);
  if (any) h.thresholds = th;
  keyed("integrator", [&] { ic.validate(); });
  keyed("classify", [&] { h.validate(); });

  r.num("simulate.sample_every", c.sample_every);
  if (!(c.sample_every > 0.0)) throw ConfigError("simulate.sample_every", "must be > 0");

  if (auto ks = r.str("sweep.k")) {
    c.k_grid = to_list("sweep.k", *ks);
  } else if (r.str("sweep.k_min") || r.str("sweep.k_max") || r.str("sweep.k_count")) {
    const double lo = to_double("sweep.k_min", r.need("sweep.k_min"));
    const double hi = to_double("sweep.k_max", r.need("sweep.k_max"));
    const long n = to_int("sweep.k_count", r.need("sweep.k_count"));
    if (n < 1) throw ConfigError("sweep.k_count", "must be >= 1");
    for (long i = 0; i < n; ++i) c.k_grid.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  }

  r.num("hunt.k_lo", c.k_lo);
  r.num("hunt.k_hi", c.k_hi);
  r.num("hunt.tol_k", c.tol_k);
  if (auto pr = r.str("hunt.predicate")) c.predicate = keyed("hunt.predicate", [&] { return TransitionPredicate::parse(*pr); });

  if (auto f = r.str("singular.family")) c.family = keyed("singular.family", [&] { return parse_orbit_class(*f); });
  auto& fp = c.family_params;
  for (auto [name, field] : std::initializer_list<std::pair<const char*, std::optional<double>*>>{
           {"p0", &fp.p0}, {"p1", &fp.p1}, {"p3", &fp.p3}}) {
    double v = 0.0;
    if (r.num(std::string("singular.") + name, v)) *field = v;
  }
  r.num("singular.mu_max", fp.mu_max);
  r.integer("singular.samples", fp.samples);
  r.integer("singular.per_family", c.per_family);

  r.num("fastbif.mu_lo", c.mu_lo);
  r.num("fastbif.mu_hi", c.mu_hi);

  switch (c.command) {
    case Command::Simulate:
    case Command::Sweep:
      if (c.model != ModelName::WilsonCowan && !c.spec().is_polar_model())
        throw ConfigError("run.model", "full-system classification needs canonical, leidenator or wilson-cowan");
      if (c.command == Command::Sweep && c.k_grid.empty()) throw ConfigError("sweep.k", "required");
      break;
    case Command::Hunt:
      r.need("hunt.k_lo");
      r.need("hunt.k_hi");
      r.need("hunt.predicate");
      if (!(c.k_lo < c.k_hi)) throw ConfigError("hunt.k_lo", "must be below hunt.k_hi");
      if (!(c.tol_k >= 1e-13)) throw ConfigError("hunt.tol_k", "must be >= 1e-13");
      break;
    case Command::Singular:
      if (c.model == ModelName::WilsonCowan) throw ConfigError("run.model", "no singular families for wilson-cowan");
      if (c.per_family < 1) throw ConfigError("singular.per_family", "must be >= 1");
      break;
    case Command::Fastbif:
      r.need("fastbif.mu_lo");
      r.need("fastbif.mu_hi");
      if (!(c.mu_lo < c.mu_hi)) throw ConfigError("fastbif.mu_lo", "must be below fastbif.mu_hi");
      break;
  }
  return c;
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Sweep: return "sweep";
    case Command::Hunt: return "hunt";
    case Command::Singular: return "singular";
    case Command::Fastbif: return "fastbif";
  }
  return "?";
}

Command parse_command(std::string_view s) {
  for (auto c : {Command::Simulate, Command::Sweep, Command::Hunt, Command::Singular, Command::Fastbif})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown command '" + std::string(s) + "'");
}

RunConfig parse_run_config(std::istream& in) {
  pt::ptree t;
  try {
    pt::read_ini(in, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  return from_tree(std::move(t));
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open");
  return parse_run_config(in);
}

RunConfig reparse(const RunConfig& c) { return from_tree(c.raw); }

void set_raw(RunConfig& c, const std::string& key, const std::string& value) {
  c.raw.put(pt::ptree::path_type(key, '.'), value);
}

std::string echo(const RunConfig& c) {
  std::ostringstream os;
  pt::write_ini(os, c.raw);
  return os.str();
}

std::vector<std::string> provenance_lines(const RunConfig& c) {
  std::vector<std::string> out;
  for (const auto& [section, body] : c.raw)
    for (const auto& [key, value] : body) out.push_back(section + "." + key + " = " + value.data());
  return out;
}

}  // namespace tcanard
