// Command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 invalid configuration, 3 inconclusive classification.

#include "CLI11.hpp"
#include "tcanard/config.hpp"
#include "tcanard/fastbif.hpp"
#include "tcanard/hunt.hpp"
#include "tcanard/singular.hpp"
#include "tcanard/version.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace tcanard;

namespace {

constexpr int kOk = 0, kFailure = 1, kInvalid = 2, kInconclusive = 3;

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string csv_header(const RunConfig& c) {
  std::string h = "# tcanard " + std::string(kVersion) + "\n";
  for (const auto& line : provenance_lines(c)) h += "# " + line + "\n";
  return h;
}

nlohmann::json provenance(const RunConfig& c) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [section, body] : c.raw)
    for (const auto& [key, value] : body) cfg[section][key] = value.data();
  return {{"tool", "tcanard"}, {"version", kVersion}, {"config", cfg}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Outputs {
  fs::path dir;
  std::vector<fs::path> written;

  void put(const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    written.push_back(dir / name);
  }
};

int run_simulate(const RunConfig& c, Outputs& out) {
  const auto m = c.spec();
  const bool polar = m.is_polar_model();
  std::ostringstream rows;
  rows.precision(17);
  double next = 0.0;
  auto emit = [&](double t, const VectorXd& y) {
    if (t + 1e-9 < next) return;
    rows << t << ',' << y(0) << ',' << y(1) << ',' << y(2) << '\n';
    next = t + c.sample_every;
  };
  HuntConfig h = c.classify;
  emit(0.0, h.y0.value_or(default_initial_condition(m)));
  const auto cls = classify(m, h, nullptr, emit);
  std::string csv = csv_header(c);
  csv += "# classification = " + std::string(to_string(cls.label)) + "\n";
  csv += "# reason = " + cls.reason + "\n";
  csv += polar ? "t,r,theta,mu\n" : "t,x,y,mu\n";
  csv += rows.str();
  out.put(c.stem() + ".csv", csv);
  auto j = to_json(cls);
  j["provenance"] = provenance(c);
  out.put(c.stem() + ".json", dump(j));
  std::cout << "classification: " << to_string(cls.label) << " (" << cls.reason << ")\n";
  return cls.label == TrajectoryLabel::Inconclusive ? kInconclusive : kOk;
}

int run_sweep(const RunConfig& c, Outputs& out) {
  const auto rows = sweep(c.spec(), c.k_grid, c.classify, c.workers);
  std::ostringstream os;
  os << csv_header(c);
  write_regime_csv(os, rows);
  out.put(c.stem() + ".csv", os.str());
  int inconclusive = 0;
  for (const auto& r : rows) inconclusive += r.trajectory.label == TrajectoryLabel::Inconclusive;
  std::cout << rows.size() << " points, " << inconclusive << " inconclusive\n";
  return inconclusive ? kInconclusive : kOk;
}

int run_hunt(const RunConfig& c, Outputs& out) {
  TransitionResult r;
  try {
    r = bisect_transition(c.spec(), c.k_lo, c.k_hi, c.predicate, c.tol_k, c.classify);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("hunt", e.what());
  }
  auto j = to_json(r);
  j["provenance"]["config_literals"] = provenance(c)["config"];
  out.put(c.stem() + ".json", dump(j));
  std::cout.precision(17);
  std::cout << "k* = " << r.k_star << "  bracket [" << r.k_lo << ", " << r.k_hi << "]";
  if (r.inconclusive) std::cout << "  inconclusive: " << r.note;
  std::cout << '\n';
  return r.inconclusive ? kInconclusive : kOk;
}

int run_singular(const RunConfig& c, Outputs& out) {
  const auto m = c.spec();
  nlohmann::json j{{"provenance", provenance(c)}};
  if (m.is_polar_model()) j["regime"] = to_json(classify_regime(m));
  std::vector<SingularOrbit> orbits;
  try {
    if (c.family)
      orbits.push_back(build_singular_family(m, *c.family, c.family_params));
    else
      orbits = enumerate_families(m, c.per_family, c.family_params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("singular", e.what());
  }
  j["orbits"] = nlohmann::json::array();
  int invalid = 0;
  for (const auto& o : orbits) {
    j["orbits"].push_back(to_json(o));
    invalid += !validate(o).valid;
  }
  out.put(c.stem() + ".json", dump(j));
  std::cout << orbits.size() << " orbits, " << invalid << " invalid\n";
  return invalid ? kFailure : kOk;
}

int run_fastbif(const RunConfig& c, Outputs& out) {
  const auto m = c.spec();
  const auto eq = critical_manifold(m, c.mu_lo, c.mu_hi);
  std::ostringstream e;
  e << csv_header(c);
  write_branch_csv(e, eq);
  out.put(c.stem() + "_equilibria.csv", e.str());
  if (m.dim_fast() == 2) {
    const auto cyc = cycle_branch(m, c.mu_lo, c.mu_hi);
    std::ostringstream os;
    os << csv_header(c);
    write_branch_csv(os, cyc);
    out.put(c.stem() + "_cycles.csv", os.str());
  }
  std::cout << eq.special_points.size() << " special points on the equilibrium branch\n";
  return kOk;
}

int run(Command cmd, const std::string& config_path, const std::string& out_dir, std::optional<int> workers,
        const std::string& tol_k) {
  RunConfig c = load_run_config(config_path);
  if (c.command != cmd)
    throw ConfigError("run.command", "config is for '" + std::string(to_string(c.command)) + "', not '" +
                                         std::string(to_string(cmd)) + "'");
  if (workers) set_raw(c, "run.workers", std::to_string(*workers));
  if (!tol_k.empty()) set_raw(c, "hunt.tol_k", tol_k);
  c = reparse(c);

  Outputs out;
  out.dir = out_dir;
  if (out.dir.empty()) {
    const char* env = std::getenv("TCANARD_OUT");
    out.dir = env && *env ? env : ".";
  }
  fs::create_directories(out.dir);
  out.put(c.stem() + ".ini", echo(c));

  switch (cmd) {
    case Command::Simulate: return run_simulate(c, out);
    case Command::Sweep: return run_sweep(c, out);
    case Command::Hunt: return run_hunt(c, out);
    case Command::Singular: return run_singular(c, out);
    case Command::Fastbif: return run_fastbif(c, out);
  }
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slow-fast canard and torus-canard toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir, tol_k;
  std::optional<int> workers;
  const std::vector<std::pair<Command, const char*>> commands{
      {Command::Simulate, "integrate the full system and classify the trajectory"},
      {Command::Sweep, "classify the full system over a grid of k"},
      {Command::Hunt, "bisect a transition in k between two trajectory classes"},
      {Command::Singular, "build and validate singular orbits"},
      {Command::Fastbif, "equilibria and cycles of the fast subsystem"},
  };
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (const auto& [cmd, help] : commands) {
    auto* sub = app.add_subcommand(std::string(to_string(cmd)), help);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (default: $TCANARD_OUT, else .)");
    sub->add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--tol-k", tol_k, "bracket width at which bisection stops");
    subs.emplace_back(cmd, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  Command cmd = Command::Simulate;
  for (const auto& [c, sub] : subs)
    if (sub->parsed()) cmd = c;
  try {
    return run(cmd, config_path, out_dir, workers, tol_k);
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << to_string(cmd) << " failed: " << e.what() << '\n';
    return kFailure;
  }
}
