#include "tcanard/hunt.hpp"

#include "tcanard/version.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace tcanard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EnvSample {
  double t, mu, a;
};

struct MuSample {
  double t, mu;
};

double mu_at_time(const std::vector<MuSample>& s, double t) {
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const MuSample& q, double v) { return q.t < v; });
  if (it == s.end()) return s.back().mu;
  if (it == s.begin()) return it->mu;
  const auto& b = *it;
  const auto& a = *(it - 1);
  return a.mu + (b.mu - a.mu) * (t - a.t) / (b.t - a.t);
}

// Records the envelope: r directly, or half the swing between successive extrema of x.
class EnvelopeRecorder {
 public:
  explicit EnvelopeRecorder(bool polar) : polar_(polar) {}

  void step(const ode::StepView<double>& st) {
    const double mu = st.y1(2);
    if (polar_) {
      env.push_back({st.t1(), mu, std::abs(st.y1(0))});
      return;
    }
    for (int q = 1; q <= 8; ++q) {
      const double t = st.t0() + st.segment.h * q / 8.0;
      const double x = st.segment.eval_component(t, 0);
      if (have_prev_) {
        const int dir = x > prev_x_ ? 1 : (x < prev_x_ ? -1 : dir_);
        if (dir_ != 0 && dir != dir_) extremum(prev_t_, prev_x_, dir_ > 0, mu);
        dir_ = dir;
      }
      prev_x_ = x;
      prev_t_ = t;
      have_prev_ = true;
    }
    if (st.t1() - last_extremum_t_ > 100.0 && st.t1() - last_fill_t_ > 100.0) {
      env.push_back({st.t1(), mu, 0.0});
      last_fill_t_ = st.t1();
    }
  }

  std::vector<EnvSample> env;

 private:
  void extremum(double t, double x, bool is_max, double mu) {
    (is_max ? last_max_ : last_min_) = x;
    (is_max ? have_max_ : have_min_) = true;
    last_extremum_t_ = t;
    if (have_max_ && have_min_) env.push_back({t, mu, 0.5 * std::abs(last_max_ - last_min_)});
  }

  bool polar_;
  bool have_prev_ = false, have_max_ = false, have_min_ = false;
  int dir_ = 0;
  double prev_x_ = 0.0, prev_t_ = 0.0, last_max_ = 0.0, last_min_ = 0.0;
  double last_extremum_t_ = 0.0, last_fill_t_ = 0.0;
};

struct Passage {
  double span = 0.0;
  bool from_quiet = false;  // preceded by the quiet state (mixed type) rather than spiking
  bool up = false;          // left the branch upward (toward the attracting cycles)
};

// Stretches of the envelope within d_branch of the repelling branch, with the
// object visited before and the direction taken after.
std::vector<Passage> find_passages(const std::vector<EnvSample>& env, std::size_t first, const RepellingBranch& br,
                                   const Thresholds& th) {
  std::vector<Passage> out;
  std::size_t i = first;
  while (i < env.size()) {
    auto near = [&](std::size_t j) {
      return env[j].a > th.r_quiet && env[j].a < br.amp_fold() + th.d_branch &&
             br.distance(env[j].mu, env[j].a) < th.d_branch;
    };
    if (!near(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double lo = env[i].mu, hi = env[i].mu;
    while (j < env.size() && near(j)) {
      lo = std::min(lo, env[j].mu);
      hi = std::max(hi, env[j].mu);
      ++j;
    }
    Passage p;
    p.span = hi - lo;
    bool before = false, after = false;
    for (std::size_t q = i; q-- > 0;) {
      if (env[q].a < th.r_quiet) {
        p.from_quiet = before = true;
        break;
      }
      if (env[q].a > th.r_spike) {
        before = true;
        break;
      }
    }
    for (std::size_t q = j; q < env.size(); ++q) {
      if (env[q].a < th.r_quiet) {
        after = true;
        break;
      }
      if (env[q].a > br.amp_fold()) {
        p.up = after = true;
        break;
      }
    }
    if (before && after) out.push_back(p);
    i = j;
  }
  return out;
}

}  // namespace

std::string_view to_string(TrajectoryLabel l) {
  switch (l) {
    case TrajectoryLabel::Tonic: return "tonic";
    case TrajectoryLabel::Bursting: return "bursting";
    case TrajectoryLabel::TcHeadless: return "tc-headless";
    case TrajectoryLabel::TcWithHead: return "tc-with-head";
    case TrajectoryLabel::MixedTcHeadless: return "mixed-tc-headless";
    case TrajectoryLabel::MixedTcWithHead: return "mixed-tc-with-head";
    case TrajectoryLabel::Rest: return "rest";
    case TrajectoryLabel::Drift: return "drift";
    case TrajectoryLabel::Inconclusive: return "inconclusive";
  }
  return "?";
}

TrajectoryLabel parse_trajectory_label(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(TrajectoryLabel::Inconclusive); ++i) {
    const auto l = static_cast<TrajectoryLabel>(i);
    if (to_string(l) == s) return l;
  }
  throw std::invalid_argument("unknown trajectory label: " + std::string(s));
}

Thresholds Thresholds::for_model(ModelName m) {
  Thresholds t;
  if (m == ModelName::WilsonCowan) {
    t.r_spike = 0.6;
    t.s_min = 0.0075;
    t.r_tonic = 0.3;
  }
  return t;
}

void HuntConfig::validate() const {
  if (!(discard_slow >= 0.0)) throw std::invalid_argument("discard must be >= 0");
  if (!(horizon_slow > discard_slow)) throw std::invalid_argument("horizon must exceed the transient discard");
  integrator.validate();
}

VectorXd default_initial_condition(const ModelSpec& m) {
  if (m.name() == ModelName::WilsonCowan) return Eigen::Vector3d(0.1, 0.1, 2.0);
  if (m.is_polar_model()) return Eigen::Vector3d(1.8, 0.0, 0.5);
  throw std::invalid_argument("no full-system classification for " + std::string(to_string(m.name())));
}

RepellingBranch RepellingBranch::polar() {
  RepellingBranch b;
  b.closed_form_ = true;
  b.mu_hopf_ = 0.0;
  b.mu_fold_ = -1.0;
  b.amp_fold_ = 1.0;
  return b;
}

RepellingBranch RepellingBranch::from_curve(const BranchCurve& cycles) {
  RepellingBranch b;
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : cycles.samples)
    if (s.cycle && s.stability == Stability::Repelling) pts.emplace_back(s.cycle->amplitude, s.mu);
  const auto hopfs = cycles.points_of(SpecialPointType::Hopf);
  const auto folds = cycles.points_of(SpecialPointType::SaddleNodeOfCycles);
  if (pts.size() < 2 || folds.empty()) throw std::runtime_error("cycle branch has no repelling stretch ending at a fold");
  std::sort(pts.begin(), pts.end());
  b.mu_fold_ = folds.front().mu;
  b.mu_hopf_ = pts.front().second;
  for (const auto& h : hopfs)
    if (std::abs(h.mu - pts.front().second) < std::abs(b.mu_hopf_ - pts.front().second) || b.mu_hopf_ == pts.front().second)
      b.mu_hopf_ = h.mu;
  b.amp_.push_back(0.0);
  b.mu_.push_back(b.mu_hopf_);
  for (const auto& [a, mu] : pts) {
    if (a <= b.amp_.back()) continue;
    b.amp_.push_back(a);
    b.mu_.push_back(mu);
  }
  b.amp_fold_ = b.amp_.back();
  return b;
}

RepellingBranch RepellingBranch::for_model(const ModelSpec& m) {
  if (m.is_polar_model()) return polar();
  if (m.name() == ModelName::WilsonCowan) return from_curve(cycle_branch(m, -8.0, -3.0));
  throw std::invalid_argument("no repelling cycle branch for " + std::string(to_string(m.name())));
}

double RepellingBranch::amp_at(double mu) const {
  if (closed_form_) return std::sqrt(std::max(0.0, 1.0 - std::sqrt(std::max(0.0, 1.0 + mu))));
  // mu is monotone along the repelling branch; search the bracketing pair.
  for (std::size_t i = 0; i + 1 < mu_.size(); ++i) {
    const double a = mu_[i], b = mu_[i + 1];
    if ((mu - a) * (mu - b) <= 0.0 && a != b) return amp_[i] + (amp_[i + 1] - amp_[i]) * (mu - a) / (b - a);
  }
  return kInf;
}

double RepellingBranch::mu_at(double amp) const {
  if (closed_form_) return polar_branch_mu(amp);
  if (amp > amp_.back()) return kInf;
  const auto it = std::upper_bound(amp_.begin(), amp_.end(), amp);
  const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - amp_.begin(), 1), amp_.size() - 1);
  return mu_[i - 1] + (mu_[i] - mu_[i - 1]) * (amp - amp_[i - 1]) / (amp_[i] - amp_[i - 1]);
}

double RepellingBranch::distance(double mu, double amp) const {
  const double lo = std::min(mu_hopf_, mu_fold_), hi = std::max(mu_hopf_, mu_fold_);
  if (mu < lo || mu > hi || amp < 0.0 || amp > amp_fold_) return kInf;
  return std::min(std::abs(amp - amp_at(mu)), std::abs(mu - mu_at(amp)));
}

TrajectoryClass classify(const ModelSpec& m, const HuntConfig& cfg, const RepellingBranch* branch, const StateTap& tap) {
  cfg.validate();
  const bool polar = m.is_polar_model();
  if (!polar && m.name() != ModelName::WilsonCowan)
    throw std::invalid_argument("classify: canonical, leidenator or wilson-cowan model required");
  const double eps = m.params().epsilon;
  if (!(eps > 0.0)) throw std::invalid_argument("classify: epsilon must be > 0");
  std::optional<RepellingBranch> own;
  if (!branch) branch = &own.emplace(RepellingBranch::for_model(m));
  const Thresholds th = cfg.resolved_thresholds(m.name());
  const VectorXd y0 = cfg.y0.value_or(default_initial_condition(m));
  if (y0.size() != 3) throw std::invalid_argument("classify: initial condition must have 3 entries");

  const double t_discard = cfg.discard_slow / eps;
  const double t_end = cfg.horizon_slow / eps;
  const Field field{&m, polar ? CoordinateForm::Polar : CoordinateForm::Cartesian, SubsystemKind::FullFastTime};
  EnvelopeRecorder rec(polar);
  std::vector<MuSample> mus;
  TrajectoryClass out;
  auto& ev = out.evidence;
  bool escaped = false;
  VectorXd last = y0;
  double t_last = 0.0;
  ode::IntegratorConfig icfg = cfg.integrator;
  icfg.record_dense = false;
  ev.status = ode::integrate_streaming<double>(field, y0, 0.0, t_end, icfg, [&](const ode::StepView<double>& st) {
    rec.step(st);
    if (st.t1() >= t_discard) mus.push_back({st.t1(), st.y1(2)});
    last = st.y1;
    t_last = st.t1();
    if (tap) tap(st.t1(), st.y1);
    if (std::abs(st.y1(2)) > th.mu_escape) {
      escaped = true;
      return false;
    }
    return true;
  });
  ev.final_state = last;
  ev.mu_final = last(2);
  if (escaped || ev.status == ode::Status::NonFinite) {
    out.label = TrajectoryLabel::Drift;
    out.reason = "mu left the window |mu| <= " + std::to_string(th.mu_escape);
    return out;
  }
  if (ev.status != ode::Status::Success) {
    out.label = TrajectoryLabel::Inconclusive;
    out.reason = std::string("integration stopped: ") + ode::to_string(ev.status);
    return out;
  }

  const auto& env = rec.env;
  const auto first = static_cast<std::size_t>(
      std::lower_bound(env.begin(), env.end(), t_discard, [](const EnvSample& s, double v) { return s.t < v; }) -
      env.begin());
  if (env.size() - first < 4 || mus.size() < 4) {
    out.label = TrajectoryLabel::Inconclusive;
    out.reason = "too few envelope samples after the transient";
    return out;
  }
  const double t_final = t_discard + 0.75 * (t_end - t_discard);
  const double t_mid = t_discard + 0.875 * (t_end - t_discard);

  ev.env_min = ev.env_final_min = kInf;
  ev.env_max = ev.env_final_max = -kInf;
  ev.mu_min = kInf;
  ev.mu_max = -kInf;
  double quiet_time = 0.0, spike_time = 0.0;
  bool quiet_state = false, seen_state = false;
  for (std::size_t i = first; i < env.size(); ++i) {
    const auto& s = env[i];
    ev.env_min = std::min(ev.env_min, s.a);
    ev.env_max = std::max(ev.env_max, s.a);
    if (s.t >= t_final) {
      ev.env_final_min = std::min(ev.env_final_min, s.a);
      ev.env_final_max = std::max(ev.env_final_max, s.a);
    }
    const double dt = i + 1 < env.size() ? env[i + 1].t - s.t : 0.0;
    if (s.a < th.r_quiet) {
      quiet_time += dt;
      quiet_state = true;
      seen_state = true;
    } else if (s.a > th.r_spike) {
      spike_time += dt;
      if (seen_state && quiet_state) ++ev.bursts;
      quiet_state = false;
      seen_state = true;
    }
  }
  for (const auto& s : mus) {
    ev.mu_min = std::min(ev.mu_min, s.mu);
    ev.mu_max = std::max(ev.mu_max, s.mu);
  }
  const double window = env.back().t - env[first].t;
  ev.quiet_fraction = window > 0.0 ? quiet_time / window : 0.0;
  ev.spike_fraction = window > 0.0 ? spike_time / window : 0.0;
  if (ev.env_final_min == kInf) ev.env_final_min = ev.env_final_max = env.back().a;

  const double half = 0.5 * (t_end - t_final) * eps;
  ev.mu_rate_early = std::abs(mu_at_time(mus, t_mid) - mu_at_time(mus, t_final)) / half;
  ev.mu_rate_late = std::abs(mu_at_time(mus, t_end) - mu_at_time(mus, t_mid)) / half;
  double mu_final_lo = kInf, mu_final_hi = -kInf;
  for (const auto& s : mus)
    if (s.t >= t_final) {
      mu_final_lo = std::min(mu_final_lo, s.mu);
      mu_final_hi = std::max(mu_final_hi, s.mu);
    }
  const bool mu_settling = mu_final_hi - mu_final_lo < th.converge_tol || ev.mu_rate_late < 0.95 * ev.mu_rate_early;
  const bool env_converged = ev.env_final_max - ev.env_final_min < th.converge_tol;

  const auto passages = find_passages(env, first, *branch, th);
  const double s_min = th.s_min;
  const Passage* tc = nullptr;
  for (const auto& p : passages) {
    ev.adherence_span = std::max(ev.adherence_span, p.span);
    if (p.span >= s_min) tc = &p;
  }

  if (ev.env_final_min >= th.r_tonic) {
    out.label = TrajectoryLabel::Tonic;
    out.reason = "spiking throughout the final quarter of the window";
    return out;
  }
  if (tc) {
    if (tc->from_quiet)
      out.label = tc->up ? TrajectoryLabel::MixedTcWithHead : TrajectoryLabel::MixedTcHeadless;
    else
      out.label = tc->up ? TrajectoryLabel::TcHeadless : TrajectoryLabel::TcWithHead;
    out.reason = "adherence to the repelling cycle branch over a mu-span of " + std::to_string(tc->span);
    return out;
  }
  if (ev.bursts >= th.min_bursts) {
    out.label = TrajectoryLabel::Bursting;
    out.reason = std::to_string(ev.bursts) + " bursts after the transient";
    return out;
  }
  if (ev.env_final_max < th.r_quiet) {
    const double dmu = mu_at_time(mus, t_end) - mu_at_time(mus, t_mid);
    if (!mu_settling && ev.mu_rate_late >= th.drift_rate && (branch->mu_hopf() - ev.mu_final) * dmu > 0.0) {
      out.label = TrajectoryLabel::Inconclusive;
      out.reason = "quiet with mu still moving toward the Hopf point; horizon too short";
    } else if (!mu_settling && ev.mu_rate_late >= th.drift_rate) {
      out.label = TrajectoryLabel::Drift;
      out.reason = "quiet with mu moving away from the Hopf point at a steady rate";
    } else {
      out.label = TrajectoryLabel::Rest;
      out.reason = "quiet envelope with mu settling";
    }
    return out;
  }
  if (env_converged && mu_settling) {
    out.label = env.back().a >= th.r_tonic ? TrajectoryLabel::Tonic : TrajectoryLabel::Rest;
    out.reason = "envelope converged";
    return out;
  }
  if (ev.env_final_max < th.r_tonic) {
    out.label = TrajectoryLabel::Rest;
    out.reason = "small envelope below the tonic threshold without spikes in the final quarter";
    return out;
  }
  out.label = TrajectoryLabel::Inconclusive;
  out.reason = "envelope neither converged nor bursting; horizon may be too short";
  return out;
}

TransitionPredicate TransitionPredicate::parse(std::string_view s) {
  const auto bar = s.find('|');
  if (bar == std::string_view::npos) throw std::invalid_argument("predicate must read label|label");
  TransitionPredicate p{parse_trajectory_label(s.substr(0, bar)), parse_trajectory_label(s.substr(bar + 1))};
  if (p.a == p.b) throw std::invalid_argument("predicate labels must differ");
  return p;
}

std::string TransitionPredicate::name() const { return std::string(to_string(a)) + "|" + std::string(to_string(b)); }

std::optional<TrajectoryLabel> TransitionPredicate::side(TrajectoryLabel l) const {
  if (l == a || l == b) return l;
  const bool with_head = l == TrajectoryLabel::TcWithHead || l == TrajectoryLabel::MixedTcWithHead;
  const bool headless = l == TrajectoryLabel::TcHeadless || l == TrajectoryLabel::MixedTcHeadless;
  const bool has_bursting = a == TrajectoryLabel::Bursting || b == TrajectoryLabel::Bursting;
  if (!has_bursting || !(with_head || headless)) return std::nullopt;
  if (with_head) return TrajectoryLabel::Bursting;
  return a == TrajectoryLabel::Bursting ? b : a;
}

TransitionResult bisect_transition(const ModelSpec& m, double k_lo, double k_hi, const TransitionPredicate& pred,
                                   double tol_k, const HuntConfig& cfg) {
  if (!(tol_k >= 1e-13)) throw std::invalid_argument("tol_k must be >= 1e-13");
  if (!(k_lo < k_hi)) throw std::invalid_argument("bracket must satisfy k_lo < k_hi");
  const RepellingBranch br = RepellingBranch::for_model(m);
  TransitionResult r;
  r.predicate = pred;
  r.model = m;
  r.config = cfg;
  r.y0 = cfg.y0.value_or(default_initial_condition(m));
  auto side_at = [&](double k) {
    ++r.evaluations;
    const auto c = classify(m.with_k(k), cfg, &br);
    return std::make_pair(pred.side(c.label), c);
  };
  const auto [s_lo, c_lo] = side_at(k_lo);
  const auto [s_hi, c_hi] = side_at(k_hi);
  if (!s_lo || !s_hi)
    throw std::invalid_argument("bracket end classified as " +
                                std::string(to_string(!s_lo ? c_lo.label : c_hi.label)) + ", outside " + pred.name());
  if (*s_lo == *s_hi) throw std::invalid_argument("both bracket ends classify as " + std::string(to_string(*s_lo)));
  r.side_lo = *s_lo;
  r.side_hi = *s_hi;
  double lo = k_lo, hi = k_hi;
  while (hi - lo > tol_k) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const auto [s, c] = side_at(mid);
    if (!s) {
      r.inconclusive = true;
      r.note = "classification at k = " + std::to_string(mid) + " was " + std::string(to_string(c.label)) + ": " + c.reason;
      break;
    }
    (*s == r.side_lo ? lo : hi) = mid;
  }
  r.k_lo = lo;
  r.k_hi = hi;
  r.width = hi - lo;
  r.k_star = lo + 0.5 * (hi - lo);
  return r;
}

std::vector<RegimeReport> sweep(const ModelSpec& m, const std::vector<double>& k_grid, const HuntConfig& cfg,
                                int workers) {
  const RepellingBranch br = RepellingBranch::for_model(m);
  std::vector<RegimeReport> out(k_grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < k_grid.size(); i = next++) {
      const auto mk = m.with_k(k_grid[i]);
      out[i].k = k_grid[i];
      if (mk.is_polar_model()) out[i].regime = classify_regime(mk);
      out[i].trajectory = classify(mk, cfg, &br);
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(k_grid.size())));
  std::vector<std::jthread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  return out;
}

void write_regime_csv(std::ostream& os, const std::vector<RegimeReport>& rows) {
  os << "k,case,label,env_min,env_max,bursts,adherence_span,mu_final,reason\n";
  os.precision(17);
  for (const auto& r : rows) {
    const auto& e = r.trajectory.evidence;
    os << r.k << ',' << (r.regime ? std::to_string(r.regime->label) : "") << ',' << to_string(r.trajectory.label) << ','
       << e.env_min << ',' << e.env_max << ',' << e.bursts << ',' << e.adherence_span << ',' << e.mu_final << ",\""
       << r.trajectory.reason << "\"\n";
  }
}

nlohmann::json to_json(const HuntConfig& cfg, ModelName m) {
  const auto th = cfg.resolved_thresholds(m);
  return {{"discard_slow", cfg.discard_slow},
          {"horizon_slow", cfg.horizon_slow},
          {"integrator",
           {{"rel_tol", cfg.integrator.rel_tol}, {"abs_tol", cfg.integrator.abs_tol}, {"max_step", cfg.integrator.max_step}}},
          {"thresholds",
           {{"r_quiet", th.r_quiet},
            {"r_spike", th.r_spike},
            {"d_branch", th.d_branch},
            {"s_min", th.s_min},
            {"r_tonic", th.r_tonic},
            {"converge_tol", th.converge_tol},
            {"drift_rate", th.drift_rate},
            {"mu_escape", th.mu_escape},
            {"min_bursts", th.min_bursts}}}};
}

nlohmann::json to_json(const TrajectoryClass& c) {
  const auto& e = c.evidence;
  nlohmann::json fs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < e.final_state.size(); ++i) fs.push_back(e.final_state(i));
  return {{"label", to_string(c.label)},
          {"reason", c.reason},
          {"evidence",
           {{"env_min", e.env_min},
            {"env_max", e.env_max},
            {"env_final_min", e.env_final_min},
            {"env_final_max", e.env_final_max},
            {"quiet_fraction", e.quiet_fraction},
            {"spike_fraction", e.spike_fraction},
            {"bursts", e.bursts},
            {"adherence_span", e.adherence_span},
            {"mu_min", e.mu_min},
            {"mu_max", e.mu_max},
            {"mu_final", e.mu_final},
            {"mu_rate_early", e.mu_rate_early},
            {"mu_rate_late", e.mu_rate_late},
            {"final_state", fs},
            {"integrator_status", ode::to_string(e.status)}}}};
}

nlohmann::json to_json(const TransitionResult& r) {
  const auto& p = r.model.params();
  nlohmann::json y0 = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.y0.size(); ++i) y0.push_back(r.y0(i));
  nlohmann::json params{{"epsilon", p.epsilon}};
  if (r.model.name() == ModelName::Leidenator) params["alpha"] = p.alpha;
  return {{"k_star", r.k_star},
          {"k_lo", r.k_lo},
          {"k_hi", r.k_hi},
          {"bracket_width", r.width},
          {"side_lo", to_string(r.side_lo)},
          {"side_hi", to_string(r.side_hi)},
          {"inconclusive", r.inconclusive},
          {"note", r.note},
          {"evaluations", r.evaluations},
          {"provenance",
           {{"tool", "tcanard"},
            {"version", kVersion},
            {"model", to_string(r.model.name())},
            {"predicate", r.predicate.name()},
            {"parameters", params},
            {"initial_condition", y0},
            {"config", to_json(r.config, r.model.name())}}}};
}

}  // namespace tcanard
