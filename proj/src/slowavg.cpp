#include "tcanard/slowavg.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace tcanard {

namespace {

double polar_alpha(const ModelSpec& m) {
  return m.name() == ModelName::Leidenator ? m.params().alpha : 0.0;
}

void require_polar(const ModelSpec& m, const char* what) {
  if (!m.is_polar_model()) throw UnavailableSubsystem(std::string(what) + ": polar models only");
}

double integrate_gk(const std::function<double(double)>& f, double a, double b) {
  if (a == b) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-13);
}

// Time average of k - x - y over one period starting at the anchor.
double wc_time_average(const ModelSpec& m, const CycleRecord& c) {
  const double k = m.params().k;
  const double mu = c.mu;
  auto field = [&](double, const VectorXd& z, VectorXd& dz) {
    dz.resize(3);
    const Eigen::Vector2d f = planar_fast_rhs(m, z(0), z(1), mu);
    dz(0) = f(0);
    dz(1) = f(1);
    dz(2) = k - z(0) - z(1);
  };
  VectorXd z0(3);
  z0 << c.anchor.x(), c.anchor.y(), 0.0;
  ode::IntegratorConfig cfg{1e-12, 1e-14};
  cfg.record_dense = false;
  VectorXd last = z0;
  const auto st = ode::integrate_streaming<double>(field, z0, 0.0, c.period, cfg, [&](const ode::StepView<double>& s) {
    last = s.y1;
    return true;
  });
  if (st != ode::Status::Success) throw std::runtime_error("avg_slow_rhs: integration over one period failed");
  return last(2) / c.period;
}

// Slow passage data: real part of the fast eigenvalue and slow rhs along the
// equilibrium branch through the Hopf point, with the branch's mu-extent.
struct SlowPath {
  std::function<double(double)> re_lambda;
  std::function<double(double)> h0;
  double mu_hopf = 0.0;
  double lim_lo = -std::numeric_limits<double>::infinity();
  double lim_hi = std::numeric_limits<double>::infinity();
};

SlowPath polar_path(const ModelSpec& m) {
  SlowPath p;
  const double k = m.params().k, alpha = polar_alpha(m);
  p.re_lambda = [](double mu) { return mu; };
  p.h0 = [k, alpha](double mu) { return k - alpha * mu; };
  return p;
}

// Wilson-Cowan: the piece of S0 between folds that carries the right-most Hopf point.
SlowPath wc_path(const ModelSpec& m) {
  auto eq = critical_manifold(m, -8.0, -3.0, 0.005);
  auto hb = eq.points_of(SpecialPointType::Hopf);
  if (hb.empty()) throw std::runtime_error("entry_exit: no Hopf point on the critical manifold");
  const auto h = *std::max_element(hb.begin(), hb.end(), [](const auto& a, const auto& b) { return a.mu < b.mu; });
  std::size_t lo = 0, hi = eq.samples.size() - 1;
  for (const auto& sp : eq.special_points) {
    if (sp.type != SpecialPointType::FoldOfEquilibria) continue;
    if (sp.sample_index < h.sample_index) lo = std::max(lo, sp.sample_index);
    if (sp.sample_index > h.sample_index) hi = std::min(hi, sp.sample_index);
  }
  auto samples = std::make_shared<std::vector<BranchSample>>(eq.samples.begin() + static_cast<long>(lo),
                                                             eq.samples.begin() + static_cast<long>(hi) + 1);
  if (samples->front().mu > samples->back().mu) std::reverse(samples->begin(), samples->end());
  SlowPath p;
  p.mu_hopf = h.mu;
  p.lim_lo = samples->front().mu;
  p.lim_hi = samples->back().mu;
  auto state_at = [samples, &m](double mu) -> Eigen::Vector2d {
    auto it = std::lower_bound(samples->begin(), samples->end(), mu,
                               [](const BranchSample& s, double v) { return s.mu < v; });
    if (it == samples->end()) --it;
    if (it == samples->begin()) ++it;
    const auto& a = *(it - 1);
    const auto& b = *it;
    const double w = (mu - a.mu) / (b.mu - a.mu);
    const Eigen::Vector2d guess(a.state(0) + w * (b.state(0) - a.state(0)), a.state(1) + w * (b.state(1) - a.state(1)));
    auto e = polish_equilibrium(m, mu, guess);
    if (!e) throw std::runtime_error("entry_exit: lost the equilibrium branch");
    return *e;
  };
  const ModelSpec* mp = &m;
  p.re_lambda = [state_at, mp](double mu) {
    const Eigen::Vector2d z = state_at(mu);
    const Eigen::Matrix2d j = planar_fast_jacobian(*mp, z.x(), z.y(), mu);
    const double tr = j.trace(), det = j.determinant();
    const double disc = tr * tr / 4.0 - det;
    return disc >= 0.0 ? tr / 2.0 + std::sqrt(disc) : tr / 2.0;
  };
  const double k = m.params().k;
  p.h0 = [state_at, k](double mu) {
    const Eigen::Vector2d z = state_at(mu);
    return k - z.x() - z.y();
  };
  return p;
}

}  // namespace

double avg_slow_rhs_polar(const ModelSpec& m, double r) {
  require_polar(m, "avg_slow_rhs_polar");
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("avg_slow_rhs_polar: r must be > 0");
  return m.params().k - r * r - polar_alpha(m) * polar_branch_mu(r);
}

double avg_slow_rhs(const ModelSpec& m, const CycleRecord& c) {
  if (!(c.period > 0.0) || !std::isfinite(c.mu)) throw std::invalid_argument("avg_slow_rhs: invalid cycle record");
  if (m.is_polar_model()) {
    if (std::abs(polar_branch_mu(c.amplitude) - c.mu) > 1e-8)
      throw std::invalid_argument("avg_slow_rhs: point is not on the polar cycle branch");
    return avg_slow_rhs_polar(m, c.amplitude);
  }
  if (m.name() == ModelName::WilsonCowan) return wc_time_average(m, c);
  throw UnavailableSubsystem("avg_slow_rhs: the van der Pol fast subsystem has no cycles");
}

std::vector<AvgEquilibrium> avg_slow_equilibria(const ModelSpec& m, const CycleOptions& opt) {
  if (m.name() == ModelName::WilsonCowan) return averaged_flow(m, cycle_branch(m, -8.0, -3.0, opt), opt).equilibria;
  require_polar(m, "avg_slow_equilibria");
  // k - u - alpha (u^2 - 2u) = 0 with u = r^2.
  const double k = m.params().k, alpha = polar_alpha(m);
  std::vector<double> us;
  if (alpha == 0.0) {
    us.push_back(k);
  } else {
    const double a = alpha, b = 1.0 - 2.0 * alpha, c = -k;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) us.push_back(c / q);
      us.push_back(q / a);
    }
  }
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  std::vector<AvgEquilibrium> out;
  for (double u : us) {
    if (!(u > 0.0)) continue;
    AvgEquilibrium e;
    const double r = std::sqrt(u);
    e.coordinate = r;
    e.mu = polar_branch_mu(r);
    e.cycle = polar_cycle(r);
    const double dmu = 4.0 * r * r * r - 4.0 * r;
    const double dh = -2.0 * r - alpha * dmu;
    e.at_fold = std::abs(r - 1.0) < 1e-12;
    e.stability = (!e.at_fold && dh / dmu < 0.0) ? Stability::Attracting : Stability::Repelling;
    out.push_back(e);
  }
  return out;
}

AvgSlowFlow averaged_flow(const ModelSpec& m, const BranchCurve& cycles, const CycleOptions& opt) {
  if (cycles.kind != BranchKind::Cycle) throw std::invalid_argument("averaged_flow: not a cycle branch");
  AvgSlowFlow f;
  f.model = m.name();
  f.by_radius = m.is_polar_model();
  double arc = 0.0;
  for (std::size_t i = 0; i < cycles.samples.size(); ++i) {
    const auto& c = *cycles.samples[i].cycle;
    if (i > 0) {
      const auto& p = *cycles.samples[i - 1].cycle;
      arc += std::hypot(c.amplitude - p.amplitude, c.mu - p.mu);
    }
    f.coordinate.push_back(f.by_radius ? c.amplitude : arc);
    f.mu.push_back(c.mu);
    f.avg_rhs.push_back(avg_slow_rhs(m, c));
  }
  if (m.is_polar_model()) {
    f.equilibria = avg_slow_equilibria(m, opt);
    return f;
  }
  for (std::size_t i = 0; i + 1 < f.avg_rhs.size(); ++i) {
    const double fa = f.avg_rhs[i], fc = f.avg_rhs[i + 1];
    if ((fa < 0.0) == (fc < 0.0)) continue;
    const auto& a = *cycles.samples[i].cycle;
    const auto& c = *cycles.samples[i + 1].cycle;
    const double sign = a.floquet_exponent > 0.0 ? -1.0 : 1.0;
    std::optional<CycleRecord> last;
    auto g = [&](double lam) {
      if (lam <= 0.0) return fa;
      if (lam >= 1.0) return fc;
      const double mu = a.mu + lam * (c.mu - a.mu);
      last = polish_cycle(m, mu, a.anchor + lam * (c.anchor - a.anchor), sign, opt);
      return last ? avg_slow_rhs(m, *last) : std::numeric_limits<double>::quiet_NaN();
    };
    std::uintmax_t iters = 100;
    auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-13; };
    AvgEquilibrium e;
    try {
      auto r = boost::math::tools::toms748_solve(g, 0.0, 1.0, fa, fc, tol, iters);
      const double lam = 0.5 * (r.first + r.second);
      g(lam);
      if (!last) continue;
      e.cycle = last;
      e.mu = last->mu;
      e.coordinate = f.coordinate[i] + lam * (f.coordinate[i + 1] - f.coordinate[i]);
    } catch (const std::exception&) {
      continue;
    }
    const double slope = (fc - fa) / (c.mu - a.mu);
    e.at_fold = a.stability != c.stability;
    e.stability = (!e.at_fold && slope < 0.0) ? Stability::Attracting : Stability::Repelling;
    f.equilibria.push_back(e);
  }
  return f;
}

void write_avg_profile_csv(std::ostream& os, const AvgSlowFlow& f) {
  os << (f.by_radius ? "r" : "arclength") << ",mu,avg_rhs\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < f.mu.size(); ++i) os << f.coordinate[i] << ',' << f.mu[i] << ',' << f.avg_rhs[i] << '\n';
}

BufferPoint buffer_point(const ModelSpec& m) {
  BufferPoint b;
  if (!m.is_polar_model()) return b;
  const double k = m.params().k, alpha = polar_alpha(m);
  if (alpha > 0.0) {
    b.exists = true;
    b.mu = k / alpha;
  } else if (k == 0.0) {
    b.exists = true;
    b.degenerate = true;
    b.mu = 0.0;
  }
  return b;
}

std::string_view to_string(ExitStatus s) {
  switch (s) {
    case ExitStatus::Exit: return "exit";
    case ExitStatus::CappedAtBuffer: return "capped-at-buffer";
    case ExitStatus::CappedAtFold: return "capped-at-fold";
  }
  return "?";
}

std::vector<double> entry_exit_integrand(const ModelSpec& m, const std::vector<double>& mus) {
  const SlowPath p = m.is_polar_model() ? polar_path(m) : wc_path(m);
  std::vector<double> out;
  out.reserve(mus.size());
  for (double mu : mus) out.push_back(p.re_lambda(mu) / p.h0(mu));
  return out;
}

EntryExit entry_exit(const ModelSpec& m, double mu_in) {
  if (!std::isfinite(mu_in)) throw std::invalid_argument("entry_exit: mu_in must be finite");
  SlowPath p;
  if (m.is_polar_model())
    p = polar_path(m);
  else if (m.name() == ModelName::WilsonCowan)
    p = wc_path(m);
  else
    throw UnavailableSubsystem("entry_exit: no Hopf point in the van der Pol fast subsystem");

  EntryExit out;
  out.mu_in = mu_in;
  out.mu_hopf = p.mu_hopf;
  const double dir = p.mu_hopf > mu_in ? 1.0 : -1.0;
  if (mu_in == p.mu_hopf) throw std::invalid_argument("entry_exit: mu_in is the Hopf point");
  if (mu_in < p.lim_lo || mu_in > p.lim_hi) throw std::invalid_argument("entry_exit: mu_in is off the branch");
  if (!(p.re_lambda(mu_in) < 0.0)) throw std::invalid_argument("entry_exit: mu_in is not on the attracting side");

  // The slow flow must carry mu_in to the Hopf point without stalling.
  auto heading = [&](double mu) { return dir * p.h0(mu); };
  if (!(heading(mu_in) > 0.0)) throw std::invalid_argument("entry_exit: slow flow does not head toward the Hopf point");
  const BufferPoint bp = buffer_point(m);
  if (m.is_polar_model() && bp.exists && !bp.degenerate && (bp.mu - mu_in) * dir > 0.0 &&
      (bp.mu - p.mu_hopf) * dir <= 0.0) {
    out.mu_out = bp.mu;
    out.status = ExitStatus::CappedAtBuffer;
    return out;
  }

  auto f = [&](double mu) { return p.re_lambda(mu) / p.h0(mu); };
  const double entry = integrate_gk(f, mu_in, p.mu_hopf);

  // Outer limit of the exit side: buffer point or end of the branch.
  double lim = dir > 0.0 ? p.lim_hi : p.lim_lo;
  ExitStatus cap = ExitStatus::CappedAtFold;
  if (m.is_polar_model() && bp.exists && !bp.degenerate && (bp.mu - p.mu_hopf) * dir > 0.0) {
    lim = bp.mu;
    cap = ExitStatus::CappedAtBuffer;
  }
  if (!m.is_polar_model()) {
    // A zero of h0 on the exit side also stalls the passage.
    const double span = std::abs(lim - p.mu_hopf);
    double prev = p.mu_hopf;
    for (int i = 1; i <= 400; ++i) {
      const double mu = p.mu_hopf + dir * span * i / 400.0;
      if (!(heading(mu) > 0.0)) {
        lim = prev;
        cap = ExitStatus::CappedAtBuffer;
        break;
      }
      prev = mu;
    }
  }

  auto exit_gap = [&](double mu) { return entry + integrate_gk(f, p.mu_hopf, mu); };
  const double width = std::abs(p.mu_hopf - mu_in);
  double a = p.mu_hopf, ga = entry;
  double step = width;
  const double lim_inner = std::isfinite(lim) ? lim - dir * 1e-12 * std::max(1.0, std::abs(lim)) : lim;
  for (int tries = 0; tries < 200; ++tries) {
    double b = a + dir * step;
    bool at_limit = false;
    if (std::isfinite(lim_inner) && (b - lim_inner) * dir >= 0.0) {
      b = lim_inner;
      at_limit = true;
    }
    const double gb = exit_gap(b);
    if ((ga < 0.0) != (gb < 0.0) || gb == 0.0) {
      std::uintmax_t iters = 200;
      auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(1.0, std::abs(x)); };
      auto lo = std::min(a, b), hi = std::max(a, b);
      auto glo = a < b ? ga : gb, ghi = a < b ? gb : ga;
      auto r = boost::math::tools::toms748_solve(exit_gap, lo, hi, glo, ghi, tol, iters);
      out.mu_out = 0.5 * (r.first + r.second);
      out.status = ExitStatus::Exit;
      return out;
    }
    if (at_limit) {
      out.mu_out = lim;
      out.status = cap;
      return out;
    }
    a = b;
    ga = gb;
    step *= 1.5;
  }
  throw std::runtime_error("entry_exit: no exit found");
}

}  // namespace tcanard
