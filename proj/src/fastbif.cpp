#include "tcanard/fastbif.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tcanard {

std::string_view to_string(BranchKind k) { return k == BranchKind::Cycle ? "cycle" : "equilibrium"; }

std::string_view to_string(Stability s) { return s == Stability::Attracting ? "attracting" : "repelling"; }

std::string_view to_string(SpecialPointType t) {
  switch (t) {
    case SpecialPointType::Hopf: return "HB";
    case SpecialPointType::SaddleNodeOfCycles: return "SN";
    case SpecialPointType::FoldOfEquilibria: return "LP";
  }
  return "?";
}

std::vector<SpecialPoint> BranchCurve::points_of(SpecialPointType t) const {
  std::vector<SpecialPoint> out;
  for (const auto& sp : special_points)
    if (sp.type == t) out.push_back(sp);
  return out;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

VectorXd vec1(double a) {
  VectorXd v(1);
  v << a;
  return v;
}

double lead_real_part(const Eigen::Matrix2d& j) {
  const double tr = j.trace(), det = j.determinant();
  const double disc = tr * tr / 4.0 - det;
  return disc >= 0.0 ? tr / 2.0 + std::sqrt(disc) : tr / 2.0;
}

// ---------------------------------------------------------------- equilibria

BranchCurve polar_critical_manifold(double lo, double hi, double step) {
  BranchCurve b;
  b.kind = BranchKind::Equilibrium;
  std::vector<double> mus;
  const auto n = static_cast<long>(std::ceil((hi - lo) / step));
  for (long i = 0; i <= n; ++i) mus.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  if (lo <= 0.0 && hi >= 0.0) mus.push_back(0.0);
  std::sort(mus.begin(), mus.end());
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
  for (double mu : mus) {
    BranchSample s;
    s.mu = mu;
    s.state = vec2(0.0, 0.0);
    s.lead_real = mu;
    s.stability = mu < 0.0 ? Stability::Attracting : Stability::Repelling;
    if (mu == 0.0) b.special_points.push_back({SpecialPointType::Hopf, 0.0, s.state, b.samples.size()});
    b.samples.push_back(std::move(s));
  }
  return b;
}

BranchCurve vdp_critical_manifold(double lo, double hi, double step) {
  // x - x^3/3 = mu, parametrised by x and sampled at equal arclength.
  BranchCurve b;
  b.kind = BranchKind::Equilibrium;
  const double big = std::max({std::abs(lo), std::abs(hi), 1.0});
  const double xmax = 2.0 + std::cbrt(3.0 * big);
  auto mu_of = [](double x) { return x - x * x * x / 3.0; };
  auto add = [&](double x) {
    const double mu = mu_of(x);
    if (mu < lo || mu > hi) return;
    BranchSample s;
    s.mu = mu;
    s.state = vec1(x);
    s.lead_real = 1.0 - x * x;
    s.stability = std::abs(x) > 1.0 ? Stability::Attracting : Stability::Repelling;
    if (std::abs(x) == 1.0)
      b.special_points.push_back({SpecialPointType::FoldOfEquilibria, mu, s.state, b.samples.size()});
    b.samples.push_back(std::move(s));
  };
  double x = -xmax;
  for (double fold : {-1.0, 1.0, xmax}) {
    while (x < fold) {
      add(x);
      const double slope = 1.0 - x * x;
      x += step / std::sqrt(1.0 + slope * slope);
    }
    x = fold;
  }
  add(xmax);
  return b;
}

Eigen::Matrix<double, 2, 3> extended_jacobian(const ModelSpec& m, const Eigen::Vector3d& z) {
  Eigen::Matrix<double, 2, 3> a;
  a.leftCols<2>() = planar_fast_jacobian(m, z(0), z(1), z(2));
  if (m.name() == ModelName::WilsonCowan) {
    const auto& w = m.params().wc;
    a(0, 2) = sigmoid_derivative(Sigmoid::X, w.j_xx * z(0) + w.j_xy * z(1) + z(2), m.params());
    a(1, 2) = 0.0;
  } else {
    a(0, 2) = z(0);
    a(1, 2) = z(1);
  }
  return a;
}

Eigen::Vector3d curve_tangent(const ModelSpec& m, const Eigen::Vector3d& z) {
  const auto a = extended_jacobian(m, z);
  Eigen::Vector3d t = Eigen::Vector3d(a.row(0)).cross(Eigen::Vector3d(a.row(1)));
  return t.normalized();
}

// Newton for F(z) = 0 together with n . (z - z0) = c.
std::optional<Eigen::Vector3d> project_on_curve(const ModelSpec& m, Eigen::Vector3d z, const Eigen::Vector3d& n,
                                                const Eigen::Vector3d& z0, double c, int max_iter = 30) {
  for (int it = 0; it < max_iter; ++it) {
    Eigen::Vector3d r;
    r.head<2>() = planar_fast_rhs(m, z(0), z(1), z(2));
    r(2) = n.dot(z - z0) - c;
    Eigen::Matrix3d a;
    a.topRows<2>() = extended_jacobian(m, z);
    a.row(2) = n.transpose();
    const Eigen::Vector3d dz = a.fullPivLu().solve(-r);
    if (!dz.allFinite()) return std::nullopt;
    z += dz;
    if (dz.norm() < 1e-14 * std::max(1.0, z.norm())) break;
  }
  Eigen::Vector3d r;
  r.head<2>() = planar_fast_rhs(m, z(0), z(1), z(2));
  if (!(r.head<2>().norm() < 1e-11)) return std::nullopt;
  return z;
}

BranchSample equilibrium_sample(const ModelSpec& m, const Eigen::Vector3d& z) {
  BranchSample s;
  s.mu = z(2);
  s.state = vec2(z(0), z(1));
  s.lead_real = lead_real_part(planar_fast_jacobian(m, z(0), z(1), z(2)));
  s.stability = s.lead_real < 0.0 ? Stability::Attracting : Stability::Repelling;
  return s;
}

// Arclength continuation of one connected component from `start`, heading
// initially toward increasing mu.
std::vector<Eigen::Vector3d> continue_equilibria(const ModelSpec& m, const Eigen::Vector3d& start, double lo,
                                                 double hi, double step, double orientation,
                                                 std::vector<std::string>& log) {
  std::vector<Eigen::Vector3d> pts{start};
  Eigen::Vector3d tan = curve_tangent(m, start);
  if (tan(2) * orientation < 0.0) tan = -tan;
  double h = step;
  const std::size_t max_pts = 200000;
  while (pts.size() < max_pts) {
    const Eigen::Vector3d& z = pts.back();
    const Eigen::Vector3d pred = z + h * tan;
    auto next = project_on_curve(m, pred, tan, z, h);
    if (!next) {
      h *= 0.5;
      if (h < 1e-6 * step) {
        log.push_back("equilibrium continuation stalled at mu=" + std::to_string(z(2)));
        break;
      }
      continue;
    }
    Eigen::Vector3d nt = curve_tangent(m, *next);
    if (nt.dot(tan) < 0.0) nt = -nt;
    tan = nt;
    h = step;
    if ((*next)(2) < lo || (*next)(2) > hi) break;
    pts.push_back(*next);
  }
  return pts;
}

// Refines a zero of `indicator` between consecutive curve points a, b.
std::optional<Eigen::Vector3d> refine_between(const ModelSpec& m, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                              const std::function<double(const Eigen::Vector3d&)>& indicator) {
  const Eigen::Vector3d d = b - a;
  const double len2 = d.squaredNorm();
  const Eigen::Vector3d n = d / std::sqrt(len2);
  auto point = [&](double lam) { return project_on_curve(m, a + lam * d, n, a, lam * std::sqrt(len2)); };
  auto g = [&](double lam) {
    if (lam <= 0.0) return indicator(a);
    if (lam >= 1.0) return indicator(b);
    auto p = point(lam);
    return p ? indicator(*p) : std::numeric_limits<double>::quiet_NaN();
  };
  const double ga = indicator(a), gb = indicator(b);
  std::uintmax_t iters = 200;
  auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-15; };
  try {
    auto r = boost::math::tools::toms748_solve(g, 0.0, 1.0, ga, gb, tol, iters);
    return point(0.5 * (r.first + r.second));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

BranchCurve planar_critical_manifold(const ModelSpec& m, double lo, double hi, double step) {
  BranchCurve b;
  b.kind = BranchKind::Equilibrium;

  // Equilibria on a coarse grid of mu values from a grid of seeds.
  std::vector<Eigen::Vector3d> found;
  const int n_mu = 41;
  for (int i = 0; i < n_mu; ++i) {
    const double mu = lo + (hi - lo) * i / (n_mu - 1);
    for (double x0 = -0.5; x0 <= 2.51; x0 += 0.25)
      for (double y0 = -0.5; y0 <= 9.01; y0 += 0.5) {
        auto e = polish_equilibrium(m, mu, {x0, y0});
        if (!e) continue;
        const Eigen::Vector3d z(e->x(), e->y(), mu);
        bool dup = false;
        for (const auto& f : found) dup = dup || (f - z).norm() < 1e-7;
        if (!dup) found.push_back(z);
      }
  }
  if (found.empty()) {
    b.log.push_back("no equilibria found from the seed grid");
    return b;
  }

  // Continue the component through the lowest-mu equilibrium in both directions.
  auto start = *std::min_element(found.begin(), found.end(),
                                 [](const auto& p, const auto& q) { return p(2) < q(2); });
  auto fwd = continue_equilibria(m, start, lo, hi, step, 1.0, b.log);
  auto bwd = continue_equilibria(m, start, lo, hi, step, -1.0, b.log);
  std::vector<Eigen::Vector3d> pts(bwd.rbegin(), bwd.rend());
  pts.insert(pts.end(), fwd.begin() + 1, fwd.end());

  // Report seed equilibria that the continued component misses.
  for (const auto& z : found) {
    double best = 1e300;
    for (const auto& p : pts) best = std::min(best, (p - z).norm());
    if (best > 2.0 * step)
      b.log.push_back("equilibrium off the continued branch at mu=" + std::to_string(z(2)));
  }

  auto trace = [&](const Eigen::Vector3d& z) { return planar_fast_jacobian(m, z(0), z(1), z(2)).trace(); };
  auto det = [&](const Eigen::Vector3d& z) { return planar_fast_jacobian(m, z(0), z(1), z(2)).determinant(); };

  for (std::size_t i = 0; i < pts.size(); ++i) {
    b.samples.push_back(equilibrium_sample(m, pts[i]));
    if (i + 1 == pts.size()) break;
    const auto& a = pts[i];
    const auto& c = pts[i + 1];
    std::optional<std::pair<SpecialPointType, Eigen::Vector3d>> sp;
    if ((det(a) < 0.0) != (det(c) < 0.0)) {
      if (auto z = refine_between(m, a, c, det)) sp.emplace(SpecialPointType::FoldOfEquilibria, *z);
    } else if (det(a) > 0.0 && (trace(a) < 0.0) != (trace(c) < 0.0)) {
      if (auto z = refine_between(m, a, c, trace)) sp.emplace(SpecialPointType::Hopf, *z);
    }
    if (sp) {
      auto s = equilibrium_sample(m, sp->second);
      b.special_points.push_back({sp->first, s.mu, s.state, b.samples.size()});
      b.samples.push_back(std::move(s));
    }
  }
  return b;
}

// ---------------------------------------------------------------- cycles

struct AugmentedFast {
  const ModelSpec* m;
  double mu;
  double sign;
  void operator()(double, const VectorXd& z, VectorXd& dz) const {
    dz.resize(3);
    const Eigen::Vector2d f = planar_fast_rhs(*m, z(0), z(1), mu);
    dz(0) = sign * f(0);
    dz(1) = sign * f(1);
    dz(2) = planar_fast_jacobian(*m, z(0), z(1), mu).trace();
  }
};

Eigen::Vector2d flow_normal(const ModelSpec& m, double mu, const Eigen::Vector2d& p, double sign) {
  const Eigen::Vector2d f = sign * planar_fast_rhs(m, p.x(), p.y(), mu);
  return f.normalized();
}

Eigen::Vector2d perp(const Eigen::Vector2d& n) { return {-n.y(), n.x()}; }

CycleRecord make_record(double mu, const Eigen::Vector2d& anchor, const ReturnMap& r) {
  CycleRecord c;
  c.mu = mu;
  c.anchor = anchor;
  c.period = r.time;
  c.amplitude = 0.5 * (r.x_max - r.x_min);
  c.floquet_exponent = r.divergence_integral / r.time;
  c.stability = c.floquet_exponent < 0.0 ? Stability::Attracting : Stability::Repelling;
  return c;
}

// A section through `p` normal to `n`, coordinate s along the tangent line.
struct Section {
  Eigen::Vector2d p, n, t;
};

Section section_at(const ModelSpec& m, double mu, const Eigen::Vector2d& p, double sign) {
  Section s;
  s.p = p;
  s.n = flow_normal(m, mu, p, sign);
  s.t = perp(s.n);
  return s;
}

// Return displacement G(s, mu) = (P(p + s t) - p) . t - s.
struct Displacement {
  double g = 0.0;
  ReturnMap ret;
  bool ok = false;
};

Displacement displacement(const ModelSpec& m, const Section& sec, double s, double mu, double sign,
                          const CycleOptions& opt) {
  Displacement d;
  d.ret = first_return(m, mu, sec.p + s * sec.t, sec.p, sec.n, sign, opt);
  d.ok = d.ret.ok;
  if (d.ok) d.g = (d.ret.point - sec.p).dot(sec.t) - s;
  return d;
}

double fd_step(double x) { return 1e-7 * std::max(1.0, std::abs(x)); }

// Continuation state for one accepted cycle.
struct CyclePoint {
  CycleRecord rec;
  double tau_mu = 0.0;  // mu-component of the tangent used to reach it
};

struct Corrected {
  bool ok = false;
  double s = 0.0, mu = 0.0;
  int iterations = 0;
  ReturnMap ret;
};

// Newton on [G(s, mu); tau . ((s, mu) - pred)] = 0.
Corrected correct(const ModelSpec& m, const Section& sec, Eigen::Vector2d x, const Eigen::Vector2d& pred,
                  const Eigen::Vector2d& tau, double sign, const CycleOptions& opt) {
  Corrected c;
  for (int it = 0; it < 12; ++it) {
    auto d0 = displacement(m, sec, x(0), x(1), sign, opt);
    if (!d0.ok) return c;
    const double hs = fd_step(x(0)), hm = fd_step(x(1));
    auto ds = displacement(m, sec, x(0) + hs, x(1), sign, opt);
    auto dm = displacement(m, sec, x(0), x(1) + hm, sign, opt);
    if (!ds.ok || !dm.ok) return c;
    Eigen::Matrix2d a;
    a << (ds.g - d0.g) / hs, (dm.g - d0.g) / hm, tau(0), tau(1);
    const Eigen::Vector2d r(d0.g, tau.dot(x - pred));
    const Eigen::Vector2d dx = a.fullPivLu().solve(-r);
    if (!dx.allFinite()) return c;
    x += dx;
    c.iterations = it + 1;
    if (dx.norm() < 1e-11 && std::abs(d0.g) < 10.0 * opt.newton_tol) {
      auto fin = displacement(m, sec, x(0), x(1), sign, opt);
      if (!fin.ok || std::abs(fin.g) > 100.0 * opt.newton_tol) return c;
      c.ok = true;
      c.s = x(0);
      c.mu = x(1);
      c.ret = fin.ret;
      return c;
    }
  }
  return c;
}

// Kernel direction of [G_s, G_mu] at a cycle.
Eigen::Vector2d kernel_tangent(const ModelSpec& m, const Section& sec, double mu, double sign,
                               const CycleOptions& opt) {
  auto d0 = displacement(m, sec, 0.0, mu, sign, opt);
  const double hs = fd_step(0.0), hm = fd_step(mu);
  auto ds = displacement(m, sec, hs, mu, sign, opt);
  auto dm = displacement(m, sec, 0.0, mu + hm, sign, opt);
  if (!d0.ok || !ds.ok || !dm.ok) return Eigen::Vector2d::Constant(std::numeric_limits<double>::quiet_NaN());
  const double gs = (ds.g - d0.g) / hs, gm = (dm.g - d0.g) / hm;
  return Eigen::Vector2d(-gm, gs).normalized();
}

void continue_one_way(const ModelSpec& m, const CycleRecord& seed, double lo, double hi, double orientation,
                      const CycleOptions& opt, std::vector<CyclePoint>& out, std::vector<std::string>& log,
                      std::vector<std::size_t>& folds) {
  CycleRecord cur = seed;
  Eigen::Vector2d prev_dir(0.0, orientation);  // (section displacement, mu)
  Eigen::Vector2d prev_anchor = seed.anchor;
  double prev_mu = seed.mu;
  double h = opt.ds;
  bool first = true;
  while (out.size() < opt.max_points) {
    // Follow the flow in the direction in which the cycle attracts; the
    // return map is then a contraction and Newton stays well conditioned.
    const double sign = cur.floquet_exponent > 0.0 ? -1.0 : 1.0;
    const Section sec = section_at(m, cur.mu, cur.anchor, sign);
    Eigen::Vector2d tau = kernel_tangent(m, sec, cur.mu, sign, opt);
    if (!tau.allFinite()) {
      log.push_back("cycle tangent unavailable at mu=" + std::to_string(cur.mu));
      return;
    }
    Eigen::Vector2d ref = first ? prev_dir : Eigen::Vector2d((cur.anchor - prev_anchor).dot(sec.t), cur.mu - prev_mu);
    if (tau.dot(ref) < 0.0) tau = -tau;

    Corrected c;
    while (true) {
      const Eigen::Vector2d pred = Eigen::Vector2d(0.0, cur.mu) + h * tau;
      c = correct(m, sec, pred, pred, tau, sign, opt);
      if (c.ok) break;
      h *= 0.5;
      if (h < opt.ds_min) {
        log.push_back("cycle continuation step underflow at mu=" + std::to_string(cur.mu));
        return;
      }
    }
    const Eigen::Vector2d anchor = sec.p + c.s * sec.t;
    CycleRecord rec = make_record(c.mu, anchor, c.ret);
    if (rec.mu < lo || rec.mu > hi) {
      log.push_back("cycle branch left the mu range");
      return;
    }
    if (rec.period > opt.max_period) {
      log.push_back("cycle period exceeded the homoclinic cutoff at mu=" + std::to_string(rec.mu));
      return;
    }
    if (rec.amplitude < opt.min_amplitude) {
      log.push_back("cycle branch reached the Hopf neighbourhood at mu=" + std::to_string(rec.mu));
      return;
    }

    if ((rec.floquet_exponent < 0.0) != (cur.floquet_exponent < 0.0) && !first) {
      // Fold: the multiplier passes through 1. Locate it along the same arc.
      auto flo = [&](double sigma) {
        if (sigma <= 0.0) return cur.floquet_exponent;
        if (sigma >= h) return rec.floquet_exponent;
        const Eigen::Vector2d pred = Eigen::Vector2d(0.0, cur.mu) + sigma * tau;
        auto cc = correct(m, sec, pred, pred, tau, sign, opt);
        return cc.ok ? cc.ret.divergence_integral / cc.ret.time : std::numeric_limits<double>::quiet_NaN();
      };
      std::uintmax_t iters = 100;
      auto tol = [&](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, h); };
      try {
        auto r = boost::math::tools::toms748_solve(flo, 0.0, h, cur.floquet_exponent, rec.floquet_exponent, tol,
                                                   iters);
        const double sigma = 0.5 * (r.first + r.second);
        const Eigen::Vector2d pred = Eigen::Vector2d(0.0, cur.mu) + sigma * tau;
        auto cc = correct(m, sec, pred, pred, tau, sign, opt);
        if (cc.ok) {
          CycleRecord fold = make_record(cc.mu, sec.p + cc.s * sec.t, cc.ret);
          folds.push_back(out.size());
          out.push_back({fold, tau(1)});
        }
      } catch (const std::exception& e) {
        log.push_back(std::string("cycle fold refinement failed: ") + e.what());
      }
    }

    out.push_back({rec, tau(1)});
    prev_anchor = cur.anchor;
    prev_mu = cur.mu;
    cur = rec;
    first = false;
    if (c.iterations <= 3)
      h = std::min(h * 1.5, opt.ds_max);
    else if (c.iterations >= 6)
      h = std::max(h * 0.5, opt.ds_min);
  }
  log.push_back("cycle continuation reached max_points");
}

BranchCurve assemble_cycles(const CycleRecord& seed, std::vector<CyclePoint> down, std::vector<CyclePoint> up,
                            std::vector<std::size_t> fold_down, std::vector<std::size_t> fold_up,
                            std::vector<std::string> log) {
  BranchCurve b;
  b.kind = BranchKind::Cycle;
  b.log = std::move(log);
  auto push = [&](const CycleRecord& c, bool fold) {
    BranchSample s;
    s.mu = c.mu;
    s.state = vec2(c.anchor.x(), c.anchor.y());
    s.stability = c.stability;
    s.cycle = c;
    if (fold) b.special_points.push_back({SpecialPointType::SaddleNodeOfCycles, c.mu, s.state, b.samples.size()});
    b.samples.push_back(std::move(s));
  };
  for (std::size_t i = down.size(); i-- > 0;)
    push(down[i].rec, std::find(fold_down.begin(), fold_down.end(), i) != fold_down.end());
  push(seed, false);
  for (std::size_t i = 0; i < up.size(); ++i)
    push(up[i].rec, std::find(fold_up.begin(), fold_up.end(), i) != fold_up.end());
  return b;
}

BranchCurve polar_cycle_branch(double lo, double hi, std::size_t n) {
  BranchCurve b;
  b.kind = BranchKind::Cycle;
  const double r_hb = std::sqrt(2.0);
  const double dr = r_hb / static_cast<double>(n);
  std::vector<double> rs;
  for (std::size_t i = 1; i <= n; ++i) rs.push_back(static_cast<double>(i) * dr);
  rs.back() = r_hb;
  rs.push_back(1.0);
  if (hi > 0.0) {
    const double r_top = std::sqrt(1.0 + std::sqrt(1.0 + hi));
    for (double r = r_hb + dr; r < r_top; r += dr) rs.push_back(r);
    rs.push_back(r_top);
  }
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  for (double r : rs) {
    const auto c = polar_cycle(r);
    if (c.mu < lo || c.mu > hi) continue;
    BranchSample s;
    s.mu = c.mu;
    s.state = vec2(c.anchor.x(), c.anchor.y());
    s.stability = c.stability;
    s.cycle = c;
    if (r == 1.0) b.special_points.push_back({SpecialPointType::SaddleNodeOfCycles, c.mu, s.state, b.samples.size()});
    b.samples.push_back(std::move(s));
  }
  return b;
}

}  // namespace

// ---------------------------------------------------------------- public API

BranchCurve critical_manifold(const ModelSpec& m, double mu_lo, double mu_hi, double step) {
  if (!std::isfinite(mu_lo) || !std::isfinite(mu_hi) || !(mu_hi > mu_lo))
    throw std::invalid_argument("critical_manifold: mu range must be finite and increasing");
  if (!(step > 0.0)) throw std::invalid_argument("critical_manifold: step must be > 0");
  switch (m.name()) {
    case ModelName::Canonical:
    case ModelName::Leidenator: return polar_critical_manifold(mu_lo, mu_hi, step);
    case ModelName::VanDerPol: return vdp_critical_manifold(mu_lo, mu_hi, step);
    case ModelName::WilsonCowan: return planar_critical_manifold(m, mu_lo, mu_hi, step);
  }
  return {};
}

std::optional<Eigen::Vector2d> polish_equilibrium(const ModelSpec& m, double mu, Eigen::Vector2d z, double tol,
                                                  int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::Vector2d f = planar_fast_rhs(m, z.x(), z.y(), mu);
    if (!f.allFinite()) return std::nullopt;
    if (f.norm() < tol) return z;
    const Eigen::Vector2d dz = planar_fast_jacobian(m, z.x(), z.y(), mu).fullPivLu().solve(-f);
    if (!dz.allFinite()) return std::nullopt;
    // Damped step: never move more than one unit at a time.
    const double scale = std::min(1.0, 1.0 / std::max(dz.norm(), 1e-300));
    z += scale * dz;
  }
  if (planar_fast_rhs(m, z.x(), z.y(), mu).norm() < tol) return z;
  return std::nullopt;
}

CycleRecord polar_cycle(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("polar_cycle: r must be > 0");
  CycleRecord c;
  const double rr = r * r;
  c.mu = rr * (rr - 2.0);
  c.period = kTwoPi;
  c.amplitude = r;
  c.anchor = {r, 0.0};
  c.floquet_exponent = 4.0 * rr * (1.0 - rr);
  c.stability = r < 1.0 ? Stability::Repelling : Stability::Attracting;
  return c;
}

ReturnMap first_return(const ModelSpec& m, double mu, const Eigen::Vector2d& start, const Eigen::Vector2d& p,
                       const Eigen::Vector2d& normal, double time_sign, const CycleOptions& opt) {
  ReturnMap out;
  AugmentedFast field{&m, mu, time_sign < 0.0 ? -1.0 : 1.0};
  VectorXd z0(3);
  z0 << start.x(), start.y(), 0.0;
  out.x_min = out.x_max = start.x();
  auto g = [&](double, const VectorXd& z) { return (z(0) - p.x()) * normal.x() + (z(1) - p.y()) * normal.y(); };
  bool armed = false;
  std::vector<std::pair<double, VectorXd>> roots;
  ode::IntegratorConfig cfg = opt.integrator;
  cfg.record_dense = false;
  const auto status = ode::integrate_streaming<double>(
      field, z0, 0.0, opt.max_period, cfg, [&](const ode::StepView<double>& step) {
        for (int q = 1; q <= 8; ++q) {
          const double x = step.segment.eval_component(step.t0() + step.segment.h * q / 8.0, 0);
          out.x_min = std::min(out.x_min, x);
          out.x_max = std::max(out.x_max, x);
        }
        roots.clear();
        ode::segment_roots(step.segment, g, ode::Direction::Any, 1e-14 * std::max(1.0, step.t1()), roots);
        for (const auto& [t, z] : roots) {
          const Eigen::Vector2d fz = field.sign * planar_fast_rhs(m, z(0), z(1), mu);
          const bool down = fz.dot(normal) < 0.0;
          if (!armed) {
            if (down) armed = true;
            continue;
          }
          if (!down) {
            out.ok = true;
            out.time = t;
            out.point = z.head<2>();
            out.divergence_integral = z(2);
            return false;
          }
        }
        return true;
      });
  if (status != ode::Status::Stopped) out.ok = false;
  return out;
}

std::optional<CycleRecord> polish_cycle(const ModelSpec& m, double mu, const Eigen::Vector2d& anchor,
                                        double time_sign, const CycleOptions& opt) {
  const Section sec = section_at(m, mu, anchor, time_sign);
  double s = 0.0;
  for (int it = 0; it < 40; ++it) {
    auto d0 = displacement(m, sec, s, mu, time_sign, opt);
    if (!d0.ok) return std::nullopt;
    if (std::abs(d0.g) < opt.newton_tol) {
      auto rec = make_record(mu, sec.p + s * sec.t, d0.ret);
      return rec;
    }
    const double hs = fd_step(s) * 10.0;
    auto d1 = displacement(m, sec, s + hs, mu, time_sign, opt);
    if (!d1.ok) return std::nullopt;
    const double slope = (d1.g - d0.g) / hs;
    if (!(std::abs(slope) > 0.0)) return std::nullopt;
    double ds = -d0.g / slope;
    const double cap = 0.1 * std::max(1e-3, std::abs(d0.ret.x_max - d0.ret.x_min));
    ds = std::clamp(ds, -cap, cap);
    s += ds;
  }
  return std::nullopt;
}

std::optional<CycleRecord> find_cycle(const ModelSpec& m, double mu, const Eigen::Vector2d& start, double time_sign,
                                      const CycleOptions& opt) {
  const double sign = time_sign < 0.0 ? -1.0 : 1.0;
  Field f{&m, CoordinateForm::Cartesian, SubsystemKind::Fast, sign};
  VectorXd z0(3);
  z0 << start.x(), start.y(), mu;
  ode::IntegratorConfig cfg = opt.integrator;
  cfg.record_dense = false;
  VectorXd last = z0;
  const auto status = ode::integrate_streaming<double>(f, z0, 0.0, opt.settle_time, cfg,
                                                       [&](const ode::StepView<double>& st) {
                                                         last = st.y1;
                                                         return last.head<2>().norm() < 1e6;
                                                       });
  if (status != ode::Status::Success) return std::nullopt;
  const Eigen::Vector2d p = last.head<2>();
  if (planar_fast_rhs(m, p.x(), p.y(), mu).norm() < 1e-8) return std::nullopt;  // settled on an equilibrium
  auto rec = polish_cycle(m, mu, p, sign, opt);
  if (rec && rec->amplitude < opt.min_amplitude) return std::nullopt;
  return rec;
}

BranchCurve cycle_branch(const ModelSpec& m, double mu_lo, double mu_hi, const CycleOptions& opt) {
  if (!std::isfinite(mu_lo) || !std::isfinite(mu_hi) || !(mu_hi > mu_lo))
    throw std::invalid_argument("cycle_branch: mu range must be finite and increasing");
  if (m.is_polar_model()) return polar_cycle_branch(mu_lo, mu_hi, opt.polar_samples);
  if (m.name() == ModelName::VanDerPol)
    throw UnavailableSubsystem("cycle_branch: the van der Pol fast subsystem is one-dimensional");

  // Seed: the first attracting cycle reached from the critical manifold on a mu grid.
  const auto eq = critical_manifold(m, mu_lo, mu_hi, 0.02);
  std::vector<std::string> log;
  std::optional<CycleRecord> seed;
  const int n_grid = 25;
  for (int i = 0; i < n_grid && !seed; ++i) {
    const double mu = mu_lo + (mu_hi - mu_lo) * (i + 0.5) / n_grid;
    for (const auto& s : eq.samples) {
      if (std::abs(s.mu - mu) > 0.02 || s.stability != Stability::Repelling) continue;
      auto e = polish_equilibrium(m, mu, {s.state(0), s.state(1)});
      if (!e) continue;
      seed = find_cycle(m, mu, *e + Eigen::Vector2d(1e-3, 0.0), 1.0, opt);
      if (seed) break;
    }
  }
  if (!seed) {
    BranchCurve b;
    b.kind = BranchKind::Cycle;
    b.log.push_back("no attracting cycle found in range");
    return b;
  }
  auto b = continue_cycle_branch(m, *seed, mu_lo, mu_hi, opt);
  b.log.insert(b.log.begin(), log.begin(), log.end());
  return b;
}

BranchCurve continue_cycle_branch(const ModelSpec& m, const CycleRecord& seed, double mu_lo, double mu_hi,
                                  const CycleOptions& opt) {
  if (m.dim_fast() != 2) throw UnavailableSubsystem("continue_cycle_branch: fast subsystem is not planar");
  std::vector<std::string> log;
  std::vector<CyclePoint> up, down;
  std::vector<std::size_t> fu, fd;
  continue_one_way(m, seed, mu_lo, mu_hi, 1.0, opt, up, log, fu);
  continue_one_way(m, seed, mu_lo, mu_hi, -1.0, opt, down, log, fd);
  return assemble_cycles(seed, std::move(down), std::move(up), std::move(fd), std::move(fu), std::move(log));
}

CycleFold sn_of_cycles(const BranchCurve& cycles) {
  for (const auto& sp : cycles.special_points)
    if (sp.type == SpecialPointType::SaddleNodeOfCycles) return {sp.mu, *cycles.samples[sp.sample_index].cycle};
  throw std::runtime_error("sn_of_cycles: no fold of the cycle branch in range");
}

CycleFold sn_of_cycles(const ModelSpec& m, const CycleOptions& opt) {
  if (m.is_polar_model()) return {-1.0, polar_cycle(1.0)};
  if (m.name() == ModelName::VanDerPol) throw UnavailableSubsystem("sn_of_cycles: no cycles in the van der Pol fast subsystem");
  return sn_of_cycles(cycle_branch(m, -8.0, -3.0, opt));
}

void write_branch_csv(std::ostream& os, const BranchCurve& b) {
  os << "kind,mu,amplitude,period,stability,special_point_flag\n";
  std::ostringstream line;
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const auto& s = b.samples[i];
    std::string flag;
    for (const auto& sp : b.special_points)
      if (sp.sample_index == i) flag = std::string(to_string(sp.type));
    line.str("");
    line << std::setprecision(17) << to_string(b.kind) << ',' << s.mu << ','
         << (s.cycle ? s.cycle->amplitude : 0.0) << ',' << (s.cycle ? s.cycle->period : 0.0) << ','
         << to_string(s.stability) << ',' << flag << '\n';
    os << line.str();
  }
}

}  // namespace tcanard
