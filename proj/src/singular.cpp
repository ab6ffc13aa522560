#include "tcanard/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tcanard {

namespace {

constexpr double kTol = kJunctionTol;
constexpr double kInf = std::numeric_limits<double>::infinity();

double alpha_of(const ModelSpec& m) { return m.name() == ModelName::Leidenator ? m.params().alpha : 0.0; }

double s0_mu(double x) { return x - x * x * x / 3.0; }

// Cycle radius on the repelling (r < 1) and attracting (r > 1) branches.
double r_inner(double mu) { return std::sqrt(1.0 - std::sqrt(1.0 + mu)); }
double r_outer(double mu) { return std::sqrt(1.0 + std::sqrt(1.0 + mu)); }

// Roots of x - x^3/3 = mu for |mu| <= 2/3: j = 0 right, 1 left, 2 middle.
double vdp_root(double mu, int j) {
  const double c = std::clamp(-1.5 * mu, -1.0, 1.0);
  return 2.0 * std::cos((std::acos(c) + 2.0 * std::numbers::pi * j) / 3.0);
}

std::string fmt(const SingularPoint& p) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << p.u << ", " << p.mu << ")";
  return os.str();
}

double dist(const SingularPoint& a, const SingularPoint& b) { return std::hypot(a.u - b.u, a.mu - b.mu); }

bool is_vdp(const ModelSpec& m) { return m.name() == ModelName::VanDerPol; }

bool on_support(const ModelSpec& m, SegmentKind kind, const SingularPoint& p, double mu_fast) {
  switch (kind) {
    case SegmentKind::Slow:
      return is_vdp(m) ? std::abs(p.mu - s0_mu(p.u)) <= kTol : std::abs(p.u) <= kTol;
    case SegmentKind::AveragedSlow:
      return !is_vdp(m) && p.u >= -kTol && std::abs(p.mu - polar_branch_mu(p.u)) <= kTol;
    case SegmentKind::Fast:
      return std::abs(p.mu - mu_fast) <= kTol;
  }
  return false;
}

// d mu / dt along a slow or averaged-slow support.
double slow_rate(const ModelSpec& m, SegmentKind kind, const SingularPoint& p) {
  const auto& q = m.params();
  if (is_vdp(m)) return p.u - q.a;
  if (kind == SegmentKind::Slow) return q.k - alpha_of(m) * p.mu;
  return q.k - p.u * p.u - alpha_of(m) * polar_branch_mu(p.u);
}

double fast_rate(const ModelSpec& m, double u, double mu) {
  if (is_vdp(m)) return u - u * u * u / 3.0 - mu;
  const double rr = u * u;
  return u * (mu + 2.0 * rr - rr * rr);
}

enum class Stretch { Attracting, Repelling, Special };

Stretch stretch_at(const ModelSpec& m, SegmentKind kind, const SingularPoint& p) {
  if (is_vdp(m)) {
    const double ax = std::abs(p.u);
    if (std::abs(ax - 1.0) <= kTol) return Stretch::Special;
    return ax > 1.0 ? Stretch::Attracting : Stretch::Repelling;
  }
  if (kind == SegmentKind::Slow) {
    if (std::abs(p.mu) <= kTol) return Stretch::Special;
    return p.mu < 0.0 ? Stretch::Attracting : Stretch::Repelling;
  }
  if (std::abs(p.u - 1.0) <= kTol || std::abs(p.u) <= kTol) return Stretch::Special;
  return p.u > 1.0 ? Stretch::Attracting : Stretch::Repelling;
}

bool attracting_landing(const ModelSpec& m, const SingularPoint& p) {
  if (is_vdp(m)) return std::abs(p.mu - s0_mu(p.u)) <= kTol && std::abs(p.u) > 1.0 + kTol;
  if (std::abs(p.u) <= kTol) return p.mu < -kTol;
  return p.u > 1.0 + kTol && std::abs(p.mu - polar_branch_mu(p.u)) <= kTol;
}

bool at_hopf(const SingularPoint& p) { return std::abs(p.u) <= kTol && std::abs(p.mu) <= kTol; }

Certificate fail(Rule r, std::size_t index, std::string detail) {
  return {false, Violation{r, index, std::move(detail)}};
}

}  // namespace

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::Slow: return "slow";
    case SegmentKind::Fast: return "fast";
    case SegmentKind::AveragedSlow: return "averaged-slow";
  }
  return "?";
}

std::string_view to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Relaxation: return "relaxation";
    case OrbitClass::CanardHeadless: return "canard-headless";
    case OrbitClass::CanardWithHead: return "canard-with-head";
    case OrbitClass::TcHeadless: return "singular-TC-headless";
    case OrbitClass::MaximalTc: return "singular-maximal-TC";
    case OrbitClass::TcWithHead: return "singular-TC-with-head";
    case OrbitClass::MixedTcHeadless: return "singular-mixed-TC-headless";
    case OrbitClass::MaximalMixedTc: return "singular-maximal-mixed-TC";
    case OrbitClass::MixedTcWithHead: return "singular-mixed-TC-with-head";
    case OrbitClass::Bursting: return "singular-bursting";
    case OrbitClass::Terminating: return "terminating";
  }
  return "?";
}

OrbitClass parse_orbit_class(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(OrbitClass::Terminating); ++i) {
    const auto c = static_cast<OrbitClass>(i);
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown singular orbit family: " + std::string(s));
}

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::Malformed: return "malformed";
    case Rule::Support: return "support";
    case Rule::Orientation: return "orientation";
    case Rule::Continuity: return "continuity";
    case Rule::JumpFromAttractingInterior: return "jump-from-attracting-interior";
    case Rule::SlowAvgJunctionNotAtHopf: return "slow-avg-junction-not-at-hopf";
    case Rule::FastEndNotAttracting: return "fast-end-not-attracting";
    case Rule::Closure: return "closure";
  }
  return "?";
}

std::string_view to_string(Corruption c) {
  switch (c) {
    case Corruption::InteriorJump: return "interior-jump";
    case Corruption::OrientationFlip: return "orientation-flip";
    case Corruption::JunctionGap: return "junction-gap";
  }
  return "?";
}

std::vector<SingularPoint> SingularOrbit::junctions() const {
  std::vector<SingularPoint> out;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) out.push_back(segments[i].end());
  if (closed && !segments.empty()) out.push_back(segments.back().end());
  return out;
}

bool RegimeCase::has(OrbitClass c) const {
  return std::any_of(families.begin(), families.end(), [&](const FamilyInfo& f) { return f.label == c; });
}

Certificate validate(const SingularOrbit& orbit) {
  const auto& m = orbit.model;
  const auto& segs = orbit.segments;
  if (segs.empty()) return fail(Rule::Malformed, 0, "orbit has no segments");

  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.points.size() < 2) return fail(Rule::Malformed, i, "segment has fewer than two samples");
    for (const auto& p : s.points)
      if (!std::isfinite(p.u) || !std::isfinite(p.mu)) return fail(Rule::Malformed, i, "non-finite sample");
    for (const auto& p : s.points)
      if (!on_support(m, s.kind, p, s.start().mu))
        return fail(Rule::Support, i, std::string(to_string(s.kind)) + " sample off its support at " + fmt(p));
  }

  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.kind == SegmentKind::Fast) continue;
    for (std::size_t j = 0; j + 1 < s.points.size(); ++j) {
      const auto& a = s.points[j];
      const auto& b = s.points[j + 1];
      const double dmu = b.mu - a.mu;
      if (std::abs(dmu) <= 1e-12) continue;
      const SingularPoint mid{0.5 * (a.u + b.u), 0.5 * (a.mu + b.mu)};
      if (dmu * slow_rate(m, s.kind, mid) <= 0.0)
        return fail(Rule::Orientation, i, "traversed against the slow flow near " + fmt(mid));
    }
  }

  const std::size_t njunctions = orbit.closed ? segs.size() : segs.size() - 1;
  for (std::size_t j = 0; j < njunctions; ++j) {
    const auto& from = segs[j];
    const auto& to = segs[(j + 1) % segs.size()];
    const bool wrap = j + 1 == segs.size();
    if (dist(from.end(), to.start()) > kTol)
      return fail(wrap ? Rule::Closure : Rule::Continuity, j,
                  "gap between " + fmt(from.end()) + " and " + fmt(to.start()));
    const bool from_slowish = from.kind != SegmentKind::Fast;
    if (from_slowish && to.kind == SegmentKind::Fast &&
        stretch_at(m, from.kind, from.end()) == Stretch::Attracting)
      return fail(Rule::JumpFromAttractingInterior, j, "jump from attracting stretch at " + fmt(from.end()));
    if (from_slowish && to.kind != SegmentKind::Fast && from.kind != to.kind && !at_hopf(from.end()))
      return fail(Rule::SlowAvgJunctionNotAtHopf, j, "switch away from the Hopf point at " + fmt(from.end()));
  }

  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.kind != SegmentKind::Fast) continue;
    const double mu = s.start().mu;
    for (std::size_t j = 0; j + 1 < s.points.size(); ++j) {
      const double du = s.points[j + 1].u - s.points[j].u;
      if (std::abs(du) <= 1e-12) continue;
      const double mid = 0.5 * (s.points[j].u + s.points[j + 1].u);
      if (du * fast_rate(m, mid, mu) <= 0.0)
        return fail(Rule::Orientation, i, "fast segment against the fast flow near " + fmt({mid, mu}));
    }
    const bool horizon = orbit.open_end && !orbit.closed && i + 1 == segs.size();
    if (!horizon && !attracting_landing(m, s.end()))
      return fail(Rule::FastEndNotAttracting, i, "fast segment ends at " + fmt(s.end()));
  }
  return {};
}

RegimeCase classify_regime(const ModelSpec& m) {
  if (!m.is_polar_model()) throw std::invalid_argument("classify_regime: canonical or leidenator model required");
  const double k = m.params().k;
  const double alpha = alpha_of(m);
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("classify_regime: alpha must lie in [0, 1)");
  const bool leiden = m.name() == ModelName::Leidenator && alpha > 0.0;
  RegimeCase rc;
  rc.k_sn = 1.0 - alpha;
  const std::string on_s0 = "p1: mu of the jump point on S0, in [0, " +
                            std::string(leiden ? "min(mu_max, buffer point))" : "mu_max]");
  const std::string on_rep = "p1: mu of the jump point on the repelling cycle branch, in (-1, 0)";
  if (std::abs(k - rc.k_sn) <= kCaseTol) {
    rc.label = 2;
    rc.description = "averaged slow equilibrium at the cycle fold SN (canard point)";
    rc.families = {{OrbitClass::TcHeadless, 1, on_rep},
                   {OrbitClass::MaximalTc, 1, on_s0},
                   {OrbitClass::TcWithHead, 2, on_rep + "; p3: mu where the head leaves S0, > 0"}};
  } else if (std::abs(k) <= kCaseTol) {
    rc.label = 4;
    if (leiden) {
      rc.description = "buffer point coincides with the Hopf point; no averaged slow equilibrium";
      if (alpha < 0.5)
        rc.families = {{OrbitClass::MixedTcHeadless, 1, on_rep},
                       {OrbitClass::MaximalMixedTc, 0, "none"},
                       {OrbitClass::MixedTcWithHead, 1, on_rep}};
    } else {
      rc.description = "continuum of trivial equilibria on S0";
      rc.families = {{OrbitClass::Terminating, 1, "p0: mu of the start on the attracting cycle branch, > -1"}};
    }
  } else if (k > rc.k_sn) {
    rc.label = 1;
    rc.description = "attracting averaged slow equilibrium on the outer cycle branch";
    rc.families = {{OrbitClass::Terminating, 1, "p0: start mu on S0, < 0; " + on_s0}};
  } else if (k > 0.0) {
    rc.label = 3;
    rc.description = "averaged slow equilibrium on the repelling cycle branch";
    rc.families = {{OrbitClass::Bursting, 1, on_s0}};
  } else {
    rc.label = 5;
    if (leiden) {
      rc.description = "attracting slow equilibrium on S0 at the buffer point k/alpha < 0";
      rc.families = {{OrbitClass::Terminating, 1, "p0: mu of the start on the attracting cycle branch, > -1"}};
    } else {
      rc.description = "no equilibrium of the slow subsystems; drift in mu toward -infinity";
    }
  }
  return rc;
}

std::vector<FamilyInfo> vdp_families(const ModelSpec& m) {
  if (!is_vdp(m)) throw std::invalid_argument("vdp_families: van der Pol model required");
  const double af = -std::abs(m.params().a);
  const std::string rep = "p1: x of the jump point on the repelling branch, strictly between the folds";
  if (std::abs(af + 1.0) <= kCaseTol)
    return {{OrbitClass::CanardHeadless, 1, rep}, {OrbitClass::CanardWithHead, 1, rep}, {OrbitClass::Relaxation, 0, "none"}};
  if (af > -1.0) return {{OrbitClass::Relaxation, 0, "none"}};
  return {{OrbitClass::Terminating, 1, "optional " + rep + "; unset jumps directly from the fold"}};
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  v.back() = b;
  return v;
}

SingularSegment fast_seg(double mu, double ua, double ub, int n) {
  SingularSegment s{SegmentKind::Fast, {}};
  for (double u : linspace(ua, ub, n)) s.points.push_back({u, mu});
  return s;
}

SingularSegment slow_polar(double mua, double mub, int n) {
  SingularSegment s{SegmentKind::Slow, {}};
  for (double mu : linspace(mua, mub, n)) s.points.push_back({0.0, mu});
  return s;
}

// Averaged-slow segment from radius ra to rb; the fold r = 1 is a sample when crossed.
SingularSegment avg_polar(double ra, double rb, int n) {
  SingularSegment s{SegmentKind::AveragedSlow, {}};
  auto add = [&](double a, double b) {
    for (double r : linspace(a, b, n)) {
      if (!s.points.empty() && s.points.back().u == r) continue;
      s.points.push_back({r, polar_branch_mu(r)});
    }
  };
  if ((ra - 1.0) * (rb - 1.0) < 0.0) {
    add(ra, 1.0);
    add(1.0, rb);
  } else {
    add(ra, rb);
  }
  return s;
}

SingularSegment slow_vdp(double xa, double xb, int n) {
  SingularSegment s{SegmentKind::Slow, {}};
  for (double x : linspace(xa, xb, n)) s.points.push_back({x, s0_mu(x)});
  return s;
}

[[noreturn]] void out_of_range(const std::string& what) { throw std::invalid_argument("build_singular_family: " + what); }

double in_open(std::optional<double> v, double dflt, double lo, double hi, const char* name) {
  const double x = v.value_or(dflt);
  if (!(x > lo && x < hi)) out_of_range(std::string(name) + " outside its range");
  return x;
}

SingularOrbit build_polar(const ModelSpec& m, OrbitClass family, const FamilyParams& fp) {
  const auto rc = classify_regime(m);
  if (!rc.has(family))
    out_of_range(std::string(to_string(family)) + " not available in Case " + std::to_string(rc.label));
  const int n = fp.samples;
  const auto buf = buffer_point(m);
  const double s0_hi = (buf.exists && !buf.degenerate && buf.mu > 0.0) ? buf.mu : kInf;
  const double p1_s0_default = s0_hi <= fp.mu_max ? 0.5 * s0_hi : fp.mu_max;
  auto jump_on_s0 = [&](std::optional<double> v, double dflt) {
    const double x = v.value_or(dflt);
    if (!(x >= 0.0 && x < s0_hi && x <= fp.mu_max)) out_of_range("p1 outside [0, min(mu_max, buffer point))");
    return x;
  };

  SingularOrbit o;
  o.model = m;
  o.classification = family;
  auto& sg = o.segments;
  switch (family) {
    case OrbitClass::Terminating: {
      if (rc.label == 1) {
        const double p0 = fp.p0.value_or(-1.0);
        if (!(p0 < 0.0)) out_of_range("p0 must be negative");
        const double p1 = jump_on_s0(fp.p1, p1_s0_default);
        double r_eq = 0.0;
        for (const auto& e : avg_slow_equilibria(m))
          if (e.stability == Stability::Attracting && e.coordinate > 1.0) r_eq = e.coordinate;
        sg.push_back(slow_polar(p0, p1, n));
        sg.push_back(fast_seg(p1, 0.0, r_outer(p1), n));
        if (std::abs(r_outer(p1) - r_eq) > 1e-12) sg.push_back(avg_polar(r_outer(p1), r_eq, n));
      } else {
        const double p0 = fp.p0.value_or(0.0);
        if (!(p0 > -1.0)) out_of_range("p0 must exceed -1");
        sg.push_back(avg_polar(r_outer(p0), 1.0, n));
        sg.push_back(fast_seg(-1.0, 1.0, 0.0, n));
        if (rc.label == 5 && std::abs(buf.mu + 1.0) > 1e-12) sg.push_back(slow_polar(-1.0, buf.mu, n));
      }
      o.closed = false;
      break;
    }
    case OrbitClass::TcHeadless: {
      const double p1 = in_open(fp.p1, -0.5, -1.0, 0.0, "p1");
      sg.push_back(avg_polar(r_outer(p1), r_inner(p1), n));
      sg.push_back(fast_seg(p1, r_inner(p1), r_outer(p1), n));
      o.closed = true;
      break;
    }
    case OrbitClass::MaximalTc: {
      const double p1 = jump_on_s0(fp.p1, 0.0);
      sg.push_back(avg_polar(r_outer(p1), 0.0, n));
      if (p1 > 0.0) sg.push_back(slow_polar(0.0, p1, n));
      sg.push_back(fast_seg(p1, 0.0, r_outer(p1), n));
      o.closed = true;
      break;
    }
    case OrbitClass::TcWithHead: {
      const double p1 = in_open(fp.p1, -0.5, -1.0, 0.0, "p1");
      const double p3 = fp.p3 ? *fp.p3 : head_exit(m, p1).mu_out;
      if (!(p3 > 0.0 && p3 <= s0_hi && p3 <= fp.mu_max)) out_of_range("p3 outside (0, min(mu_max, buffer point)]");
      sg.push_back(avg_polar(r_outer(p3), r_inner(p1), n));
      sg.push_back(fast_seg(p1, r_inner(p1), 0.0, n));
      sg.push_back(slow_polar(p1, p3, n));
      sg.push_back(fast_seg(p3, 0.0, r_outer(p3), n));
      o.closed = true;
      break;
    }
    case OrbitClass::Bursting: {
      const double p1 = jump_on_s0(fp.p1, p1_s0_default);
      sg.push_back(avg_polar(r_outer(p1), 1.0, n));
      sg.push_back(fast_seg(-1.0, 1.0, 0.0, n));
      sg.push_back(slow_polar(-1.0, p1, n));
      sg.push_back(fast_seg(p1, 0.0, r_outer(p1), n));
      o.closed = true;
      break;
    }
    case OrbitClass::MixedTcHeadless: {
      const double p1 = in_open(fp.p1, -0.5, -1.0, 0.0, "p1");
      sg.push_back(slow_polar(p1, 0.0, n));
      sg.push_back(avg_polar(0.0, r_inner(p1), n));
      sg.push_back(fast_seg(p1, r_inner(p1), 0.0, n));
      o.closed = true;
      break;
    }
    case OrbitClass::MaximalMixedTc: {
      sg.push_back(slow_polar(-1.0, 0.0, n));
      sg.push_back(avg_polar(0.0, 1.0, n));
      sg.push_back(fast_seg(-1.0, 1.0, 0.0, n));
      o.closed = true;
      break;
    }
    case OrbitClass::MixedTcWithHead: {
      const double p1 = in_open(fp.p1, -0.5, -1.0, 0.0, "p1");
      sg.push_back(slow_polar(-1.0, 0.0, n));
      sg.push_back(avg_polar(0.0, r_inner(p1), n));
      sg.push_back(fast_seg(p1, r_inner(p1), r_outer(p1), n));
      sg.push_back(avg_polar(r_outer(p1), 1.0, n));
      sg.push_back(fast_seg(-1.0, 1.0, 0.0, n));
      o.closed = true;
      break;
    }
    default:
      out_of_range(std::string(to_string(family)) + " is a van der Pol family");
  }
  return o;
}

// Built with the canard fold at p0 = (-1, -2/3); a > 0 is handled by the
// symmetry (x, mu, a) -> (-x, -mu, -a).
SingularOrbit build_vdp(const ModelSpec& m, OrbitClass family, const FamilyParams& fp) {
  const auto fams = vdp_families(m);
  if (std::none_of(fams.begin(), fams.end(), [&](const FamilyInfo& f) { return f.label == family; }))
    out_of_range(std::string(to_string(family)) + " not available at this van der Pol offset");
  const double a = m.params().a;
  const double sigma = a > 0.0 ? -1.0 : 1.0;
  const double af = sigma * a;
  const int n = fp.samples;
  const double top = 2.0 / 3.0;

  SingularOrbit o;
  o.model = m;
  o.classification = family;
  auto& sg = o.segments;
  auto relaxation_tail = [&] {
    sg.push_back(slow_vdp(2.0, 1.0, n));
    sg.push_back(fast_seg(top, 1.0, -2.0, n));
  };
  auto jump_x = [&] { return sigma * in_open(fp.p1, 0.0, -1.0, 1.0, "p1"); };
  switch (family) {
    case OrbitClass::Relaxation:
      sg.push_back(fast_seg(-top, -1.0, 2.0, n));
      relaxation_tail();
      sg.push_back(slow_vdp(-2.0, -1.0, n));
      o.closed = true;
      break;
    case OrbitClass::CanardHeadless: {
      const double x1 = jump_x();
      const double mu1 = s0_mu(x1);
      sg.push_back(slow_vdp(-1.0, x1, n));
      sg.push_back(fast_seg(mu1, x1, vdp_root(mu1, 1), n));
      sg.push_back(slow_vdp(vdp_root(mu1, 1), -1.0, n));
      o.closed = true;
      break;
    }
    case OrbitClass::CanardWithHead: {
      const double x1 = jump_x();
      const double mu1 = s0_mu(x1);
      sg.push_back(slow_vdp(-1.0, x1, n));
      sg.push_back(fast_seg(mu1, x1, vdp_root(mu1, 0), n));
      sg.push_back(slow_vdp(vdp_root(mu1, 0), 1.0, n));
      sg.push_back(fast_seg(top, 1.0, -2.0, n));
      sg.push_back(slow_vdp(-2.0, -1.0, n));
      o.closed = true;
      break;
    }
    case OrbitClass::Terminating: {
      double x_land = -2.0;
      if (fp.p1) {
        const double x1 = jump_x();
        const double mu1 = s0_mu(x1);
        x_land = vdp_root(mu1, 1);
        sg.push_back(slow_vdp(-1.0, x1, n));
        sg.push_back(fast_seg(mu1, x1, x_land, n));
      } else {
        sg.push_back(fast_seg(-top, -1.0, 2.0, n));
        relaxation_tail();
      }
      if (std::abs(x_land - af) > 1e-12) sg.push_back(slow_vdp(x_land, af, n));
      o.closed = false;
      break;
    }
    default:
      out_of_range(std::string(to_string(family)) + " is not a van der Pol family");
  }
  if (sigma < 0.0)
    for (auto& s : sg)
      for (auto& p : s.points) p = {-p.u, -p.mu};
  return o;
}

}  // namespace

EntryExit head_exit(const ModelSpec& m, double mu_p2) { return entry_exit(m, mu_p2); }

SingularOrbit build_singular_family(const ModelSpec& m, OrbitClass family, const FamilyParams& fp) {
  if (fp.samples < 2) out_of_range("samples must be at least 2");
  if (!(fp.mu_max > 0.0)) out_of_range("mu_max must be positive");
  SingularOrbit o;
  if (is_vdp(m)) o = build_vdp(m, family, fp);
  else if (m.is_polar_model()) o = build_polar(m, family, fp);
  else throw std::invalid_argument("build_singular_family: no singular families for " + std::string(to_string(m.name())));
  const auto cert = validate(o);
  if (!cert.valid)
    throw std::logic_error("build_singular_family: constructed orbit violates " +
                           std::string(to_string(cert.violation->rule)) + ": " + cert.violation->detail);
  return o;
}

std::vector<SingularOrbit> enumerate_families(const ModelSpec& m, int per_family, const FamilyParams& base) {
  const bool vdp = is_vdp(m);
  const auto fams = vdp ? vdp_families(m) : classify_regime(m).families;
  const int regime = vdp ? 0 : classify_regime(m).label;
  const auto buf = buffer_point(m);
  const double s0_hi = (buf.exists && !buf.degenerate && buf.mu > 0.0) ? std::min(buf.mu, base.mu_max) : base.mu_max;
  std::vector<SingularOrbit> out;
  for (const auto& f : fams) {
    if (f.dimension == 0) {
      out.push_back(build_singular_family(m, f.label, base));
      continue;
    }
    for (int i = 1; i <= per_family; ++i) {
      const double t = static_cast<double>(i) / (per_family + 1);
      FamilyParams fp = base;
      switch (f.label) {
        case OrbitClass::CanardHeadless:
        case OrbitClass::CanardWithHead:
          fp.p1 = -1.0 + 2.0 * t;
          break;
        case OrbitClass::Terminating:
          if (vdp) {
            if (i % 2 == 0) fp.p1 = -1.0 + 2.0 * t;
          } else if (regime == 1) {
            fp.p0 = -2.0 * t;
            fp.p1 = (1.0 - t) * s0_hi;
          } else {
            fp.p0 = -1.0 + 3.0 * t;
          }
          break;
        case OrbitClass::MaximalTc:
        case OrbitClass::Bursting:
          fp.p1 = (i - 1) * s0_hi / per_family;
          break;
        default:
          fp.p1 = -t;
      }
      out.push_back(build_singular_family(m, f.label, fp));
    }
  }
  return out;
}

nlohmann::json to_json(const SingularOrbit& orbit) {
  using nlohmann::json;
  const auto& p = orbit.model.params();
  json j;
  j["model"] = to_string(orbit.model.name());
  j["k"] = p.k;
  if (orbit.model.name() == ModelName::Leidenator) j["alpha"] = p.alpha;
  if (is_vdp(orbit.model)) j["a"] = p.a;
  j["coordinate"] = is_vdp(orbit.model) ? "x" : "r";
  j["classification"] = to_string(orbit.classification);
  j["closed"] = orbit.closed;
  j["segments"] = json::array();
  for (const auto& s : orbit.segments) {
    json pts = json::array();
    for (const auto& q : s.points) pts.push_back({q.u, q.mu});
    j["segments"].push_back({{"kind", to_string(s.kind)}, {"points", pts}});
  }
  j["junctions"] = json::array();
  for (const auto& q : orbit.junctions()) j["junctions"].push_back({q.u, q.mu});
  const auto cert = validate(orbit);
  j["valid"] = cert.valid;
  if (cert.violation)
    j["violation"] = {{"rule", to_string(cert.violation->rule)},
                      {"index", cert.violation->index},
                      {"detail", cert.violation->detail}};
  return j;
}

nlohmann::json to_json(const RegimeCase& rc) {
  nlohmann::json j{{"case", rc.label}, {"k_sn", rc.k_sn}, {"description", rc.description}};
  j["families"] = nlohmann::json::array();
  for (const auto& f : rc.families)
    j["families"].push_back({{"label", to_string(f.label)}, {"dimension", f.dimension}, {"parametrization", f.parametrization}});
  return j;
}

namespace {

SingularPoint on_curve(const ModelSpec& m, SegmentKind kind, double u, double mu_fast) {
  if (kind == SegmentKind::Fast) return {u, mu_fast};
  if (is_vdp(m)) return {u, s0_mu(u)};
  return {u, polar_branch_mu(u)};
}

}  // namespace

std::optional<CorruptedOrbit> corrupt(const SingularOrbit& orbit, Corruption c, std::mt19937_64& rng) {
  const auto& m = orbit.model;
  auto pick = [&](std::size_t count) { return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng); };
  CorruptedOrbit out{orbit, Rule::Malformed};
  auto& segs = out.orbit.segments;

  switch (c) {
    case Corruption::OrientationFlip: {
      std::vector<std::size_t> cand;
      for (std::size_t i = 0; i < segs.size(); ++i)
        if (segs[i].kind != SegmentKind::Fast && std::abs(segs[i].end().mu - segs[i].start().mu) > 1e-6)
          cand.push_back(i);
      if (cand.empty()) return std::nullopt;
      auto& pts = segs[cand[pick(cand.size())]].points;
      std::reverse(pts.begin(), pts.end());
      out.expected = Rule::Orientation;
      return out;
    }
    case Corruption::JunctionGap: {
      const std::size_t nj = orbit.closed ? segs.size() : segs.size() - 1;
      std::vector<std::size_t> cand;
      for (std::size_t j = 0; j < nj; ++j) {
        const auto& s = segs[(j + 1) % segs.size()];
        if (dist(s.points[0], s.points[1]) > 1e-5) cand.push_back(j);
      }
      if (cand.empty()) return std::nullopt;
      const std::size_t j = cand[pick(cand.size())];
      auto& s = segs[(j + 1) % segs.size()];
      const double f = std::uniform_real_distribution<double>(0.25, 0.75)(rng);
      const auto& a = s.points[0];
      const auto& b = s.points[1];
      if (s.kind == SegmentKind::Slow && !is_vdp(m)) s.points[0] = {0.0, a.mu + f * (b.mu - a.mu)};
      else s.points[0] = on_curve(m, s.kind, a.u + f * (b.u - a.u), a.mu);
      out.expected = j + 1 == segs.size() ? Rule::Closure : Rule::Continuity;
      return out;
    }
    case Corruption::InteriorJump: {
      std::vector<std::pair<std::size_t, std::size_t>> cand;
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        if (s.kind == SegmentKind::Fast) continue;
        for (std::size_t k = 1; k < s.points.size(); ++k) {
          const auto& p = s.points[k];
          const bool deep = is_vdp(m) ? std::abs(p.u) > 1.0 + 1e-3
                                      : (s.kind == SegmentKind::Slow ? p.mu < -1e-3 : p.u > 1.0 + 1e-3);
          if (deep) cand.emplace_back(i, k);
        }
      }
      if (cand.empty()) return std::nullopt;
      const auto [i, k] = cand[pick(cand.size())];
      segs.resize(i + 1);
      segs[i].points.resize(k + 1);
      const auto p = segs[i].end();
      double target;
      if (is_vdp(m)) {
        const bool right = p.u > 0.0;
        target = std::abs(p.mu) <= 2.0 / 3.0 ? vdp_root(p.mu, right ? 1 : 0) : (right ? -2.5 : 2.5);
      } else if (segs[i].kind == SegmentKind::Slow) {
        target = p.mu >= -1.0 ? r_outer(p.mu) : 1.5;
      } else {
        target = 0.0;
      }
      segs.push_back(fast_seg(p.mu, p.u, target, 17));
      out.orbit.closed = false;
      out.orbit.open_end = false;
      out.expected = Rule::JumpFromAttractingInterior;
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace tcanard
