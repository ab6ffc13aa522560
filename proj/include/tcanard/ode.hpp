#pragma once

// Adaptive Dormand-Prince 5(4) integration with Hairer's continuous extension
// and event location on the dense interpolant.

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tcanard::ode {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1.0;
  std::size_t max_steps = 100'000'000;
  double initial_step = 0.0;  // 0 selects the step automatically
  bool record_dense = true;

  void validate() const {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
    if (!(abs_tol > 0.0)) throw std::invalid_argument("abs_tol must be > 0");
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be > 0");
    if (max_steps == 0) throw std::invalid_argument("max_steps must be positive");
    if (initial_step < 0.0) throw std::invalid_argument("initial_step must be >= 0");
  }
};

enum class Status { Success, MaxStepsReached, NonFinite, StepSizeUnderflow, Stopped };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Success: return "success";
    case Status::MaxStepsReached: return "max-steps-reached";
    case Status::NonFinite: return "non-finite-state";
    case Status::StepSizeUnderflow: return "step-size-underflow";
    case Status::Stopped: return "stopped";
  }
  return "unknown";
}

enum class Direction { Up, Down, Any };

/// Quartic interpolant over one accepted step.
template <typename Scalar>
struct DenseSegment {
  Scalar t0{};
  Scalar h{};
  // Columns: y0, y1 - y0, bspl, y1 - y0 - h*k7 - bspl, h*(sum d_i k_i).
  Eigen::Matrix<Scalar, Eigen::Dynamic, 5> coeffs;

  Scalar t1() const { return t0 + h; }

  Vector<Scalar> eval(Scalar t) const {
    if (t == t0) return coeffs.col(0);
    if (t == t1()) return coeffs.col(0) + coeffs.col(1);
    const Scalar theta = (t - t0) / h;
    const Scalar theta1 = Scalar(1) - theta;
    return coeffs.col(0) +
           theta * (coeffs.col(1) +
                    theta1 * (coeffs.col(2) + theta * (coeffs.col(3) + theta1 * coeffs.col(4))));
  }

  Scalar eval_component(Scalar t, Eigen::Index i) const {
    const Scalar theta = (t - t0) / h;
    const Scalar theta1 = Scalar(1) - theta;
    return coeffs(i, 0) +
           theta * (coeffs(i, 1) +
                    theta1 * (coeffs(i, 2) + theta * (coeffs(i, 3) + theta1 * coeffs(i, 4))));
  }
};

template <typename Scalar>
struct Event {
  Scalar time{};
  int id = 0;
  Vector<Scalar> state;
};

template <typename Scalar>
struct Trajectory {
  std::vector<Scalar> times;
  std::vector<Vector<Scalar>> states;
  std::vector<Event<Scalar>> events;
  std::vector<DenseSegment<Scalar>> segments;
  Status status = Status::Success;

  bool empty() const { return times.empty(); }
  Scalar t_begin() const { return times.front(); }
  Scalar t_end() const { return times.back(); }
  const Vector<Scalar>& final_state() const { return states.back(); }
  bool ok() const { return status == Status::Success; }
};

/// View of one accepted step handed to streaming observers.
template <typename Scalar>
struct StepView {
  const DenseSegment<Scalar>& segment;
  const Vector<Scalar>& y0;
  const Vector<Scalar>& y1;
  std::size_t index;

  Scalar t0() const { return segment.t0; }
  Scalar t1() const { return segment.t1(); }
};

template <typename F, typename Scalar>
concept VectorField = requires(const F& f, Scalar t, const Vector<Scalar>& y, Vector<Scalar>& dy) {
  { f(t, y, dy) };
};

namespace detail {

// Dormand & Prince (1980) tableau.
template <typename S>
struct Dopri5 {
  static constexpr S c2 = S(1) / 5, c3 = S(3) / 10, c4 = S(4) / 5, c5 = S(8) / 9;
  static constexpr S a21 = S(1) / 5;
  static constexpr S a31 = S(3) / 40, a32 = S(9) / 40;
  static constexpr S a41 = S(44) / 45, a42 = S(-56) / 15, a43 = S(32) / 9;
  static constexpr S a51 = S(19372) / 6561, a52 = S(-25360) / 2187, a53 = S(64448) / 6561,
                     a54 = S(-212) / 729;
  static constexpr S a61 = S(9017) / 3168, a62 = S(-355) / 33, a63 = S(46732) / 5247,
                     a64 = S(49) / 176, a65 = S(-5103) / 18656;
  static constexpr S a71 = S(35) / 384, a73 = S(500) / 1113, a74 = S(125) / 192,
                     a75 = S(-2187) / 6784, a76 = S(11) / 84;
  static constexpr S e1 = S(71) / 57600, e3 = S(-71) / 16695, e4 = S(71) / 1920,
                     e5 = S(-17253) / 339200, e6 = S(22) / 525, e7 = S(-1) / 40;
  static constexpr S d1 = S(-12715105075.0L) / S(11282082432.0L),
                     d3 = S(87487479700.0L) / S(32700410799.0L),
                     d4 = S(-10690763975.0L) / S(1880347072.0L),
                     d5 = S(701980252875.0L) / S(199316789632.0L),
                     d6 = S(-1453857185.0L) / S(822651844.0L),
                     d7 = S(69997945.0L) / S(29380423.0L);
};

template <typename Scalar>
bool all_finite(const Vector<Scalar>& v) {
  return v.allFinite();
}

}  // namespace detail

/// Integrates `field` from `y0` over [t0, t1] (t1 > t0), handing every accepted
/// step to `observer`. The observer returns false to stop early.
template <typename Scalar, typename F, typename Observer>
  requires VectorField<F, Scalar>
Status integrate_streaming(const F& field, const Vector<Scalar>& y0, Scalar t0, Scalar t1,
                           const IntegratorConfig& cfg, Observer&& observer) {
  cfg.validate();
  if (!(t1 > t0)) throw std::invalid_argument("t_span must be nonempty and increasing");
  if (!detail::all_finite(y0)) return Status::NonFinite;

  using T = detail::Dopri5<Scalar>;
  const Eigen::Index n = y0.size();
  const Scalar rtol = Scalar(cfg.rel_tol);
  const Scalar atol = Scalar(cfg.abs_tol);
  const Scalar hmax = std::min(Scalar(cfg.max_step), t1 - t0);

  Vector<Scalar> y = y0, ynew(n), ytmp(n), err(n);
  Vector<Scalar> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Scalar t = t0;
  field(t, y, k1);
  if (!detail::all_finite(k1)) return Status::NonFinite;

  auto error_norm = [&](const Vector<Scalar>& a, const Vector<Scalar>& b, const Vector<Scalar>& e) {
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar sc = atol + rtol * std::max(std::abs(a(i)), std::abs(b(i)));
      const Scalar q = e(i) / sc;
      acc += q * q;
    }
    return std::sqrt(acc / Scalar(n));
  };

  // Initial step (Hairer, Norsett & Wanner, II.4).
  Scalar h = Scalar(cfg.initial_step);
  if (h == Scalar(0)) {
    Scalar d0 = 0, d1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar sc = atol + rtol * std::abs(y(i));
      d0 += (y(i) / sc) * (y(i) / sc);
      d1 += (k1(i) / sc) * (k1(i) / sc);
    }
    d0 = std::sqrt(d0 / Scalar(n));
    d1 = std::sqrt(d1 / Scalar(n));
    Scalar h0 = (d0 < Scalar(1e-5) || d1 < Scalar(1e-5)) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
    h0 = std::min(h0, hmax);
    ytmp = y + h0 * k1;
    field(t + h0, ytmp, k2);
    Scalar d2 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar sc = atol + rtol * std::abs(y(i));
      const Scalar q = (k2(i) - k1(i)) / sc;
      d2 += q * q;
    }
    d2 = std::sqrt(d2 / Scalar(n)) / h0;
    if (!std::isfinite(d2)) d2 = 0;
    const Scalar dm = std::max(d1, d2);
    const Scalar h1 = dm <= Scalar(1e-15) ? std::max(Scalar(1e-6), h0 * Scalar(1e-3))
                                          : std::pow(Scalar(0.01) / dm, Scalar(0.2));
    h = std::min({Scalar(100) * h0, h1, hmax});
  }
  h = std::min(h, hmax);

  DenseSegment<Scalar> seg;
  seg.coeffs.resize(n, 5);
  bool last_rejected = false;
  std::size_t steps = 0;
  std::size_t accepted = 0;
  const Scalar eps_t = std::numeric_limits<Scalar>::epsilon() * std::max(std::abs(t0), std::abs(t1));

  while (t < t1) {
    if (steps++ >= cfg.max_steps) return Status::MaxStepsReached;
    bool final_step = false;
    if (t + h >= t1 - eps_t) {
      h = t1 - t;
      final_step = true;
    }
    if (h <= std::abs(t) * std::numeric_limits<Scalar>::epsilon() * Scalar(16) || h <= Scalar(0)) {
      return detail::all_finite(y) ? Status::StepSizeUnderflow : Status::NonFinite;
    }

    ytmp = y + h * (T::a21 * k1);
    field(t + T::c2 * h, ytmp, k2);
    ytmp = y + h * (T::a31 * k1 + T::a32 * k2);
    field(t + T::c3 * h, ytmp, k3);
    ytmp = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    field(t + T::c4 * h, ytmp, k4);
    ytmp = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    field(t + T::c5 * h, ytmp, k5);
    ytmp = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    field(t + h, ytmp, k6);
    ynew = y + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    const Scalar t_new = final_step ? t1 : t + h;
    field(t_new, ynew, k7);
    err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const Scalar en = error_norm(y, ynew, err);

    if (!std::isfinite(en) || !detail::all_finite(k7)) {
      // Shrink hard; a persistently non-finite field ends as NonFinite via underflow.
      h *= Scalar(0.1);
      last_rejected = true;
      if (h < Scalar(1e-300)) return Status::NonFinite;
      continue;
    }

    if (en <= Scalar(1)) {
      seg.t0 = t;
      seg.h = t_new - t;
      seg.coeffs.col(0) = y;
      seg.coeffs.col(1) = ynew - y;
      seg.coeffs.col(2) = seg.h * k1 - seg.coeffs.col(1);
      seg.coeffs.col(3) = seg.coeffs.col(1) - seg.h * k7 - seg.coeffs.col(2);
      seg.coeffs.col(4) = seg.h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 +
                                   T::d6 * k6 + T::d7 * k7);
      const Vector<Scalar> yprev = y;
      y = ynew;
      k1 = k7;
      t = t_new;
      if (!observer(StepView<Scalar>{seg, yprev, y, accepted++})) return Status::Stopped;
      Scalar fac = Scalar(0.9) * std::pow(std::max(en, Scalar(1e-10)), Scalar(-0.2));
      fac = std::clamp(fac, Scalar(0.2), last_rejected ? Scalar(1) : Scalar(10));
      h = std::min(h * fac, hmax);
      last_rejected = false;
    } else {
      Scalar fac = Scalar(0.9) * std::pow(en, Scalar(-0.2));
      h *= std::max(fac, Scalar(0.2));
      last_rejected = true;
    }
  }
  return Status::Success;
}

/// Integrates over t_span and records samples, dense segments and the final
/// status. A failed run keeps the partial trajectory.
template <typename Scalar, typename F>
  requires VectorField<F, Scalar>
Trajectory<Scalar> integrate(const F& field, const Vector<Scalar>& y0, std::pair<Scalar, Scalar> t_span,
                             const IntegratorConfig& cfg) {
  Trajectory<Scalar> traj;
  traj.times.push_back(t_span.first);
  traj.states.push_back(y0);
  traj.status = integrate_streaming<Scalar>(field, y0, t_span.first, t_span.second, cfg,
                                            [&](const StepView<Scalar>& step) {
                                              traj.times.push_back(step.t1());
                                              traj.states.push_back(step.y1);
                                              if (cfg.record_dense) traj.segments.push_back(step.segment);
                                              return true;
                                            });
  return traj;
}

template <typename Scalar, typename G>
void segment_roots(const DenseSegment<Scalar>& seg, const G& event_fn, Direction dir, Scalar t_tol,
                   std::vector<std::pair<Scalar, Vector<Scalar>>>& out, int subdivisions = 4);

template <typename Scalar>
struct EventSpec {
  std::function<Scalar(Scalar, const Vector<Scalar>&)> fn;
  Direction direction = Direction::Any;
  int id = 0;
  bool terminal = false;
};

/// As above, additionally recording crossings of each event function. A
/// terminal event ends the run with Status::Stopped at the step containing it.
template <typename Scalar, typename F>
  requires VectorField<F, Scalar>
Trajectory<Scalar> integrate(const F& field, const Vector<Scalar>& y0, std::pair<Scalar, Scalar> t_span,
                             const IntegratorConfig& cfg, const std::vector<EventSpec<Scalar>>& events) {
  Trajectory<Scalar> traj;
  traj.times.push_back(t_span.first);
  traj.states.push_back(y0);
  const Scalar t_tol = Scalar(1e-12) * (t_span.second - t_span.first);
  std::vector<std::pair<Scalar, Vector<Scalar>>> roots;
  traj.status = integrate_streaming<Scalar>(
      field, y0, t_span.first, t_span.second, cfg, [&](const StepView<Scalar>& step) {
        traj.times.push_back(step.t1());
        traj.states.push_back(step.y1);
        if (cfg.record_dense) traj.segments.push_back(step.segment);
        bool stop = false;
        for (const auto& ev : events) {
          roots.clear();
          segment_roots(step.segment, ev.fn, ev.direction, t_tol, roots);
          for (auto& [t, y] : roots) traj.events.push_back({t, ev.id, std::move(y)});
          stop = stop || (ev.terminal && !roots.empty());
        }
        return !stop;
      });
  return traj;
}

/// Dense evaluation; endpoints of every step are reproduced exactly.
template <typename Scalar>
Vector<Scalar> dense_eval(const Trajectory<Scalar>& traj, Scalar t) {
  if (traj.empty() || t < traj.t_begin() || t > traj.t_end())
    throw std::out_of_range("dense_eval: time outside trajectory span");
  auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
  const auto i = static_cast<std::size_t>(it - traj.times.begin());
  if (it != traj.times.end() && *it == t) return traj.states[i];
  if (traj.segments.size() + 1 != traj.times.size())
    throw std::logic_error("dense_eval: dense output was not recorded");
  return traj.segments[i - 1].eval(t);
}

/// Roots of `event_fn(t, y)` on one interpolant, refined to `t_tol`.
template <typename Scalar, typename G>
void segment_roots(const DenseSegment<Scalar>& seg, const G& event_fn, Direction dir, Scalar t_tol,
                   std::vector<std::pair<Scalar, Vector<Scalar>>>& out, int subdivisions) {
  auto g = [&](Scalar t) { return Scalar(event_fn(t, seg.eval(t))); };
  Scalar ta = seg.t0;
  Scalar ga = g(ta);
  for (int s = 1; s <= subdivisions; ++s) {
    const Scalar tb = s == subdivisions ? seg.t1() : seg.t0 + seg.h * Scalar(s) / Scalar(subdivisions);
    const Scalar gb = g(tb);
    const bool up = ga < Scalar(0) && gb >= Scalar(0);
    const bool down = ga > Scalar(0) && gb <= Scalar(0);
    if ((up && dir != Direction::Down) || (down && dir != Direction::Up)) {
      Scalar root;
      if (gb == Scalar(0)) {
        root = tb;
      } else {
        std::uintmax_t iters = 200;
        auto tol = [t_tol](Scalar a, Scalar b) { return std::abs(b - a) <= t_tol; };
        auto r = boost::math::tools::toms748_solve(g, ta, tb, ga, gb, tol, iters);
        root = (r.first + r.second) / Scalar(2);
      }
      out.emplace_back(root, seg.eval(root));
    }
    ta = tb;
    ga = gb;
  }
}

/// Zero crossings of `event_fn` along a recorded trajectory.
template <typename Scalar, typename G>
std::vector<std::pair<Scalar, Vector<Scalar>>> locate_event(const Trajectory<Scalar>& traj, const G& event_fn,
                                                            Direction dir) {
  if (traj.times.size() < 2) return {};
  if (traj.segments.size() + 1 != traj.times.size())
    throw std::logic_error("locate_event: dense output was not recorded");
  const Scalar t_tol = Scalar(1e-12) * (traj.t_end() - traj.t_begin());
  std::vector<std::pair<Scalar, Vector<Scalar>>> out;
  for (const auto& seg : traj.segments) segment_roots(seg, event_fn, dir, t_tol, out);
  return out;
}

}  // namespace tcanard::ode
