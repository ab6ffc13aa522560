#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcanard/models.hpp"
#include "tcanard/ode.hpp"

#include <cmath>
#include <numbers>

using namespace tcanard;
using ode::IntegratorConfig;
using ode::Status;
using V = Eigen::VectorXd;

namespace {

ModelSpec polar_model(ModelName name, double k, double eps, double alpha = 0.0) {
  ParamSet p;
  p.k = k;
  p.epsilon = eps;
  p.alpha = alpha;
  return {name, p};
}

V vec(std::initializer_list<double> xs) {
  V v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Classical fixed-step RK4, kept deliberately unrelated to the adaptive core.
template <typename F>
V rk4(const F& f, V y, double t0, double t1, int n) {
  const double h = (t1 - t0) / n;
  V k1, k2, k3, k4;
  double t = t0;
  for (int i = 0; i < n; ++i) {
    f(t, y, k1);
    V y2 = y + 0.5 * h * k1;
    f(t + 0.5 * h, y2, k2);
    V y3 = y + 0.5 * h * k2;
    f(t + 0.5 * h, y3, k3);
    V y4 = y + h * k3;
    f(t + h, y4, k4);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return y;
}

}  // namespace

TEST_CASE("r = 0 is invariant for the canonical polar form") {
  auto m = polar_model(ModelName::Canonical, 0.7, 0.01);
  Field f{&m, CoordinateForm::Polar, SubsystemKind::FullFastTime};
  IntegratorConfig cfg;
  auto tr = ode::integrate<double>(f, vec({0.0, 0.0, -0.5}), {0.0, 200.0}, cfg);
  REQUIRE(tr.ok());
  for (const auto& s : tr.states) CHECK(std::abs(s(0)) <= cfg.abs_tol);
  // theta' = 1 exactly
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    CHECK(std::abs(tr.states[i](1) - tr.times[i]) <= cfg.abs_tol * std::max(1.0, tr.times[i]));
  // interior dense sample on the invariant line
  const double tm = 0.5 * (tr.times[3] + tr.times[4]);
  CHECK(std::abs(ode::dense_eval(tr, tm)(0)) <= cfg.abs_tol);
}

TEST_CASE("fast-subsystem saddle-node point is a fixed point at eps = 0") {
  auto m = polar_model(ModelName::Canonical, 0.3, 0.0);
  Field f{&m, CoordinateForm::Polar, SubsystemKind::FullFastTime};
  IntegratorConfig cfg;
  auto tr = ode::integrate<double>(f, vec({1.0, 0.0, -1.0}), {0.0, 50.0}, cfg);
  REQUIRE(tr.ok());
  for (const auto& s : tr.states) {
    CHECK(s(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s(2) == -1.0);
  }
}

TEST_CASE("van der Pol relaxation oscillation has x-amplitude near 2") {
  ParamSet p;
  p.epsilon = 0.01;
  p.a = 0.0;
  ModelSpec m(ModelName::VanDerPol, p);
  Field f{&m, CoordinateForm::Cartesian, SubsystemKind::FullFastTime};
  IntegratorConfig cfg;
  const V y0 = vec({2.0, 2.0 - 8.0 / 3.0});
  auto tr = ode::integrate<double>(f, y0, {0.0, 1000.0}, cfg);
  REQUIRE(tr.ok());
  CHECK(tr.states.front() == y0);

  double xmax = -1e9, xmin = 1e9;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.times[i] < 400.0) continue;
    xmax = std::max(xmax, tr.states[i](0));
    xmin = std::min(xmin, tr.states[i](0));
  }
  CHECK(xmax == doctest::Approx(2.0).epsilon(0.03));
  CHECK(xmin == doctest::Approx(-2.0).epsilon(0.03));

  // x = 0 is crossed twice per period, alternating direction
  auto up = ode::locate_event(tr, [](double, const V& y) { return y(0); }, ode::Direction::Up);
  auto down = ode::locate_event(tr, [](double, const V& y) { return y(0); }, ode::Direction::Down);
  auto any = ode::locate_event(tr, [](double, const V& y) { return y(0); }, ode::Direction::Any);
  REQUIRE(up.size() >= 3);
  CHECK(any.size() == up.size() + down.size());
  CHECK(std::abs(static_cast<long>(up.size()) - static_cast<long>(down.size())) <= 1);
  const double p1 = up[2].first - up[1].first;
  const double p2 = up[1].first - up[0].first;
  CHECK(p1 == doctest::Approx(p2).epsilon(1e-6));
  for (const auto& [t, y] : any) CHECK(std::abs(y(0)) < 1e-9);

  // independent fixed-step reference on a short window
  const V ref = rk4(f, y0, 0.0, 20.0, 200000);
  auto tr2 = ode::integrate<double>(f, y0, {0.0, 20.0}, IntegratorConfig{1e-12, 1e-14});
  CHECK((tr2.final_state() - ref).norm() < 1e-9);
}

TEST_CASE("dense output reproduces endpoints and respects its span") {
  auto m = polar_model(ModelName::Leidenator, 0.5, 0.01, 0.2);
  Field f{&m, CoordinateForm::Polar, SubsystemKind::FullFastTime};
  auto tr = ode::integrate<double>(f, vec({1.3, 0.0, 0.2}), {0.0, 30.0}, IntegratorConfig{});
  REQUIRE(tr.ok());
  CHECK(ode::dense_eval(tr, tr.t_begin()) == tr.states.front());
  CHECK(ode::dense_eval(tr, tr.t_end()) == tr.final_state());
  CHECK_THROWS_AS(ode::dense_eval(tr, 30.5), std::out_of_range);
  CHECK_THROWS_AS(ode::dense_eval(tr, -1e-9), std::out_of_range);

  // interpolant error at step midpoints, against a restarted integration
  IntegratorConfig tight{1e-13, 1e-15};
  for (std::size_t i : {5ul, 17ul, 40ul}) {
    REQUIRE(i + 1 < tr.times.size());
    const double tm = 0.5 * (tr.times[i] + tr.times[i + 1]);
    auto ref = ode::integrate<double>(f, tr.states[i], {tr.times[i], tm}, tight);
    CHECK((ode::dense_eval(tr, tm) - ref.final_state()).norm() < 1e-8);
  }
}

TEST_CASE("canonical bursting orbit crosses the Hopf plane mu = 0") {
  auto m = polar_model(ModelName::Canonical, 0.5, 0.01);
  Field f{&m, CoordinateForm::Polar, SubsystemKind::FullFastTime};
  auto tr = ode::integrate<double>(f, vec({1.3, 0.0, 0.3}), {0.0, 3000.0}, IntegratorConfig{});
  REQUIRE(tr.ok());
  auto hits = ode::locate_event(tr, [](double, const V& y) { return y(2); }, ode::Direction::Any);
  REQUIRE(hits.size() >= 4);
  for (const auto& [t, y] : hits) CHECK(std::abs(y(2)) < 1e-10);
}

TEST_CASE("events recorded during integration; terminal events stop the run") {
  auto m = polar_model(ModelName::Canonical, 0.5, 0.01);
  Field f{&m, CoordinateForm::Polar, SubsystemKind::FullFastTime};
  std::vector<ode::EventSpec<double>> evs{{[](double, const V& y) { return y(2); }, ode::Direction::Down, 7, true}};
  auto tr = ode::integrate<double>(f, vec({1.3, 0.0, 0.3}), {0.0, 3000.0}, IntegratorConfig{}, evs);
  CHECK(tr.status == Status::Stopped);
  REQUIRE(tr.events.size() == 1);
  CHECK(tr.events[0].id == 7);
  CHECK(tr.events[0].time >= tr.t_begin());
  CHECK(tr.events[0].time <= tr.t_end());
}

TEST_CASE("exponential decay meets the tolerance") {
  auto f = [](double, const V& y, V& dy) { dy = -y; };
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    auto tr = ode::integrate<double>(f, vec({1.0}), {0.0, 5.0}, IntegratorConfig{tol, tol});
    CHECK(std::abs(tr.final_state()(0) - std::exp(-5.0)) < 50 * tol);
  }
}

TEST_CASE("integration is bitwise deterministic") {
  auto m = polar_model(ModelName::Leidenator, 0.79, 0.001, 0.2);
  Field f{&m, CoordinateForm::Polar, SubsystemKind::FullFastTime};
  auto a = ode::integrate<double>(f, vec({1.8, 0.0, 0.5}), {0.0, 5000.0}, IntegratorConfig{});
  auto b = ode::integrate<double>(f, vec({1.8, 0.0, 0.5}), {0.0, 5000.0}, IntegratorConfig{});
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.times[i] == b.times[i]);
    CHECK(a.states[i] == b.states[i]);
  }
}

TEST_CASE("halving tolerances moves the final state by less than 10x the tolerance") {
  auto m = polar_model(ModelName::Leidenator, 0.5, 0.01, 0.2);
  Field f{&m, CoordinateForm::Polar, SubsystemKind::FullFastTime};
  IntegratorConfig c1{1e-10, 1e-12}, c2{0.5e-10, 0.5e-12};
  auto a = ode::integrate<double>(f, vec({1.8, 0.0, 0.5}), {0.0, 100.0}, c1);
  auto b = ode::integrate<double>(f, vec({1.8, 0.0, 0.5}), {0.0, 100.0}, c2);
  const V d = a.final_state() - b.final_state();
  CHECK(std::abs(d(0)) < 10 * 1e-10 * std::max(1.0, std::abs(a.final_state()(0))));
  CHECK(std::abs(d(2)) < 10 * 1e-10 * std::max(1.0, std::abs(a.final_state()(2))));
}

TEST_CASE("failure modes keep the partial trajectory") {
  auto blowup = [](double, const V& y, V& dy) { dy = y.cwiseProduct(y); };
  auto tr = ode::integrate<double>(blowup, vec({1.0}), {0.0, 2.0}, IntegratorConfig{});
  CHECK_FALSE(tr.ok());
  CHECK((tr.status == Status::NonFinite || tr.status == Status::StepSizeUnderflow));
  CHECK(tr.t_end() < 1.0);
  CHECK(tr.times.size() > 1);

  auto decay = [](double, const V& y, V& dy) { dy = -y; };
  IntegratorConfig few;
  few.max_steps = 10;
  few.max_step = 0.01;
  auto tr2 = ode::integrate<double>(decay, vec({1.0}), {0.0, 5.0}, few);
  CHECK(tr2.status == Status::MaxStepsReached);
  CHECK(tr2.times.size() == 11);

  CHECK_THROWS_AS(ode::integrate<double>(decay, vec({1.0}), {1.0, 1.0}, IntegratorConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(IntegratorConfig({0.0, 1e-9}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(IntegratorConfig({1e-9, -1.0}).validate(), std::invalid_argument);
  IntegratorConfig bad;
  bad.max_step = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("long double instantiation") {
  using VL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  auto f = [](long double, const VL& y, VL& dy) { dy = -y; };
  VL y0(1);
  y0 << 1.0L;
  auto tr = ode::integrate<long double>(f, y0, {0.0L, 1.0L}, IntegratorConfig{1e-14, 1e-16});
  CHECK(std::abs(static_cast<double>(tr.final_state()(0) - std::exp(-1.0L))) < 1e-13);
}
