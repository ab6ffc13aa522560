#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcanard/models.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace tcanard;
using V = Eigen::VectorXd;

namespace {

V vec(std::initializer_list<double> xs) {
  V v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ModelSpec make(ModelName n, double k, double eps, double alpha = 0.0) {
  ParamSet p;
  p.k = k;
  p.epsilon = eps;
  p.alpha = alpha;
  return {n, p};
}

// Maclaurin series of erf; converges to double precision for |z| < 2.
double erf_series(double z) {
  double term = z, sum = z;
  for (int n = 1; n < 60; ++n) {
    term *= -z * z / n;
    sum += term / (2 * n + 1);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

}  // namespace

TEST_CASE("canonical polar rhs at the saddle-node point") {
  auto m = make(ModelName::Canonical, 1.0, 0.1);
  V d = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::FullFastTime, vec({1.0, 0.0, -1.0}));
  CHECK(d == vec({0.0, 1.0, 0.0}));
}

TEST_CASE("leidenator polar rhs vanishes on the singular canard condition") {
  for (double eps : {0.0, 0.001, 0.37}) {
    auto m = make(ModelName::Leidenator, 0.8, eps, 0.2);
    V d = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::FullFastTime, vec({1.0, 0.0, -1.0}));
    CHECK(d(0) == 0.0);
    CHECK(d(1) == 1.0);
    CHECK(std::abs(d(2)) < 1e-16);
  }
}

TEST_CASE("sigmoids") {
  ParamSet p = wilson_cowan_reference();
  CHECK(sigmoid(Sigmoid::Y, 0.0, p) == 4.25);
  CHECK(sigmoid(Sigmoid::X, 0.0, p) == 1.0);
  CHECK(std::abs(sigmoid(Sigmoid::Y, 1e3, p) - 8.5) < 1e-12);
  CHECK(sigmoid(Sigmoid::X, -1e3, p) >= 0.0);
  double prev = -1.0;
  for (double u = -40.0; u <= 40.0; u += 0.25) {
    const double v = sigmoid(Sigmoid::X, u, p);
    CHECK(v > prev);
    CHECK(v <= p.wc.lambda_x);
    prev = v;
  }
  // derivative against central differences
  for (double u : {-3.0, 0.0, 2.5, 7.0}) {
    const double h = 1e-5;
    const double fd = (sigmoid(Sigmoid::Y, u + h, p) - sigmoid(Sigmoid::Y, u - h, p)) / (2 * h);
    CHECK(sigmoid_derivative(Sigmoid::Y, u, p) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("wilson-cowan fast rhs at the origin") {
  ParamSet p = wilson_cowan_reference();
  ModelSpec m(ModelName::WilsonCowan, p);
  V d = rhs<double>(m, CoordinateForm::Cartesian, SubsystemKind::Fast, vec({0.0, 0.0, 2.5}));
  const auto& w = p.wc;
  const double nx = w.lambda_x / 2 * (1 + erf_series(w.g1 * 2.5 / std::sqrt(2 * (1 + w.g1 * w.g1 * w.sigma_x * w.sigma_x))));
  const double ny = w.lambda_y / 2 * (1 + erf_series(w.g2 * w.rho / std::sqrt(2 * (1 + w.g2 * w.g2 * w.sigma_y * w.sigma_y))));
  CHECK(d(0) == doctest::Approx(nx).epsilon(1e-14));
  CHECK(d(1) == doctest::Approx(w.delta * ny).epsilon(1e-14));
  CHECK(d(2) == 0.0);
}

TEST_CASE("fast subsystem equals the full system at eps = 0") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (auto name : {ModelName::VanDerPol, ModelName::Canonical, ModelName::Leidenator, ModelName::WilsonCowan}) {
    ParamSet p = name == ModelName::WilsonCowan ? wilson_cowan_reference() : ParamSet{};
    p.k = 0.4;
    p.alpha = 0.2;
    p.a = 0.3;
    ModelSpec m(name, p);
    ModelSpec m0 = m.with_params([&] { auto q = p; q.epsilon = 0.0; return q; }());
    for (auto form : {CoordinateForm::Cartesian, CoordinateForm::Polar}) {
      if (!m.has_form(form)) continue;
      for (int i = 0; i < 20; ++i) {
        V s(m.dim());
        for (Eigen::Index j = 0; j < s.size(); ++j) s(j) = u(rng);
        V fast = rhs<double>(m, form, SubsystemKind::Fast, s);
        V full0 = rhs<double>(m0, form, SubsystemKind::FullFastTime, s);
        CHECK(fast.head(m.dim_fast()) == full0.head(m.dim_fast()));
        CHECK(fast(m.dim_fast()) == 0.0);
      }
    }
  }
}

TEST_CASE("leidenator with alpha = 0 is bitwise the canonical burster") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double k = u(rng), eps = std::abs(u(rng));
    auto c = make(ModelName::Canonical, k, eps);
    auto l = make(ModelName::Leidenator, k, eps, 0.0);
    V s = vec({u(rng), u(rng), u(rng)});
    for (auto form : {CoordinateForm::Cartesian, CoordinateForm::Polar})
      for (auto kind : {SubsystemKind::FullFastTime, SubsystemKind::Fast, SubsystemKind::Slow})
        CHECK(rhs<double>(c, form, kind, s) == rhs<double>(l, form, kind, s));
  }
}

TEST_CASE("polar and cartesian forms agree under the pushforward") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ur(1e-3, 2.0), ut(0.0, 2 * std::numbers::pi), um(-1.5, 1.5);
  for (auto name : {ModelName::Canonical, ModelName::Leidenator}) {
    auto m = make(name, 0.5, 0.01, 0.2);
    for (int i = 0; i < 100; ++i) {
      V p = vec({ur(rng), ut(rng), um(rng)});
      V dp = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::FullFastTime, p);
      V dc = rhs<double>(m, CoordinateForm::Cartesian, SubsystemKind::FullFastTime, polar_to_cartesian(p));
      CHECK((push_forward_polar(p, dp) - dc).norm() < 1e-12);
    }
  }
  // chain-rule point from the catalogue
  auto m = make(ModelName::Canonical, 0.5, 0.01);
  V p = vec({0.7, 1.1, -0.2});
  V dp = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::FullFastTime, p);
  V dc = rhs<double>(m, CoordinateForm::Cartesian, SubsystemKind::FullFastTime, polar_to_cartesian(p));
  const double f = -0.2 + 2 * 0.49 - 0.49 * 0.49;
  const double x = 0.7 * std::cos(1.1), y = 0.7 * std::sin(1.1);
  CHECK(dc(0) == doctest::Approx(-y + x * f).epsilon(1e-14));
  CHECK(dc(1) == doctest::Approx(x + y * f).epsilon(1e-14));
  CHECK((push_forward_polar(p, dp) - dc).norm() < 1e-12);
}

TEST_CASE("coordinate maps") {
  CHECK(polar_to_cartesian(vec({1.0, 0.0, -1.0})) == vec({1.0, 0.0, -1.0}));
  V c = polar_to_cartesian(vec({2.0, std::numbers::pi / 2, 0.3}));
  CHECK(std::abs(c(0)) < 1e-15);
  CHECK(std::abs(c(1) - 2.0) < 1e-15);
  CHECK(c(2) == 0.3);
  CHECK(cartesian_to_polar(vec({0.0, 0.0, 0.4})) == vec({0.0, 0.0, 0.4}));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ur(1e-3, 3.0), ut(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    V p = vec({ur(rng), ut(rng), ut(rng)});
    V q = cartesian_to_polar(polar_to_cartesian(p));
    CHECK(q(0) == doctest::Approx(p(0)).epsilon(1e-14));
    CHECK(q(1) >= 0.0);
    CHECK(q(1) < 2 * std::numbers::pi);
    const double dth = std::remainder(q(1) - p(1), 2 * std::numbers::pi);
    CHECK(std::abs(dth) < 1e-12);
  }
}

TEST_CASE("invariant sets of the polar models") {
  auto m = make(ModelName::Leidenator, 0.3, 0.05, 0.2);
  for (double mu : {-2.0, -0.1, 0.0, 0.7}) {
    CHECK(rhs<double>(m, CoordinateForm::Polar, SubsystemKind::FullFastTime, vec({0.0, 1.0, mu}))(0) == 0.0);
    V d = rhs<double>(m, CoordinateForm::Cartesian, SubsystemKind::FullFastTime, vec({0.0, 0.0, mu}));
    CHECK(d(0) == 0.0);
    CHECK(d(1) == 0.0);
  }
}

TEST_CASE("slow and averaged-slow kinds") {
  auto m = make(ModelName::Leidenator, 0.8, 0.01, 0.2);
  // slow subsystem on r = 0: residual 0, mu' = k - alpha mu
  V s = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::Slow, vec({0.0, 0.0, 1.0}));
  CHECK(s == vec({0.0, 0.0, 0.8 - 0.2}));
  // averaged-slow on the cycle curve: residual 0, <mu'> = k - r^2 - alpha mu
  const double r = 1.2, mu = std::pow(r, 4) - 2 * r * r;
  V a = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::AveragedSlow, vec({r, 0.0, mu}));
  CHECK(std::abs(a(0)) < 1e-15);
  CHECK(a(2) == doctest::Approx(0.8 - r * r - 0.2 * mu).epsilon(1e-15));
  // slow-time form is the fast-time form divided by eps
  V ff = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::FullFastTime, vec({0.5, 0.0, -0.3}));
  V st = rhs<double>(m, CoordinateForm::Polar, SubsystemKind::FullSlowTime, vec({0.5, 0.0, -0.3}));
  CHECK((st * 0.01 - ff).norm() < 1e-15);
}

TEST_CASE("unavailable combinations and invalid parameters") {
  ParamSet p;
  ModelSpec vdp(ModelName::VanDerPol, p);
  CHECK_THROWS_AS(rhs<double>(vdp, CoordinateForm::Polar, SubsystemKind::FullFastTime, vec({0.0, 0.0})), UnavailableSubsystem);
  CHECK_THROWS_AS(rhs<double>(vdp, CoordinateForm::Cartesian, SubsystemKind::AveragedSlow, vec({0.0, 0.0})), UnavailableSubsystem);
  ModelSpec wc(ModelName::WilsonCowan, wilson_cowan_reference());
  CHECK_THROWS_AS(rhs<double>(wc, CoordinateForm::Polar, SubsystemKind::Fast, vec({0.0, 0.0, 0.0})), UnavailableSubsystem);
  CHECK_THROWS_AS(rhs<double>(vdp, CoordinateForm::Cartesian, SubsystemKind::Fast, vec({0.0, 0.0, 0.0})), std::invalid_argument);
  ParamSet zero_eps;
  zero_eps.epsilon = 0.0;
  ModelSpec c0(ModelName::Canonical, zero_eps);
  CHECK_THROWS_AS(rhs<double>(c0, CoordinateForm::Polar, SubsystemKind::FullSlowTime, vec({0.0, 0.0, 0.0})), std::invalid_argument);

  ParamSet bad;
  bad.epsilon = -1e-3;
  CHECK_THROWS_AS(ModelSpec(ModelName::Canonical, bad), std::invalid_argument);
  bad = ParamSet{};
  bad.alpha = -0.1;
  CHECK_THROWS_AS(ModelSpec(ModelName::Leidenator, bad), std::invalid_argument);
  bad = ParamSet{};
  bad.wc.sigma_x = 0.0;
  CHECK_THROWS_AS(ModelSpec(ModelName::WilsonCowan, bad), std::invalid_argument);
  bad = ParamSet{};
  bad.wc.lambda_y = -1.0;
  CHECK_THROWS_AS(ModelSpec(ModelName::WilsonCowan, bad), std::invalid_argument);
}

TEST_CASE("model catalogue dimensions") {
  ParamSet p;
  CHECK(ModelSpec(ModelName::Canonical, p).dim_fast() == 2);
  CHECK(ModelSpec(ModelName::Leidenator, p).has_form(CoordinateForm::Polar));
  CHECK(ModelSpec(ModelName::VanDerPol, p).dim_fast() == 1);
  CHECK_FALSE(ModelSpec(ModelName::WilsonCowan, p).has_form(CoordinateForm::Polar));
  CHECK(parse_model_name("wilson-cowan") == ModelName::WilsonCowan);
  CHECK_THROWS(parse_model_name("hodgkin-huxley"));
}

TEST_CASE("wilson-cowan jacobian against finite differences") {
  ParamSet p = wilson_cowan_reference();
  ModelSpec m(ModelName::WilsonCowan, p);
  const double x = 1.1, y = 2.3, mu = -5.5, h = 1e-6;
  auto J = wilson_cowan_fast_jacobian(p, x, y, mu);
  for (int c = 0; c < 2; ++c) {
    V sp = vec({x, y, mu}), sm = sp;
    sp(c) += h;
    sm(c) -= h;
    V fd = (rhs<double>(m, CoordinateForm::Cartesian, SubsystemKind::Fast, sp) -
            rhs<double>(m, CoordinateForm::Cartesian, SubsystemKind::Fast, sm)) / (2 * h);
    CHECK(J(0, c) == doctest::Approx(fd(0)).epsilon(1e-7));
    CHECK(J(1, c) == doctest::Approx(fd(1)).epsilon(1e-7));
  }
}
