#pragma once

// The four catalogued slow-fast systems and their singular subsystems.
//
// State layout is always (fast..., mu). Polar forms use (r, theta, mu).
// In the Wilson-Cowan figures the slow variable is plotted as z; here it is mu.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tcanard {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using VectorXd = Eigen::VectorXd;

enum class ModelName { VanDerPol, Canonical, Leidenator, WilsonCowan };
enum class CoordinateForm { Cartesian, Polar };
enum class SubsystemKind { FullFastTime, FullSlowTime, Fast, Slow, AveragedSlow };
enum class Sigmoid { X, Y };

std::string_view to_string(ModelName m);
std::string_view to_string(CoordinateForm f);
std::string_view to_string(SubsystemKind k);
ModelName parse_model_name(std::string_view s);
CoordinateForm parse_form(std::string_view s);
SubsystemKind parse_kind(std::string_view s);

/// Thrown when a (model, form, kind) combination has no right-hand side.
class UnavailableSubsystem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WilsonCowanParams {
  double j_xx = 12.0;
  double j_xy = -4.0;
  double j_yx = 13.0;
  double j_yy = -9.0;
  double delta = 0.05;
  double rho = -1.1;
  double g1 = 0.19;
  double g2 = 0.4;
  double sigma_x = 1.001;
  double sigma_y = 1.001;
  double lambda_x = 2.0;
  double lambda_y = 8.5;
};

struct ParamSet {
  double epsilon = 1e-3;
  double k = 0.0;
  double alpha = 0.0;  // Leidenator only
  double a = 0.0;      // van der Pol slow-nullcline offset
  WilsonCowanParams wc;

  void validate() const;
};

/// Wilson-Cowan parameters of the elliptic bursting cycle (k = 2.56, eps = 1e-3).
ParamSet wilson_cowan_reference();

class ModelSpec {
 public:
  ModelSpec(ModelName name, ParamSet params);

  ModelName name() const { return name_; }
  const ParamSet& params() const { return params_; }
  int dim_fast() const { return name_ == ModelName::VanDerPol ? 1 : 2; }
  int dim_slow() const { return 1; }
  int dim() const { return dim_fast() + dim_slow(); }
  bool has_form(CoordinateForm f) const;
  bool has_kind(CoordinateForm f, SubsystemKind k) const;
  bool is_polar_model() const { return name_ == ModelName::Canonical || name_ == ModelName::Leidenator; }

  ModelSpec with_params(ParamSet p) const { return {name_, p}; }
  ModelSpec with_k(double k) const;

 private:
  ModelName name_;
  ParamSet params_;
};

/// N(u) = (lambda/2) [1 + erf(g u / sqrt(2 (1 + g^2 sigma^2)))].
template <typename Scalar>
Scalar sigmoid(Sigmoid which, Scalar u, const ParamSet& p) {
  const auto& w = p.wc;
  const double g = which == Sigmoid::X ? w.g1 : w.g2;
  const double s = which == Sigmoid::X ? w.sigma_x : w.sigma_y;
  const double lam = which == Sigmoid::X ? w.lambda_x : w.lambda_y;
  const Scalar scale = Scalar(g) / std::sqrt(Scalar(2) * (Scalar(1) + Scalar(g) * Scalar(g) * Scalar(s) * Scalar(s)));
  return Scalar(lam) / Scalar(2) * (Scalar(1) + std::erf(scale * u));
}

/// dN/du.
template <typename Scalar>
Scalar sigmoid_derivative(Sigmoid which, Scalar u, const ParamSet& p) {
  const auto& w = p.wc;
  const double g = which == Sigmoid::X ? w.g1 : w.g2;
  const double s = which == Sigmoid::X ? w.sigma_x : w.sigma_y;
  const double lam = which == Sigmoid::X ? w.lambda_x : w.lambda_y;
  const Scalar scale = Scalar(g) / std::sqrt(Scalar(2) * (Scalar(1) + Scalar(g) * Scalar(g) * Scalar(s) * Scalar(s)));
  const Scalar z = scale * u;
  return Scalar(lam) * scale * std::exp(-z * z) / std::sqrt(std::numbers::pi_v<Scalar>);
}

namespace detail {

// Radial growth factor mu + 2 r^2 - r^4 shared by both polar models.
template <typename Scalar>
Scalar bautin_factor(Scalar rr, Scalar mu) {
  return mu + Scalar(2) * rr - rr * rr;
}

// Slow right-hand side h = k - r^2 - alpha mu (alpha = 0 for the canonical model).
template <typename Scalar>
Scalar bautin_slow(const ModelSpec& m, Scalar rr, Scalar mu) {
  const auto& p = m.params();
  const Scalar alpha = m.name() == ModelName::Leidenator ? Scalar(p.alpha) : Scalar(0);
  return Scalar(p.k) - rr - alpha * mu;
}

template <typename Scalar>
void check_dims(const ModelSpec& m, const Vector<Scalar>& s) {
  if (s.size() != m.dim()) throw std::invalid_argument("state dimension does not match model");
}

}  // namespace detail

/// Fast-time full system; `eps` overrides the model's epsilon.
template <typename Scalar>
void full_rhs(const ModelSpec& m, CoordinateForm form, Scalar eps, const Vector<Scalar>& s, Vector<Scalar>& out) {
  detail::check_dims(m, s);
  out.resize(s.size());
  const auto& p = m.params();
  switch (m.name()) {
    case ModelName::VanDerPol: {
      const Scalar x = s(0), mu = s(1);
      out(0) = x - x * x * x / Scalar(3) - mu;
      out(1) = eps * (x - Scalar(p.a));
      return;
    }
    case ModelName::Canonical:
    case ModelName::Leidenator: {
      if (form == CoordinateForm::Polar) {
        const Scalar r = s(0), mu = s(2);
        const Scalar rr = r * r;
        out(0) = r * detail::bautin_factor(rr, mu);
        out(1) = Scalar(1);
        out(2) = eps * detail::bautin_slow(m, rr, mu);
      } else {
        const Scalar x = s(0), y = s(1), mu = s(2);
        const Scalar rr = x * x + y * y;
        const Scalar f = detail::bautin_factor(rr, mu);
        out(0) = -y + x * f;
        out(1) = x + y * f;
        out(2) = eps * detail::bautin_slow(m, rr, mu);
      }
      return;
    }
    case ModelName::WilsonCowan: {
      const auto& w = p.wc;
      const Scalar x = s(0), y = s(1), mu = s(2);
      out(0) = -x + sigmoid(Sigmoid::X, Scalar(w.j_xx) * x + Scalar(w.j_xy) * y + mu, p);
      out(1) = Scalar(w.delta) * (-y + sigmoid(Sigmoid::Y, Scalar(w.j_yx) * x + Scalar(w.j_yy) * y + Scalar(w.rho), p));
      out(2) = eps * (Scalar(p.k) - x - y);
      return;
    }
  }
}

/// Evaluates the requested subsystem. For the slow and averaged-slow kinds the
/// fast entries hold the residual of the algebraic constraint (zero on the
/// constraint set) and the last entry holds the slow-time derivative of mu.
template <typename Scalar>
void rhs(const ModelSpec& m, CoordinateForm form, SubsystemKind kind, const Vector<Scalar>& s, Vector<Scalar>& out) {
  if (!m.has_kind(form, kind))
    throw UnavailableSubsystem(std::string("no ") + std::string(to_string(kind)) + " subsystem in " +
                               std::string(to_string(form)) + " form for " + std::string(to_string(m.name())));
  const Scalar eps = Scalar(m.params().epsilon);
  switch (kind) {
    case SubsystemKind::FullFastTime:
      full_rhs(m, form, eps, s, out);
      return;
    case SubsystemKind::FullSlowTime: {
      if (!(eps > Scalar(0))) throw std::invalid_argument("slow-time form requires epsilon > 0");
      full_rhs(m, form, eps, s, out);
      const auto nf = m.dim_fast();
      out.head(nf) /= eps;
      out(nf) /= eps;
      return;
    }
    case SubsystemKind::Fast:
      full_rhs(m, form, Scalar(0), s, out);
      return;
    case SubsystemKind::Slow: {
      full_rhs(m, form, Scalar(1), s, out);
      if (m.is_polar_model() && form == CoordinateForm::Polar) out(1) = Scalar(0);
      return;
    }
    case SubsystemKind::AveragedSlow: {
      // Only the polar form is closed: the constraint is the cycle curve.
      detail::check_dims(m, s);
      out.resize(s.size());
      const Scalar r = s(0), mu = s(2);
      const Scalar rr = r * r;
      out(0) = detail::bautin_factor(rr, mu);
      out(1) = Scalar(0);
      out(2) = detail::bautin_slow(m, rr, mu);
      return;
    }
  }
}

template <typename Scalar>
Vector<Scalar> rhs(const ModelSpec& m, CoordinateForm form, SubsystemKind kind, const Vector<Scalar>& s) {
  Vector<Scalar> out;
  rhs(m, form, kind, s, out);
  return out;
}

/// (r, theta, mu) -> (x, y, mu).
template <typename Scalar>
Vector<Scalar> polar_to_cartesian(const Vector<Scalar>& p) {
  if (p.size() != 3) throw std::invalid_argument("polar state must be (r, theta, mu)");
  Vector<Scalar> c(3);
  c << p(0) * std::cos(p(1)), p(0) * std::sin(p(1)), p(2);
  return c;
}

/// (x, y, mu) -> (r, theta, mu) with theta in [0, 2 pi); the origin maps to theta = 0.
template <typename Scalar>
Vector<Scalar> cartesian_to_polar(const Vector<Scalar>& c) {
  if (c.size() != 3) throw std::invalid_argument("cartesian state must be (x, y, mu)");
  Vector<Scalar> p(3);
  const Scalar r = std::hypot(c(0), c(1));
  Scalar th = r == Scalar(0) ? Scalar(0) : std::atan2(c(1), c(0));
  if (th < Scalar(0)) th += Scalar(2) * std::numbers::pi_v<Scalar>;
  if (th >= Scalar(2) * std::numbers::pi_v<Scalar>) th = Scalar(0);
  p << r, th, c(2);
  return p;
}

/// Maps a polar-form tangent vector at `p` to Cartesian coordinates.
template <typename Scalar>
Vector<Scalar> push_forward_polar(const Vector<Scalar>& p, const Vector<Scalar>& dp) {
  const Scalar c = std::cos(p(1)), s = std::sin(p(1));
  Vector<Scalar> v(3);
  v << dp(0) * c - p(0) * s * dp(1), dp(0) * s + p(0) * c * dp(1), dp(2);
  return v;
}

/// Callable field for the integrators: (t, y, dy) -> void.
struct Field {
  const ModelSpec* model;
  CoordinateForm form;
  SubsystemKind kind;
  double time_sign = 1.0;  // -1 integrates the reversed-time flow

  template <typename Scalar>
  void operator()(Scalar, const Vector<Scalar>& y, Vector<Scalar>& dy) const {
    rhs(*model, form, kind, y, dy);
    if (time_sign < 0) dy = -dy;
  }
};

/// Analytic 2x2 Jacobian of the Wilson-Cowan fast subsystem at (x, y; mu).
Eigen::Matrix2d wilson_cowan_fast_jacobian(const ParamSet& p, double x, double y, double mu);

/// Jacobian of the Cartesian planar fast subsystem (canonical, leidenator, wilson-cowan).
Eigen::Matrix2d planar_fast_jacobian(const ModelSpec& m, double x, double y, double mu);

/// Cartesian fast vector field (x', y') at frozen mu.
Eigen::Vector2d planar_fast_rhs(const ModelSpec& m, double x, double y, double mu);

}  // namespace tcanard
