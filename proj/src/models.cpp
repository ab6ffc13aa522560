#include "tcanard/models.hpp"

#include <cmath>

namespace tcanard {

std::string_view to_string(ModelName m) {
  switch (m) {
    case ModelName::VanDerPol: return "vanderpol";
    case ModelName::Canonical: return "canonical";
    case ModelName::Leidenator: return "leidenator";
    case ModelName::WilsonCowan: return "wilson-cowan";
  }
  return "?";
}

std::string_view to_string(CoordinateForm f) {
  return f == CoordinateForm::Polar ? "polar" : "cartesian";
}

std::string_view to_string(SubsystemKind k) {
  switch (k) {
    case SubsystemKind::FullFastTime: return "full-fast-time";
    case SubsystemKind::FullSlowTime: return "full-slow-time";
    case SubsystemKind::Fast: return "fast";
    case SubsystemKind::Slow: return "slow";
    case SubsystemKind::AveragedSlow: return "averaged-slow";
  }
  return "?";
}

ModelName parse_model_name(std::string_view s) {
  for (auto m : {ModelName::VanDerPol, ModelName::Canonical, ModelName::Leidenator, ModelName::WilsonCowan})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

CoordinateForm parse_form(std::string_view s) {
  if (s == "polar") return CoordinateForm::Polar;
  if (s == "cartesian") return CoordinateForm::Cartesian;
  throw std::invalid_argument("unknown coordinate form '" + std::string(s) + "'");
}

SubsystemKind parse_kind(std::string_view s) {
  for (auto k : {SubsystemKind::FullFastTime, SubsystemKind::FullSlowTime, SubsystemKind::Fast,
                 SubsystemKind::Slow, SubsystemKind::AveragedSlow})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown subsystem kind '" + std::string(s) + "'");
}

void ParamSet::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  if (!std::isfinite(k) || !std::isfinite(a)) throw std::invalid_argument("k and a must be finite");
  if (!(wc.sigma_x > 0.0) || !(wc.sigma_y > 0.0)) throw std::invalid_argument("sigma_x, sigma_y must be > 0");
  if (!(wc.lambda_x > 0.0) || !(wc.lambda_y > 0.0)) throw std::invalid_argument("lambda_x, lambda_y must be > 0");
}

ParamSet wilson_cowan_reference() {
  ParamSet p;
  p.epsilon = 0.001;
  p.k = 2.56;
  return p;
}

ModelSpec::ModelSpec(ModelName name, ParamSet params) : name_(name), params_(params) {
  params_.validate();
}

bool ModelSpec::has_form(CoordinateForm f) const {
  return f == CoordinateForm::Cartesian || is_polar_model();
}

bool ModelSpec::has_kind(CoordinateForm f, SubsystemKind k) const {
  if (!has_form(f)) return false;
  if (k == SubsystemKind::AveragedSlow) return is_polar_model() && f == CoordinateForm::Polar;
  return true;
}

ModelSpec ModelSpec::with_k(double k) const {
  ParamSet p = params_;
  p.k = k;
  return {name_, p};
}

Eigen::Matrix2d wilson_cowan_fast_jacobian(const ParamSet& p, double x, double y, double mu) {
  const auto& w = p.wc;
  const double dnx = sigmoid_derivative(Sigmoid::X, w.j_xx * x + w.j_xy * y + mu, p);
  const double dny = sigmoid_derivative(Sigmoid::Y, w.j_yx * x + w.j_yy * y + w.rho, p);
  Eigen::Matrix2d j;
  j << -1.0 + dnx * w.j_xx, dnx * w.j_xy,
       w.delta * dny * w.j_yx, w.delta * (-1.0 + dny * w.j_yy);
  return j;
}

Eigen::Matrix2d planar_fast_jacobian(const ModelSpec& m, double x, double y, double mu) {
  if (m.name() == ModelName::WilsonCowan) return wilson_cowan_fast_jacobian(m.params(), x, y, mu);
  if (!m.is_polar_model()) throw UnavailableSubsystem("fast subsystem is not planar");
  const double rr = x * x + y * y;
  const double f = mu + 2.0 * rr - rr * rr;
  const double dfdrr = 2.0 - 2.0 * rr;
  const double fx = 2.0 * x * dfdrr, fy = 2.0 * y * dfdrr;
  Eigen::Matrix2d j;
  j << f + x * fx, -1.0 + x * fy,
       1.0 + y * fx, f + y * fy;
  return j;
}

Eigen::Vector2d planar_fast_rhs(const ModelSpec& m, double x, double y, double mu) {
  if (m.dim_fast() != 2) throw UnavailableSubsystem("fast subsystem is not planar");
  Eigen::VectorXd s(3), d;
  s << x, y, mu;
  rhs(m, CoordinateForm::Cartesian, SubsystemKind::Fast, s, d);
  return d.head<2>();
}

}  // namespace tcanard
