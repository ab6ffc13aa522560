#pragma once

// Full-system (eps > 0) trajectory classification, bisection of canard
// transitions in k, and k-sweeps.

#include "json.hpp"
#include "tcanard/models.hpp"
#include "tcanard/ode.hpp"
#include "tcanard/singular.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tcanard {

enum class TrajectoryLabel {
  Tonic,
  Bursting,
  TcHeadless,
  TcWithHead,
  MixedTcHeadless,
  MixedTcWithHead,
  Rest,
  Drift,
  Inconclusive,
};
std::string_view to_string(TrajectoryLabel l);
TrajectoryLabel parse_trajectory_label(std::string_view s);

/// Envelope thresholds. The envelope is r(t) for the polar models and half the
/// peak-to-peak swing of x between successive extrema for Wilson-Cowan.
struct Thresholds {
  double r_quiet = 0.05;
  double r_spike = 1.2;
  double d_branch = 0.05;    // distance to the repelling cycle branch counted as adherence
  double s_min = 0.05;       // minimal mu-span of an adherence stretch
  double r_tonic = 0.5;      // converged envelope at or above this is tonic, below is rest
  double converge_tol = 1e-3;
  double drift_rate = 1e-3;  // |d mu / d(eps t)| above which a quiet, non-settling state drifts
  double mu_escape = 100.0;
  int min_bursts = 2;

  /// Defaults for the model: polar values above; Wilson-Cowan uses r_spike = 0.6
  /// and s_min = 0.0075 (its repelling cycle branch spans 0.147 in mu).
  static Thresholds for_model(ModelName m);
};

struct HuntConfig {
  std::optional<Thresholds> thresholds;  // model defaults when unset
  double discard_slow = 10.0;            // transient discarded, in units of 1/eps
  double horizon_slow = 30.0;            // total time, in units of 1/eps
  ode::IntegratorConfig integrator{1e-11, 1e-13, 1.0, 100'000'000, 0.0, false};
  std::optional<VectorXd> y0;            // polar (r, theta, mu), Wilson-Cowan (x, y, mu)

  Thresholds resolved_thresholds(ModelName m) const { return thresholds.value_or(Thresholds::for_model(m)); }
  void validate() const;
};

/// Default initial condition: (1.8, 0, 0.5) for the polar models, (0.1, 0.1, 2) for Wilson-Cowan.
VectorXd default_initial_condition(const ModelSpec& m);

/// Repelling part of the fast-subsystem cycle branch as amplitude versus mu,
/// between the Hopf point (amplitude 0) and the cycle fold.
class RepellingBranch {
 public:
  static RepellingBranch polar();
  static RepellingBranch from_curve(const BranchCurve& cycles);
  static RepellingBranch for_model(const ModelSpec& m);

  double mu_hopf() const { return mu_hopf_; }
  double mu_fold() const { return mu_fold_; }
  double amp_fold() const { return amp_fold_; }
  double mu_extent() const { return std::abs(mu_fold_ - mu_hopf_); }
  /// Smaller of the amplitude and mu offsets to the branch; infinite outside its mu-range.
  double distance(double mu, double amp) const;

 private:
  bool closed_form_ = false;
  double mu_hopf_ = 0.0, mu_fold_ = -1.0, amp_fold_ = 1.0;
  std::vector<double> amp_, mu_;  // sorted by amplitude
  double amp_at(double mu) const;
  double mu_at(double amp) const;
};

struct Evidence {
  double env_min = 0.0, env_max = 0.0;              // analysis window
  double env_final_min = 0.0, env_final_max = 0.0;  // last quarter of the window
  double quiet_fraction = 0.0, spike_fraction = 0.0;
  int bursts = 0;                                   // quiet -> spike transitions
  double adherence_span = 0.0;                      // largest mu-span along the repelling branch
  double mu_min = 0.0, mu_max = 0.0, mu_final = 0.0;
  double mu_rate_early = 0.0, mu_rate_late = 0.0;   // |d mu / d(eps t)| over the two halves of the last quarter
  VectorXd final_state;
  ode::Status status = ode::Status::Success;
};

struct TrajectoryClass {
  TrajectoryLabel label = TrajectoryLabel::Inconclusive;
  Evidence evidence;
  std::string reason;
};

using StateTap = std::function<void(double, const VectorXd&)>;

/// Integrates the full system from the configured initial condition and labels
/// the trajectory from its envelope after the transient. `branch` is computed
/// when null. `tap` sees every accepted step.
TrajectoryClass classify(const ModelSpec& m, const HuntConfig& cfg, const RepellingBranch* branch = nullptr,
                         const StateTap& tap = {});

/// Named classifier pair such as tonic|bursting.
struct TransitionPredicate {
  TrajectoryLabel a = TrajectoryLabel::Tonic;
  TrajectoryLabel b = TrajectoryLabel::Bursting;

  static TransitionPredicate parse(std::string_view s);
  std::string name() const;
  /// Side of the pair a label falls on: TC subtypes with head count as bursting,
  /// headless ones as the non-bursting end. nullopt when neither side applies.
  std::optional<TrajectoryLabel> side(TrajectoryLabel l) const;
};

struct TransitionResult {
  double k_star = 0.0;
  double k_lo = 0.0, k_hi = 0.0;
  double width = 0.0;
  TrajectoryLabel side_lo = TrajectoryLabel::Inconclusive, side_hi = TrajectoryLabel::Inconclusive;
  bool inconclusive = false;
  std::string note;
  int evaluations = 0;
  TransitionPredicate predicate;
  ModelSpec model{ModelName::Leidenator, ParamSet{}};
  HuntConfig config;
  VectorXd y0;
};

/// Bisection on k with fixed initial condition and integrator settings. Throws
/// std::invalid_argument if both ends fall on the same side, an end is not on
/// either side, or tol_k < 1e-13. An inconclusive classification inside the
/// bracket stops the bisection and returns the current bracket flagged.
TransitionResult bisect_transition(const ModelSpec& m, double k_lo, double k_hi, const TransitionPredicate& pred,
                                   double tol_k, const HuntConfig& cfg = {});

struct RegimeReport {
  double k = 0.0;
  std::optional<RegimeCase> regime;  // polar models only
  TrajectoryClass trajectory;
};

/// Classifies every k of the grid on `workers` threads; results in grid order.
std::vector<RegimeReport> sweep(const ModelSpec& m, const std::vector<double>& k_grid, const HuntConfig& cfg = {},
                                int workers = 1);

/// Columns: k,case,label,env_min,env_max,bursts,adherence_span,mu_final,reason.
void write_regime_csv(std::ostream& os, const std::vector<RegimeReport>& rows);

nlohmann::json to_json(const HuntConfig& cfg, ModelName m);
nlohmann::json to_json(const TrajectoryClass& c);
nlohmann::json to_json(const TransitionResult& r);

}  // namespace tcanard
