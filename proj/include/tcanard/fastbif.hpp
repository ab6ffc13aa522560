#pragma once

// Bifurcation structure of the fast subsystem with mu frozen: equilibrium
// branches, Hopf points, cycle branches and their folds.
//
// Polar models and van der Pol are handled in closed form. Wilson-Cowan uses
// pseudo-arclength continuation of equilibria and a Poincare return map for
// cycles.

#include "tcanard/models.hpp"
#include "tcanard/ode.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tcanard {

enum class BranchKind { Equilibrium, Cycle };
enum class Stability { Attracting, Repelling };
enum class SpecialPointType { Hopf, SaddleNodeOfCycles, FoldOfEquilibria };

std::string_view to_string(BranchKind k);
std::string_view to_string(Stability s);
std::string_view to_string(SpecialPointType t);

struct CycleRecord {
  double mu = 0.0;
  double period = 0.0;
  double amplitude = 0.0;  // half the range of the first fast coordinate
  Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
  Stability stability = Stability::Attracting;
  // (1/T) * integral of the divergence over one period; negative means attracting.
  double floquet_exponent = 0.0;
};

struct BranchSample {
  double mu = 0.0;
  VectorXd state;  // fast coordinates of the equilibrium, or the cycle anchor
  Stability stability = Stability::Attracting;
  double lead_real = 0.0;  // equilibria: largest real part of the fast Jacobian spectrum
  std::optional<CycleRecord> cycle;
};

struct SpecialPoint {
  SpecialPointType type;
  double mu = 0.0;
  VectorXd state;
  std::size_t sample_index = 0;  // the special point is samples[sample_index]
};

struct BranchCurve {
  BranchKind kind = BranchKind::Equilibrium;
  std::vector<BranchSample> samples;
  std::vector<SpecialPoint> special_points;
  std::vector<std::string> log;  // skipped seeds and stopping reasons

  std::vector<SpecialPoint> points_of(SpecialPointType t) const;
};

/// Equilibria of the fast subsystem for mu in [mu_lo, mu_hi]; `step` is the
/// arclength spacing of samples.
BranchCurve critical_manifold(const ModelSpec& m, double mu_lo, double mu_hi, double step = 0.01);

struct CycleOptions {
  ode::IntegratorConfig integrator{1e-11, 1e-13};
  double ds = 0.01;          // initial arclength step in (section coordinate, mu)
  double ds_min = 1e-6;
  double ds_max = 0.02;
  double min_amplitude = 1e-3;  // closer to a Hopf point the branch is ended
  double max_period = 2000.0;   // longer cycles are treated as homoclinic
  double newton_tol = 1e-11;
  std::size_t max_points = 4000;
  std::size_t polar_samples = 1000;  // samples of the closed-form branch
  double settle_time = 3000.0;       // forward integration when seeding
};

/// Periodic orbits of the fast subsystem for mu in [mu_lo, mu_hi].
BranchCurve cycle_branch(const ModelSpec& m, double mu_lo, double mu_hi, const CycleOptions& opt = {});

/// Numerical continuation of the cycle through `seed` in both directions of
/// arclength (Cartesian planar fast subsystems, any model).
BranchCurve continue_cycle_branch(const ModelSpec& m, const CycleRecord& seed, double mu_lo, double mu_hi,
                                  const CycleOptions& opt = {});

/// Closed-form cycle of a polar model with radius r.
CycleRecord polar_cycle(double r);

struct CycleFold {
  double mu;
  CycleRecord cycle;
};

/// Fold of the cycle branch; throws std::runtime_error if none lies in range.
CycleFold sn_of_cycles(const ModelSpec& m, const CycleOptions& opt = {});
CycleFold sn_of_cycles(const BranchCurve& cycles);

/// Newton-polishes an equilibrium of the planar fast subsystem at fixed mu.
std::optional<Eigen::Vector2d> polish_equilibrium(const ModelSpec& m, double mu, Eigen::Vector2d guess,
                                                  double tol = 1e-13, int max_iter = 50);

/// Result of following the fast flow from a section back to it.
struct ReturnMap {
  bool ok = false;
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  double time = 0.0;
  double divergence_integral = 0.0;
  double x_min = 0.0, x_max = 0.0;
};

/// First return to the line through `p` normal to `normal`, starting at `start`.
/// time_sign = -1 follows the reversed flow.
ReturnMap first_return(const ModelSpec& m, double mu, const Eigen::Vector2d& start, const Eigen::Vector2d& p,
                       const Eigen::Vector2d& normal, double time_sign, const CycleOptions& opt);

/// Newton on the return displacement at fixed mu, on the section through
/// `anchor` normal to the flow. Returns nullopt if Newton does not converge.
std::optional<CycleRecord> polish_cycle(const ModelSpec& m, double mu, const Eigen::Vector2d& anchor,
                                        double time_sign, const CycleOptions& opt = {});

/// Integrates forward (time_sign = 1) or backward (-1) from `start` and polishes
/// the limit cycle the orbit settles on.
std::optional<CycleRecord> find_cycle(const ModelSpec& m, double mu, const Eigen::Vector2d& start,
                                      double time_sign, const CycleOptions& opt = {});

/// CSV with columns kind,mu,amplitude,period,stability,special_point_flag.
void write_branch_csv(std::ostream& os, const BranchCurve& b);

}  // namespace tcanard
