#pragma once

// Slow flow on the critical manifold, averaged slow flow on the cycle branch,
// delayed loss of stability past a Hopf point (entry-exit), buffer points.

#include "tcanard/fastbif.hpp"
#include "tcanard/models.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace tcanard {

/// mu on the polar cycle branch, r^4 - 2 r^2.
inline double polar_branch_mu(double r) { return r * r * (r * r - 2.0); }

/// Averaged slow rhs on the polar cycle of radius r: k - r^2 - alpha mu(r).
double avg_slow_rhs_polar(const ModelSpec& m, double r);

/// Averaged slow rhs over one period of `cycle`. Closed form for polar models;
/// for Wilson-Cowan the time average of k - x - y over the computed period.
double avg_slow_rhs(const ModelSpec& m, const CycleRecord& cycle);

struct AvgEquilibrium {
  double coordinate = 0.0;  // r for polar models, branch arclength for Wilson-Cowan
  double mu = 0.0;
  Stability stability = Stability::Repelling;
  bool at_fold = false;  // sits on the fold of the cycle branch (degenerate)
  std::optional<CycleRecord> cycle;
};

struct AvgSlowFlow {
  ModelName model = ModelName::Canonical;
  bool by_radius = true;  // coordinate is r (polar) or arclength (Wilson-Cowan)
  std::vector<double> coordinate;
  std::vector<double> mu;
  std::vector<double> avg_rhs;
  std::vector<AvgEquilibrium> equilibria;
};

/// Roots of the averaged slow rhs on the cycle branch. Stability comes from the
/// derivative of the averaged rhs with respect to mu along the branch.
std::vector<AvgEquilibrium> avg_slow_equilibria(const ModelSpec& m, const CycleOptions& opt = {});

/// Profile of the averaged slow rhs along a cycle branch, with its equilibria.
AvgSlowFlow averaged_flow(const ModelSpec& m, const BranchCurve& cycles, const CycleOptions& opt = {});

/// CSV with columns (r or arclength),mu,avg_rhs.
void write_avg_profile_csv(std::ostream& os, const AvgSlowFlow& f);

struct BufferPoint {
  bool exists = false;
  bool degenerate = false;  // the whole line r = 0 consists of slow equilibria
  double mu = 0.0;
};

/// Equilibrium of the slow flow on r = 0 (polar models); `exists` is false otherwise.
BufferPoint buffer_point(const ModelSpec& m);

enum class ExitStatus { Exit, CappedAtBuffer, CappedAtFold };
std::string_view to_string(ExitStatus s);

struct EntryExit {
  double mu_in = 0.0;
  double mu_out = 0.0;
  double mu_hopf = 0.0;
  ExitStatus status = ExitStatus::Exit;
};

/// Exit point of a slow passage past the Hopf point: mu_out solves
/// integral_{mu_in}^{mu_out} Re lambda(mu) / h0(mu) dmu = 0 with h0 the slow rhs
/// on the equilibrium branch. Throws std::invalid_argument if the slow flow at
/// mu_in does not head toward the Hopf point or mu_in is not on the attracting side.
EntryExit entry_exit(const ModelSpec& m, double mu_in);

/// Re lambda / h0 at each of `mus` on the branch used by entry_exit.
std::vector<double> entry_exit_integrand(const ModelSpec& m, const std::vector<double>& mus);

}  // namespace tcanard
