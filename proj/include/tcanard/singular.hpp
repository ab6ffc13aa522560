#pragma once

// Singular orbits: concatenations of slow, fast and averaged-slow segments,
// their admissibility rules, the k-regimes of the polar models and the
// singular families available in each regime.
//
// Points live in the (u, mu) plane, with u = r for the polar models and u = x
// for van der Pol. The critical manifold is r = 0 (polar) or mu = x - x^3/3
// (van der Pol); the cycle branch of the polar models is mu = r^4 - 2 r^2.

#include "json.hpp"
#include "tcanard/models.hpp"
#include "tcanard/slowavg.hpp"

#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace tcanard {

enum class SegmentKind { Slow, Fast, AveragedSlow };
std::string_view to_string(SegmentKind k);

enum class OrbitClass {
  Relaxation,
  CanardHeadless,
  CanardWithHead,
  TcHeadless,
  MaximalTc,
  TcWithHead,
  MixedTcHeadless,
  MaximalMixedTc,
  MixedTcWithHead,
  Bursting,
  Terminating,
};
std::string_view to_string(OrbitClass c);
OrbitClass parse_orbit_class(std::string_view s);

struct SingularPoint {
  double u = 0.0;
  double mu = 0.0;
};

/// Sampled segment, traversed in sample order.
struct SingularSegment {
  SegmentKind kind = SegmentKind::Slow;
  std::vector<SingularPoint> points;

  const SingularPoint& start() const { return points.front(); }
  const SingularPoint& end() const { return points.back(); }
};

enum class Rule {
  Malformed,                   // fewer than two samples or non-finite values
  Support,                     // sample off S0 / the cycle branch, or fast segment with varying mu
  Orientation,                 // traversal against the subsystem flow
  Continuity,                  // consecutive segments do not share an endpoint
  JumpFromAttractingInterior,  // fast segment leaves an interior point of an attracting stretch
  SlowAvgJunctionNotAtHopf,    // slow <-> averaged-slow switch away from the Hopf point
  FastEndNotAttracting,        // fast segment does not land on an attracting fast object
  Closure,                     // closed orbit whose last point differs from its first
};
std::string_view to_string(Rule r);

struct Violation {
  Rule rule = Rule::Malformed;
  std::size_t index = 0;  // segment index, or junction index (junction i joins segments i and i+1)
  std::string detail;
};

struct Certificate {
  bool valid = true;
  std::optional<Violation> violation;
};

struct SingularOrbit {
  ModelSpec model{ModelName::Canonical, ParamSet{}};
  std::vector<SingularSegment> segments;
  bool closed = false;
  bool open_end = false;  // last fast segment stops at a time horizon rather than on an attractor
  OrbitClass classification = OrbitClass::Terminating;

  /// Shared endpoints; for closed orbits the last entry is the wrap-around junction.
  std::vector<SingularPoint> junctions() const;
};

/// Junction and support tolerance.
inline constexpr double kJunctionTol = 1e-8;

/// Checks, in this order: sample sanity and support of every segment,
/// orientation of slow and averaged-slow segments, every junction (continuity,
/// or closure for the wrap-around junction of a closed orbit; jumps only from
/// repelling stretches or special points; slow/averaged-slow switches only at
/// the Hopf point), then fast segments (orientation, landing on an attracting
/// object). Reports the first violation.
Certificate validate(const SingularOrbit& orbit);

struct FamilyInfo {
  OrbitClass label = OrbitClass::Terminating;
  int dimension = 1;
  std::string parametrization;
};

struct RegimeCase {
  int label = 1;       // 1: k > k_SN, 2: k = k_SN, 3: 0 < k < k_SN, 4: k = 0, 5: k < 0
  double k_sn = 1.0;   // 1 - alpha (alpha = 0 for the canonical model)
  std::string description;
  std::vector<FamilyInfo> families;

  bool has(OrbitClass c) const;
};

/// Tolerance for the boundary cases k = k_SN and k = 0.
inline constexpr double kCaseTol = 1e-12;

/// Regime of the polar models at the model's k (and alpha for the leidenator,
/// which must lie in [0, 1)). Throws std::invalid_argument for other models.
RegimeCase classify_regime(const ModelSpec& m);

/// Family member coordinates. Polar models: p0 is the start mu (on S0 for
/// terminating orbits in Case 1, on the attracting cycle branch otherwise),
/// p1 the mu of the first jump point (on the repelling cycle branch for
/// headless / with-head canards, on S0 for maximal TCs, bursting and Case 1),
/// p3 the mu where the head leaves S0. Van der Pol: p1 is the x of the jump
/// point on the repelling branch. Unset values take documented defaults.
struct FamilyParams {
  std::optional<double> p0;
  std::optional<double> p1;
  std::optional<double> p3;
  double mu_max = 3.0;  // truncation of "arbitrarily large" jump points on S0
  int samples = 65;     // per segment
};

/// Builds and validates a family member. Throws std::invalid_argument when the
/// family is not available at the model's parameters or a coordinate is out of range.
SingularOrbit build_singular_family(const ModelSpec& m, OrbitClass family, const FamilyParams& fp = {});

/// Members of every family available at the model's parameters, with their
/// coordinates spread over the open ranges (`per_family` members each; families
/// without coordinates contribute one).
std::vector<SingularOrbit> enumerate_families(const ModelSpec& m, int per_family = 5, const FamilyParams& base = {});

/// Selection of the with-head member realised for eps > 0: the head leaves S0
/// where the entry-exit relation places the exit for entry at mu_p2.
EntryExit head_exit(const ModelSpec& m, double mu_p2);

/// Van der Pol families available at the model's offset a.
std::vector<FamilyInfo> vdp_families(const ModelSpec& m);

nlohmann::json to_json(const SingularOrbit& orbit);
nlohmann::json to_json(const RegimeCase& rc);

enum class Corruption { InteriorJump, OrientationFlip, JunctionGap };
std::string_view to_string(Corruption c);

struct CorruptedOrbit {
  SingularOrbit orbit;
  Rule expected = Rule::Malformed;
};

/// Damages a valid orbit in the requested way; nullopt when the orbit offers
/// no place for that damage (e.g. no attracting stretch for an interior jump).
std::optional<CorruptedOrbit> corrupt(const SingularOrbit& orbit, Corruption c, std::mt19937_64& rng);

}  // namespace tcanard
