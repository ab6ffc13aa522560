#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcanard/hunt.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace tcanard;

namespace {

ModelSpec polar(ModelName n, double k, double eps = 1e-3, double alpha = 0.2) {
  ParamSet p;
  p.k = k;
  p.epsilon = eps;
  p.alpha = n == ModelName::Leidenator ? alpha : 0.0;
  return {n, p};
}

TrajectoryLabel label_of(const ModelSpec& m, const HuntConfig& cfg = {}) { return classify(m, cfg).label; }

}  // namespace

TEST_CASE("labels and predicates parse") {
  for (int i = 0; i <= static_cast<int>(TrajectoryLabel::Inconclusive); ++i) {
    const auto l = static_cast<TrajectoryLabel>(i);
    CHECK(parse_trajectory_label(to_string(l)) == l);
  }
  CHECK_THROWS(parse_trajectory_label("spiking"));

  const auto p = TransitionPredicate::parse("tonic|bursting");
  CHECK(p.a == TrajectoryLabel::Tonic);
  CHECK(p.b == TrajectoryLabel::Bursting);
  CHECK(p.name() == "tonic|bursting");
  CHECK_THROWS(TransitionPredicate::parse("tonic"));
  CHECK_THROWS(TransitionPredicate::parse("rest|rest"));
}

TEST_CASE("TC subtypes fall on the side their jump leads to") {
  const auto tb = TransitionPredicate::parse("tonic|bursting");
  CHECK(tb.side(TrajectoryLabel::Tonic) == TrajectoryLabel::Tonic);
  CHECK(tb.side(TrajectoryLabel::TcWithHead) == TrajectoryLabel::Bursting);
  CHECK(tb.side(TrajectoryLabel::TcHeadless) == TrajectoryLabel::Tonic);
  CHECK_FALSE(tb.side(TrajectoryLabel::Rest));
  CHECK_FALSE(tb.side(TrajectoryLabel::Inconclusive));

  const auto br = TransitionPredicate::parse("bursting|rest");
  CHECK(br.side(TrajectoryLabel::MixedTcWithHead) == TrajectoryLabel::Bursting);
  CHECK(br.side(TrajectoryLabel::MixedTcHeadless) == TrajectoryLabel::Rest);
  CHECK_FALSE(br.side(TrajectoryLabel::Drift));

  const auto rd = TransitionPredicate::parse("rest|drift");
  CHECK_FALSE(rd.side(TrajectoryLabel::TcWithHead));
}

TEST_CASE("polar repelling branch distance") {
  const auto b = RepellingBranch::polar();
  CHECK(b.mu_hopf() == 0.0);
  CHECK(b.mu_fold() == -1.0);
  CHECK(b.mu_extent() == 1.0);
  for (double r : {0.1, 0.4, 0.7, 0.95}) {
    const double mu = r * r * r * r - 2.0 * r * r;
    CHECK(b.distance(mu, r) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.distance(mu, r + 0.01) <= 0.01 + 1e-12);
  }
  CHECK(std::isinf(b.distance(0.1, 0.5)));
  CHECK(std::isinf(b.distance(-1.1, 0.5)));
  CHECK(std::isinf(b.distance(-0.5, 1.2)));
}

TEST_CASE("wilson-cowan repelling branch sits between its Hopf point and cycle fold") {
  const auto b = RepellingBranch::for_model(ModelSpec(ModelName::WilsonCowan, wilson_cowan_reference()));
  CHECK(b.mu_hopf() == doctest::Approx(-5.5303).epsilon(1e-3));
  CHECK(b.mu_fold() == doctest::Approx(-5.3834).epsilon(1e-3));
  CHECK(b.mu_extent() == doctest::Approx(0.147).epsilon(0.02));
  CHECK(b.amp_fold() > 0.7);
  CHECK(b.amp_fold() < 0.9);
  CHECK(b.distance(b.mu_hopf(), 0.0) < 1e-3);
  CHECK(std::isinf(b.distance(-5.0, 0.3)));
}

TEST_CASE("single-point classifications") {
  CHECK(label_of(polar(ModelName::Leidenator, 0.81)) == TrajectoryLabel::Tonic);
  CHECK(label_of(polar(ModelName::Leidenator, -0.1, 0.05)) == TrajectoryLabel::Rest);
  CHECK(label_of(polar(ModelName::Canonical, 2.0)) == TrajectoryLabel::Tonic);
  CHECK(label_of(polar(ModelName::Canonical, 1.2)) == TrajectoryLabel::Tonic);
  CHECK(label_of(polar(ModelName::Canonical, 0.6)) == TrajectoryLabel::Bursting);
  CHECK(label_of(polar(ModelName::Canonical, 0.3)) == TrajectoryLabel::Bursting);
  CHECK(label_of(polar(ModelName::Canonical, -0.2)) == TrajectoryLabel::Drift);
}

TEST_CASE("leidenator at rest sits at the buffer point k / alpha") {
  const auto c = classify(polar(ModelName::Leidenator, -0.1, 0.05), {});
  CHECK(c.label == TrajectoryLabel::Rest);
  CHECK(c.evidence.mu_final == doctest::Approx(-0.5).epsilon(1e-2));
  CHECK(c.evidence.env_final_max < 1e-10);
}

TEST_CASE("tonic envelope matches the averaged equilibrium on the outer branch") {
  // Outer-branch oracle: k - r^2 - alpha (r^4 - 2 r^2) = 0 with r > 1.
  for (double k : {0.9, 1.5}) {
    const double alpha = 0.2;
    const double b = 1.0 - 2.0 * alpha;
    const double r2 = (-b + std::sqrt(b * b + 4.0 * alpha * k)) / (2.0 * alpha);
    const auto c = classify(polar(ModelName::Leidenator, k), {});
    REQUIRE(c.label == TrajectoryLabel::Tonic);
    CHECK(c.evidence.final_state(0) == doctest::Approx(std::sqrt(r2)).epsilon(1e-3));
  }
}

TEST_CASE("full system agrees with the singular regime of the leidenator") {
  for (double k : {-0.2, 0.3, 0.9, 1.5}) {
    const auto m = polar(ModelName::Leidenator, k);
    const auto rc = classify_regime(m);
    const auto l = label_of(m);
    CAPTURE(k);
    switch (rc.label) {
      case 1: CHECK(l == TrajectoryLabel::Tonic); break;
      case 3: CHECK(l == TrajectoryLabel::Bursting); break;
      case 5: CHECK((l == TrajectoryLabel::Rest || l == TrajectoryLabel::Drift)); break;
      default: FAIL("unexpected regime " << rc.label);
    }
  }
}

TEST_CASE("escape from the mu window is drift") {
  HuntConfig cfg;
  Thresholds th;
  th.mu_escape = 2.0;
  cfg.thresholds = th;
  const auto c = classify(polar(ModelName::Canonical, -0.2), cfg);
  CHECK(c.label == TrajectoryLabel::Drift);
  CHECK(c.reason.find("window") != std::string::npos);
  CHECK(std::abs(c.evidence.mu_final) > 2.0);
}

TEST_CASE("integration failure is inconclusive, never a label") {
  HuntConfig cfg;
  cfg.integrator.max_steps = 50;
  const auto c = classify(polar(ModelName::Canonical, 0.6), cfg);
  CHECK(c.label == TrajectoryLabel::Inconclusive);
  CHECK(c.reason.find("integration") != std::string::npos);
}

TEST_CASE("a quiet passage cut off by the horizon is inconclusive") {
  HuntConfig cfg;
  cfg.discard_slow = 3.0;
  cfg.horizon_slow = 4.0;
  const auto c = classify(polar(ModelName::Canonical, 0.3), cfg);
  CHECK(c.label == TrajectoryLabel::Inconclusive);
  CHECK(c.reason.find("horizon") != std::string::npos);
}

TEST_CASE("configuration and model checks") {
  HuntConfig bad;
  bad.horizon_slow = bad.discard_slow;
  CHECK_THROWS_AS(classify(polar(ModelName::Canonical, 0.6), bad), std::invalid_argument);
  ParamSet p;
  CHECK_THROWS_AS(classify(ModelSpec(ModelName::VanDerPol, p), {}), std::invalid_argument);
  HuntConfig wrong_dim;
  wrong_dim.y0 = Eigen::Vector2d(1.0, 0.0);
  CHECK_THROWS_AS(classify(polar(ModelName::Canonical, 0.6), wrong_dim), std::invalid_argument);
}

TEST_CASE("state tap sees the trajectory") {
  int calls = 0;
  double t_last = 0.0;
  classify(polar(ModelName::Canonical, 2.0), {}, nullptr, [&](double t, const VectorXd& y) {
    ++calls;
    CHECK(y.size() == 3);
    t_last = t;
  });
  CHECK(calls > 1000);
  CHECK(t_last == doctest::Approx(30.0 / 1e-3));
}

TEST_CASE("canonical k = 0 rests on a continuum, leidenator k = 0 at a single point") {
  std::vector<Eigen::Vector3d> starts{{1.8, 0.0, 0.5}, {0.5, 0.0, -0.5}, {0.2, 0.0, -2.0}};
  std::vector<double> can, lei;
  for (const auto& y : starts) {
    HuntConfig cfg;
    cfg.horizon_slow = 100.0;
    cfg.y0 = y;
    const auto c = classify(polar(ModelName::Canonical, 0.0), cfg);
    const auto l = classify(polar(ModelName::Leidenator, 0.0), cfg);
    CHECK(c.label == TrajectoryLabel::Rest);
    CHECK(l.label == TrajectoryLabel::Rest);
    can.push_back(c.evidence.mu_final);
    lei.push_back(l.evidence.mu_final);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(lei[i]) < 1e-6);
    for (std::size_t j = i + 1; j < 3; ++j) CHECK(std::abs(can[i] - can[j]) > 0.1);
  }
}

TEST_CASE("classical TC transition sits O(eps) below the singular canard point") {
  const auto m = polar(ModelName::Leidenator, 0.8);
  const auto r = bisect_transition(m, 0.799, 0.801, TransitionPredicate::parse("tonic|bursting"), 1e-9);
  CHECK_FALSE(r.inconclusive);
  CHECK(r.width <= 1e-9);
  CHECK(r.side_lo == TrajectoryLabel::Bursting);
  CHECK(r.side_hi == TrajectoryLabel::Tonic);
  const double offset = 0.8 - r.k_star;
  CHECK(offset > 1e-4);
  CHECK(offset < 1e-3);

  SUBCASE("deterministic") {
    const auto again = bisect_transition(m, 0.799, 0.801, TransitionPredicate::parse("tonic|bursting"), 1e-9);
    CHECK(again.k_star == r.k_star);
    CHECK(again.k_lo == r.k_lo);
    CHECK(again.k_hi == r.k_hi);
    CHECK(again.evaluations == r.evaluations);
    CHECK(to_json(again).dump() == to_json(r).dump());
  }

  SUBCASE("adherence to the repelling branch grows toward k*") {
    const auto far = classify(m.with_k(r.k_star - 1e-4), {});
    const auto near = classify(m.with_k(r.k_lo), {});
    CHECK(near.evidence.adherence_span > far.evidence.adherence_span);
  }

  SUBCASE("provenance block") {
    const auto j = to_json(r);
    CHECK(j["provenance"]["model"] == "leidenator");
    CHECK(j["provenance"]["predicate"] == "tonic|bursting");
    CHECK(j["provenance"]["parameters"]["alpha"] == 0.2);
    CHECK(j["provenance"]["initial_condition"].size() == 3);
    CHECK(j["provenance"]["config"]["thresholds"]["r_quiet"] == 0.05);
    CHECK(j["bracket_width"].get<double>() <= 1e-9);
  }
}

TEST_CASE("mixed-type TC passages near the low-k transition") {
  HuntConfig cfg;
  cfg.horizon_slow = 3000.0;
  cfg.discard_slow = 1500.0;
  const auto headless = classify(polar(ModelName::Leidenator, 0.0015128, 0.05), cfg);
  const auto head = classify(polar(ModelName::Leidenator, 0.0015129, 0.05), cfg);
  CHECK(headless.label == TrajectoryLabel::MixedTcHeadless);
  CHECK(head.label == TrajectoryLabel::MixedTcWithHead);
  CHECK(headless.evidence.adherence_span >= 0.05);
  CHECK(head.evidence.adherence_span >= 0.05);
}

TEST_CASE("bisection argument errors") {
  const auto m = polar(ModelName::Leidenator, 0.8);
  const auto tb = TransitionPredicate::parse("tonic|bursting");
  CHECK_THROWS_AS(bisect_transition(m, 0.799, 0.801, tb, 1e-14), std::invalid_argument);
  CHECK_THROWS_AS(bisect_transition(m, 0.801, 0.799, tb, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(bisect_transition(m, 0.9, 1.5, tb, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(bisect_transition(m, -0.2, 0.9, tb, 1e-9), std::invalid_argument);
}

TEST_CASE("bisection stops at the floating-point resolution of the bracket") {
  const auto m = polar(ModelName::Leidenator, 0.8);
  const auto r = bisect_transition(m, 0.799, 0.801, TransitionPredicate::parse("tonic|bursting"), 1e-13);
  CHECK(r.width <= 1.2e-13);
  CHECK(r.k_lo < r.k_hi);
}

TEST_CASE("sweep is independent of the worker count") {
  const auto m = polar(ModelName::Canonical, 0.0);
  const std::vector<double> ks{2.0, 1.2, 0.6, 0.3, -0.2};
  const auto serial = sweep(m, ks, {}, 1);
  const auto parallel = sweep(m, ks, {}, 3);
  REQUIRE(serial.size() == ks.size());
  const std::vector<TrajectoryLabel> expect{TrajectoryLabel::Tonic, TrajectoryLabel::Tonic, TrajectoryLabel::Bursting,
                                            TrajectoryLabel::Bursting, TrajectoryLabel::Drift};
  const std::vector<int> cases{1, 1, 3, 3, 5};
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CHECK(serial[i].k == ks[i]);
    CHECK(serial[i].trajectory.label == expect[i]);
    REQUIRE(serial[i].regime);
    CHECK(serial[i].regime->label == cases[i]);
    CHECK(parallel[i].trajectory.label == serial[i].trajectory.label);
    CHECK(parallel[i].trajectory.evidence.mu_final == serial[i].trajectory.evidence.mu_final);
  }

  std::ostringstream os;
  write_regime_csv(os, serial);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "k,case,label,env_min,env_max,bursts,adherence_span,mu_final,reason");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.find(std::string(to_string(serial[rows - 1].trajectory.label))) != std::string::npos);
  }
  CHECK(rows == 5);
}

TEST_CASE("classification JSON") {
  const auto c = classify(polar(ModelName::Canonical, 0.6), {});
  const auto j = to_json(c);
  CHECK(j["label"] == "bursting");
  CHECK(j["evidence"]["bursts"].get<int>() >= 2);
  CHECK(j["evidence"]["final_state"].size() == 3);
  CHECK(j["evidence"]["integrator_status"] == "success");
}

TEST_CASE("wilson-cowan reference parameters burst") {
  const ModelSpec m(ModelName::WilsonCowan, wilson_cowan_reference());
  const auto c = classify(m, {});
  CHECK(c.label == TrajectoryLabel::Bursting);
  CHECK(c.evidence.env_final_max > Thresholds::for_model(ModelName::WilsonCowan).r_spike);
}
