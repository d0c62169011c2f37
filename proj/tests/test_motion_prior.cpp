#include "stba/motion_prior.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "stba/error.hpp"
#include "stba/random.hpp"

using namespace stba;

namespace {

Trajectory3D line_trajectory(const std::vector<double>& times) {
  // Unit-speed straight line: position x = t on the x axis, unit weights.
  std::vector<TrajectorySample> s(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    s[i].time = times[i];
    s[i].position = Vec3(times[i], 0, 0);
    s[i].weight = 1.0;
  }
  return Trajectory3D(1, std::move(s));
}

MotionPriorConfig tight_eps(PriorKind kind = PriorKind::kLeastKinetic) {
  MotionPriorConfig cfg;
  cfg.kind = kind;
  cfg.epsilon = 1e-9;
  return cfg;
}

}  // namespace

TEST_CASE("kinetic cost of a unit-speed line") {
  // Three samples, unit velocity, unit weight: 2 * (1/2 * 1^2 * 1) = 1.
  Trajectory3D traj = line_trajectory({0.0, 1.0, 2.0});
  CHECK(kinetic_cost(traj, tight_eps()) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kinetic cost of a stationary point is zero") {
  std::vector<TrajectorySample> s(5);
  for (int i = 0; i < 5; ++i) {
    s[i].time = 0.3 * i;
    s[i].position = Vec3(0.4, -1.0, 2.0);
  }
  CHECK(kinetic_cost(Trajectory3D(0, std::move(s)), tight_eps()) == doctest::Approx(0.0));
}

TEST_CASE("looping the same positions costs more than the straight pass") {
  // Same three positions visited out of order (0, +2, +1 on the x axis after
  // time sorting): jumps of 2 then 1 per unit time.
  std::vector<TrajectorySample> s(3);
  s[0] = {0.0, Vec3(0, 0, 0), 1.0, -1, 0, 0.0};
  s[1] = {2.0, Vec3(1, 0, 0), 1.0, -1, 0, 0.0};
  s[2] = {1.0, Vec3(2, 0, 0), 1.0, -1, 0, 0.0};
  Trajectory3D loop(2, std::move(s));
  CHECK(loop.is_sorted());  // constructor re-sorts by time
  const double cost = kinetic_cost(loop, tight_eps());
  CHECK(cost > 1.0);
  // Direct evaluation: 1/2*(2^2)*1 + 1/2*(1^2)*1 = 2.5.
  CHECK(cost == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("kinetic matches the independent oracle on random trajectories") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t;
    std::vector<Vec3> x;
    std::vector<double> w;
    std::vector<TrajectorySample> s;
    double time = 0.0;
    const int n = 3 + static_cast<int>(rng.index(10));
    for (int i = 0; i < n; ++i) {
      time += rng.uniform(0.01, 0.3);
      t.push_back(time);
      x.push_back(rng.normal_vec3(1.0));
      w.push_back(rng.uniform(0.5, 3.0));
      s.push_back({t.back(), x.back(), w.back(), -1, 0, 0.0});
    }
    Trajectory3D traj(trial, s);
    MotionPriorConfig cfg;
    cfg.epsilon = 1e-4;
    CHECK(kinetic_cost(traj, cfg) ==
          doctest::Approx(oracle::kinetic(t, x, w, cfg.epsilon)).epsilon(1e-12));
    cfg.kind = PriorKind::kLeastForce;
    CHECK(force_cost(traj, cfg) ==
          doctest::Approx(oracle::force(t, x, w, cfg.epsilon)).epsilon(1e-12));
    cfg.kind = PriorKind::kLeastAction;
    CHECK(action_cost(traj, cfg) ==
          doctest::Approx(oracle::action(t, x, w, cfg.epsilon, cfg.gravity)).epsilon(1e-12));
  }
}

TEST_CASE("force cost of a projectile") {
  // Constant acceleration g: the three-point second difference is exact, so
  // the cost is m^2 g^2 * (duration - dt) for uniform spacing dt.
  const double g = 9.81;
  const double duration = 2.0;
  const int n = 41;
  const double dt = duration / (n - 1);
  auto curve = [&](double t) {
    return Vec3(1.5 * t, 3.0 * t - 0.5 * g * t * t, 0.0);
  };
  Trajectory3D traj = oracle::sample_curve(curve, 0.0, duration, n);
  MotionPriorConfig cfg = tight_eps(PriorKind::kLeastForce);
  const double cost = force_cost(traj, cfg);
  CHECK(cost == doctest::Approx(g * g * (duration - dt)).epsilon(1e-6));
  // Within discretization error of the continuous integral g^2 * duration.
  CHECK(std::abs(cost - g * g * duration) <= g * g * dt * 1.001);
}

TEST_CASE("action cost signs") {
  MotionPriorConfig cfg = tight_eps(PriorKind::kLeastAction);

  SUBCASE("stationary point at height h integrates to -m g h T") {
    std::vector<TrajectorySample> s(21);
    const double h = 1.3, duration = 2.0;
    for (int i = 0; i < 21; ++i) {
      s[i].time = duration * i / 20.0;
      s[i].position = Vec3(0.2, h, -0.1);
    }
    const double cost = action_cost(Trajectory3D(0, std::move(s)), cfg);
    CHECK(cost == doctest::Approx(-9.81 * h * duration).epsilon(1e-9));
    CHECK(cost < 0.0);
  }

  SUBCASE("horizontal unit-speed motion at zero height over 2 s") {
    Trajectory3D traj = line_trajectory({0.0, 0.5, 1.0, 1.5, 2.0});
    CHECK(action_cost(traj, cfg) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("dense sampling converges to the continuous integral") {
  // 1D oscillation x = sin(2 pi t): integral of v^2/2 over [0,1] is pi^2.
  auto curve = [](double t) { return Vec3(std::sin(2.0 * M_PI * t), 0, 0); };
  Trajectory3D traj = oracle::sample_curve(curve, 0.0, 1.0, 2000);
  const double reference = oracle::integrate(
      [](double t) {
        const double v = 2.0 * M_PI * std::cos(2.0 * M_PI * t);
        return 0.5 * v * v;
      },
      0.0, 1.0, 20000);
  CHECK(reference == doctest::Approx(M_PI * M_PI).epsilon(1e-6));
  CHECK(kinetic_cost(traj, tight_eps()) == doctest::Approx(reference).epsilon(1e-3));
}

TEST_CASE("sample weight") {
  CHECK(sample_weight(2.0, 5.0, 1000.0) == doctest::Approx(2500.0));
  CHECK_THROWS_AS(sample_weight(0.0, 5.0, 1000.0), Error);
  CHECK_THROWS_AS(sample_weight(2.0, 0.0, 1000.0), Error);
  CHECK_THROWS_AS(sample_weight(2.0, -1.0, 1000.0), Error);
  CHECK_THROWS_AS(sample_weight(2.0, 5.0, 0.0), Error);
}

TEST_CASE("config validation") {
  MotionPriorConfig cfg;
  cfg.epsilon = 0.0;
  Trajectory3D traj = line_trajectory({0.0, 1.0});
  CHECK_THROWS_AS(kinetic_cost(traj, cfg), Error);
  cfg.epsilon = 1e-5;
  cfg.mass = -1.0;
  CHECK_THROWS_AS(kinetic_cost(traj, cfg), Error);

  CHECK(MotionPriorConfig::for_frame_rate(12.0).epsilon ==
        doctest::Approx(1e-4 / 12.0).epsilon(1e-15));
  CHECK_THROWS_AS(MotionPriorConfig::for_frame_rate(0.0), Error);
}

TEST_CASE("unsorted samples are rejected") {
  Trajectory3D traj = line_trajectory({0.0, 1.0, 2.0});
  traj.mutable_samples()[0].time = 5.0;  // break the invariant behind the type's back
  CHECK(!traj.is_sorted());
  try {
    kinetic_cost(traj, tight_eps());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_config);
  }
}

TEST_CASE("coincident times stay finite through the epsilon guard") {
  std::vector<TrajectorySample> s(2);
  s[0] = {1.0, Vec3(0, 0, 0), 1.0, -1, 0, 0.0};
  s[1] = {1.0, Vec3(0.5, 0, 0), 1.0, -1, 0, 0.0};
  MotionPriorConfig cfg;
  cfg.epsilon = 1e-3;
  const double cost = kinetic_cost(Trajectory3D(0, std::move(s)), cfg);
  CHECK(std::isfinite(cost));
  CHECK(cost == doctest::Approx(0.0));  // dt = 0 leaves no integration span
}

TEST_CASE("two-sequence offset search recovers a known shift") {
  // A Lissajous-style curve sampled by two interleaved 12 fps combs offset by
  // a sub-frame shift. The cost over the merged trajectory dips at the true
  // shift. The search grid covers the planted-offset range [0.1, 0.9] frames;
  // the claimed-synchronous candidate at 0 is degenerate for the kinetic
  // functional (coincident pairs cost nothing through the dt factor) and is
  // never a legitimate layout here, matching the no-synchronous-pair rule of
  // the multi-camera scenarios.
  auto curve = [](double t) {
    return Vec3(0.30 * std::sin(2.0 * M_PI * 2.3 * t),
                0.25 * std::sin(2.0 * M_PI * 3.1 * t + 0.7),
                0.28 * std::sin(2.0 * M_PI * 1.7 * t + 0.3));
  };
  const double fps = 12.0;
  const double true_shift = 0.4 / fps;  // 0.4 frames
  const int n = 36;
  std::vector<TrajectorySample> sa(n), sb(n);
  for (int i = 0; i < n; ++i) {
    const double ta = i / fps;
    sa[i] = {ta, curve(ta), 1.0, 0, i, 0.0};
    // b's own clock starts at 0; its samples actually occur true_shift later
    const double tb = i / fps + true_shift;
    sb[i] = {i / fps, curve(tb), 1.0, 1, i, 0.0};
  }
  Trajectory3D a(0, std::move(sa)), b(0, std::move(sb));

  for (PriorKind kind : {PriorKind::kLeastKinetic, PriorKind::kLeastForce}) {
    MotionPriorConfig cfg = MotionPriorConfig::for_frame_rate(fps, kind);
    OffsetSearchResult res =
        offset_search_3d(a, b, cfg, 0.1 / fps, 0.9 / fps, 0.1 / fps);
    CHECK(res.best_shift == doctest::Approx(true_shift).epsilon(1e-9));
    CHECK(res.curve.size() == 9);
  }
}

TEST_CASE("interleave keeps samples sorted") {
  Trajectory3D a = line_trajectory({0.0, 0.2, 0.4});
  Trajectory3D b = line_trajectory({0.05, 0.25, 0.45});
  Trajectory3D merged = interleave_with_offset(a, b, 0.03);
  CHECK(merged.size() == 6);
  CHECK(merged.is_sorted());
}
