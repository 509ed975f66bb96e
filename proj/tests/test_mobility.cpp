#include <doctest.h>

#include <cmath>

#include "simsec/mobility.hpp"

using namespace simsec;

TEST_CASE("zero speed keeps the user in place") {
  Rng rng(1);
  const ServiceArea area;
  MobilityParams params;
  params.max_speed = 0.0;
  MuKinematics kin = spawn_user(area, rng);
  const double x0 = kin.x;
  const double y0 = kin.y;
  for (int t = 0; t < 50; ++t) kin = step_mobility(kin, params, area, rng);
  CHECK(kin.x == x0);
  CHECK(kin.y == y0);
}

TEST_CASE("forced displacement") {
  MuKinematics kin;
  kin.x = 50.0;
  kin.y = 30.0;
  const MuKinematics next = advance(kin, 0.0, 2.0, 1.0, ServiceArea{});
  CHECK(next.x == 52.0);
  CHECK(next.y == 30.0);
  CHECK_THROWS(advance(kin, 0.0, 2.0, 0.0, ServiceArea{}));
}

TEST_CASE("zero spread keeps the heading fixed") {
  Rng rng(2);
  const ServiceArea area{-1e6, 1e6, -1e6, 1e6};
  MobilityParams params;
  params.heading_spread = 0.0;
  MuKinematics kin;
  kin.heading_fix = 1.1;
  for (int t = 0; t < 40; ++t) {
    kin = step_mobility(kin, params, area, rng);
    CHECK(kin.heading == 1.1);
  }
}

TEST_CASE("reflection at the walls") {
  const ServiceArea area;
  MuKinematics kin;
  kin.x = 99.0;
  kin.y = 50.0;
  kin.heading_fix = 0.0;
  const MuKinematics next = advance(kin, 0.0, 2.0, 1.0, area);
  CHECK(next.x == doctest::Approx(99.0));
  CHECK(std::cos(next.heading) == doctest::Approx(-1.0));
  CHECK(std::cos(next.heading_fix) == doctest::Approx(-1.0));
  kin.x = 50.0;
  kin.y = 0.5;
  const MuKinematics down = advance(kin, -kPi / 2, 2.0, 1.0, area);
  CHECK(down.y == doctest::Approx(1.5));
  CHECK(std::sin(down.heading) == doctest::Approx(1.0));
}

TEST_CASE("long runs stay inside and respect the speed limit") {
  Rng rng(3);
  const ServiceArea area;
  const MobilityParams params;
  MuKinematics kin = spawn_user(area, rng);
  for (int t = 0; t < 20000; ++t) {
    const MuKinematics next = step_mobility(kin, params, area, rng);
    CHECK(area.contains(next.x, next.y));
    CHECK(std::hypot(next.x - kin.x, next.y - kin.y) <= params.max_speed * params.slot_duration + 1e-12);
    CHECK(next.speed <= params.max_speed);
    CHECK(next.speed >= 0.0);
    kin = next;
  }
}

TEST_CASE("trajectories are reproducible") {
  Rng a(77);
  Rng b(77);
  const ServiceArea area;
  const MobilityParams params;
  MuKinematics ka = spawn_user(area, a);
  MuKinematics kb = spawn_user(area, b);
  for (int t = 0; t < 200; ++t) {
    ka = step_mobility(ka, params, area, a);
    kb = step_mobility(kb, params, area, b);
  }
  CHECK(ka.x == kb.x);
  CHECK(ka.y == kb.y);
  CHECK(ka.heading == kb.heading);
}
