#pragma once

// Biased random walk for mobile users on the ground plane.

#include <vector>

#include "simsec/types.hpp"

namespace simsec {

struct MuKinematics {
  double x = 0.0;
  double y = 0.0;
  double heading_fix = 0.0;  // reference direction of travel
  double heading = 0.0;
  double speed = 0.0;

  Vec3 position() const { return {x, y, 0.0}; }
};

struct MobilityParams {
  double slot_duration = 1.0;
  double heading_spread = kPi / 6.0;  // half-width of the heading perturbation
  double max_speed = 2.0;
};

struct ServiceArea {
  double x_min = 0.0;
  double x_max = 100.0;
  double y_min = 0.0;
  double y_max = 100.0;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

// Uniform position in the area, uniform reference heading in [0, 2*pi).
MuKinematics spawn_user(const ServiceArea& area, Rng& rng);

// Moves with the given heading and speed, then mirror-reflects at the walls.
// Reflection flips the matching heading component of both the current and the
// reference direction so the walk keeps drifting away from the wall.
MuKinematics advance(const MuKinematics& kin, double heading, double speed, double dt,
                     const ServiceArea& area);

// heading = heading_fix + U(-spread, spread), speed = U(0, V_max).
MuKinematics step_mobility(const MuKinematics& kin, const MobilityParams& params,
                           const ServiceArea& area, Rng& rng);

}  // namespace simsec
