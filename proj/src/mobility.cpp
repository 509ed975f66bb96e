#include "simsec/mobility.hpp"

#include "simsec/em_core.hpp"

#include <cmath>
#include <stdexcept>

namespace simsec {

namespace {

// Folds v into [lo, hi]; returns true when an odd number of reflections
// happened (direction along this axis is reversed).
bool reflect(double& v, double lo, double hi) {
  const double width = hi - lo;
  if (width <= 0.0) {
    v = lo;
    return false;
  }
  bool flipped = false;
  while (v < lo || v > hi) {
    if (v < lo) {
      v = 2.0 * lo - v;
    } else {
      v = 2.0 * hi - v;
    }
    flipped = !flipped;
  }
  return flipped;
}

}  // namespace

MuKinematics spawn_user(const ServiceArea& area, Rng& rng) {
  MuKinematics kin;
  kin.x = uniform(rng, area.x_min, area.x_max);
  kin.y = uniform(rng, area.y_min, area.y_max);
  kin.heading_fix = uniform(rng, 0.0, kTwoPi);
  kin.heading = kin.heading_fix;
  kin.speed = 0.0;
  return kin;
}

MuKinematics advance(const MuKinematics& kin, double heading, double speed, double dt,
                     const ServiceArea& area) {
  if (!(dt > 0.0)) throw std::invalid_argument("slot duration must be positive");
  MuKinematics next = kin;
  next.heading = heading;
  next.speed = speed;
  next.x = kin.x + speed * dt * std::cos(heading);
  next.y = kin.y + speed * dt * std::sin(heading);
  if (reflect(next.x, area.x_min, area.x_max)) {
    next.heading = wrap_phase(kPi - next.heading);
    next.heading_fix = wrap_phase(kPi - next.heading_fix);
  }
  if (reflect(next.y, area.y_min, area.y_max)) {
    next.heading = wrap_phase(-next.heading);
    next.heading_fix = wrap_phase(-next.heading_fix);
  }
  return next;
}

MuKinematics step_mobility(const MuKinematics& kin, const MobilityParams& params,
                           const ServiceArea& area, Rng& rng) {
  if (params.heading_spread < 0.0 || params.max_speed < 0.0) {
    throw std::invalid_argument("mobility spread and speed must be non-negative");
  }
  const double heading =
      kin.heading_fix + uniform(rng, -params.heading_spread, params.heading_spread);
  const double speed = uniform(rng, 0.0, params.max_speed);
  return advance(kin, heading, speed, params.slot_duration, area);
}

}  // namespace simsec
