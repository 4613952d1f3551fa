#include "dvlnav/strapdown.hpp"

#include <cmath>
#include <sstream>

namespace dvlnav {

Mat3 midpoint_attitude(const Mat3& c_bn, const Vec3& omega_in_dt, const Vec3& omega_ib_dt) {
  return rotation_exp(-0.5 * omega_in_dt) * c_bn * rotation_exp(0.5 * omega_ib_dt);
}

Geodetic integrate_position(const Geodetic& pos, const Vec3& v_prev, const Vec3& v_next,
                            double dt) {
  const Vec3 v_avg = 0.5 * (v_prev + v_next);
  const EarthQuantities earth = earth_model(pos, Vec3::Zero());
  const double rmh = earth.r_meridian - pos.depth;
  const double rnh = earth.r_normal - pos.depth;
  Geodetic out;
  out.latitude = pos.latitude + v_avg.x() * dt / rmh;
  out.longitude = wrap_pi(pos.longitude + v_avg.y() * dt / (rnh * std::cos(pos.latitude)));
  out.depth = pos.depth + v_avg.z() * dt;
  return out;
}

NavState mechanize(const NavState& state, const ImuSample& imu, double dt,
                   const MechanizationOptions& opts) {
  if (!(imu.time > state.time)) {
    std::ostringstream os;
    os << "IMU sample at t=" << imu.time << " does not advance state at t=" << state.time;
    throw NonMonotonicTime(os.str());
  }
  if (!(dt > 0.0) || dt > kMaxMechanizationStep) {
    throw std::invalid_argument("mechanize: dt must be in (0, 0.1] s");
  }

  EarthQuantities earth = earth_model(state.pos, state.vel_ned);
  if (!opts.rotating_earth) {
    earth.omega_ie_n.setZero();
    earth.omega_en_n.setZero();
  }
  const Vec3 omega_in = earth.omega_in_n();
  const Vec3 theta_in = omega_in * dt;
  const Vec3 theta_ib = imu.gyro * dt;

  NavState next;
  next.time = imu.time;

  next.c_bn = orthonormalize(rotation_exp(-theta_in) * state.c_bn * rotation_exp(theta_ib));

  const Mat3 c_mid = midpoint_attitude(state.c_bn, theta_in, theta_ib);
  const Vec3 coriolis = (2.0 * earth.omega_ie_n + earth.omega_en_n).cross(state.vel_ned);
  next.vel_ned = state.vel_ned + (c_mid * imu.accel + earth.gravity_n - coriolis) * dt;

  next.pos = integrate_position(state.pos, state.vel_ned, next.vel_ned, dt);
  return next;
}

Vec3 dvl_center_velocity(const Vec3& v_imu_ned, const Mat3& c_bn, const Vec3& omega_in_n,
                         const Vec3& omega_ib_b, const Vec3& lever) {
  return v_imu_ned - omega_in_n.cross(c_bn * lever) - c_bn * lever.cross(omega_ib_b);
}

Vec3 dvl_center_velocity(const NavState& state, const ImuSample& imu, const Vec3& lever) {
  const EarthQuantities earth = earth_model(state.pos, state.vel_ned);
  return dvl_center_velocity(state.vel_ned, state.c_bn, earth.omega_in_n(), imu.gyro, lever);
}

}  // namespace dvlnav
