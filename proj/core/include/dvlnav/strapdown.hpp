// Strapdown INS mechanization in the local NED frame.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "dvlnav/geo.hpp"

namespace dvlnav {

struct NavState {
  double time = 0.0;  // [s]
  Geodetic pos;
  Vec3 vel_ned = Vec3::Zero();  // [m/s]
  Mat3 c_bn = Mat3::Identity();  // body -> NED
};

struct ImuSample {
  double time = 0.0;            // end of the integration interval [s]
  Vec3 gyro = Vec3::Zero();     // omega_ib^b [rad/s]
  Vec3 accel = Vec3::Zero();    // specific force f^b [m/s^2]
};

class NonMonotonicTime : public std::runtime_error {
 public:
  // line is the 1-based log line when raised by a reader, 0 otherwise.
  explicit NonMonotonicTime(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct MechanizationOptions {
  // When false, earth rate and transport rate are zeroed (gravity stays).
  bool rotating_earth = true;
};

inline constexpr double kMaxMechanizationStep = 0.1;  // [s]

/// The attitude used for the specific-force projection over one step:
/// exp(-(w_in dt / 2) x) * C * exp((w_ib dt / 2) x).
Mat3 midpoint_attitude(const Mat3& c_bn, const Vec3& omega_in_dt, const Vec3& omega_ib_dt);

/// Trapezoidal position step with radii evaluated at `pos`.
Geodetic integrate_position(const Geodetic& pos, const Vec3& v_prev, const Vec3& v_next, double dt);

/// Advances `state` by one IMU sample of length dt.
///
/// Attitude: C <- exp(-(w_in dt)x) C exp((w_ib dt)x), re-orthonormalized.
/// Velocity: v <- v + (C_mid f + g - (2 w_ie + w_en) x v) dt.
/// Position: trapezoidal in velocity, radii evaluated at the start of the step.
/// Throws NonMonotonicTime if imu.time <= state.time and std::invalid_argument
/// if dt is outside (0, kMaxMechanizationStep].
NavState mechanize(const NavState& state, const ImuSample& imu, double dt,
                   const MechanizationOptions& opts = {});

/// Velocity of the DVL phase center in NED given the IMU-center state:
/// v_IMU - (w_in x) C l - C (l x w_ib).
Vec3 dvl_center_velocity(const NavState& state, const ImuSample& imu, const Vec3& lever);

/// Same relation evaluated from explicit rates, for callers that already hold w_in.
Vec3 dvl_center_velocity(const Vec3& v_imu_ned, const Mat3& c_bn, const Vec3& omega_in_n,
                         const Vec3& omega_ib_b, const Vec3& lever);

}  // namespace dvlnav
