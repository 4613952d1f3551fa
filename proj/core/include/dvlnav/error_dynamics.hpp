// Continuous-time INS error model and its discretization.
//
// Error state ordering (frozen; H and feedback index into it):
//   [0,3)   dr   position error, local NED [m]
//   [3,6)   dv   velocity error, NED [m/s]
//   [6,9)   phi  attitude error [rad], with C_hat = [I - (phi x)] C
//   [9,12)  bg   gyro bias [rad/s]
//   [12,15) ba   accel bias [m/s^2]
//   [15,18) sg   gyro scale factor [-]
//   [18,21) sa   accel scale factor [-]
// Errors are estimate minus truth.
#pragma once

#include <Eigen/Dense>

#include "dvlnav/strapdown.hpp"

namespace dvlnav {

inline constexpr int kStateDim = 21;
inline constexpr int kNoiseDim = 18;

namespace idx {
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kAtt = 6;
inline constexpr int kGyroBias = 9;
inline constexpr int kAccelBias = 12;
inline constexpr int kGyroScale = 15;
inline constexpr int kAccelScale = 18;
}  // namespace idx

// Noise channel ordering in W.
namespace noise_idx {
inline constexpr int kGyroWhite = 0;
inline constexpr int kAccelWhite = 3;
inline constexpr int kGyroBias = 6;
inline constexpr int kAccelBias = 9;
inline constexpr int kGyroScale = 12;
inline constexpr int kAccelScale = 15;
}  // namespace noise_idx

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using NoiseMat = Eigen::Matrix<double, kStateDim, kNoiseDim>;
using NoiseVec = Eigen::Matrix<double, kNoiseDim, 1>;

struct ErrorState {
  StateVec dx = StateVec::Zero();
  StateMat P = StateMat::Zero();

  auto pos() { return dx.segment<3>(idx::kPos); }
  auto vel() { return dx.segment<3>(idx::kVel); }
  auto att() { return dx.segment<3>(idx::kAtt); }
  Vec3 pos() const { return dx.segment<3>(idx::kPos); }
  Vec3 vel() const { return dx.segment<3>(idx::kVel); }
  Vec3 att() const { return dx.segment<3>(idx::kAtt); }
  Vec3 gyro_bias() const { return dx.segment<3>(idx::kGyroBias); }
  Vec3 accel_bias() const { return dx.segment<3>(idx::kAccelBias); }
  Vec3 gyro_scale() const { return dx.segment<3>(idx::kGyroScale); }
  Vec3 accel_scale() const { return dx.segment<3>(idx::kAccelScale); }

  Mat3 attitude_cov() const { return P.block<3, 3>(idx::kAtt, idx::kAtt); }
};

/// Driving noise of W. White sensor noise terms are spectral densities
/// expressed as random-walk coefficients; bias and scale states are random
/// constants with a small conditioning random walk.
struct ProcessNoiseSpec {
  double gyro_arw = 0.0;        // [rad/sqrt(s)]
  double accel_vrw = 0.0;       // [m/s/sqrt(s)]
  double gyro_bias_rw = 0.0;    // [rad/s/sqrt(s)]
  double accel_bias_rw = 0.0;   // [m/s^2/sqrt(s)]
  double gyro_scale_rw = 0.0;   // [1/sqrt(s)]
  double accel_scale_rw = 0.0;  // [1/sqrt(s)]

  /// PSD diagonal of W in channel order.
  NoiseVec psd() const;
};

struct ContinuousModel {
  StateMat F;
  NoiseMat G;
};

struct DiscreteModel {
  StateMat Phi;
  StateMat Qd;
};

/// Error dynamics linearized at `state` for the (compensated) IMU sample.
ContinuousModel build_FG(const NavState& state, const ImuSample& imu);

/// Phi X Phi^T. Uses the block structure when the sensor-error rows of Phi
/// are [0 I] (random-walk states), which is the case for build_FG models.
StateMat congruence(const StateMat& Phi, const StateMat& X);

/// Phi = I + F dt and trapezoidal Qd = (Phi G q G^T Phi^T + G q G^T) dt / 2.
DiscreteModel discretize(const StateMat& F, const NoiseMat& G, const NoiseVec& q_psd, double dt);

}  // namespace dvlnav
