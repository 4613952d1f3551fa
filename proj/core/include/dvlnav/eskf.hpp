// Closed-loop error-state Kalman filter.
#pragma once

#include <stdexcept>
#include <string>

#include "dvlnav/error_dynamics.hpp"

namespace dvlnav {

using ObsMat = Eigen::Matrix<double, 3, kStateDim>;
using GainMat = Eigen::Matrix<double, kStateDim, 3>;

/// Sensor error estimates accumulated by feedback. Compensated IMU output is
/// (raw - bias) / (1 + scale), componentwise.
struct ImuCompensation {
  Vec3 gyro_bias = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_scale = Vec3::Zero();
  Vec3 accel_scale = Vec3::Zero();

  ImuSample apply(const ImuSample& raw) const;
};

struct UpdateDiagnostics {
  Vec3 innovation = Vec3::Zero();
  Mat3 S = Mat3::Zero();
};

struct FilterState {
  NavState nav;
  ErrorState err;
  ImuCompensation comp;
  double last_update_time = 0.0;
  UpdateDiagnostics last_update;
};

class CovarianceNotPSD : public std::runtime_error {
 public:
  explicit CovarianceNotPSD(const std::string& w) : std::runtime_error(w) {}
};
class SingularInnovation : public std::runtime_error {
 public:
  explicit SingularInnovation(const std::string& w) : std::runtime_error(w) {}
};
class AttitudeResetTooLarge : public std::runtime_error {
 public:
  explicit AttitudeResetTooLarge(const std::string& w) : std::runtime_error(w) {}
};

inline constexpr double kPsdTolerance = 1e-8;       // relative to trace
inline constexpr double kMaxInnovationCond = 1e12;

/// True if the smallest eigenvalue of P is >= -rel_tol * trace(P).
bool is_psd(const StateMat& P, double rel_tol = kPsdTolerance);

/// P <- Phi P Phi^T + Qd, dx <- Phi dx.
FilterState predict(const FilterState& fs, const StateMat& Phi, const StateMat& Qd);

/// Kalman update with Joseph-form covariance.
FilterState update(const FilterState& fs, const Vec3& z, const ObsMat& H, const Mat3& R);

/// Applies dx to the navigation solution and sensor compensation, then zeroes dx.
FilterState feedback(const FilterState& fs);

}  // namespace dvlnav
