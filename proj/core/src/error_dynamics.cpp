#include "dvlnav/error_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace dvlnav {

NoiseVec ProcessNoiseSpec::psd() const {
  NoiseVec q;
  q.segment<3>(noise_idx::kGyroWhite).setConstant(gyro_arw * gyro_arw);
  q.segment<3>(noise_idx::kAccelWhite).setConstant(accel_vrw * accel_vrw);
  q.segment<3>(noise_idx::kGyroBias).setConstant(gyro_bias_rw * gyro_bias_rw);
  q.segment<3>(noise_idx::kAccelBias).setConstant(accel_bias_rw * accel_bias_rw);
  q.segment<3>(noise_idx::kGyroScale).setConstant(gyro_scale_rw * gyro_scale_rw);
  q.segment<3>(noise_idx::kAccelScale).setConstant(accel_scale_rw * accel_scale_rw);
  return q;
}

ContinuousModel build_FG(const NavState& state, const ImuSample& imu) {
  const EarthQuantities earth = earth_model(state.pos, state.vel_ned);
  const double lat = state.pos.latitude;
  const double sl = std::sin(lat), cl = std::cos(lat), tl = sl / cl;
  const double rmh = earth.r_meridian - state.pos.depth;
  const double rnh = earth.r_normal - state.pos.depth;
  const double we = wgs84::kEarthRate;
  const double vn = state.vel_ned.x(), ve = state.vel_ned.y(), vd = state.vel_ned.z();
  const double g = earth.gravity_n.z();
  const Mat3& c = state.c_bn;

  ContinuousModel m;
  m.F.setZero();
  m.G.setZero();

  Mat3 f_rr = Mat3::Zero();
  f_rr(0, 0) = -vd / rmh;
  f_rr(0, 2) = vn / rmh;
  f_rr(1, 0) = ve * tl / rnh;
  f_rr(1, 1) = -(vd + vn * tl) / rnh;
  f_rr(1, 2) = ve / rnh;
  m.F.block<3, 3>(idx::kPos, idx::kPos) = f_rr;
  m.F.block<3, 3>(idx::kPos, idx::kVel) = Mat3::Identity();

  // Velocity error: Coriolis/transport sensitivity to position and velocity,
  // plus the vertical gravity gradient.
  Mat3 f_vr = Mat3::Zero();
  f_vr(0, 0) = -2.0 * ve * we * cl / rmh - ve * ve / (rnh * rmh * cl * cl);
  f_vr(0, 2) = vn * vd / (rmh * rmh) - ve * ve * tl / (rnh * rnh);
  f_vr(1, 0) = 2.0 * we * (vn * cl - vd * sl) / rmh + vn * ve / (rnh * rmh * cl * cl);
  f_vr(1, 2) = (ve * vd + vn * ve * tl) / (rnh * rnh);
  f_vr(2, 0) = 2.0 * we * ve * sl / rmh;
  f_vr(2, 2) = -ve * ve / (rnh * rnh) - vn * vn / (rmh * rmh) +
               2.0 * g / (std::sqrt(earth.r_meridian * earth.r_normal) - state.pos.depth);
  m.F.block<3, 3>(idx::kVel, idx::kPos) = f_vr;

  Mat3 f_vv;
  f_vv(0, 0) = vd / rmh;
  f_vv(0, 1) = -2.0 * (we * sl + ve * tl / rnh);
  f_vv(0, 2) = vn / rmh;
  f_vv(1, 0) = 2.0 * we * sl + ve * tl / rnh;
  f_vv(1, 1) = (vd + vn * tl) / rnh;
  f_vv(1, 2) = 2.0 * we * cl + ve / rnh;
  f_vv(2, 0) = -2.0 * vn / rmh;
  f_vv(2, 1) = -2.0 * (we * cl + ve / rnh);
  f_vv(2, 2) = 0.0;
  m.F.block<3, 3>(idx::kVel, idx::kVel) = f_vv;

  // With C_hat = [I - (phi x)] C the projected specific force picks up
  // f^n x phi, so this block is +(f^n x).
  m.F.block<3, 3>(idx::kVel, idx::kAtt) = skew(c * imu.accel);
  m.F.block<3, 3>(idx::kVel, idx::kAccelBias) = c;
  m.F.block<3, 3>(idx::kVel, idx::kAccelScale) = c * imu.accel.asDiagonal();

  Mat3 f_pr = Mat3::Zero();
  f_pr(0, 0) = -we * sl / rmh;
  f_pr(0, 2) = ve / (rnh * rnh);
  f_pr(1, 2) = -vn / (rmh * rmh);
  f_pr(2, 0) = -we * cl / rmh - ve / (rnh * rmh * cl * cl);
  f_pr(2, 2) = -ve * tl / (rnh * rnh);
  m.F.block<3, 3>(idx::kAtt, idx::kPos) = f_pr;

  Mat3 f_pv = Mat3::Zero();
  f_pv(0, 1) = 1.0 / rnh;
  f_pv(1, 0) = -1.0 / rmh;
  f_pv(2, 1) = -tl / rnh;
  m.F.block<3, 3>(idx::kAtt, idx::kVel) = f_pv;

  m.F.block<3, 3>(idx::kAtt, idx::kAtt) = -skew(earth.omega_in_n());
  m.F.block<3, 3>(idx::kAtt, idx::kGyroBias) = -c;
  m.F.block<3, 3>(idx::kAtt, idx::kGyroScale) = -c * imu.gyro.asDiagonal();

  m.G.block<3, 3>(idx::kAtt, noise_idx::kGyroWhite) = -c;
  m.G.block<3, 3>(idx::kVel, noise_idx::kAccelWhite) = c;
  m.G.block<3, 3>(idx::kGyroBias, noise_idx::kGyroBias) = Mat3::Identity();
  m.G.block<3, 3>(idx::kAccelBias, noise_idx::kAccelBias) = Mat3::Identity();
  m.G.block<3, 3>(idx::kGyroScale, noise_idx::kGyroScale) = Mat3::Identity();
  m.G.block<3, 3>(idx::kAccelScale, noise_idx::kAccelScale) = Mat3::Identity();
  return m;
}

StateMat congruence(const StateMat& Phi, const StateMat& X) {
  constexpr int kNav = idx::kGyroBias;  // position, velocity, attitude
  constexpr int kSensor = kStateDim - kNav;
  const bool structured =
      Phi.bottomLeftCorner<kSensor, kNav>().isZero(0.0) &&
      Phi.bottomRightCorner<kSensor, kSensor>() ==
          Eigen::Matrix<double, kSensor, kSensor>::Identity();
  if (!structured) return Phi * X * Phi.transpose();

  const Eigen::Matrix<double, kNav, kStateDim> M = Phi.topRows<kNav>() * X;
  StateMat out;
  out.topLeftCorner<kNav, kNav>() = M * Phi.topRows<kNav>().transpose();
  out.topRightCorner<kNav, kSensor>() = M.rightCols<kSensor>();
  out.bottomLeftCorner<kSensor, kNav>() = X.bottomRows<kSensor>() * Phi.topRows<kNav>().transpose();
  out.bottomRightCorner<kSensor, kSensor>() = X.bottomRightCorner<kSensor, kSensor>();
  return out;
}

DiscreteModel discretize(const StateMat& F, const NoiseMat& G, const NoiseVec& q_psd, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("discretize: dt must be positive");
  DiscreteModel d;
  d.Phi = StateMat::Identity() + F * dt;
  const StateMat gqg = G * q_psd.asDiagonal() * G.transpose();
  d.Qd = 0.5 * (congruence(d.Phi, gqg) + gqg) * dt;
  d.Qd = 0.5 * (d.Qd + d.Qd.transpose()).eval();
  return d;
}

}  // namespace dvlnav
