#include "dvlnav/eskf.hpp"

#include <cmath>
#include <sstream>

namespace dvlnav {

ImuSample ImuCompensation::apply(const ImuSample& raw) const {
  ImuSample out;
  out.time = raw.time;
  out.gyro = (raw.gyro - gyro_bias).cwiseQuotient(Vec3::Ones() + gyro_scale);
  out.accel = (raw.accel - accel_bias).cwiseQuotient(Vec3::Ones() + accel_scale);
  return out;
}

bool is_psd(const StateMat& P, double rel_tol) {
  const double shift = rel_tol * std::abs(P.trace());
  // P + shift*I is positive definite iff min eig(P) > -shift.
  Eigen::LLT<StateMat> llt(P + (shift > 0.0 ? shift : 1e-300) * StateMat::Identity());
  return llt.info() == Eigen::Success;
}

FilterState predict(const FilterState& fs, const StateMat& Phi, const StateMat& Qd) {
  FilterState out = fs;
  out.err.P = congruence(Phi, fs.err.P) + Qd;
  out.err.P = 0.5 * (out.err.P + out.err.P.transpose()).eval();
  out.err.dx = Phi * fs.err.dx;
  if (!is_psd(out.err.P)) {
    std::ostringstream os;
    os << "predicted covariance lost positive semidefiniteness at t=" << fs.nav.time;
    throw CovarianceNotPSD(os.str());
  }
  return out;
}

FilterState update(const FilterState& fs, const Vec3& z, const ObsMat& H, const Mat3& R) {
  const StateMat& P = fs.err.P;
  const GainMat PHt = P * H.transpose();
  Mat3 S = H * PHt + R;
  S = 0.5 * (S + S.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Mat3> es(S, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxInnovationCond) {
    std::ostringstream os;
    os << "innovation covariance is singular at t=" << fs.nav.time << " (eigenvalues " << lo
       << ", " << hi << ")";
    throw SingularInnovation(os.str());
  }

  const GainMat K = S.ldlt().solve(PHt.transpose()).transpose();
  FilterState out = fs;
  const Vec3 residual = z - H * fs.err.dx;
  out.err.dx = fs.err.dx + K * residual;

  const StateMat I_KH = StateMat::Identity() - K * H;
  out.err.P = I_KH * P * I_KH.transpose() + K * R * K.transpose();
  out.err.P = 0.5 * (out.err.P + out.err.P.transpose()).eval();

  out.last_update_time = fs.nav.time;
  out.last_update.innovation = z;
  out.last_update.S = S;
  return out;
}

FilterState feedback(const FilterState& fs) {
  const ErrorState& e = fs.err;
  const Vec3 phi = e.att();
  if (!small_angle_ok(phi)) {
    std::ostringstream os;
    os << "attitude correction of " << phi.norm() << " rad exceeds " << kSmallAngleLimit
       << " rad at t=" << fs.nav.time;
    throw AttitudeResetTooLarge(os.str());
  }

  FilterState out = fs;
  NavState& nav = out.nav;
  const EarthQuantities earth = earth_model(fs.nav.pos, fs.nav.vel_ned);
  const Vec3 dr = e.pos();
  nav.pos.latitude -= dr.x() / (earth.r_meridian - fs.nav.pos.depth);
  nav.pos.longitude = wrap_pi(nav.pos.longitude -
                              dr.y() / ((earth.r_normal - fs.nav.pos.depth) *
                                        std::cos(fs.nav.pos.latitude)));
  nav.pos.depth -= dr.z();
  nav.vel_ned -= e.vel();
  // C_hat = [I - (phi x)] C, so C = [I + (phi x)] C_hat to first order.
  if (!phi.isZero(0.0)) {
    nav.c_bn = orthonormalize((Mat3::Identity() + skew(phi)) * fs.nav.c_bn);
  }

  out.comp.gyro_bias += e.gyro_bias();
  out.comp.accel_bias += e.accel_bias();
  out.comp.gyro_scale += e.gyro_scale();
  out.comp.accel_scale += e.accel_scale();
  out.err.dx.setZero();
  return out;
}

}  // namespace dvlnav
