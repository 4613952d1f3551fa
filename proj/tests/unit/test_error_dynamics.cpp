#include <gtest/gtest.h>

#include "dvlnav/error_dynamics.hpp"
#include "dvlnav/eskf.hpp"
#include "test_support.hpp"

using namespace dvlnav;
using dvlnav::tk::random_vec;
using dvlnav::tk::uniform;

namespace {

StateMat expm_series(const StateMat& a) {
  StateMat sum = StateMat::Identity();
  StateMat term = StateMat::Identity();
  for (int k = 1; k < 30; ++k) {
    term = (term * a / k).eval();
    sum += term;
  }
  return sum;
}

struct Linearization {
  NavState nav;
  ImuSample imu;
};

// Near the origin of latitude/longitude the geodetic coordinates carry
// sub-nanometre rounding, which the position columns of the numeric oracle need.
Linearization random_point(bool near_origin = false) {
  Linearization p;
  const double span = near_origin ? 0.02 : 1.2;
  p.nav.pos = Geodetic{uniform(-span, span), uniform(-span, span), uniform(0, 200)};
  p.nav.vel_ned = random_vec(4.0);
  p.nav.c_bn = tk::random_dcm();
  p.imu.gyro = random_vec(0.1);
  p.imu.accel = -p.nav.c_bn.transpose() * earth_model(p.nav.pos, p.nav.vel_ned).gravity_n +
                random_vec(1.0);
  return p;
}

// Estimate built from truth and an error state; sensor states act as the
// residual error of the compensated IMU output.
NavState perturb(const NavState& truth, const StateVec& dx) {
  const EarthQuantities e = earth_model(truth.pos, Vec3::Zero());
  NavState est = truth;
  est.pos.latitude += dx(0) / (e.r_meridian - truth.pos.depth);
  est.pos.longitude +=
      dx(1) / ((e.r_normal - truth.pos.depth) * std::cos(truth.pos.latitude));
  est.pos.depth += dx(2);
  est.vel_ned += dx.segment<3>(idx::kVel);
  est.c_bn = rotation_exp(-Vec3(dx.segment<3>(idx::kAtt))) * truth.c_bn;
  return est;
}

ImuSample perturb(const ImuSample& imu, const StateVec& dx) {
  ImuSample out = imu;
  out.gyro += dx.segment<3>(idx::kGyroBias) +
              imu.gyro.cwiseProduct(dx.segment<3>(idx::kGyroScale));
  out.accel += dx.segment<3>(idx::kAccelBias) +
               imu.accel.cwiseProduct(dx.segment<3>(idx::kAccelScale));
  return out;
}

StateVec nav_error(const NavState& est, const NavState& truth) {
  const EarthQuantities e = earth_model(truth.pos, Vec3::Zero());
  StateVec dx = StateVec::Zero();
  dx(0) = (est.pos.latitude - truth.pos.latitude) * (e.r_meridian - truth.pos.depth);
  dx(1) = (est.pos.longitude - truth.pos.longitude) * (e.r_normal - truth.pos.depth) *
          std::cos(truth.pos.latitude);
  dx(2) = est.pos.depth - truth.pos.depth;
  dx.segment<3>(idx::kVel) = est.vel_ned - truth.vel_ned;
  dx.segment<3>(idx::kAtt) = -rotation_log(est.c_bn * truth.c_bn.transpose());
  return dx;
}

// One-step transition of the nonlinear error, differentiated numerically.
StateMat numeric_transition(const Linearization& p, double dt) {
  ImuSample imu = p.imu;
  imu.time = p.nav.time + dt;
  const NavState truth_next = mechanize(p.nav, imu, dt);
  StateMat J;
  for (int j = 0; j < kStateDim; ++j) {
    static constexpr double kStep[7] = {1.0, 1e-2, 1e-4, 1e-5, 1e-4, 1e-4, 1e-4};
    const double h = kStep[j / 3];
    StateVec d = StateVec::Zero();
    d(j) = h;
    auto step = [&](const StateVec& dx) {
      const NavState est_next = mechanize(perturb(p.nav, dx), perturb(imu, dx), dt);
      StateVec out = nav_error(est_next, truth_next);
      out.tail<12>() = dx.tail<12>();
      return out;
    };
    J.col(j) = (step(d) - step(-d)) / (2.0 * h);
  }
  return J;
}

// Richardson-extrapolated time derivative of the error transition.
StateMat numeric_F(const Linearization& p, double dt) {
  const StateMat d1 = (numeric_transition(p, dt) - StateMat::Identity()) / dt;
  const StateMat d2 = (numeric_transition(p, dt / 2) - StateMat::Identity()) / (dt / 2);
  return 2.0 * d2 - d1;
}

}  // namespace

TEST(BuildFG, StaticGravityCoupling) {
  NavState s;
  s.pos = Geodetic{0.6, 0.1, 5.0};
  s.c_bn = tk::random_dcm();
  ImuSample imu;
  imu.accel = -s.c_bn.transpose() * earth_model(s.pos, Vec3::Zero()).gravity_n;
  const ContinuousModel m = build_FG(s, imu);
  // Estimate minus truth with C_hat = [I - (phi x)] C: d(dv)/dt = (C f) x phi,
  // i.e. -skew(C f) applied to -phi.
  const Mat3 f_vphi = m.F.block<3, 3>(idx::kVel, idx::kAtt);
  EXPECT_LT((f_vphi - skew(s.c_bn * imu.accel)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((f_vphi + skew(-(s.c_bn * imu.accel))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildFG, EarthRateSelfBlockAtEquator) {
  NavState s;
  const ContinuousModel m = build_FG(s, ImuSample{});
  const Mat3 f_pp = m.F.block<3, 3>(idx::kAtt, idx::kAtt);
  EXPECT_EQ(f_pp, -skew(Vec3(wgs84::kEarthRate, 0, 0)));
}

TEST(BuildFG, SensorBlocksAndNoiseMap) {
  const Linearization p = random_point();
  const ContinuousModel m = build_FG(p.nav, p.imu);
  const Mat3& c = p.nav.c_bn;
  EXPECT_EQ(Mat3(m.F.block<3, 3>(idx::kPos, idx::kVel)), Mat3::Identity());
  EXPECT_EQ(Mat3(m.F.block<3, 3>(idx::kVel, idx::kAccelBias)), c);
  EXPECT_EQ(Mat3(m.F.block<3, 3>(idx::kAtt, idx::kGyroBias)), Mat3(-c));
  EXPECT_EQ(Mat3(m.F.block<3, 3>(idx::kAtt, idx::kGyroScale)), Mat3(-c * p.imu.gyro.asDiagonal()));
  EXPECT_EQ(Mat3(m.F.block<3, 3>(idx::kVel, idx::kAccelScale)), Mat3(c * p.imu.accel.asDiagonal()));
  EXPECT_TRUE(m.F.bottomRows<12>().isZero(0.0));
  EXPECT_EQ(Mat3(m.G.block<3, 3>(idx::kAtt, noise_idx::kGyroWhite)), Mat3(-c));
  EXPECT_EQ(Mat3(m.G.block<3, 3>(idx::kVel, noise_idx::kAccelWhite)), c);
  EXPECT_TRUE(m.G.bottomRows<12>().rightCols<12>().isIdentity(0.0));
}

TEST(BuildFG, MatchesNumericDifferentiationOfMechanization) {
  struct Block {
    int r, c;
    const char* name;
    bool dominant;
  };
  const Block blocks[] = {
      {idx::kPos, idx::kVel, "dr<-dv", true},        {idx::kVel, idx::kAtt, "dv<-phi", true},
      {idx::kVel, idx::kAccelBias, "dv<-ba", true},   {idx::kVel, idx::kAccelScale, "dv<-sa", true},
      {idx::kAtt, idx::kGyroBias, "phi<-bg", true},   {idx::kAtt, idx::kGyroScale, "phi<-sg", true},
      {idx::kVel, idx::kVel, "dv<-dv", false},       {idx::kAtt, idx::kAtt, "phi<-phi", false},
      {idx::kAtt, idx::kVel, "phi<-dv", false},       {idx::kPos, idx::kPos, "dr<-dr", false},
      {idx::kVel, idx::kPos, "dv<-dr", false},        {idx::kAtt, idx::kPos, "phi<-dr", false},
  };
  for (int trial = 0; trial < 10; ++trial) {
    const Linearization p = random_point(true);
    const StateMat F = build_FG(p.nav, p.imu).F;
    const StateMat Fn = numeric_F(p, 4e-3);
    for (const Block& b : blocks) {
      const Mat3 a = F.block<3, 3>(b.r, b.c);
      const Mat3 n = Fn.block<3, 3>(b.r, b.c);
      const double err = (a - n).norm();
      if (b.dominant) {
        EXPECT_LT(err / a.norm(), 1e-6) << b.name << " trial " << trial;
      } else {
        // Weak couplings (earth rate, transport rate, gravity gradient) are
        // checked against an absolute floor set by rounding in the oracle.
        EXPECT_LT(err, 2e-8 + 1e-3 * a.norm()) << b.name << " trial " << trial;
      }
    }
  }
}

TEST(Discretize, ZeroDynamics) {
  NoiseMat G = NoiseMat::Random();
  NoiseVec q = NoiseVec::Random().cwiseAbs();
  const double dt = 0.01;
  const DiscreteModel d = discretize(StateMat::Zero(), G, q, dt);
  EXPECT_EQ(d.Phi, StateMat::Identity());
  const StateMat expected = G * q.asDiagonal() * G.transpose() * dt;
  EXPECT_LT((d.Qd - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Discretize, PhiApproachesIdentityLinearly) {
  const Linearization p = random_point();
  const ContinuousModel m = build_FG(p.nav, p.imu);
  const NoiseVec q = NoiseVec::Ones();
  const double a = (discretize(m.F, m.G, q, 1e-2).Phi - StateMat::Identity()).norm();
  const double b = (discretize(m.F, m.G, q, 1e-3).Phi - StateMat::Identity()).norm();
  EXPECT_NEAR(a / b, 10.0, 1e-9);
  EXPECT_THROW(discretize(m.F, m.G, q, 0.0), std::invalid_argument);
}

TEST(Discretize, NilpotentAgainstSeries) {
  // Position <- velocity only: F^2 = 0, so I + F dt is the exact exponential.
  StateMat F = StateMat::Zero();
  F.block<3, 3>(idx::kPos, idx::kVel) = Mat3::Identity();
  const NoiseMat G = NoiseMat::Zero();
  for (double dt : {0.01, 0.1, 1.0}) {
    const DiscreteModel d = discretize(F, G, NoiseVec::Zero(), dt);
    EXPECT_LT((d.Phi - expm_series(F * dt)).cwiseAbs().maxCoeff(), 1e-15);
  }
  // Adding velocity <- attitude gives F^3 = 0: the first-order error is
  // exactly F^2 dt^2 / 2.
  F.block<3, 3>(idx::kVel, idx::kAtt) = skew(Vec3(0, 0, -9.8));
  for (double dt : {0.01, 0.02}) {
    const StateMat err = expm_series(F * dt) - discretize(F, G, NoiseVec::Zero(), dt).Phi;
    EXPECT_LT((err - 0.5 * F * F * dt * dt).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Discretize, QdSymmetricPsd) {
  for (int i = 0; i < 50; ++i) {
    const Linearization p = random_point();
    const ContinuousModel m = build_FG(p.nav, p.imu);
    NoiseVec q = NoiseVec::Random().cwiseAbs() * 1e-6;
    const DiscreteModel d = discretize(m.F, m.G, q, 0.01);
    EXPECT_EQ(d.Qd, d.Qd.transpose());
    EXPECT_TRUE(is_psd(d.Qd, 1e-12));
    EXPECT_TRUE((d.Phi * StateVec::Zero()).isZero(0.0));
  }
}

TEST(Congruence, StructuredMatchesDense) {
  for (int i = 0; i < 50; ++i) {
    const Linearization p = random_point();
    const StateMat Phi = discretize(build_FG(p.nav, p.imu).F, NoiseMat::Zero(), NoiseVec::Zero(),
                                    0.01)
                             .Phi;
    const StateMat X = tk::random_spd_dyn(kStateDim, 1e-6, 1.0);
    const StateMat dense = Phi * X * Phi.transpose();
    EXPECT_LT((congruence(Phi, X) - dense).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Congruence, GeneralPhiFallsBackToDense) {
  const StateMat Phi = StateMat::Random();
  const StateMat X = tk::random_spd_dyn(kStateDim, 0.1, 1.0);
  EXPECT_LT((congruence(Phi, X) - Phi * X * Phi.transpose()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ProcessNoise, ChannelOrder) {
  ProcessNoiseSpec s;
  s.gyro_arw = 1;
  s.accel_vrw = 2;
  s.gyro_bias_rw = 3;
  s.accel_bias_rw = 4;
  s.gyro_scale_rw = 5;
  s.accel_scale_rw = 6;
  const NoiseVec q = s.psd();
  for (int c = 0; c < 6; ++c) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(q(3 * c + k), (c + 1.0) * (c + 1.0));
  }
}
